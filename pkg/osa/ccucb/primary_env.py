from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .log import logger

# 子流标识: 同一个 seed 下按用途拆分, 增加用户不会扰动信道的抽样
STREAM_PRIMARY = 0
STREAM_SENSOR = 1
STREAM_CHOICE = 2

BUFFER_SLOTS = 1024


@dataclass(frozen=True)
class PrimaryNetwork:
    """主网络: N 个独立、平稳的伯努利信道, availability[n] = P(S_{n,t} = 1)"""

    n_channels: int
    availability: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.n_channels < 1:
            raise ValueError("n_channels must be a positive integer")
        if len(self.availability) != self.n_channels:
            raise ValueError(
                f"availability has {len(self.availability)} entries, expected {self.n_channels}"
            )
        for n, mu in enumerate(self.availability):
            if not (0.0 <= mu <= 1.0):
                raise ValueError(f"availability[{n}] = {mu} is outside [0, 1]")

    @classmethod
    def from_availability(cls, availability: Sequence[float]) -> PrimaryNetwork:
        values = tuple(float(mu) for mu in availability)
        return cls(n_channels=len(values), availability=values)

    @property
    def mu(self) -> np.ndarray:
        return np.asarray(self.availability, dtype=np.float64)


@dataclass(frozen=True)
class SlotState:
    slot: int
    # 1 = idle, 0 = busy
    states: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, channel: int) -> int:
        return int(self.states[channel])


class UniformStreams:
    """一组独立的均匀分布子流, 每个子流对应一个信道或一个用户.

    每个子流按 BUFFER_SLOTS 成块抽样, 分块大小不影响序列本身,
    所以同一个 seed 的结果与消费方式无关.
    """

    def __init__(self, seed: int, purpose: int, width: int) -> None:
        if width < 1:
            raise ValueError("stream width must be positive")
        self._gens = [
            np.random.Generator(
                np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(purpose, i)))
            )
            for i in range(width)
        ]
        self._buf = np.empty((width, 0))
        self._pos = 0

    @property
    def width(self) -> int:
        return len(self._gens)

    def _refill(self, at_least: int) -> None:
        size = max(BUFFER_SLOTS, at_least)
        rest = self._buf[:, self._pos:]
        fresh = np.stack([g.random(size) for g in self._gens])
        self._buf = np.concatenate([rest, fresh], axis=1)
        self._pos = 0

    def take(self, count: int) -> np.ndarray:
        """返回 (width, count) 的均匀随机数, 第 j 列对应下一个第 j 个时隙"""
        if self._buf.shape[1] - self._pos < count:
            self._refill(count)
        block = self._buf[:, self._pos:self._pos + count]
        self._pos += count
        return block

    def next(self) -> np.ndarray:
        if self._pos >= self._buf.shape[1]:
            self._refill(1)
        column = self._buf[:, self._pos]
        self._pos += 1
        return column


class ChannelStreams(UniformStreams):
    def __init__(self, seed: int, n_channels: int) -> None:
        super().__init__(seed, STREAM_PRIMARY, n_channels)


RandomSource = Union[ChannelStreams, np.random.Generator]


def _uniforms(rng: RandomSource, n_channels: int, count: int) -> np.ndarray:
    if isinstance(rng, UniformStreams):
        if rng.width != n_channels:
            raise ValueError(f"stream width {rng.width} does not match {n_channels} channels")
        return rng.take(count)
    return rng.random((count, n_channels)).T


def sample_slot(net: PrimaryNetwork, rng: RandomSource, t: int) -> SlotState:
    """抽取时隙 t 的信道状态 S_t, 每个信道独立服从 Bernoulli(mu_n)"""
    u = _uniforms(rng, net.n_channels, 1)[:, 0]
    return SlotState(slot=t, states=(u < net.mu).astype(np.int8))


def sample_slots(net: PrimaryNetwork, rng: RandomSource, start: int, count: int) -> np.ndarray:
    """连续抽取 count 个时隙, 返回 (count, N) 矩阵; 与逐个调用 sample_slot 结果一致"""
    if count < 0:
        raise ValueError("count must be non-negative")
    u = _uniforms(rng, net.n_channels, count)
    logger.debug(f"sampled slots [{start}, {start + count}) on {net.n_channels} channels")
    return (u.T < net.mu).astype(np.int8)


def empirical_availability(trace: Sequence[SlotState], channel: int) -> float:
    if len(trace) == 0:
        raise ValueError("empty trace")
    n_channels = len(trace[0])
    if not (0 <= channel < n_channels):
        raise ValueError("bad channel")
    return float(np.mean([s.states[channel] for s in trace]))
