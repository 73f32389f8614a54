from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .primary_env import PrimaryNetwork

ProbabilityLike = Union[float, np.ndarray, list]


def _probability_matrix(value: ProbabilityLike, shape: tuple[int, int], name: str) -> np.ndarray:
    # 标量广播到所有 (k, n)
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(shape, float(arr))
    if arr.shape != shape:
        raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} entries must be within [0, 1]")
    return arr


@dataclass(frozen=True)
class SensorProfile:
    """每个次用户在每个信道上的检测误差: 虚警 epsilon, 漏检 delta (均为 K x N)"""

    false_alarm: np.ndarray
    miss_detection: np.ndarray

    def __post_init__(self) -> None:
        fa = np.asarray(self.false_alarm, dtype=np.float64)
        if fa.ndim != 2:
            raise ValueError("false_alarm must be a K x N matrix")
        object.__setattr__(self, "false_alarm", _probability_matrix(fa, fa.shape, "false_alarm"))
        object.__setattr__(
            self, "miss_detection", _probability_matrix(self.miss_detection, fa.shape, "miss_detection")
        )

    @classmethod
    def broadcast(
        cls,
        *,
        n_users: int,
        n_channels: int,
        false_alarm: ProbabilityLike = 0.0,
        miss_detection: ProbabilityLike = 0.0,
    ) -> SensorProfile:
        shape = (n_users, n_channels)
        return cls(
            false_alarm=_probability_matrix(false_alarm, shape, "false_alarm"),
            miss_detection=_probability_matrix(miss_detection, shape, "miss_detection"),
        )

    @property
    def n_users(self) -> int:
        return self.false_alarm.shape[0]

    @property
    def n_channels(self) -> int:
        return self.false_alarm.shape[1]

    def _check(self, user: int, channel: int) -> None:
        if not (0 <= user < self.n_users):
            raise IndexError(f"user {user} out of range [0, {self.n_users})")
        if not (0 <= channel < self.n_channels):
            raise IndexError(f"channel {channel} out of range [0, {self.n_channels})")


@dataclass(frozen=True)
class Observation:
    # 1 = 检测为空闲
    value: int

    def __post_init__(self) -> None:
        if self.value not in (0, 1):
            raise ValueError(f"observation must be binary, got {self.value}")

    def __int__(self) -> int:
        return self.value


def _detect(state: np.ndarray, u: np.ndarray, eps: np.ndarray, delta: np.ndarray) -> np.ndarray:
    return np.where(state == 1, u >= eps, u < delta).astype(np.int8)


def sense(
    profile: SensorProfile,
    user: int,
    channel: int,
    true_state: int,
    rng: np.random.Generator,
) -> Observation:
    profile._check(user, channel)
    u = rng.random()
    if true_state == 1:
        return Observation(0 if u < profile.false_alarm[user, channel] else 1)
    return Observation(1 if u < profile.miss_detection[user, channel] else 0)


def sense_many(
    profile: SensorProfile,
    channels: np.ndarray,
    true_states: np.ndarray,
    u: np.ndarray,
) -> np.ndarray:
    """所有用户同时检测: 第 k 个用户检测 channels[k], u[k] 来自该用户自己的子流"""
    users = np.arange(len(channels))
    return _detect(
        true_states,
        u,
        profile.false_alarm[users, channels],
        profile.miss_detection[users, channels],
    )


def reward(true_state: int, observation: Union[Observation, int]) -> int:
    # r = S * X: 只有信道空闲且被检测为空闲时才有回报
    return int(true_state) * int(observation)


def expected_reward(
    mu: Union[float, np.ndarray],
    epsilon: Union[float, np.ndarray],
) -> Union[float, np.ndarray]:
    """E[r] = (1 - epsilon) * mu; 数组输入按 numpy 规则广播"""
    return (1.0 - epsilon) * mu


def weight_matrix(net: PrimaryNetwork, profile: SensorProfile) -> np.ndarray:
    """真实权重矩阵 lambda[k, n] = (1 - epsilon[k, n]) * mu_n"""
    if profile.n_channels != net.n_channels:
        raise ValueError(
            f"sensor profile covers {profile.n_channels} channels, network has {net.n_channels}"
        )
    return expected_reward(net.mu[np.newaxis, :], profile.false_alarm)
