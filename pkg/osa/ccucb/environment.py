from __future__ import annotations

from typing import Protocol

import numpy as np

from .primary_env import (
    STREAM_SENSOR,
    ChannelStreams,
    PrimaryNetwork,
    UniformStreams,
    sample_slot,
)
from .sensing import SensorProfile, sense_many, weight_matrix


class Environment(Protocol):
    """策略引擎看到的环境: 给定每个用户选的信道, 返回真实状态和检测结果"""

    n_users: int
    n_channels: int
    weights: np.ndarray

    def step(self, t: int, channels: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...


class OsaEnvironment:
    """主网络 + 不完美检测器"""

    def __init__(self, *, network: PrimaryNetwork, sensors: SensorProfile, seed: int) -> None:
        if sensors.n_channels != network.n_channels:
            raise ValueError("sensor profile and network disagree on the number of channels")
        self.network = network
        self.sensors = sensors
        self.n_users = sensors.n_users
        self.n_channels = network.n_channels
        self.weights = weight_matrix(network, sensors)
        self._channel_streams = ChannelStreams(seed, network.n_channels)
        self._sensor_streams = UniformStreams(seed, STREAM_SENSOR, sensors.n_users)

    def step(self, t: int, channels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        slot = sample_slot(self.network, self._channel_streams, t)
        true_states = slot.states[channels]
        observations = sense_many(self.sensors, channels, true_states, self._sensor_streams.next())
        return true_states, observations


class BernoulliEnvironment:
    """抽象伯努利模式: 用户 k 在信道 n 上观察到的状态服从 Bernoulli(lambda[k, n]), 检测无误差"""

    def __init__(self, *, weights: np.ndarray, seed: int) -> None:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim != 2:
            raise ValueError("weights must be a K x N matrix")
        if np.any(weights < 0.0) or np.any(weights > 1.0):
            raise ValueError("weights must be probabilities in [0, 1]")
        self.weights = weights
        self.n_users, self.n_channels = weights.shape
        self._streams = UniformStreams(seed, STREAM_SENSOR, self.n_users)

    def step(self, t: int, channels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        users = np.arange(self.n_users)
        true_states = (self._streams.next() < self.weights[users, channels]).astype(np.int8)
        return true_states, true_states.copy()
