from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .assignment import rotate_rows

LearningMode = Literal["shared", "individual"]


@dataclass(frozen=True)
class IndexMatrix:
    """B(t): K x N 的 UCB 指数矩阵, 行已按 (k + t) mod K 轮换; 未探索的信道为 +inf"""

    values: np.ndarray
    slot: int


class UcbState:
    """UCB1 统计量.

    shared 模式只有一行 (所有用户共享的信息向量 i_t), individual 模式每个用户一行.
    clock 由调用方每个时隙推进一次.
    """

    def __init__(self, *, n_users: int, n_channels: int, alpha: float, mode: LearningMode) -> None:
        if n_users < 1 or n_channels < 1:
            raise ValueError("n_users and n_channels must be positive")
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        if mode not in ("shared", "individual"):
            raise ValueError(f"unknown learning mode: {mode}")
        self.n_users = n_users
        self.n_channels = n_channels
        self.alpha = float(alpha)
        self.mode: LearningMode = mode
        n_learners = 1 if mode == "shared" else n_users
        self.pulls = np.zeros((n_learners, n_channels), dtype=np.int64)
        self.reward_sums = np.zeros((n_learners, n_channels), dtype=np.int64)
        self.clock = 0

    @property
    def n_learners(self) -> int:
        return self.pulls.shape[0]

    def learner_of(self, user: int) -> int:
        return 0 if self.mode == "shared" else user

    def update(self, learner: int, channel: int, reward: int) -> UcbState:
        self.pulls[learner, channel] += 1
        self.reward_sums[learner, channel] += int(reward)
        return self

    def update_many(self, learners: np.ndarray, channels: np.ndarray, rewards: np.ndarray) -> UcbState:
        # np.add.at: 同一个 (learner, channel) 可以在一次调用里出现多次
        np.add.at(self.pulls, (learners, channels), 1)
        np.add.at(self.reward_sums, (learners, channels), rewards.astype(np.int64))
        return self

    def tick(self) -> None:
        self.clock += 1

    def mean(self, learner: int, channel: int) -> float:
        pulls = self.pulls[learner, channel]
        if pulls == 0:
            raise ValueError(f"channel {channel} has not been sampled by learner {learner}")
        return float(self.reward_sums[learner, channel]) / float(pulls)

    def index(self, learner: int, channel: int, t: int) -> float:
        """B = W + sqrt(alpha * ln(t) / T_n); T_n = 0 时返回 +inf"""
        if t < 1:
            raise ValueError("t must be >= 1")
        pulls = int(self.pulls[learner, channel])
        if pulls == 0:
            return math.inf
        mean = float(self.reward_sums[learner, channel]) / pulls
        return mean + math.sqrt(self.alpha * math.log(t) / pulls)

    def learner_indices(self, t: int) -> np.ndarray:
        """每个学习者一行的指数矩阵 (n_learners x N)"""
        log_t = math.log(max(t, 1))
        pulls = self.pulls
        explored = pulls > 0
        safe = np.where(explored, pulls, 1)
        values = self.reward_sums / safe + np.sqrt(self.alpha * log_t / safe)
        return np.where(explored, values, np.inf)

    def user_indices(self, t: int) -> np.ndarray:
        """未轮换的 K x N 指数矩阵: 第 k 行是用户 k 看到的指数"""
        rows = self.learner_indices(t)
        if self.mode == "shared":
            return np.repeat(rows, self.n_users, axis=0)
        return rows

    def index_matrix(self, t: int) -> IndexMatrix:
        if t < 0:
            raise ValueError("t must be >= 0")
        return IndexMatrix(values=rotate_rows(self.user_indices(t), t), slot=t)

    def total_pulls(self) -> int:
        return int(self.pulls.sum())
