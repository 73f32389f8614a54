from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .assignment import as_weights, hungarian_solve, is_symmetric, optimal_channel_sets, top_k_channels
from .policy import RunTrace

PACKET_SIZE = 1000


@dataclass(frozen=True)
class RegretTrace:
    """累计后悔值; regret[t] 为前 t 个时隙 (0..t-1) 的累计值, regret[0] = 0"""

    regret: np.ndarray  # (horizon + 1,) 按用户平均
    per_user: np.ndarray  # (horizon + 1, K)
    optimal_value: float

    @property
    def horizon(self) -> int:
        return len(self.regret) - 1


@dataclass(frozen=True)
class BoundParams:
    weights: np.ndarray  # lambda_n, 对称网络的公共行
    optimal_set: tuple[int, ...]
    lambda_bar_star: float
    gaps: dict[int, float]  # 次优信道 n -> Delta_n
    alpha: float
    n_users: int

    @classmethod
    def from_weights(cls, weights: Sequence[Sequence[float]] | np.ndarray, alpha: float) -> BoundParams:
        w = as_weights(weights)
        if not is_symmetric(w):
            raise ValueError("the regret bound requires a symmetric weight matrix")
        k = w.shape[0]
        row = w[0]
        optimal = tuple(sorted(top_k_channels(row, k)))
        lambda_bar_star = float(row[list(optimal)].sum()) / k
        floor = float(row[list(optimal)].min())
        gaps = {n: floor - float(row[n]) for n in range(len(row)) if n not in optimal}
        return cls(
            weights=row.copy(),
            optimal_set=optimal,
            lambda_bar_star=lambda_bar_star,
            gaps=gaps,
            alpha=float(alpha),
            n_users=k,
        )

    def coefficient(self) -> float:
        """sum_{n not in D*} 4 alpha (lambda_bar* - lambda_n) / (K Delta_n^2)"""
        total = 0.0
        for n, gap in self.gaps.items():
            if gap <= 0.0:
                raise ValueError("degenerate gap")
            total += 4.0 * self.alpha * (self.lambda_bar_star - float(self.weights[n])) / (self.n_users * gap**2)
        return total


@dataclass(frozen=True)
class ThroughputTrace:
    ntp: np.ndarray  # (horizon,) 每个时隙网络成功传输的平均字节数
    se: np.ndarray
    packet_size: int
    n_users: int


def optimal_value(lambda_true: Sequence[Sequence[float]] | np.ndarray) -> float:
    return hungarian_solve(lambda_true).value


def cumulative_regret(
    trace: RunTrace,
    lambda_true: Sequence[Sequence[float]] | np.ndarray,
    *,
    realized: bool = False,
) -> RegretTrace:
    """伪后悔值: 每个时隙每个用户的增量为 V*/K - E[r]; realized=True 时用实际回报代替期望"""
    w = as_weights(lambda_true)
    k = w.shape[0]
    if trace.n_users != k:
        raise ValueError(f"trace has {trace.n_users} users, weight matrix has {k}")
    if trace.horizon and int(trace.channels.max()) >= w.shape[1]:
        raise ValueError("trace refers to channels outside the weight matrix")
    v_star = optimal_value(w)
    if realized:
        gained = trace.rewards.astype(np.float64)
    else:
        users = np.arange(k)
        gained = w[users, trace.channels] * ~trace.su_collision
    per_slot = v_star / k - gained
    per_user = np.zeros((trace.horizon + 1, k))
    np.cumsum(per_slot, axis=0, out=per_user[1:])
    return RegretTrace(regret=per_user.mean(axis=1), per_user=per_user, optimal_value=v_star)


def theorem1_bound(params: BoundParams, t: int) -> float:
    """对称网络的对数上界, 忽略 o(ln t) 项"""
    if params.alpha <= 1.0:
        raise ValueError("the regret bound requires alpha > 1")
    return params.coefficient() * math.log(t + params.n_users - 1)


def suboptimal_pulls_bound(gap: float, alpha: float, t: int, n_users: int) -> float:
    """次优信道被检测次数的上界 4 alpha / Delta^2 * ln(t + K - 1)"""
    if gap <= 0.0:
        raise ValueError("degenerate gap")
    return 4.0 * alpha / gap**2 * math.log(t + n_users - 1)


def regret_from_pulls(params: BoundParams, pulls: Sequence[int] | np.ndarray) -> float:
    """由次优信道的检测次数给出的后悔值上界 sum (lambda_bar* - lambda_n) T_n / K"""
    counts = np.asarray(pulls)
    return float(
        sum((params.lambda_bar_star - params.weights[n]) * counts[n] for n in params.gaps) / params.n_users
    )


def initial_exploration_ok(pulls: np.ndarray, n_users: int) -> bool:
    """每个信道至少被检测了 K 次"""
    return bool(np.all(np.asarray(pulls) >= n_users))


def optimal_set_fraction(
    trace: RunTrace,
    lambda_true: Sequence[Sequence[float]] | np.ndarray,
    *,
    optimal_sets: np.ndarray | None = None,
) -> np.ndarray:
    """累计比例: 前 t 个时隙中用户处于各自最优信道集合的比例; 下标 0 为 0"""
    mask = optimal_channel_sets(lambda_true) if optimal_sets is None else optimal_sets
    k = trace.n_users
    users = np.arange(k)
    hits = mask[users, trace.channels].sum(axis=1)
    out = np.zeros(trace.horizon + 1)
    slots = np.arange(1, trace.horizon + 1)
    out[1:] = np.cumsum(hits) / (slots * k)
    return out


def slot_throughput(trace: RunTrace, packet_size: int = PACKET_SIZE) -> np.ndarray:
    return trace.rewards.sum(axis=1).astype(np.float64) * packet_size


def mean_and_se(per_run: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """按运行 (第 0 维) 求均值和标准误; 只有一次运行时标准误为 0"""
    n = per_run.shape[0]
    mean = per_run.mean(axis=0)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, per_run.std(axis=0, ddof=1) / math.sqrt(n)


def network_throughput(traces: Sequence[RunTrace], packet_size: int = PACKET_SIZE) -> ThroughputTrace:
    if not traces:
        raise ValueError("no traces")
    ntp, se = mean_and_se(np.stack([slot_throughput(tr, packet_size) for tr in traces]))
    return ThroughputTrace(
        ntp=ntp,
        se=se,
        packet_size=packet_size,
        n_users=traces[0].n_users,
    )


def event_rate(flags: np.ndarray) -> np.ndarray:
    """累计事件率: 下标 t 为前 t 个时隙中 (用户, 时隙) 事件的比例"""
    horizon, k = flags.shape
    out = np.zeros(horizon + 1)
    out[1:] = np.cumsum(flags.sum(axis=1)) / (np.arange(1, horizon + 1) * k)
    return out
