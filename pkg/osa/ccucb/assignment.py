from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .log import logger

# 小于该容差的差值视为平局, 之后按字典序最小的 channel_of 打破
TIE_TOL = 1e-9

ORACLE_MAX_USERS = 6
ORACLE_MAX_CHANNELS = 8


@dataclass(frozen=True)
class Assignment:
    """K 个用户到 N 个信道的单射; channel_of[k] 为用户 k 的信道 (从 0 开始)"""

    channel_of: tuple[int, ...]
    value: float

    def __post_init__(self) -> None:
        if len(set(self.channel_of)) != len(self.channel_of):
            raise ValueError(f"assignment is not injective: {self.channel_of}")


def as_weights(w: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    arr = np.asarray(w, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("weight matrix must be a non-empty K x N matrix")
    k, n = arr.shape
    if k > n:
        raise ValueError("more users than channels")
    if np.any(np.isnan(arr)) or np.any(arr == -np.inf):
        raise ValueError("weight matrix entries must be finite or +inf")
    return arr


def substitute_sentinels(w: np.ndarray) -> np.ndarray:
    """+inf (未探索信道) 替换为 最大有限值 + 1, 使其在匹配中优先被选中"""
    inf = np.isposinf(w)
    if not inf.any():
        return w
    finite = w[~inf]
    top = float(finite.max()) if finite.size else 0.0
    out = w.copy()
    out[inf] = top + 1.0
    return out


def assignment_value(w: np.ndarray, channel_of: Sequence[int]) -> float:
    return float(sum(w[k, c] for k, c in enumerate(channel_of)))


def _kuhn_munkres(cost: list[list[float]]) -> tuple[list[int], list[float], list[float]]:
    """方阵最小代价匹配 (势函数版本, O(n^3)); 返回 row -> col 以及对偶变量 u, v"""
    n = len(cost)
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [math.inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            ui0 = u[i0]
            delta = math.inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        # 沿增广路翻转
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = [-1] * n
    for j in range(1, n + 1):
        row_to_col[p[j] - 1] = j - 1
    return row_to_col, u[1:], v[1:]


def _lexicographic_refine(
    cost: list[list[float]],
    u: list[float],
    v: list[float],
    row_to_col: list[int],
    n_users: int,
    tol: float,
) -> list[int]:
    """在紧边子图 (约化代价为 0) 内找字典序最小的最优匹配.

    任一最优匹配都只使用紧边, 因此依次固定用户 0..K-1, 对每个更小的候选信道
    尝试一条交错路径把原信道让出来即可.
    """
    n = len(cost)
    tight = [[cost[i][j] - u[i] - v[j] <= tol for j in range(n)] for i in range(n)]
    col_owner = [0] * n
    for i, j in enumerate(row_to_col):
        col_owner[j] = i
    fixed = [False] * n

    def reroute(row: int, target: int, seen: list[bool]) -> bool:
        for j in range(n):
            if seen[j] or not tight[row][j]:
                continue
            seen[j] = True
            if j == target:
                row_to_col[row] = j
                col_owner[j] = row
                return True
            nxt = col_owner[j]
            if fixed[nxt]:
                continue
            if reroute(nxt, target, seen):
                row_to_col[row] = j
                col_owner[j] = row
                return True
        return False

    for k in range(n_users):
        current = row_to_col[k]
        fixed[k] = True
        for c in range(current):
            if not tight[k][c] or fixed[col_owner[c]]:
                continue
            seen = [False] * n
            seen[c] = True
            displaced = col_owner[c]
            if reroute(displaced, current, seen):
                row_to_col[k] = c
                col_owner[c] = k
                break
    return row_to_col


def hungarian_solve(w: Sequence[Sequence[float]] | np.ndarray) -> Assignment:
    """最大权单射匹配 (K <= N).

    K x N 的最大化问题转换为 N x N 的最小化: cost = max - w, 补 N - K 行全零,
    补出来的行的分配结果丢弃.
    """
    weights = as_weights(w)
    solved = substitute_sentinels(weights)
    k, n = solved.shape
    top = float(solved.max())
    cost = [[top - float(x) for x in row] for row in solved]
    cost.extend([0.0] * n for _ in range(n - k))
    row_to_col, u, v = _kuhn_munkres(cost)
    tol = TIE_TOL * max(1.0, abs(top), float(np.abs(solved).max()))
    row_to_col = _lexicographic_refine(cost, u, v, row_to_col, k, tol)
    channel_of = tuple(row_to_col[:k])
    return Assignment(channel_of=channel_of, value=assignment_value(weights, channel_of))


def rotate_rows(w: np.ndarray, t: int) -> np.ndarray:
    """行轮换: 第 k 行取原来的第 (k + t) mod K 行"""
    k = w.shape[0]
    return w[(np.arange(k) + t) % k]


def rotate_then_solve(w: Sequence[Sequence[float]] | np.ndarray, t: int) -> Assignment:
    weights = as_weights(w)
    k = weights.shape[0]
    rotated = hungarian_solve(rotate_rows(weights, t))
    channel_of = [0] * k
    for row, channel in enumerate(rotated.channel_of):
        # 轮换后的第 row 行属于原用户 (row + t) mod K
        channel_of[(row + t) % k] = channel
    return Assignment(channel_of=tuple(channel_of), value=assignment_value(weights, channel_of))


def top_k_channels(row: Sequence[float] | np.ndarray, k: int) -> tuple[int, ...]:
    """公共指数最高的 K 个信道, 按指数降序; 相同指数取编号小的"""
    values = np.asarray(row, dtype=np.float64)
    if k > len(values):
        raise ValueError("more users than channels")
    order = np.argsort(-values, kind="stable")
    return tuple(int(c) for c in order[:k])


def round_robin_assign(ranked_channels: Sequence[int], user: int, t: int) -> int:
    k = len(ranked_channels)
    if len(set(ranked_channels)) != k:
        raise ValueError(f"duplicate channels in ranking: {tuple(ranked_channels)}")
    if not (0 <= user < k):
        raise IndexError(f"user {user} out of range [0, {k})")
    return int(ranked_channels[(user + t) % k])


def brute_force_assign(w: Sequence[Sequence[float]] | np.ndarray) -> Assignment:
    weights = as_weights(w)
    k, n = weights.shape
    if k > ORACLE_MAX_USERS or n > ORACLE_MAX_CHANNELS:
        raise ValueError("oracle size limit")
    solved = substitute_sentinels(weights)
    tol = TIE_TOL * max(1.0, float(np.abs(solved).max()))
    # permutations 按字典序枚举, 取第一个达到最优值 (容差内) 的方案
    candidates = list(itertools.permutations(range(n), k))
    values = [assignment_value(solved, c) for c in candidates]
    best = max(values)
    for channel_of, value in zip(candidates, values):
        if value >= best - tol:
            return Assignment(channel_of=channel_of, value=assignment_value(weights, channel_of))
    raise AssertionError("unreachable")


def optimal_channel_sets(w: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    """(K, N) 布尔矩阵: 信道 n 是否出现在用户 k 的某个最优分配中"""
    weights = as_weights(w)
    k, n = weights.shape
    best = hungarian_solve(weights).value
    tol = TIE_TOL * max(1.0, abs(best)) * k
    mask = np.zeros((k, n), dtype=bool)
    for user in range(k):
        rest_users = [i for i in range(k) if i != user]
        for channel in range(n):
            if not rest_users:
                value = weights[user, channel]
            else:
                rest = np.delete(weights[rest_users], channel, axis=1)
                value = weights[user, channel] + hungarian_solve(rest).value
            mask[user, channel] = value >= best - tol
    logger.debug(f"optimal channel sets: {[tuple(np.flatnonzero(r)) for r in mask]}")
    return mask


def is_symmetric(w: Sequence[Sequence[float]] | np.ndarray) -> bool:
    """对称网络: 所有用户看到的权重行相同"""
    weights = np.asarray(w, dtype=np.float64)
    return bool(np.all(weights == weights[0]))
