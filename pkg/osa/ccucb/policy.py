from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np

from .assignment import Assignment, is_symmetric, rotate_then_solve, round_robin_assign, top_k_channels
from .bandit import LearningMode, UcbState
from .environment import Environment
from .log import logger
from .primary_env import STREAM_CHOICE, UniformStreams

PolicyKind = Literal["cc_ucb1", "random", "individual_ucb", "cooperative_ucb_nocoord"]
Coordination = Literal["hungarian", "round_robin"]
SelectionRule = Literal["paper_literal", "proportional_to_index"]
Sharing = Literal["block", "slot"]

POLICY_KINDS = ("cc_ucb1", "random", "individual_ucb", "cooperative_ucb_nocoord")
BASELINE_KINDS = ("random", "individual_ucb", "cooperative_ucb_nocoord")
COORDINATIONS = ("hungarian", "round_robin")
SELECTION_RULES = ("paper_literal", "proportional_to_index")
SHARINGS = ("block", "slot")

WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class PolicyConfig:
    kind: PolicyKind = "cc_ucb1"
    coordination: Coordination = "hungarian"
    r_period: int = 1  # R: 1 = 异构网络, K = 同构网络
    alpha: float = 1.1
    selection_rule: SelectionRule = "proportional_to_index"
    sharing: Sharing = "block"

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind: {self.kind}")
        if self.coordination not in COORDINATIONS:
            raise ValueError(f"unknown coordination: {self.coordination}")
        if self.selection_rule not in SELECTION_RULES:
            raise ValueError(f"unknown selection rule: {self.selection_rule}")
        if self.sharing not in SHARINGS:
            raise ValueError(f"unknown sharing mode: {self.sharing}")
        if self.r_period < 1:
            raise ValueError("r_period must be a positive integer")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    def validate(self, n_users: int) -> PolicyConfig:
        if self.kind != "cc_ucb1":
            return self
        if self.r_period not in (1, n_users):
            raise ValueError(f"r_period must be 1 or K={n_users}, got {self.r_period}")
        if self.coordination == "round_robin" and self.r_period != n_users:
            raise ValueError("round_robin coordination requires r_period = K")
        return self

    def learning_mode(self, n_users: int) -> LearningMode:
        if self.kind == "cooperative_ucb_nocoord":
            return "shared"
        if self.kind == "cc_ucb1" and self.r_period == n_users:
            return "shared"
        return "individual"

    def replace(self, **changes) -> PolicyConfig:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SlotOutcome:
    """一个时隙内每个用户的结果 (长度 K 的数组)"""

    slot: int
    channels: np.ndarray
    observations: np.ndarray
    transmitted: np.ndarray
    rewards: np.ndarray
    su_collision: np.ndarray
    pu_interference: np.ndarray

    @property
    def ack(self) -> np.ndarray:
        # ACK 当且仅当传输成功; 其余情况 (主用户干扰、次用户碰撞) 为 NACK
        return self.rewards == 1


def resolve_slot(
    t: int,
    channels: np.ndarray,
    true_states: np.ndarray,
    observations: np.ndarray,
    n_channels: int,
) -> SlotOutcome:
    transmitted = observations == 1
    counts = np.bincount(channels[transmitted], minlength=n_channels)
    su_collision = transmitted & (counts[channels] > 1)
    pu_interference = transmitted & (true_states == 0)
    rewards = (true_states * observations * ~su_collision).astype(np.int8)
    return SlotOutcome(
        slot=t,
        channels=channels,
        observations=observations,
        transmitted=transmitted,
        rewards=rewards,
        su_collision=su_collision,
        pu_interference=pu_interference,
    )


def selection_weights(indices: np.ndarray, rule: SelectionRule) -> np.ndarray:
    """C2/C3 的选择概率, 每行归一化.

    paper_literal: 正比于 1 - B, 下限截断为 WEIGHT_FLOOR (B 可能大于 1).
    proportional_to_index: 正比于 B; 存在 +inf 时在未探索信道中均匀选择.
    """
    values = np.atleast_2d(np.asarray(indices, dtype=np.float64))
    if rule == "paper_literal":
        weights = np.maximum(1.0 - values, WEIGHT_FLOOR)
    elif rule == "proportional_to_index":
        unexplored = np.isposinf(values)
        forced = unexplored.any(axis=1, keepdims=True)
        finite = np.where(unexplored, 0.0, values)
        weights = np.where(forced, unexplored.astype(np.float64), np.maximum(finite, WEIGHT_FLOOR))
    else:
        raise ValueError(f"unknown selection rule: {rule}")
    weights = weights / weights.sum(axis=1, keepdims=True)
    return weights if np.ndim(indices) > 1 else weights[0]


class Policy:
    """一个次网络策略; 每个时隙调用一次 step(t), t 从 0 开始连续递增"""

    def __init__(self, cfg: PolicyConfig, env: Environment) -> None:
        self.cfg = cfg.validate(env.n_users)
        self.env = env
        self.n_users = env.n_users
        self.n_channels = env.n_channels
        self._users = np.arange(self.n_users)
        if env.n_users > env.n_channels:
            raise ValueError("more users than channels")

    def _observe(self, t: int, channels: np.ndarray) -> SlotOutcome:
        true_states, observations = self.env.step(t, channels)
        return resolve_slot(t, channels, true_states, observations, self.n_channels)

    def step(self, t: int) -> SlotOutcome:
        raise NotImplementedError


class CcUcb1Policy(Policy):
    """联合学习-协调策略 CC-UCB1(R, alpha).

    每 R 个时隙: 计算 B(t) 并求协调结果; 每个时隙: 检测并在空闲时接入;
    R 块结束 (或 sharing = slot 时每个时隙结束) 共享回报.
    """

    def __init__(self, cfg: PolicyConfig, env: Environment) -> None:
        super().__init__(cfg, env)
        if self.cfg.kind != "cc_ucb1":
            raise ValueError(f"CcUcb1Policy cannot run kind {self.cfg.kind}")
        k = self.n_users
        self.state = UcbState(
            n_users=k,
            n_channels=self.n_channels,
            alpha=self.cfg.alpha,
            mode=self.cfg.learning_mode(k),
        )
        self._r = self.cfg.r_period
        self._block_start = 0
        self._block: np.ndarray = self._users.copy()
        self._ranked: tuple[int, ...] = tuple(range(k))
        self._pending: list[tuple[np.ndarray, np.ndarray]] = []
        self.last_assignment: Assignment | None = None
        _advise(self.cfg, env)

    def _plan(self, t: int) -> None:
        indices = self.state.user_indices(t)
        if self.cfg.coordination == "round_robin":
            # 对称网络: 各行相同, 取公共指数最高的 K 个信道
            self._ranked = top_k_channels(indices[0], self.n_users)
            logger.debug(f"slot {t}: round robin ranking {self._ranked}")
        else:
            self.last_assignment = rotate_then_solve(indices, t)
            self._block = np.asarray(self.last_assignment.channel_of, dtype=np.int64)
            logger.debug(f"slot {t}: hungarian assignment {self.last_assignment.channel_of}")
        self._block_start = t

    def channels_for(self, t: int) -> np.ndarray:
        if self.cfg.coordination == "round_robin":
            return np.array(
                [round_robin_assign(self._ranked, k, t) for k in range(self.n_users)], dtype=np.int64
            )
        if self._r == 1:
            return self._block
        # R = K: 每个用户在块内轮流使用 K 个分配到的信道
        offset = t - self._block_start
        return self._block[(self._users + offset) % self.n_users]

    def _share(self) -> None:
        if not self._pending:
            return
        channels = np.concatenate([c for c, _ in self._pending])
        rewards = np.concatenate([r for _, r in self._pending])
        if self.state.mode == "shared":
            learners = np.zeros(len(channels), dtype=np.int64)
        else:
            learners = np.tile(self._users, len(self._pending))
        self.state.update_many(learners, channels, rewards)
        self._pending.clear()

    def step(self, t: int) -> SlotOutcome:
        if t % self._r == 0:
            self._plan(t)
        outcome = self._observe(t, self.channels_for(t))
        self._pending.append((outcome.channels, outcome.rewards))
        if self.cfg.sharing == "slot" or t % self._r == self._r - 1:
            self._share()
        self.state.tick()
        return outcome


class BaselinePolicy(Policy):
    """无协调的对照方案: C1 随机, C2 个体学习, C3 共享回报的学习"""

    def __init__(self, cfg: PolicyConfig, env: Environment, *, seed: int) -> None:
        super().__init__(cfg, env)
        if self.cfg.kind not in BASELINE_KINDS:
            raise ValueError(f"BaselinePolicy cannot run kind {self.cfg.kind}")
        self._choices = UniformStreams(seed, STREAM_CHOICE, self.n_users)
        self.state: UcbState | None = None
        if self.cfg.kind != "random":
            self.state = UcbState(
                n_users=self.n_users,
                n_channels=self.n_channels,
                alpha=self.cfg.alpha,
                mode=self.cfg.learning_mode(self.n_users),
            )
            logger.debug(f"{self.cfg.kind}: channel selection rule {self.cfg.selection_rule}")

    def choose(self, t: int) -> np.ndarray:
        u = self._choices.next()
        if self.state is None:
            return np.minimum((u * self.n_channels).astype(np.int64), self.n_channels - 1)
        probs = selection_weights(self.state.user_indices(t), self.cfg.selection_rule)
        cumulative = np.cumsum(probs, axis=1)
        picks = (cumulative < u[:, np.newaxis]).sum(axis=1)
        return np.minimum(picks, self.n_channels - 1).astype(np.int64)

    def step(self, t: int) -> SlotOutcome:
        outcome = self._observe(t, self.choose(t))
        if self.state is not None:
            learners = np.zeros(self.n_users, dtype=np.int64) if self.state.mode == "shared" else self._users
            self.state.update_many(learners, outcome.channels, outcome.rewards)
            self.state.tick()
        return outcome


def selection_advisory(cfg: PolicyConfig) -> Optional[str]:
    """C2/C3 的选择规则说明; 两种规则都会报告, 其它策略返回 None"""
    if cfg.kind not in ("individual_ucb", "cooperative_ucb_nocoord"):
        return None
    if cfg.selection_rule == "paper_literal":
        message = (
            "paper_literal selection weights are proportional to 1 - B and are clamped at "
            f"{WEIGHT_FLOOR}; they favour channels with low indices"
        )
    else:
        message = (
            "proportional_to_index replaces the 1 - B selection weights: channels are drawn "
            "proportionally to B (set selection_rule: paper_literal for the literal rule)"
        )
    logger.warning(f"{cfg.kind}: {message}")
    return message


def _advise(cfg: PolicyConfig, env: Environment) -> None:
    if cfg.alpha <= 1.0:
        logger.warning(f"alpha = {cfg.alpha} does not satisfy the alpha > 1 condition of the regret bound")
    symmetric = is_symmetric(env.weights)
    if not symmetric and cfg.alpha < env.n_users:
        logger.warning(
            f"alpha = {cfg.alpha} < K = {env.n_users} on a non-symmetric network; "
            "order-optimality is only guaranteed for alpha >= K"
        )
    if not symmetric and cfg.coordination == "round_robin":
        logger.warning("round_robin coordination on a non-symmetric network may not reach the optimal assignment")


AnyPolicy = Union[CcUcb1Policy, BaselinePolicy]


def make_policy(cfg: PolicyConfig, env: Environment, *, seed: int) -> AnyPolicy:
    if cfg.kind == "cc_ucb1":
        return CcUcb1Policy(cfg, env)
    return BaselinePolicy(cfg, env, seed=seed)


@dataclass
class RunTrace:
    """一次运行的逐时隙记录, 形状均为 (horizon, K)"""

    channels: np.ndarray
    rewards: np.ndarray
    transmitted: np.ndarray
    su_collision: np.ndarray
    pu_interference: np.ndarray

    @classmethod
    def empty(cls, horizon: int, n_users: int) -> RunTrace:
        shape = (horizon, n_users)
        return cls(
            channels=np.zeros(shape, dtype=np.int16),
            rewards=np.zeros(shape, dtype=np.int8),
            transmitted=np.zeros(shape, dtype=bool),
            su_collision=np.zeros(shape, dtype=bool),
            pu_interference=np.zeros(shape, dtype=bool),
        )

    @property
    def horizon(self) -> int:
        return self.channels.shape[0]

    @property
    def n_users(self) -> int:
        return self.channels.shape[1]

    def record(self, t: int, outcome: SlotOutcome) -> None:
        self.channels[t] = outcome.channels
        self.rewards[t] = outcome.rewards
        self.transmitted[t] = outcome.transmitted
        self.su_collision[t] = outcome.su_collision
        self.pu_interference[t] = outcome.pu_interference


def run_policy(policy: Policy, horizon: int) -> RunTrace:
    trace = RunTrace.empty(horizon, policy.n_users)
    for t in range(horizon):
        trace.record(t, policy.step(t))
    return trace
