from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Union

import numpy as np
import yaml

from .environment import BernoulliEnvironment, Environment, OsaEnvironment
from .log import logger
from .policy import PolicyConfig
from .primary_env import PrimaryNetwork
from .sensing import SensorProfile, weight_matrix

# 桌面规模默认值; 完整规模通过 full_scale() 切换
DEFAULT_HORIZON = 100_000
DEFAULT_RUNS = 30
DEFAULT_STRIDE = 100
DEFAULT_TAIL = 5000
FULL_HORIZON = 1_000_000
FULL_THROUGHPUT_RUNS = 1000

PACKET_SIZE = 1000

SCENARIO1_ROW = (0.1, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
SCENARIO2_LAST_ROW = (0.1, 0.1, 0.2, 0.3, 0.4, 0.7, 0.9, 0.7, 0.7, 0.6)
THROUGHPUT_THETA = (0.1, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


class ScenarioError(ValueError):
    """场景配置错误, 消息中带字段路径"""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


ProbabilitySpec = Union[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str
    n_channels: int
    n_users: int
    policy: PolicyConfig
    availability: Optional[tuple[float, ...]] = None
    weights: Optional[np.ndarray] = None
    false_alarm: ProbabilitySpec = 0.0
    miss_detection: ProbabilitySpec = 0.0
    horizon: int = DEFAULT_HORIZON
    n_runs: int = DEFAULT_RUNS
    base_seed: int = 0
    output: Optional[Path] = None
    stride: int = DEFAULT_STRIDE
    packet_size: int = PACKET_SIZE
    tail_window: int = DEFAULT_TAIL
    full_runs: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_users < 1:
            raise ScenarioError("users", "must be a positive integer")
        if self.n_users > self.n_channels:
            raise ScenarioError("users", f"K={self.n_users} exceeds N={self.n_channels} channels")
        if (self.availability is None) == (self.weights is None):
            raise ScenarioError("network", "give exactly one of network.availability or weights")
        if self.weights is not None and np.shape(self.weights) != (self.n_users, self.n_channels):
            raise ScenarioError(
                "weights", f"shape {np.shape(self.weights)} does not match K={self.n_users}, N={self.n_channels}"
            )
        if self.availability is not None and len(self.availability) != self.n_channels:
            raise ScenarioError(
                "network.availability", f"{len(self.availability)} entries for N={self.n_channels} channels"
            )
        if self.horizon < 1:
            raise ScenarioError("run.horizon", "must be >= 1")
        if self.n_runs < 1:
            raise ScenarioError("run.runs", "must be >= 1")
        if self.stride < 1:
            raise ScenarioError("run.stride", "must be >= 1")
        if self.packet_size < 1:
            raise ScenarioError("run.packet_size", "must be >= 1")
        if self.tail_window < 1:
            raise ScenarioError("run.tail_window", "must be >= 1")
        try:
            self.policy.validate(self.n_users)
        except ValueError as e:
            raise ScenarioError("policy", str(e)) from e
        # 提前构造一次, 把维度和取值范围的错误挡在加载阶段
        self.true_weights()

    @property
    def direct(self) -> bool:
        return self.weights is not None

    def network(self) -> PrimaryNetwork:
        if self.availability is None:
            raise ValueError(f"scenario {self.name} has no primary network (direct weights)")
        return PrimaryNetwork.from_availability(self.availability)

    def sensors(self) -> SensorProfile:
        try:
            return SensorProfile.broadcast(
                n_users=self.n_users,
                n_channels=self.n_channels,
                false_alarm=self.false_alarm,
                miss_detection=self.miss_detection,
            )
        except ValueError as e:
            raise ScenarioError("sensing", str(e)) from e

    def true_weights(self) -> np.ndarray:
        if self.weights is not None:
            return np.asarray(self.weights, dtype=np.float64)
        try:
            network = self.network()
        except ValueError as e:
            raise ScenarioError("network.availability", str(e)) from e
        return weight_matrix(network, self.sensors())

    def environment(self, seed: int) -> Environment:
        if self.weights is not None:
            return BernoulliEnvironment(weights=self.true_weights(), seed=seed)
        return OsaEnvironment(network=self.network(), sensors=self.sensors(), seed=seed)

    def replace(self, **changes: Any) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)

    def with_users(self, n_users: int) -> ScenarioConfig:
        """改变用户数 (仅主网络模式); R = K 的策略跟随新的 K"""
        if self.direct:
            raise ScenarioError("users", "cannot change K of a direct weight matrix")
        policy = self.policy
        if policy.kind == "cc_ucb1" and policy.r_period == self.n_users:
            policy = policy.replace(r_period=n_users)
        return self.replace(n_users=n_users, policy=policy)

    def full_scale(self) -> ScenarioConfig:
        return self.replace(horizon=FULL_HORIZON, n_runs=self.full_runs or DEFAULT_RUNS)


def _scenario1(name: str, policy: PolicyConfig) -> ScenarioConfig:
    return ScenarioConfig(
        name=name,
        n_channels=10,
        n_users=3,
        weights=np.array([SCENARIO1_ROW] * 3),
        policy=policy,
    )


def _throughput(name: str, policy: PolicyConfig) -> ScenarioConfig:
    return ScenarioConfig(
        name=name,
        n_channels=10,
        n_users=4,
        availability=THROUGHPUT_THETA,
        false_alarm=0.2,
        # 漏检概率未给定, 取 0.1; 漏检不影响回报, 只体现在主用户干扰率上
        miss_detection=0.1,
        policy=policy,
        horizon=20_000,
        n_runs=200,
        full_runs=FULL_THROUGHPUT_RUNS,
    )


PRESETS: dict[str, Callable[[], ScenarioConfig]] = {
    "scenario1": lambda: _scenario1(
        "scenario1", PolicyConfig(coordination="round_robin", r_period=3)
    ),
    "scenario1-hungarian": lambda: _scenario1(
        "scenario1-hungarian", PolicyConfig(coordination="hungarian", r_period=3)
    ),
    "scenario1-individual": lambda: _scenario1(
        "scenario1-individual", PolicyConfig(coordination="hungarian", r_period=1)
    ),
    "scenario1-rr-slot": lambda: _scenario1(
        "scenario1-rr-slot", PolicyConfig(coordination="round_robin", r_period=3, sharing="slot")
    ),
    "scenario2": lambda: ScenarioConfig(
        name="scenario2",
        n_channels=10,
        n_users=3,
        weights=np.array([SCENARIO1_ROW, SCENARIO1_ROW, SCENARIO2_LAST_ROW]),
        policy=PolicyConfig(coordination="hungarian", r_period=1),
    ),
    "throughput-c1": lambda: _throughput("throughput-c1", PolicyConfig(kind="random")),
    "throughput-c2": lambda: _throughput("throughput-c2", PolicyConfig(kind="individual_ucb")),
    "throughput-c3": lambda: _throughput("throughput-c3", PolicyConfig(kind="cooperative_ucb_nocoord")),
    "throughput-c4": lambda: _throughput(
        "throughput-c4", PolicyConfig(kind="cc_ucb1", coordination="round_robin", r_period=4)
    ),
}


def _section(data: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    value = data.get(key) or {}
    if not isinstance(value, Mapping):
        raise ScenarioError(key, "must be a mapping")
    return value


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(path, f"expected an integer, got {value!r}")
    return value


def _float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    return float(value)


def _probabilities(value: Any, path: str) -> ProbabilitySpec:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        p = float(value)
        if not (0.0 <= p <= 1.0):
            raise ScenarioError(path, f"{p} is outside [0, 1]")
        return p
    if not isinstance(value, list):
        raise ScenarioError(path, "expected a probability or a matrix of probabilities")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise ScenarioError(f"{path}[{i}]", "expected a list")
        rows.append([_float(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    arr = np.array(rows, dtype=np.float64)
    bad = np.argwhere((arr < 0.0) | (arr > 1.0))
    if len(bad):
        i, j = bad[0]
        raise ScenarioError(f"{path}[{i}][{j}]", f"{arr[i, j]} is outside [0, 1]")
    return arr


def _availability(value: Any) -> tuple[float, ...]:
    path = "network.availability"
    if not isinstance(value, list) or not value:
        raise ScenarioError(path, "expected a non-empty list of probabilities")
    out = []
    for n, mu in enumerate(value):
        p = _float(mu, f"{path}[{n}]")
        # 不做截断: 超出 [0, 1] 直接报错
        if not (0.0 <= p <= 1.0):
            raise ScenarioError(f"{path}[{n}]", f"{p} is outside [0, 1]")
        out.append(p)
    return tuple(out)


def _policy(section: Mapping[str, Any], n_users: int, symmetric: bool) -> PolicyConfig:
    r_period = section.get("r_period", "auto")
    if r_period == "auto":
        r_period = n_users if symmetric else 1
    elif r_period == "K":
        r_period = n_users
    else:
        r_period = _int(r_period, "policy.r_period")
    try:
        return PolicyConfig(
            kind=section.get("kind", "cc_ucb1"),
            coordination=section.get("coordination", "hungarian"),
            r_period=r_period,
            alpha=_float(section.get("alpha", 1.1), "policy.alpha"),
            selection_rule=section.get("selection_rule", "proportional_to_index"),
            sharing=section.get("sharing", "block"),
        )
    except ValueError as e:
        raise ScenarioError("policy", str(e)) from e


def parse_scenario(data: Mapping[str, Any], *, name: str = "scenario") -> ScenarioConfig:
    if not isinstance(data, Mapping):
        raise ScenarioError("<root>", "scenario file must contain a mapping")
    network = _section(data, "network")
    sensing = _section(data, "sensing")
    run = _section(data, "run")

    availability = None
    weights = None
    if "weights" in data:
        if "availability" in network or sensing:
            raise ScenarioError("weights", "direct weights exclude network.availability and sensing")
        weights = _probabilities(data["weights"], "weights")
        if not isinstance(weights, np.ndarray):
            raise ScenarioError("weights", "expected a K x N matrix")
        n_users, n_channels = weights.shape
        if "users" in data and _int(data["users"], "users") != n_users:
            raise ScenarioError("users", f"weights have {n_users} rows")
        symmetric = bool(np.all(weights == weights[0]))
    elif "availability" in network:
        availability = _availability(network["availability"])
        n_channels = len(availability)
        if "users" not in data:
            raise ScenarioError("users", "required with network.availability")
        n_users = _int(data["users"], "users")
        fa = sensing.get("false_alarm", 0.0)
        symmetric = not isinstance(fa, list) or bool(np.all(np.asarray(fa) == np.asarray(fa)[0]))
    else:
        raise ScenarioError("network.availability", "missing (or give weights)")

    if n_users > n_channels:
        raise ScenarioError("users", f"K={n_users} exceeds N={n_channels} channels")

    output = run.get("output")
    return ScenarioConfig(
        name=str(data.get("name", name)),
        n_channels=n_channels,
        n_users=n_users,
        availability=availability,
        weights=weights,
        false_alarm=_probabilities(sensing.get("false_alarm", 0.0), "sensing.false_alarm"),
        miss_detection=_probabilities(sensing.get("miss_detection", 0.0), "sensing.miss_detection"),
        policy=_policy(_section(data, "policy"), n_users, symmetric),
        horizon=_int(run.get("horizon", DEFAULT_HORIZON), "run.horizon"),
        n_runs=_int(run.get("runs", DEFAULT_RUNS), "run.runs"),
        base_seed=_int(run.get("seed", 0), "run.seed"),
        output=Path(output) if output else None,
        stride=_int(run.get("stride", DEFAULT_STRIDE), "run.stride"),
        packet_size=_int(run.get("packet_size", PACKET_SIZE), "run.packet_size"),
        tail_window=_int(run.get("tail_window", DEFAULT_TAIL), "run.tail_window"),
    )


def load_scenario(path: Union[str, os.PathLike]) -> ScenarioConfig:
    """加载预置场景 (按名字) 或 YAML 场景文件"""
    key = str(path)
    if key in PRESETS:
        logger.debug(f"using preset scenario {key}")
        return PRESETS[key]()
    file = Path(path)
    if not file.exists():
        raise ScenarioError("<file>", f"no preset or file named {key!r}; presets: {', '.join(PRESETS)}")
    with file.open("r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ScenarioError("<file>", f"cannot parse {file}: {e}") from e
    return parse_scenario(data or {}, name=file.stem)
