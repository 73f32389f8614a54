from . import assignment, bandit, harness, metrics, policy, primary_env, scenario, sensing
from .assignment import Assignment, brute_force_assign, hungarian_solve, rotate_then_solve, round_robin_assign
from .bandit import IndexMatrix, UcbState
from .environment import BernoulliEnvironment, OsaEnvironment
from .harness import BatchResult, RunRecord, run_batch, sweep_users, write_csv
from .metrics import BoundParams, cumulative_regret, network_throughput, optimal_set_fraction, theorem1_bound
from .policy import BaselinePolicy, CcUcb1Policy, PolicyConfig, SlotOutcome, make_policy
from .primary_env import PrimaryNetwork, SlotState, empirical_availability, sample_slot
from .scenario import ScenarioConfig, ScenarioError, load_scenario
from .sensing import Observation, SensorProfile, expected_reward, reward, sense
from .version import __version__

__all__ = [
    "Assignment",
    "BaselinePolicy",
    "BatchResult",
    "BernoulliEnvironment",
    "BoundParams",
    "CcUcb1Policy",
    "IndexMatrix",
    "Observation",
    "OsaEnvironment",
    "PolicyConfig",
    "PrimaryNetwork",
    "RunRecord",
    "ScenarioConfig",
    "ScenarioError",
    "SensorProfile",
    "SlotOutcome",
    "SlotState",
    "UcbState",
    "__version__",
    "assignment",
    "bandit",
    "brute_force_assign",
    "cumulative_regret",
    "empirical_availability",
    "expected_reward",
    "harness",
    "hungarian_solve",
    "load_scenario",
    "make_policy",
    "metrics",
    "network_throughput",
    "optimal_set_fraction",
    "policy",
    "primary_env",
    "reward",
    "rotate_then_solve",
    "round_robin_assign",
    "run_batch",
    "sample_slot",
    "scenario",
    "sense",
    "sensing",
    "sweep_users",
    "theorem1_bound",
    "write_csv",
]
