from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from .assignment import is_symmetric, optimal_channel_sets
from .log import logger
from .metrics import (
    BoundParams,
    cumulative_regret,
    event_rate,
    mean_and_se,
    optimal_set_fraction,
    slot_throughput,
    theorem1_bound,
)
from .policy import RunTrace, make_policy, run_policy, selection_advisory
from .scenario import ScenarioConfig

CSV_COLUMNS = [
    "slot",
    "mean_regret",
    "se_regret",
    "mean_ntp_bytes",
    "se_ntp",
    "optimal_set_fraction",
    "pu_interference_rate",
    "su_collision_rate",
]
FLOAT_FORMAT = "%.10f"


@dataclass
class RunRecord:
    """一次运行降采样后的记录; 下标 i 对应 slots[i] 个已完成的时隙"""

    seed: int
    slots: np.ndarray
    regret: np.ndarray
    regret_per_user: np.ndarray
    ntp: np.ndarray
    optimal_fraction: np.ndarray
    pu_rate: np.ndarray
    su_rate: np.ndarray
    ntp_tail: float


@dataclass
class BatchResult:
    scenario: str
    frame: pd.DataFrame
    users_frame: pd.DataFrame
    runs: list[RunRecord] = field(repr=False)
    summary: dict[str, float]


def sampled_slots(horizon: int, stride: int) -> np.ndarray:
    slots = np.arange(0, horizon + 1, stride)
    if slots[-1] != horizon:
        slots = np.append(slots, horizon)
    return slots


def simulate(cfg: ScenarioConfig, seed: int) -> RunTrace:
    env = cfg.environment(seed)
    policy = make_policy(cfg.policy, env, seed=seed)
    return run_policy(policy, cfg.horizon)


def reduce_trace(
    cfg: ScenarioConfig,
    seed: int,
    trace: RunTrace,
    weights: np.ndarray,
    optimal_sets: np.ndarray,
) -> RunRecord:
    slots = sampled_slots(cfg.horizon, cfg.stride)
    regret = cumulative_regret(trace, weights)
    ntp_slot = slot_throughput(trace, cfg.packet_size)
    # 第 s 行的吞吐量是第 s - 1 个时隙 (最后一个已完成时隙) 的吞吐量
    ntp = np.concatenate([[0.0], ntp_slot])
    tail = ntp_slot[-min(cfg.tail_window, len(ntp_slot)):]
    return RunRecord(
        seed=seed,
        slots=slots,
        regret=regret.regret[slots],
        regret_per_user=regret.per_user[slots],
        ntp=ntp[slots],
        optimal_fraction=optimal_set_fraction(trace, weights, optimal_sets=optimal_sets)[slots],
        pu_rate=event_rate(trace.pu_interference)[slots],
        su_rate=event_rate(trace.su_collision)[slots],
        ntp_tail=float(tail.mean()),
    )


def run_single(cfg: ScenarioConfig, seed: int) -> RunRecord:
    weights = cfg.true_weights()
    trace = simulate(cfg, seed)
    record = reduce_trace(cfg, seed, trace, weights, optimal_channel_sets(weights))
    logger.debug(f"{cfg.name}: run with seed {seed} finished, final regret {record.regret[-1]:.3f}")
    return record


def aggregate(cfg: ScenarioConfig, runs: Sequence[RunRecord]) -> BatchResult:
    slots = runs[0].slots
    mean_regret, se_regret = mean_and_se(np.stack([r.regret for r in runs]))
    mean_ntp, se_ntp = mean_and_se(np.stack([r.ntp for r in runs]))
    frame = pd.DataFrame(
        {
            "slot": slots.astype(np.int64),
            "mean_regret": mean_regret,
            "se_regret": se_regret,
            "mean_ntp_bytes": mean_ntp,
            "se_ntp": se_ntp,
            "optimal_set_fraction": np.stack([r.optimal_fraction for r in runs]).mean(axis=0),
            "pu_interference_rate": np.stack([r.pu_rate for r in runs]).mean(axis=0),
            "su_collision_rate": np.stack([r.su_rate for r in runs]).mean(axis=0),
        },
        columns=CSV_COLUMNS,
    )
    per_user = np.stack([r.regret_per_user for r in runs]).mean(axis=0)
    users_frame = pd.DataFrame(
        {"slot": slots.astype(np.int64)}
        | {f"regret_user_{k + 1}": per_user[:, k] for k in range(per_user.shape[1])}
    )
    tail_mean, tail_se = mean_and_se(np.array([r.ntp_tail for r in runs]))
    summary = {
        "runs": float(len(runs)),
        "horizon": float(cfg.horizon),
        "final_regret": float(mean_regret[-1]),
        "final_regret_se": float(se_regret[-1]),
        "final_optimal_set_fraction": float(frame["optimal_set_fraction"].iloc[-1]),
        "ntp_tail_mean": float(tail_mean),
        "ntp_tail_se": float(tail_se),
    }
    weights = cfg.true_weights()
    if cfg.policy.kind == "cc_ucb1" and is_symmetric(weights) and cfg.policy.alpha > 1.0:
        try:
            summary["theorem1_bound"] = theorem1_bound(
                BoundParams.from_weights(weights, cfg.policy.alpha), cfg.horizon
            )
        except ValueError as e:
            logger.warning(f"{cfg.name}: regret bound not available: {e}")
    return BatchResult(scenario=cfg.name, frame=frame, users_frame=users_frame, runs=list(runs), summary=summary)


def _run_seed(args: tuple[ScenarioConfig, int]) -> RunRecord:
    cfg, seed = args
    return run_single(cfg, seed)


def run_batch(cfg: ScenarioConfig, *, workers: Optional[int] = None) -> BatchResult:
    """按 seed = base_seed + i 执行 n_runs 次运行, 按运行编号顺序汇总"""
    seeds = [cfg.base_seed + i for i in range(cfg.n_runs)]
    logger.info(
        f"\033[32m{cfg.name}: {cfg.n_runs} runs x {cfg.horizon} slots, "
        f"policy {cfg.policy.kind}/{cfg.policy.coordination}, alpha {cfg.policy.alpha}\033[0m"
    )
    selection_advisory(cfg.policy)
    workers = workers or 1
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
            # map 保持输入顺序, 汇总结果与并行度无关
            runs = list(pool.map(_run_seed, [(cfg, s) for s in seeds]))
    else:
        runs = [run_single(cfg, s) for s in seeds]
    result = aggregate(cfg, runs)
    logger.info(f"{cfg.name}: done, final regret {result.summary['final_regret']:.3f}")
    return result


def sweep_users(
    cfg: ScenarioConfig,
    users: Sequence[int],
    *,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """不同用户数 K 下最后 tail_window 个时隙的平均网络吞吐量"""
    rows = []
    for k in users:
        result = run_batch(cfg.with_users(k), workers=workers)
        rows.append(
            {
                "users": k,
                "mean_ntp_bytes": result.summary["ntp_tail_mean"],
                "se_ntp": result.summary["ntp_tail_se"],
            }
        )
    return pd.DataFrame(rows, columns=["users", "mean_ntp_bytes", "se_ntp"])


PathLike = Union[str, os.PathLike]


def _to_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    target = Path(path)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return target


def write_csv(record: Union[BatchResult, pd.DataFrame], path: PathLike) -> Path:
    frame = record.frame if isinstance(record, BatchResult) else record
    return _to_csv(frame.reindex(columns=CSV_COLUMNS), path)


def users_csv_path(path: PathLike) -> Path:
    target = Path(path)
    return target.with_name(f"{target.stem}.users{target.suffix or '.csv'}")


def write_user_csv(record: BatchResult, path: PathLike) -> Path:
    return _to_csv(record.users_frame, path)
