from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .harness import (
    CSV_COLUMNS,
    FLOAT_FORMAT,
    run_batch,
    sweep_users,
    users_csv_path,
    write_csv,
    write_user_csv,
)
from .log import logger
from .policy import COORDINATIONS, POLICY_KINDS, SELECTION_RULES, SHARINGS
from .scenario import PRESETS, ScenarioConfig, ScenarioError, load_scenario
from .version import __version__

EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccucb",
        description="Cooperative and coordinated UCB1 simulator for opportunistic spectrum access",
    )
    parser.add_argument("--scenario", required=True, help=f"preset name ({', '.join(PRESETS)}) or YAML file")
    parser.add_argument("--policy", choices=POLICY_KINDS)
    parser.add_argument("--coordination", choices=COORDINATIONS)
    parser.add_argument("--r-period", type=int, help="coordination period R (1 or K)")
    parser.add_argument("--selection-rule", choices=SELECTION_RULES)
    parser.add_argument("--sharing", choices=SHARINGS)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--users", type=int, help="number of secondary users (primary-network scenarios only)")
    parser.add_argument("--horizon", type=int)
    parser.add_argument("--runs", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--stride", type=int)
    parser.add_argument("--out", type=Path, help="CSV output path (stdout when omitted)")
    parser.add_argument("--full-scale", action="store_true", help="1e6 slots (and 1000 runs for throughput presets)")
    parser.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    parser.add_argument("--sweep-users", help="comma separated K values, e.g. 2,4,6")
    parser.add_argument("--log-level", default=None, help="defaults to $CCUCB_LOG_LEVEL or INFO")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def configure(args: argparse.Namespace) -> ScenarioConfig:
    cfg = load_scenario(args.scenario)
    if args.full_scale:
        cfg = cfg.full_scale()
    if args.users is not None:
        cfg = cfg.with_users(args.users)

    policy_changes = {}
    if args.policy is not None:
        policy_changes["kind"] = args.policy
    if args.coordination is not None:
        policy_changes["coordination"] = args.coordination
        # Round-Robin 只能每 K 个时隙协调一次
        if args.coordination == "round_robin" and args.r_period is None:
            policy_changes["r_period"] = cfg.n_users
    if args.r_period is not None:
        policy_changes["r_period"] = args.r_period
    if args.selection_rule is not None:
        policy_changes["selection_rule"] = args.selection_rule
    if args.sharing is not None:
        policy_changes["sharing"] = args.sharing
    if args.alpha is not None:
        policy_changes["alpha"] = args.alpha

    run_changes = {}
    if policy_changes:
        try:
            run_changes["policy"] = cfg.policy.replace(**policy_changes)
        except ValueError as e:
            raise ScenarioError("policy", str(e)) from e
    for key, value in (
        ("horizon", args.horizon),
        ("n_runs", args.runs),
        ("base_seed", args.seed),
        ("stride", args.stride),
        ("output", args.out),
    ):
        if value is not None:
            run_changes[key] = value
    return cfg.replace(**run_changes) if run_changes else cfg


def _parse_users(text: str) -> list[int]:
    try:
        users = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ScenarioError("--sweep-users", f"expected comma separated integers, got {text!r}") from e
    if not users:
        raise ScenarioError("--sweep-users", "no values given")
    return users


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = args.log_level or os.environ.get("CCUCB_LOG_LEVEL") or "INFO"

    try:
        logging.basicConfig(level=level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        cfg = configure(args)
        if args.sweep_users:
            frame = sweep_users(cfg, _parse_users(args.sweep_users), workers=args.workers)
            if cfg.output:
                frame.to_csv(cfg.output, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
            else:
                frame.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
            return 0

        result = run_batch(cfg, workers=args.workers)
        if cfg.output:
            path = write_csv(result, cfg.output)
            users_path = write_user_csv(result, users_csv_path(cfg.output))
            logger.info(f"wrote {path} and {users_path}")
        else:
            result.frame.to_csv(
                sys.stdout, index=False, columns=CSV_COLUMNS, float_format=FLOAT_FORMAT, lineterminator="\n"
            )
        for key, value in result.summary.items():
            print(f"# {key}: {value:.6g}", file=sys.stderr)
        return 0
    except ScenarioError as e:
        logger.error(f"invalid scenario: {e}")
        print(f"ccucb: invalid scenario: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        logger.error(f"invalid configuration: {e}")
        print(f"ccucb: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"I/O error: {e}")
        print(f"ccucb: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"simulation failed: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
