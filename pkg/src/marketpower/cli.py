"""Command-line entry point: ``marketpower <verb> [flags]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from marketpower import experiments as ex
from marketpower.scenario import BanditScenario, ScenarioError, load_scenario

DEFAULT_CAP_GRID = (150.0, 250.0, 350.0, 450.0, 600.0)


def _seed_list(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


def _float_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="marketpower", description="Strategic bidding in a simulated power exchange.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, group=True):
        sp.add_argument("--scenario", default="desk-small", help="scenario file or bundled name")
        sp.add_argument("--cap", type=float, help="market cap in GBP/MWh (default: scenario cap)")
        sp.add_argument("--seeds", type=_seed_list, default=[0], help="comma-separated replicate seeds")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        if group:
            sp.add_argument("--episodes", type=_positive_int, help="training episodes per run")
            sp.add_argument("--workers", type=_positive_int,
                            help=f"parallel runs (default: ${ex.WORKERS_ENV} or 1)")

    common(sub.add_parser("baseline", help="all-SRMC year, no strategic agent"), group=False)

    sp = sub.add_parser("train", help="train one strategic group")
    common(sp)
    sp.add_argument("--group", help="GenCo group name or slug (required for market scenarios)")
    sp.add_argument("--checkpoint", action="store_true", help="save the trained agent per seed")

    sp = sub.add_parser("sweep-capacity", help="train every listed group at one cap")
    common(sp)
    sp.add_argument("--group", action="append", help="repeatable; default every GenCo group")

    sp = sub.add_parser("cap-sensitivity", help="train one group across a cap grid")
    common(sp)
    sp.add_argument("--group", required=True)
    sp.add_argument("--caps", type=_float_list, default=list(DEFAULT_CAP_GRID),
                    help="comma-separated ascending caps")

    sp = sub.add_parser("replay-checkpoint", help="one greedy year from a saved agent")
    common(sp, group=False)
    sp.add_argument("--group", required=True)
    sp.add_argument("--checkpoint", type=Path, required=True)
    return p


def _report(paths):
    for path in paths:
        print(path)


def _run(args) -> int:
    scenario = load_scenario(args.scenario)
    if isinstance(scenario, BanditScenario):
        if args.verb != "train":
            raise ScenarioError("kind", f"bandit scenarios only support 'train', not {args.verb!r}")
        args.out.mkdir(parents=True, exist_ok=True)
        rows = []
        for seed in args.seeds:
            trace = ex.train_bandit(scenario, seed, args.episodes)
            rows.extend((seed, t, a) for t, a in enumerate(trace))
        path = args.out / "bandit_trace.csv"
        path.write_text(ex._csv_text(["seed", "step", "greedy_action"], rows), encoding="utf-8")
        _report([path])
        return 0

    cap = args.cap
    if cap is not None and cap <= 0:
        raise ValueError("--cap must be positive")
    if args.verb == "baseline":
        results = [ex.baseline_run(scenario, cap, seed) for seed in args.seeds]
    elif args.verb == "train":
        if not args.group:
            raise ValueError("--group is required")
        name = scenario.group(args.group).name
        results = []
        for seed in args.seeds:
            ckpt = None
            if args.checkpoint:
                args.out.mkdir(parents=True, exist_ok=True)
                ckpt = args.out / f"checkpoint-seed{seed}.json"
            results.append(ex.train_run(scenario, name, cap, args.episodes, seed, checkpoint_path=ckpt))
    elif args.verb == "sweep-capacity":
        groups = args.group or [row.name for row in scenario.groups]
        results = ex.sweep_capacity(scenario, groups, cap, args.episodes, args.seeds, args.workers)
    elif args.verb == "cap-sensitivity":
        results = ex.cap_sensitivity(scenario, args.group, args.caps, args.episodes, args.seeds, args.workers)
    else:
        results = [ex.replay_checkpoint(scenario, args.group, args.checkpoint, cap, seed) for seed in args.seeds]
    _report(ex.emit_outputs(results, args.out))
    for r in results:
        label = r.group_name or "baseline"
        print(f"{label} cap={r.market_cap:g} seed={r.seed} final_mean_price={r.final_mean_price:.2f}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ScenarioError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"marketpower: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
