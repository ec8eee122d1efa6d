"""Command-line entry point: ``canfis run|suite|baseline|plotdata``."""

from __future__ import annotations

import argparse
import logging
import statistics
import sys
from pathlib import Path

from .baseline import BaselineConfig
from .exceptions import CanfisError
from .experiment import ExperimentSpec, emit_plot_data, run_baseline, run_experiment, run_paper_suite
from .training import TrainingConfig

logger = logging.getLogger("canfis")


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"0,1,5"`` or ``"0-9"`` or a mix: ``"0-3,7"``."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise argparse.ArgumentTypeError(f"no seeds in {text!r}")
    return tuple(seeds)


def _training_args(parser, epochs_default=1000):
    parser.add_argument("--epochs", type=int, default=epochs_default)
    parser.add_argument("--step-size", type=float, default=1.0)
    parser.add_argument("--momentum", type=float, default=0.6)
    parser.add_argument("--patience", type=int, default=50,
                        help="epochs of CV MSE above its minimum before stopping; 0 disables")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="canfis", description="CANFIS half-adder experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train one n_mf configuration over several seeds")
    run.add_argument("--mf", type=int, default=2, help="membership functions per input")
    run.add_argument("--seeds", type=parse_seeds, default=tuple(range(10)))
    _training_args(run)
    run.add_argument("--train", default="builtin", help="CSV path or 'builtin'")
    run.add_argument("--cv", default="builtin", help="CSV path or 'builtin'")
    run.add_argument("--test", default="builtin", help="CSV path or 'builtin'")
    run.add_argument("--jitter", type=float, default=0.05)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--out", type=Path, required=True)

    suite = sub.add_parser("suite", help="n_mf sweep 2..6 with the epochs-to-threshold analysis")
    suite.add_argument("--seeds", type=parse_seeds, default=tuple(range(10)))
    suite.add_argument("--jobs", type=int, default=1)
    suite.add_argument("--out", type=Path, required=True)

    base = sub.add_parser("baseline", help="modular XOR + AND MLP half-adder")
    base.add_argument("--seeds", type=parse_seeds, default=tuple(range(10)))
    base.add_argument("--epochs", type=int, default=10000)
    base.add_argument("--step-size", type=float, default=1.0)
    base.add_argument("--momentum", type=float, default=0.9)
    base.add_argument("--target-rmse", type=float, default=None)
    base.add_argument("--train", default="builtin")
    base.add_argument("--test", default="builtin")
    base.add_argument("--out", type=Path, required=True)

    plot = sub.add_parser("plotdata", help="write graph_train_<n>.csv and graph_test_<n>.csv for a run")
    plot.add_argument("--run", type=Path, required=True, help="a mf<n>/seed<s> directory")
    plot.add_argument("--out", type=Path, default=None)
    return parser


def _cmd_run(args) -> int:
    config = TrainingConfig(args.epochs, args.step_size, args.momentum, args.patience)
    spec = ExperimentSpec(
        n_mf=args.mf, seeds=args.seeds, training_config=config, train_source=args.train,
        cv_source=args.cv, test_source=args.test, output_dir=args.out, jitter=args.jitter,
    )
    summary = run_experiment(spec, jobs=args.jobs)
    for r in summary["runs"]:
        if r["status"] == "ok":
            print(f"n_mf={r['n_mf']} seed={r['seed']}: final train MSE {r['final_train_mse']:.4g}, "
                  f"min CV MSE {r['min_cv_mse']:.4g} @ {r['best_epoch']}, "
                  f"MSE<=0.001 at epoch {r['epoch_to_mse_threshold']}, fidelity {r['binary_fidelity']}")
        else:
            print(f"n_mf={r['n_mf']} seed={r['seed']}: diverged at epoch {r['diverged_at_epoch']}")
    return 0


def _cmd_suite(args) -> int:
    summary = run_paper_suite(args.out, seeds=args.seeds, jobs=args.jobs)
    print("n_mf  median epoch to MSE<=0.001  (reported)")
    for n, row in summary["per_mf"].items():
        print(f"{n:>4}  {row['median_threshold_epoch']!s:>28}  ({row['reported_threshold_epoch']})")
    print("epoch-product ratio max(k)/min(k):", summary["eq1"]["ratio"], "| not constant:", summary["eq1"]["not_constant"])
    return 0


def _cmd_baseline(args) -> int:
    config = BaselineConfig(args.epochs, args.step_size, args.momentum, target_rmse=args.target_rmse)
    summary = run_baseline(args.out, args.seeds, config, args.train, args.test)
    ok = [r for r in summary["runs"] if r["status"] == "ok"]
    for r in ok:
        print(f"seed={r['seed']}: XOR RMSE {r['xor_final_rmse']:.4g}, AND RMSE {r['and_final_rmse']:.4g}, "
              f"composed test RMSE {r['composed_test_rmse']:.4g}")
    if ok:
        print(f"median composed test RMSE {statistics.median(r['composed_test_rmse'] for r in ok):.4g} "
              f"(reported for the modular approach: ~{summary['reported_composed_rmse']})")
    return 0


def _cmd_plotdata(args) -> int:
    for path in emit_plot_data(args.run, args.out):
        print(path)
    return 0


COMMANDS = {"run": _cmd_run, "suite": _cmd_suite, "baseline": _cmd_baseline, "plotdata": _cmd_plotdata}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CanfisError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
