"""
Experiment harness: multi-seed runs, the n_mf sweep, and report files.

Layout under an output directory::

    mf<n>/seed<s>/training_report.csv     epoch,train_mse,cv_mse
    mf<n>/seed<s>/performance_report.csv  metric,S,C
    mf<n>/seed<s>/testing_report.csv      x,y,desired_s,desired_c,output_s,output_c
    mf<n>/seed<s>/best_weights.json
    mf<n>/seed<s>/summary.json
    mf<n>/seed<s>/timing.json             wall time; the only non-reproducible file
    mf<n>/experiment_summary.json

Everything except ``timing.json`` is a pure function of (spec, seed).
"""

from __future__ import annotations

import json
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import reports
from .baseline import (
    AND_TOPOLOGY,
    REPORTED_COMPOSED_RMSE,
    XOR_TOPOLOGY,
    BaselineConfig,
    ComposedHalfAdder,
    TruthTable,
    compose_and_evaluate,
    train_subnet,
)
from .datasets import Dataset, resolve
from .exceptions import ConfigurationError, CorrelationUndefinedError, ReportMissingError, TrainingDivergedError
from .metrics import binary_fidelity, evaluate, performance_from_records
from .network import NetworkConfig, init_network, save_network, set_params
from .training import MSE_THRESHOLD, TrainingConfig, train

logger = logging.getLogger(__name__)

SUITE_MF = (2, 3, 4, 5, 6)
LONG_RUN_MF = (5, 6)
LONG_RUN_EPOCHS = 2000
# epochs-to-MSE-0.001 reported for the CANFIS half-adder, keyed by n_mf
REPORTED_THRESHOLD_EPOCHS = {2: 593, 3: 922, 4: 844, 5: 1464, 6: 1169}
CHECKPOINT_EPOCHS = (1, 200, 400, 600, 800, 1000)


@dataclass(frozen=True)
class ExperimentSpec:
    n_mf: int
    seeds: tuple[int, ...] = tuple(range(10))
    training_config: TrainingConfig = field(default_factory=TrainingConfig)
    train_source: str = "builtin"
    cv_source: str = "builtin"
    test_source: str = "builtin"
    output_dir: Path = Path("runs")
    jitter: float = 0.05

    def __post_init__(self):
        if int(self.n_mf) != self.n_mf or self.n_mf < 1:
            raise ConfigurationError(f"n_mf must be >= 1, got {self.n_mf!r}")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise ConfigurationError("at least one seed is required")
        if len(set(seeds)) != len(seeds):
            raise ConfigurationError(f"duplicate seeds: {seeds}")
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "output_dir", Path(self.output_dir))

    def datasets(self) -> tuple[Dataset, Dataset, Dataset]:
        return (
            resolve(self.train_source, "train"),
            resolve(self.cv_source, "cv"),
            resolve(self.test_source, "test"),
        )

    def experiment_dir(self) -> Path:
        return self.output_dir / f"mf{self.n_mf}"

    def run_dir(self, seed: int) -> Path:
        return self.experiment_dir() / f"seed{seed}"


def _write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _input_range(data: Dataset):
    X = data.X
    return tuple(zip(X.min(axis=0), X.max(axis=0)))


def _run_seed(spec: ExperimentSpec, seed: int, data) -> dict:
    train_set, cv_set, test_set = data
    started = time.perf_counter()
    net_config = NetworkConfig(n_mf=spec.n_mf, seed=seed, jitter=spec.jitter)
    train_config = TrainingConfig(**{**asdict(spec.training_config), "seed": seed})
    net = init_network(net_config, _input_range(train_set))
    run_dir = spec.run_dir(seed)
    run_dir.mkdir(parents=True, exist_ok=True)
    base = {"n_mf": spec.n_mf, "seed": seed}
    try:
        report = train(net, train_set, cv_set, train_config)
    except TrainingDivergedError as exc:
        logger.warning("n_mf=%d seed=%d diverged at epoch %d", spec.n_mf, seed, exc.epoch)
        summary = {**base, "status": "diverged", "diverged_at_epoch": exc.epoch}
        _write_json(run_dir / "summary.json", summary)
        return summary

    best = set_params(net, report.best_params)
    perf, records = evaluate(best, test_set)
    fidelity, _ = binary_fidelity(records)
    reports.write_training_csv(report, run_dir / "training_report.csv")
    reports.write_performance_csv(perf, run_dir / "performance_report.csv")
    reports.write_testing_csv(records, run_dir / "testing_report.csv")
    save_network(best, run_dir / "best_weights.json", net_config)
    summary = {
        **base,
        "status": "ok",
        "network_config": asdict(net_config),
        "training_config": asdict(train_config),
        "data": {"train": train_set.name, "cv": cv_set.name, "test": test_set.name},
        "epochs_run": report.epochs_run,
        "stopped_early": report.stopped_early,
        "best_epoch": report.best_epoch,
        "min_cv_mse": report.min_cv_mse,
        "min_train_mse": report.min_train_mse,
        "final_train_mse": report.final_train_mse,
        "epoch_to_mse_threshold": report.first_epoch_below(MSE_THRESHOLD),
        "mse_threshold": MSE_THRESHOLD,
        "test_mse": {"S": perf.s.mse, "C": perf.c.mse},
        "test_r": {"S": perf.s.r, "C": perf.c.r},
        "max_test_abs_error": max(perf.s.max_abs_error, perf.c.max_abs_error),
        "binary_fidelity": fidelity,
    }
    _write_json(run_dir / "summary.json", summary)
    _write_json(run_dir / "timing.json", {"wall_time_s": time.perf_counter() - started})
    return summary


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> dict:
    """Train, evaluate best weights and write reports for every seed of ``spec``."""
    data = spec.datasets()
    spec.experiment_dir().mkdir(parents=True, exist_ok=True)
    if jobs > 1 and len(spec.seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_seed, [spec] * len(spec.seeds), spec.seeds, [data] * len(spec.seeds)))
    else:
        runs = [_run_seed(spec, seed, data) for seed in spec.seeds]
    runs.sort(key=lambda r: r["seed"])
    ok = [r for r in runs if r["status"] == "ok"]
    summary = {
        "n_mf": spec.n_mf,
        "seeds": list(spec.seeds),
        "training_config": {k: v for k, v in asdict(spec.training_config).items() if k != "seed"},
        "jitter": spec.jitter,
        "n_ok": len(ok),
        "n_diverged": len(runs) - len(ok),
        "runs": runs,
    }
    _write_json(spec.experiment_dir() / "experiment_summary.json", summary)
    return summary


@dataclass(frozen=True)
class Eq1Row:
    n_mf: int
    n_e: int | None
    min_mse: float | None
    product_k: float | None


@dataclass(frozen=True)
class Eq1Analysis:
    rows: list[Eq1Row]
    ratio: float | None
    not_constant: bool
    notes: list[str]


def eq1_analysis(rows, threshold: float = MSE_THRESHOLD, max_ratio: float = 2.0) -> Eq1Analysis:
    """Tabulate ``k = threshold * n_mf * n_e`` per configuration.

    ``rows`` holds ``(n_mf, n_e, min_mse)`` triples; ``n_e`` is None when the
    threshold was never reached. The table is descriptive: ``not_constant`` is
    set when ``max(k) / min(k)`` exceeds ``max_ratio``.
    """
    rows = list(rows)
    if len(rows) < 2:
        raise ConfigurationError("the analysis needs at least two configurations")
    out, notes = [], []
    for n_mf, n_e, min_mse in rows:
        if n_e is None:
            notes.append(f"n_mf={n_mf} never reached MSE {threshold}; excluded")
            out.append(Eq1Row(int(n_mf), None, min_mse, None))
        else:
            out.append(Eq1Row(int(n_mf), int(n_e), min_mse, threshold * n_mf * n_e))
    ks = [r.product_k for r in out if r.product_k is not None]
    if len(ks) < 2:
        notes.append("fewer than two configurations reached the threshold; ratio undefined")
        return Eq1Analysis(out, None, False, notes)
    ratio = max(ks) / min(ks)
    not_constant = ratio > max_ratio
    if not_constant:
        notes.append(f"NOT-CONSTANT: max(k)/min(k) = {ratio:.4g} > {max_ratio}")
    return Eq1Analysis(out, ratio, not_constant, notes)


def write_eq1_csv(analysis: Eq1Analysis, path) -> Path:
    rows = [
        (str(r.n_mf), "" if r.n_e is None else str(r.n_e),
         "" if r.min_mse is None else reports.fmt(r.min_mse),
         "" if r.product_k is None else reports.fmt(r.product_k))
        for r in analysis.rows
    ]
    return reports.write_rows(path, ("n_mf", "n_e", "min_mse", "product_k"), rows)


def _median_epoch(epochs):
    # seeds that never reach the threshold count as slower than any that did
    values = [np.inf if e is None else e for e in epochs]
    med = statistics.median(values)
    return None if not np.isfinite(med) else float(med)


def run_paper_suite(output_dir, seeds=tuple(range(10)), base_config: TrainingConfig | None = None,
                    mf_values=SUITE_MF, jobs: int = 1) -> dict:
    """Sweep n_mf with shared seeds and tabulate epochs-to-threshold."""
    output_dir = Path(output_dir)
    base_config = base_config or TrainingConfig()
    experiments = {}
    for n_mf in mf_values:
        epochs = LONG_RUN_EPOCHS if n_mf in LONG_RUN_MF else base_config.max_epochs
        config = TrainingConfig(**{**asdict(base_config), "max_epochs": epochs})
        spec = ExperimentSpec(n_mf=n_mf, seeds=tuple(seeds), training_config=config, output_dir=output_dir)
        experiments[n_mf] = run_experiment(spec, jobs=jobs)

    per_mf = {}
    for n_mf, exp in experiments.items():
        by_seed = {r["seed"]: r for r in exp["runs"]}
        epochs = [by_seed[s].get("epoch_to_mse_threshold") for s in seeds]
        min_mses = [by_seed[s]["min_train_mse"] for s in seeds if by_seed[s]["status"] == "ok"]
        per_mf[n_mf] = {
            "max_epochs": exp["training_config"]["max_epochs"],
            "threshold_epochs": epochs,
            "median_threshold_epoch": _median_epoch(epochs),
            "median_min_train_mse": statistics.median(min_mses) if min_mses else None,
            "reported_threshold_epoch": REPORTED_THRESHOLD_EPOCHS.get(n_mf),
        }

    def _rank_key(e):
        return np.inf if e is None else e

    fastest_counts = {n: 0 for n in mf_values}
    for i, _ in enumerate(seeds):
        times = {n: _rank_key(per_mf[n]["threshold_epochs"][i]) for n in mf_values}
        best = min(times.values())
        winners = [n for n, t in times.items() if t == best and np.isfinite(t)]
        if len(winners) == 1:
            fastest_counts[winners[0]] += 1

    analysis = eq1_analysis(
        [(n, None if per_mf[n]["median_threshold_epoch"] is None else round(per_mf[n]["median_threshold_epoch"]),
          per_mf[n]["median_min_train_mse"]) for n in mf_values]
    )
    write_eq1_csv(analysis, output_dir / "eq1_table.csv")
    _write_training_table(experiments, seeds[0], output_dir / "training_table.csv")
    _write_performance_table(output_dir, mf_values, seeds[0])

    summary = {
        "seeds": list(seeds),
        "mse_threshold": MSE_THRESHOLD,
        "per_mf": {str(n): v for n, v in per_mf.items()},
        "sole_fastest_seed_counts": {str(n): c for n, c in fastest_counts.items()},
        "eq1": {
            "rows": [asdict(r) for r in analysis.rows],
            "ratio": analysis.ratio,
            "not_constant": analysis.not_constant,
            "notes": analysis.notes,
        },
    }
    _write_json(output_dir / "suite_summary.json", summary)
    return summary


def _write_training_table(experiments, seed, path) -> None:
    header = ["epoch"]
    columns = []
    for n_mf in experiments:
        header += [f"train_mf{n_mf}", f"cv_mf{n_mf}"]
        columns.append(n_mf)
    rows = []
    records = {}
    for n_mf, exp in experiments.items():
        by_seed = {r["seed"]: r for r in exp["runs"]}
        if by_seed[seed]["status"] != "ok":
            records[n_mf] = []
            continue
        out_dir = Path(path).parent / f"mf{n_mf}" / f"seed{seed}"
        records[n_mf] = reports.read_training_csv(out_dir / "training_report.csv")
    for epoch in CHECKPOINT_EPOCHS:
        row = [str(epoch)]
        for n_mf in columns:
            recs = records[n_mf]
            if epoch <= len(recs):
                row += [reports.fmt(recs[epoch - 1].train_mse), reports.fmt(recs[epoch - 1].cv_mse)]
            else:
                row += ["", ""]
        rows.append(row)
    for label, pick in (("min", min), ("final", None)):
        row = [label]
        for n_mf in columns:
            recs = records[n_mf]
            if not recs:
                row += ["", ""]
            elif pick is None:
                row += [reports.fmt(recs[-1].train_mse), reports.fmt(recs[-1].cv_mse)]
            else:
                row += [reports.fmt(min(r.train_mse for r in recs)), reports.fmt(min(r.cv_mse for r in recs))]
        rows.append(row)
    reports.write_rows(path, header, rows)


def _write_performance_table(output_dir, mf_values, seed) -> None:
    perfs = {}
    for n_mf in mf_values:
        path = output_dir / f"mf{n_mf}" / f"seed{seed}" / "testing_report.csv"
        if path.is_file():
            perfs[f"mf{n_mf}"] = performance_from_records(reports.read_testing_csv(path))
    if perfs:
        reports.write_performance_table(perfs, output_dir / "performance_table.csv")


def emit_plot_data(run_dir, out_dir=None) -> list[Path]:
    """Project a run's reports onto ``graph_train_<n>.csv`` and ``graph_test_<n>.csv``."""
    run_dir = Path(run_dir)
    out_dir = Path(out_dir) if out_dir is not None else run_dir
    summary_path = run_dir / "summary.json"
    if not summary_path.is_file():
        raise ReportMissingError(f"missing run summary: {summary_path}")
    n_mf = json.loads(summary_path.read_text())["n_mf"]
    training = reports.read_training_csv(run_dir / "training_report.csv")
    testing = reports.read_testing_csv(run_dir / "testing_report.csv")
    out_dir.mkdir(parents=True, exist_ok=True)
    train_path = reports.write_rows(
        out_dir / f"graph_train_{n_mf}.csv",
        ("epoch", "train_mse", "cv_mse"),
        ((r.epoch, r.train_mse, r.cv_mse) for r in training),
    )
    test_path = reports.write_rows(
        out_dir / f"graph_test_{n_mf}.csv",
        ("sample", "desired_s", "output_s", "desired_c", "output_c"),
        ((i, r.desired_s, r.output_s, r.desired_c, r.output_c) for i, r in enumerate(testing, start=1)),
    )
    return [train_path, test_path]


def run_baseline(output_dir, seeds=tuple(range(10)), config: BaselineConfig | None = None,
                 train_source="builtin", test_source="builtin") -> dict:
    """Train XOR and AND subnets per seed, compose them, and report side by side."""
    config = config or BaselineConfig()
    output_dir = Path(output_dir)
    train_set = resolve(train_source, "train")
    test_set = resolve(test_source, "test")
    xor_tt = TruthTable.from_dataset(train_set, "S")
    and_tt = TruthTable.from_dataset(train_set, "C")
    runs = []
    for seed in seeds:
        seed_config = BaselineConfig(**{**asdict(config), "seed": int(seed)})
        rng = np.random.default_rng(int(seed))
        run_dir = output_dir / "baseline" / f"seed{seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        entry = {"seed": int(seed), "config": asdict(seed_config)}
        try:
            xor_net, xor_hist = train_subnet(xor_tt, XOR_TOPOLOGY, seed_config, rng)
            and_net, and_hist = train_subnet(and_tt, AND_TOPOLOGY, seed_config, rng)
        except TrainingDivergedError as exc:
            entry.update(status="diverged", diverged_at_epoch=exc.epoch)
            runs.append(entry)
            continue
        composed = ComposedHalfAdder(xor_net, and_net)
        train_rmse, _ = compose_and_evaluate(composed, train_set)
        test_rmse, records = compose_and_evaluate(composed, test_set)
        fidelity, _ = binary_fidelity(records)
        n = max(len(xor_hist), len(and_hist))
        reports.write_rows(
            run_dir / "baseline_training_report.csv",
            ("epoch", "xor_rmse", "and_rmse"),
            ((e + 1,
              reports.fmt(xor_hist[e]) if e < len(xor_hist) else "",
              reports.fmt(and_hist[e]) if e < len(and_hist) else "") for e in range(n)),
        )
        reports.write_testing_csv(records, run_dir / "baseline_testing_report.csv")
        try:
            reports.write_performance_csv(performance_from_records(records), run_dir / "baseline_performance_report.csv")
        except CorrelationUndefinedError as exc:
            logger.warning("seed %d: no performance report (%s)", seed, exc)
        entry.update(
            status="ok",
            xor_final_rmse=xor_hist[-1],
            and_final_rmse=and_hist[-1],
            composed_train_rmse=train_rmse,
            composed_test_rmse=test_rmse,
            binary_fidelity=fidelity,
        )
        runs.append(entry)
    summary = {
        "topologies": {"xor": list(XOR_TOPOLOGY), "and": list(AND_TOPOLOGY)},
        "reported_composed_rmse": REPORTED_COMPOSED_RMSE,
        "runs": runs,
    }
    _write_json(output_dir / "baseline_summary.json", summary)
    return summary
