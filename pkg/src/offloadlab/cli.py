"""Command line front end.

Every subcommand reads one effective configuration (defaults, optional
YAML file, dotted overrides, global flags) and writes CSV or JSON files
into the output directory.  Nothing here depends on wall-clock time or
unseeded randomness, so a repeated invocation with the same inputs
reproduces its outputs byte for byte.  Set OFFLOADLAB_LOG=DEBUG|INFO|...
to turn on diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import cluster, datagen, greedy
from .config import SCHEMA, ConfigError, ExperimentConfig, load_config
from .features import (PRIMARY_FEATURES, TARGET_COLUMN, Dataset, rank_features,
                       split_dataset)
from .spectral import SpectralEfficiencyCache

log = logging.getLogger("offloadlab")

SOLUTION_FILE = "solution.json"
TRACE_FILE = "trace.csv"
SWEEP_MODULATION_FILE = "sweep_modulation.csv"
SWEEP_DATASIZE_FILE = "sweep_datasize.csv"
DATASET_FILE = "dataset.csv"
MODEL_FILE = "model.json"
PREDICTIONS_FILE = "predictions.csv"
MI_RANKING_FILE = "mi_ranking.csv"
SPEEDS_FILE = "speeds.csv"


def _setup_logging() -> None:
    name = os.environ.get("OFFLOADLAB_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, force=True,
                        format="%(levelname)s %(name)s: %(message)s")


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cell(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _run_grid(worker, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [worker(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, items))


def cmd_optimize(cfg: ExperimentConfig) -> list[Path]:
    out = _out_dir(cfg)
    scenario = datagen.generate_scenario(cfg.scenario, cfg.spectral)
    cache = SpectralEfficiencyCache(cfg.spectral)
    solution = greedy.optimize(scenario, cfg.greedy, cache)
    log.info("optimize: %d tasks, %d evaluations, termination=%s",
             len(scenario.tasks), solution.evaluations, solution.termination)
    payload = {
        "termination": solution.termination,
        "evaluations": solution.evaluations,
        "total_energy_j": solution.total_energy,
        "offload_ratios": [float(r) for r in solution.offload_ratios],
        "per_task_energy_j": [float(e) for e in solution.per_task_energy],
    }
    solution_path = out / SOLUTION_FILE
    with open(solution_path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    trace_path = out / TRACE_FILE
    greedy.write_trace_csv(solution, trace_path)
    return [solution_path, trace_path]


def _modulation_point(args):
    spec, spectral_cfg, greedy_cfg, speed, carrier = args
    pinned = replace(spec, speed_mps=(speed, speed),
                     carrier_freq_hz=(carrier, carrier))
    scenario = datagen.generate_scenario(pinned, spectral_cfg)
    cache = SpectralEfficiencyCache(spectral_cfg)
    solution = greedy.optimize(scenario, greedy_cfg, cache)
    return speed, carrier, solution.total_energy


def cmd_sweep_modulation(cfg: ExperimentConfig) -> list[Path]:
    out = _out_dir(cfg)
    items = [(cfg.scenario, cfg.spectral, cfg.greedy, speed, carrier)
             for speed in cfg.sweeps.speed_grid
             for carrier in cfg.sweeps.carrier_freq_grid]
    rows = _run_grid(_modulation_point, items, cfg.jobs)
    path = out / SWEEP_MODULATION_FILE
    _write_csv(path, ["speed_mps", "carrier_freq_hz", "total_energy_j"], rows)
    return [path]


def _datasize_point(args):
    spec, spectral_cfg, greedy_cfg, size = args
    scenario = datagen.generate_scenario(spec, spectral_cfg)
    scenario = replace(scenario, tasks=tuple(
        replace(task, data_bits=float(size)) for task in scenario.tasks))
    cache = SpectralEfficiencyCache(spectral_cfg)
    solution = greedy.optimize(scenario, greedy_cfg, cache)
    baseline = float(greedy.get_total_energy(
        np.zeros(len(scenario.tasks)), scenario, cache).sum())
    return size, solution.total_energy, baseline, baseline - solution.total_energy


def cmd_sweep_datasize(cfg: ExperimentConfig) -> list[Path]:
    out = _out_dir(cfg)
    items = [(cfg.scenario, cfg.spectral, cfg.greedy, size)
             for size in cfg.sweeps.data_size_grid]
    rows = _run_grid(_datasize_point, items, cfg.jobs)
    path = out / SWEEP_DATASIZE_FILE
    _write_csv(path, ["data_size_bits", "greedy_energy_j",
                      "all_local_energy_j", "gap_j"], rows)
    return [path]


def cmd_gen_data(cfg: ExperimentConfig) -> list[Path]:
    out = _out_dir(cfg)
    specs = [replace(cfg.scenario, seed=cfg.scenario.seed + i)
             for i in range(cfg.datagen.n_scenarios)]
    dataset = datagen.build_dataset(specs, cfg.greedy, cfg.spectral)
    log.info("gen-data: %d rows from %d scenarios", len(dataset), len(specs))
    path = out / DATASET_FILE
    dataset.to_csv(path)
    return [path]


def _resolve_subset(entry, train: Dataset, bins: int) -> tuple[str, ...]:
    """Turn a subset keyword into concrete feature names.

    'all' is every dataset feature, 'primary' the four deployment features,
    'mi:N' the N strongest of those four by mutual information with the
    target (over all features if the four are not all present).
    """
    if isinstance(entry, tuple):
        missing = [n for n in entry if n not in train.feature_names]
        if missing:
            raise ValueError(f"dataset lacks features {missing}")
        return entry
    if entry == "all":
        return train.feature_names
    if entry == "primary":
        missing = [n for n in PRIMARY_FEATURES if n not in train.feature_names]
        if missing:
            raise ValueError(f"dataset lacks features {missing}")
        return PRIMARY_FEATURES
    if entry.startswith("mi:"):
        count = int(entry.split(":", 1)[1])
        if count < 1:
            raise ValueError("mi:N needs N >= 1")
        universe = PRIMARY_FEATURES if all(
            n in train.feature_names for n in PRIMARY_FEATURES) else train.feature_names
        pool = Dataset(feature_names=tuple(universe),
                       X=train.select(universe), y=train.y)
        ranking = rank_features(pool, bins=bins)
        return tuple(name for name, _ in ranking[:count])
    raise ValueError(f"unknown feature subset {entry!r}")


def _subset_label(entry) -> str:
    if isinstance(entry, tuple):
        return "-".join(entry)
    return entry.replace(":", "")


def cmd_train(cfg: ExperimentConfig) -> list[Path]:
    if cfg.dataset_path is None:
        raise ValueError("train needs dataset_path (or --dataset_path)")
    out = _out_dir(cfg)
    dataset = Dataset.from_csv(cfg.dataset_path)
    subset = _resolve_subset(cfg.clustering.feature_subsets[0], dataset,
                             cfg.clustering.bins)
    model = cluster.train_clustered_models(
        dataset, cfg.clustering.num_clusters, subset,
        seed=cfg.clustering.seed, restarts=cfg.clustering.restarts)
    log.info("train: %d rows, k=%d, features=%s",
             len(dataset), cfg.clustering.num_clusters, ",".join(subset))
    path = out / MODEL_FILE
    cluster.save_model(model, path)
    return [path]


def _read_feature_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: empty file")
        rows = [[float(v) for v in line] for line in reader if line]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if header[-1] == TARGET_COLUMN:
        return tuple(header[:-1]), data[:, :-1], data[:, -1]
    return tuple(header), data, None


def cmd_predict(cfg: ExperimentConfig) -> list[Path]:
    if cfg.model_path is None:
        raise ValueError("predict needs model_path (or --model_path)")
    if cfg.dataset_path is None:
        raise ValueError("predict needs dataset_path (or --dataset_path)")
    out = _out_dir(cfg)
    model = cluster.load_model(cfg.model_path)
    names, X, truth = _read_feature_csv(cfg.dataset_path)
    missing = [n for n in model.feature_subset if n not in names]
    if missing:
        raise ValueError(f"input lacks features the model needs: {missing}")
    columns = [names.index(n) for n in model.feature_subset]
    preds = cluster.predict_matrix(model, X[:, columns])
    path = out / PREDICTIONS_FILE
    if truth is None:
        _write_csv(path, ["row", "energy_pred_j"],
                   [(i, float(p)) for i, p in enumerate(preds)])
    else:
        _write_csv(path, ["row", "energy_pred_j", "energy_true_j"],
                   [(i, float(p), float(t))
                    for i, (p, t) in enumerate(zip(preds, truth))])
    return [path]


def cmd_evaluate(cfg: ExperimentConfig) -> list[Path]:
    if cfg.dataset_path is None:
        raise ValueError("evaluate needs dataset_path (or --dataset_path)")
    out = _out_dir(cfg)
    dataset = Dataset.from_csv(cfg.dataset_path)
    train, test = split_dataset(dataset, cfg.clustering.test_fraction,
                                cfg.clustering.seed)
    written = []
    ranking_path = out / MI_RANKING_FILE
    _write_csv(ranking_path, ["feature", "mi_bits"],
               rank_features(train, bins=cfg.clustering.bins))
    written.append(ranking_path)
    for entry in cfg.clustering.feature_subsets:
        subset = _resolve_subset(entry, train, cfg.clustering.bins)
        report = cluster.evaluate_models(
            train, test, cfg.clustering.k_max, subset,
            seed=cfg.clustering.seed, restarts=cfg.clustering.restarts)
        path = out / f"eval_{_subset_label(entry)}.csv"
        report.to_csv(path)
        log.info("evaluate: subset=%s best k=%d", _subset_label(entry),
                 report.best_k()[0])
        written.append(path)
    return written


def cmd_ingest(cfg: ExperimentConfig) -> list[Path]:
    if cfg.ingest.path is None:
        raise ValueError("ingest needs ingest.path (or --ingest.path)")
    out = _out_dir(cfg)
    result = datagen.ingest_trajectory_csv(cfg.ingest.path, cfg.ingest.column_map)
    rows = []
    short_trips = 0
    for trip, points in result.trips.items():
        if len(points) < 2:
            short_trips += 1
            continue
        speeds = datagen.trajectory_speeds(points, cfg.ingest.earth_radius_m)
        rows.extend((trip, i, float(s)) for i, s in enumerate(speeds))
    path = out / SPEEDS_FILE
    _write_csv(path, ["trip_id", "segment", "speed_mps"], rows)
    print(f"rows read: {result.rows_read}")
    print(f"rows skipped: {result.rows_skipped}")
    print(f"trips: {len(result.trips)} ({short_trips} too short for speeds)")
    print(f"speed samples: {len(rows)}")
    return [path]


_COMMANDS = {
    "optimize": (cmd_optimize, "greedy offload-ratio optimization of one scenario"),
    "sweep-modulation": (cmd_sweep_modulation, "total energy across a speed/carrier grid"),
    "sweep-datasize": (cmd_sweep_datasize, "greedy vs all-local energy across task sizes"),
    "gen-data": (cmd_gen_data, "sample scenarios and emit a feature/target dataset"),
    "train": (cmd_train, "fit the clustered energy predictor on a dataset CSV"),
    "predict": (cmd_predict, "apply a trained model to a feature CSV"),
    "evaluate": (cmd_evaluate, "k-sweep error report per feature subset"),
    "ingest": (cmd_ingest, "convert GPS trajectories to per-trip speeds"),
}


def _dest(dotted: str) -> str:
    return "opt_" + dotted.replace(".", "__")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML config file")
    common.add_argument("--seed", type=int, help="global seed (overrides the config)")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("--out", metavar="DIR", help="output directory")
    for dotted in SCHEMA:
        if dotted in ("seed", "jobs"):
            continue
        common.add_argument(f"--{dotted}", dest=_dest(dotted),
                            metavar="VALUE", help=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(
        prog="offloadlab",
        description="Energy-optimal computation offloading experiments.",
        epilog="Any config field can be overridden with --<section>.<field> VALUE.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in _COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text,
                       epilog="Config fields are overridable as --<section>.<field> VALUE.")
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)
    overrides = {}
    for dotted in SCHEMA:
        if dotted in ("seed", "jobs"):
            continue
        value = getattr(args, _dest(dotted), None)
        if value is not None:
            overrides[dotted] = value
    try:
        cfg = load_config(args.config, overrides, seed=args.seed,
                          out_dir=args.out, jobs=args.jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    command = _COMMANDS[args.command][0]
    try:
        written = command(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
