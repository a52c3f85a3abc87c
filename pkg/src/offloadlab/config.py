"""Experiment configuration: defaults, YAML files, dotted CLI overrides.

Precedence, lowest to highest: built-in defaults, the config file, dotted
``--section.field value`` overrides, then the dedicated global flags.  Every
leaf in the schema table below is addressable from the command line by its
dotted name.  Unknown keys are rejected rather than ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .datagen import VED_COLUMNS, ColumnMap, ScenarioSpec
from .greedy import GreedyConfig
from .spectral import SpectralConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ClusteringConfig:
    k_max: int = 10
    num_clusters: int = 3
    seed: int = 0
    bins: int = 16
    test_fraction: float = 0.25
    restarts: int = 10
    feature_subsets: tuple = ("primary", "mi:2", "all")

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("clustering.k_max must be >= 1")
        if self.num_clusters < 1:
            raise ValueError("clustering.num_clusters must be >= 1")
        if self.bins < 2:
            raise ValueError("clustering.bins must be >= 2")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("clustering.test_fraction must lie in (0, 1)")
        if self.restarts < 1:
            raise ValueError("clustering.restarts must be >= 1")


@dataclass(frozen=True)
class SweepConfig:
    speed_grid: tuple = (100.0, 200.0, 300.0, 400.0)
    carrier_freq_grid: tuple = (28e9,)
    data_size_grid: tuple = (1e6, 2e6, 4e6, 8e6, 16e6)

    def __post_init__(self):
        for name in ("speed_grid", "carrier_freq_grid", "data_size_grid"):
            if not getattr(self, name):
                raise ValueError(f"sweeps.{name} must not be empty")


@dataclass(frozen=True)
class DatagenConfig:
    n_scenarios: int = 20

    def __post_init__(self):
        if self.n_scenarios < 1:
            raise ValueError("datagen.n_scenarios must be >= 1")


@dataclass(frozen=True)
class IngestConfig:
    path: str | None = None
    column_map: ColumnMap = VED_COLUMNS
    earth_radius_m: float = 6.371e6

    def __post_init__(self):
        if self.earth_radius_m <= 0:
            raise ValueError("ingest.earth_radius_m must be > 0")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    out_dir: str = "out"
    jobs: int = 1
    dataset_path: str | None = None
    model_path: str | None = None
    scenario: ScenarioSpec = ScenarioSpec()
    spectral: SpectralConfig = SpectralConfig()
    greedy: GreedyConfig = GreedyConfig()
    clustering: ClusteringConfig = ClusteringConfig()
    sweeps: SweepConfig = SweepConfig()
    datagen: DatagenConfig = DatagenConfig()
    ingest: IngestConfig = IngestConfig()


def _int(v) -> int:
    if isinstance(v, bool):
        raise ConfigError(f"expected an integer, got {v!r}")
    try:
        out = int(str(v), 0) if isinstance(v, str) else int(v)
    except (TypeError, ValueError):
        raise ConfigError(f"expected an integer, got {v!r}") from None
    if isinstance(v, float) and v != out:
        raise ConfigError(f"expected an integer, got {v!r}")
    return out


def _float(v) -> float:
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {v!r}") from None


def _str(v) -> str:
    return str(v)


def _opt(parse):
    def inner(v):
        if v is None or (isinstance(v, str) and v.lower() in ("", "none", "null")):
            return None
        return parse(v)
    return inner


def _floats(v) -> tuple:
    if isinstance(v, str):
        parts = [p for p in v.split(",") if p.strip()]
    elif isinstance(v, (list, tuple)):
        parts = v
    else:
        raise ConfigError(f"expected a list of numbers, got {v!r}")
    return tuple(_float(p) for p in parts)


def _range(v) -> tuple:
    pair = _floats(v)
    if len(pair) != 2:
        raise ConfigError(f"expected 'lo,hi', got {v!r}")
    return pair


def _subsets(v) -> tuple:
    """Feature subset list: keywords or explicit name lists.

    From the command line: semicolon-separated groups, comma-separated
    names inside a group, e.g. ``primary;mi:2;TaskSize,Speed``.
    """
    if isinstance(v, str):
        entries = [e for e in v.split(";") if e.strip()]
    elif isinstance(v, (list, tuple)):
        entries = list(v)
    else:
        raise ConfigError(f"expected feature subsets, got {v!r}")
    out = []
    for entry in entries:
        if isinstance(entry, str):
            names = [n.strip() for n in entry.split(",") if n.strip()]
            if len(names) == 1:
                out.append(names[0])
            elif names:
                out.append(tuple(names))
        elif isinstance(entry, (list, tuple)):
            out.append(tuple(str(n) for n in entry))
        else:
            raise ConfigError(f"bad feature subset entry {entry!r}")
    if not out:
        raise ConfigError("feature_subsets must not be empty")
    return tuple(out)


def _column_map(v):
    if isinstance(v, ColumnMap):
        return v
    if isinstance(v, str):
        if v.lower() == "ved":
            return VED_COLUMNS
        if v.lstrip().startswith("{"):
            try:
                return _column_map(yaml.safe_load(v))
            except yaml.YAMLError:
                raise ConfigError(f"bad inline column_map {v!r}") from None
        raise ConfigError(f"unknown column map preset {v!r}")
    if isinstance(v, dict):
        try:
            return ColumnMap(
                timestamp=str(v["timestamp"]),
                lat=str(v["lat"]),
                lon=str(v["lon"]),
                trip_id=str(v["trip_id"]),
                timestamp_scale=_float(v.get("timestamp_scale", 1.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"column_map is missing {exc.args[0]!r}") from None
    raise ConfigError(f"bad column_map {v!r}")


# dotted field name -> coercion function; this is the whole config surface
SCHEMA = {
    "seed": _int,
    "out_dir": _str,
    "jobs": _int,
    "dataset_path": _opt(_str),
    "model_path": _opt(_str),
    "scenario.n_devices": _int,
    "scenario.tasks_per_device": _int,
    "scenario.seed": _opt(_int),
    "scenario.data_bits": _range,
    "scenario.cycles_per_bit": _range,
    "scenario.cpu_freq_hz": _range,
    "scenario.energy_coeff": _range,
    "scenario.speed_mps": _range,
    "scenario.carrier_freq_hz": _range,
    "scenario.bandwidth_hz": _range,
    "scenario.noise_var_w": _range,
    "scenario.gain": _range,
    "spectral.bandwidth_hz": _float,
    "spectral.num_users": _int,
    "spectral.frame_time_s": _float,
    "spectral.subcarrier_spacing_hz": _float,
    "spectral.light_speed_mps": _float,
    "spectral.snr_linear": _float,
    "greedy.init_ratio": _float,
    "greedy.step": _float,
    "greedy.max_iters": _opt(_int),
    "clustering.k_max": _int,
    "clustering.num_clusters": _int,
    "clustering.seed": _opt(_int),
    "clustering.bins": _int,
    "clustering.test_fraction": _float,
    "clustering.restarts": _int,
    "clustering.feature_subsets": _subsets,
    "sweeps.speed_grid": _floats,
    "sweeps.carrier_freq_grid": _floats,
    "sweeps.data_size_grid": _floats,
    "datagen.n_scenarios": _int,
    "ingest.path": _opt(_str),
    "ingest.column_map": _column_map,
    "ingest.earth_radius_m": _float,
}

_DEFAULT_FLAT = {
    "seed": 0,
    "out_dir": "out",
    "jobs": 1,
    "dataset_path": None,
    "model_path": None,
    "scenario.seed": None,
    "clustering.seed": None,
}


def _flatten(tree: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in tree.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict) and dotted not in SCHEMA:
            flat.update(_flatten(value, prefix=f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def _default_flat() -> dict:
    flat = dict(_DEFAULT_FLAT)
    for section, proto in (
        ("scenario", ScenarioSpec()),
        ("spectral", SpectralConfig()),
        ("greedy", GreedyConfig()),
        ("clustering", ClusteringConfig()),
        ("sweeps", SweepConfig()),
        ("datagen", DatagenConfig()),
        ("ingest", IngestConfig()),
    ):
        for name in type(proto).__dataclass_fields__:
            dotted = f"{section}.{name}"
            flat.setdefault(dotted, getattr(proto, name))
    return flat


def load_config(path=None, overrides=None, seed=None,
                out_dir=None, jobs=None) -> ExperimentConfig:
    """Assemble the effective configuration.

    `overrides` maps dotted field names to raw values (typically strings
    from the command line).  `seed`, `out_dir`, and `jobs` are the global
    flags and win over everything else when given.
    """
    flat = _default_flat()

    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file is not valid YAML: {exc}") from None
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a mapping at the top level")
        for dotted, value in _flatten(data).items():
            if dotted not in SCHEMA:
                raise ConfigError(f"unknown config field {dotted!r}")
            flat[dotted] = SCHEMA[dotted](value)

    for dotted, value in (overrides or {}).items():
        if dotted not in SCHEMA:
            raise ConfigError(f"unknown config field {dotted!r}")
        flat[dotted] = SCHEMA[dotted](value)

    if seed is not None:
        flat["seed"] = _int(seed)
    if out_dir is not None:
        flat["out_dir"] = str(out_dir)
    if jobs is not None:
        flat["jobs"] = _int(jobs)

    # section seeds default to the global one
    if flat["scenario.seed"] is None:
        flat["scenario.seed"] = flat["seed"]
    if flat["clustering.seed"] is None:
        flat["clustering.seed"] = flat["seed"]

    def section(prefix: str, cls):
        kwargs = {name: flat[f"{prefix}.{name}"] for name in cls.__dataclass_fields__}
        return cls(**kwargs)

    try:
        cfg = ExperimentConfig(
            seed=flat["seed"],
            out_dir=flat["out_dir"],
            jobs=flat["jobs"],
            dataset_path=flat["dataset_path"],
            model_path=flat["model_path"],
            scenario=section("scenario", ScenarioSpec),
            spectral=section("spectral", SpectralConfig),
            greedy=section("greedy", GreedyConfig),
            clustering=section("clustering", ClusteringConfig),
            sweeps=section("sweeps", SweepConfig),
            datagen=section("datagen", DatagenConfig),
            ingest=section("ingest", IngestConfig),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    if cfg.seed < 0:
        raise ConfigError("seed must be >= 0")
    return cfg
