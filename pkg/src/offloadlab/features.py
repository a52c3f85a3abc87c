"""Feature handling for the energy predictor: scaling, ranking, dataset IO.

A Dataset is a named feature matrix plus a per-row energy target in joules.
Features are min-max scaled into [0, 1] with parameters learned on training
data only; test rows are transformed with the same parameters and may land
outside [0, 1], which is intentional.  Feature relevance is scored with a
binned plug-in mutual information estimate against the target.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

# Canonical column order for generated datasets.  The first four are the
# ones a deployed predictor is expected to see; the rest are auxiliary.
CANONICAL_FEATURES = (
    "TaskSize",
    "OffloadingRatio",
    "Speed",
    "CarrierFrequency",
    "CyclesPerBit",
    "CpuFreq",
    "Bandwidth",
)
PRIMARY_FEATURES = CANONICAL_FEATURES[:4]

TARGET_COLUMN = "energy_j"


@dataclass(frozen=True, eq=False)
class Dataset:
    feature_names: tuple[str, ...]
    X: np.ndarray  # (rows, features), float64
    y: np.ndarray  # (rows,), joules

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2:
            raise ValueError("X must be 2-D")
        if y.ndim != 1 or len(y) != len(X):
            raise ValueError("y must be 1-D with one entry per row of X")
        if len(self.feature_names) != X.shape[1]:
            raise ValueError("feature_names must match the columns of X")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("feature names must be unique")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValueError("dataset contains NaN or infinite values")

    def __len__(self) -> int:
        return len(self.X)

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self._index(name)]

    def _index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise ValueError(f"unknown feature {name!r}") from None

    def select(self, names) -> np.ndarray:
        """Column block in the order given."""
        idx = [self._index(n) for n in names]
        return self.X[:, idx]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(self.feature_names) + [TARGET_COLUMN])
            for row, target in zip(self.X, self.y):
                writer.writerow([repr(float(v)) for v in row] + [repr(float(target))])

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header:
                raise ValueError(f"{path}: empty file")
            if header[-1] != TARGET_COLUMN:
                raise ValueError(f"{path}: last column must be {TARGET_COLUMN}")
            names = tuple(header[:-1])
            rows = []
            for line in reader:
                if not line:
                    continue
                rows.append([float(v) for v in line])
        if not rows:
            raise ValueError(f"{path}: no data rows")
        data = np.asarray(rows, dtype=float)
        return cls(feature_names=names, X=data[:, :-1], y=data[:, -1])


def split_dataset(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint train/test split by seeded permutation."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    n = len(dataset)
    n_test = max(1, int(round(n * test_fraction)))
    if n_test >= n:
        raise ValueError("dataset too small to split")
    perm = np.random.default_rng(seed).permutation(n)
    test_idx, train_idx = perm[:n_test], perm[n_test:]
    make = lambda idx: Dataset(dataset.feature_names, dataset.X[idx], dataset.y[idx])
    return make(train_idx), make(test_idx)


@dataclass(frozen=True, eq=False)
class ScalingParams:
    """Per-feature min/max learned from training data."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=float)
        maxs = np.asarray(self.maxs, dtype=float)
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError("mins and maxs must be 1-D and the same length")
        if (maxs < mins).any():
            raise ValueError("max below min")

    @property
    def degenerate(self) -> np.ndarray:
        return self.maxs == self.mins


def fit_min_max(X: np.ndarray) -> ScalingParams:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("need a non-empty 2-D array")
    return ScalingParams(mins=X.min(axis=0), maxs=X.max(axis=0))


def apply_min_max(X: np.ndarray, params: ScalingParams) -> np.ndarray:
    """(x - min) / (max - min); constant training columns map to 0.5.

    Values outside the training range are not clipped, so test data can
    legitimately land outside [0, 1].
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != len(params.mins):
        raise ValueError("column count does not match the scaling parameters")
    span = params.maxs - params.mins
    safe = np.where(params.degenerate, 1.0, span)
    out = (X - params.mins) / safe
    out[:, params.degenerate] = 0.5
    return out


def mutual_information(x: np.ndarray, y: np.ndarray, bins: int = 16) -> float:
    """Plug-in mutual information in bits over an equal-width binning.

    Both axes are binned over their observed ranges.  A constant input on
    either side carries no information and scores exactly 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D and the same length")
    if len(x) < 2 * bins:
        raise ValueError(f"need at least {2 * bins} samples for {bins} bins")
    if x.min() == x.max() or y.min() == y.max():
        return 0.0
    joint, _, _ = np.histogram2d(x, y, bins=bins)
    p = joint / joint.sum()
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    mask = p > 0
    ratio = p[mask] / (px @ py)[mask]
    # non-negative in exact arithmetic; guard against summation dust
    return max(0.0, float((p[mask] * np.log2(ratio)).sum()))


def rank_features(dataset: Dataset, bins: int = 16) -> list[tuple[str, float]]:
    """Features sorted by mutual information with the target, strongest first.

    Ties fall back to canonical order, then to dataset column order for
    names outside the canonical list.
    """
    def tie_key(name: str) -> tuple[int, int]:
        if name in CANONICAL_FEATURES:
            return (0, CANONICAL_FEATURES.index(name))
        return (1, dataset.feature_names.index(name))

    scored = [(name, mutual_information(dataset.column(name), dataset.y, bins))
              for name in dataset.feature_names]
    return sorted(scored, key=lambda item: (-item[1], tie_key(item[0])))
