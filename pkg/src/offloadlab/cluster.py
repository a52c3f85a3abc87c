"""Clustered linear prediction of task energy.

Training scales the chosen features to [0, 1], partitions the scaled rows
with k-means, and fits an ordinary least squares plane per cluster.  At
prediction time a point is scaled with the training parameters, routed to
the nearest centroid, and evaluated with that cluster's plane.  Everything
is seeded and single-threaded, so identical inputs give identical models.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .features import Dataset, ScalingParams, apply_min_max, fit_min_max

MODEL_FORMAT = "offloadlab-clustered-model"
MODEL_VERSION = 1

RIDGE_JITTER = 1e-10  # added to the slope diagonal of the normal equations


@dataclass(frozen=True, eq=False)
class KMeansModel:
    k: int
    centroids: np.ndarray            # (k, d)
    inertia: float
    seed: int
    iterations_run: int
    labels: np.ndarray | None = None          # training assignment
    inertia_history: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Affine predictor: coeffs[0] is the intercept, the rest are slopes."""

    coeffs: np.ndarray
    degenerate: bool = False

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.coeffs[0] + X @ self.coeffs[1:]


@dataclass(frozen=True, eq=False)
class ClusteredModel:
    kmeans: KMeansModel
    per_cluster: tuple[LinearModel, ...]
    scaling: ScalingParams
    feature_subset: tuple[str, ...]


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[tuple[int, float, float], ...]  # (k, mae, mse)
    feature_subset: tuple[str, ...]
    train_size: int
    test_size: int

    def best_k(self) -> tuple[int, float, float]:
        return min(self.rows, key=lambda r: (r[1], r[0]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "mae_j", "mse_j2"])
            for k, mae, mse in self.rows:
                writer.writerow([k, repr(mae), repr(mse)])


def _seed_centroids(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # k-means++ D^2 sampling; falls back to uniform picks once all mass is 0
    n = len(points)
    chosen = [int(rng.integers(n))]
    d2 = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        chosen.append(idx)
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return points[chosen].copy()


def _nearest(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _repair_empty(points: np.ndarray, centroids: np.ndarray,
                  labels: np.ndarray) -> bool:
    """Reseed empty clusters at the point farthest from its own centroid.

    Mutates centroids and labels in place.  Skips the move when every point
    already sits on its centroid: there is nothing to gain and the donated
    point would just oscillate.
    """
    k = len(centroids)
    repaired = False
    for _ in range(2 * k):
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            break
        dist2 = ((points - centroids[labels]) ** 2).sum(axis=1)
        donor = int(dist2.argmax())
        if dist2[donor] <= 0.0:
            break
        centroids[empty[0]] = points[donor]
        labels[donor] = empty[0]
        repaired = True
    return repaired


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator,
           tol: float, max_iter: int):
    centroids = _seed_centroids(points, k, rng)
    prev_labels = None
    labels = np.zeros(len(points), dtype=int)
    history: list[float] = []
    iterations = 0
    for iteration in range(1, max_iter + 1):
        iterations = iteration
        labels = _nearest(points, centroids)
        repaired = _repair_empty(points, centroids, labels)
        if not repaired and prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        previous = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                centroids[c] = points[members].mean(axis=0)
        history.append(float(((points - centroids[labels]) ** 2).sum()))
        prev_labels = labels
        shift = float(np.sqrt(((centroids - previous) ** 2).sum(axis=1)).max())
        if not repaired and shift < tol:
            break
    inertia = float(((points - centroids[labels]) ** 2).sum())
    return centroids, labels, inertia, iterations, history


def kmeans_fit(points: np.ndarray, k: int, seed: int = 0, tol: float = 1e-6,
               max_iter: int = 300, restarts: int = 1) -> KMeansModel:
    """Seeded k-means++ plus Lloyd iterations; the best of `restarts` runs.

    Restarts draw from one generator stream, so the result is a pure
    function of (points, k, seed, tol, max_iter, restarts).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("points must be a non-empty 2-D array")
    if not np.isfinite(pts).all():
        raise ValueError("points contain NaN or infinite values")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(pts):
        raise ValueError(f"k={k} exceeds the {len(pts)} available points")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        candidate = _lloyd(pts, k, rng, tol, max_iter)
        if best is None or candidate[2] < best[2]:
            best = candidate
    centroids, labels, inertia, iterations, history = best
    return KMeansModel(k=k, centroids=centroids, inertia=inertia, seed=seed,
                       iterations_run=iterations, labels=labels,
                       inertia_history=tuple(history))


def assign_cluster(model: KMeansModel, point: np.ndarray) -> int:
    """Index of the nearest centroid; ties go to the lowest index."""
    p = np.asarray(point, dtype=float)
    if p.shape != (model.centroids.shape[1],):
        raise ValueError(
            f"point has shape {p.shape}, centroids expect ({model.centroids.shape[1]},)")
    d2 = ((model.centroids - p) ** 2).sum(axis=1)
    return int(d2.argmin())


def fit_linear_model(X: np.ndarray, y: np.ndarray) -> LinearModel:
    """Least squares plane through (X, y) via the normal equations.

    A tiny ridge term stabilises the slope block only; the intercept is
    never penalised, so a constant column ends up with slope ~0 instead of
    leaking into the intercept.  Underdetermined or singular systems fall
    back to a mean-only model and are flagged degenerate.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    if len(y) != n:
        raise ValueError("X and y disagree on the number of rows")

    def mean_only() -> LinearModel:
        coeffs = np.zeros(d + 1)
        coeffs[0] = float(y.mean()) if n else 0.0
        return LinearModel(coeffs=coeffs, degenerate=True)

    if n < d + 1:
        return mean_only()
    # a column with no variation is pure intercept; solving with it present
    # would leave the split between the two at the mercy of conditioning
    varying = X.max(axis=0) != X.min(axis=0)
    if not varying.any():
        return mean_only()
    design = np.hstack([np.ones((n, 1)), X[:, varying]])
    m = design.shape[1]
    gram = design.T @ design
    diag = np.arange(1, m)
    gram[diag, diag] += RIDGE_JITTER
    try:
        solution = np.linalg.solve(gram, design.T @ y)
    except np.linalg.LinAlgError:
        return mean_only()
    if not np.isfinite(solution).all():
        return mean_only()
    coeffs = np.zeros(d + 1)
    coeffs[0] = solution[0]
    coeffs[1:][varying] = solution[1:]
    return LinearModel(coeffs=coeffs, degenerate=bool(not varying.all()))


def train_clustered_models(training_data: Dataset, num_clusters: int,
                           feature_subset=None, seed: int = 0,
                           restarts: int = 10) -> ClusteredModel:
    """Scale, cluster, and fit one linear model per cluster.

    Clusters too small to support a plane (< n_features + 2 points) get a
    mean-only model instead; training never aborts on a thin cluster.
    """
    subset = tuple(feature_subset) if feature_subset is not None else training_data.feature_names
    if not subset:
        raise ValueError("feature subset must not be empty")
    raw = training_data.select(subset)
    if num_clusters < 1:
        raise ValueError("num_clusters must be >= 1")
    if len(raw) < num_clusters:
        raise ValueError("fewer training rows than clusters")
    scaling = fit_min_max(raw)
    scaled = apply_min_max(raw, scaling)
    km = kmeans_fit(scaled, num_clusters, seed=seed, restarts=restarts)
    models = []
    for c in range(num_clusters):
        members = km.labels == c
        count = int(members.sum())
        if count == 0:
            models.append(LinearModel(coeffs=np.zeros(len(subset) + 1), degenerate=True))
        elif count < len(subset) + 2:
            coeffs = np.zeros(len(subset) + 1)
            coeffs[0] = float(training_data.y[members].mean())
            models.append(LinearModel(coeffs=coeffs, degenerate=True))
        else:
            models.append(fit_linear_model(scaled[members], training_data.y[members]))
    return ClusteredModel(kmeans=km, per_cluster=tuple(models),
                          scaling=scaling, feature_subset=subset)


def _scale_point(model: ClusteredModel, point) -> np.ndarray:
    d = len(model.feature_subset)
    if isinstance(point, dict):
        missing = [n for n in model.feature_subset if n not in point]
        if missing:
            raise ValueError(f"point is missing features: {missing}")
        vec = np.array([float(point[n]) for n in model.feature_subset])
    else:
        vec = np.asarray(point, dtype=float)
        if vec.shape != (d,):
            raise ValueError(f"expected {d} feature values, got shape {vec.shape}")
    return apply_min_max(vec.reshape(1, -1), model.scaling)[0]


def clustering_predict(model: ClusteredModel, point) -> float:
    """Predicted energy (J) for one point, given as a dict or an ordered vector."""
    scaled = _scale_point(model, point)
    cluster = assign_cluster(model.kmeans, scaled)
    lm = model.per_cluster[cluster]
    return float(lm.coeffs[0] + scaled @ lm.coeffs[1:])


def predict_matrix(model: ClusteredModel, raw: np.ndarray) -> np.ndarray:
    """Vectorised clustering_predict; rows ordered like the feature subset."""
    raw = np.atleast_2d(np.asarray(raw, dtype=float))
    if raw.shape[1] != len(model.feature_subset):
        raise ValueError(
            f"expected {len(model.feature_subset)} feature columns, got {raw.shape[1]}")
    scaled = apply_min_max(raw, model.scaling)
    labels = _nearest(scaled, model.kmeans.centroids)
    out = np.empty(len(scaled))
    for c, lm in enumerate(model.per_cluster):
        members = labels == c
        if members.any():
            out[members] = lm.coeffs[0] + scaled[members] @ lm.coeffs[1:]
    return out


def predict_dataset(model: ClusteredModel, dataset: Dataset) -> np.ndarray:
    return predict_matrix(model, dataset.select(model.feature_subset))


def evaluate_models(training_data: Dataset, test_data: Dataset, k_max: int,
                    feature_subset=None, seed: int = 0,
                    restarts: int = 10) -> EvalReport:
    """MAE/MSE on held-out rows for every cluster count from 1 to k_max."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if tuple(training_data.feature_names) != tuple(test_data.feature_names):
        raise ValueError("train and test datasets disagree on features")
    rows = []
    for k in range(1, k_max + 1):
        model = train_clustered_models(training_data, k, feature_subset,
                                       seed=seed, restarts=restarts)
        pred = predict_dataset(model, test_data)
        err = pred - test_data.y
        rows.append((k, float(np.abs(err).mean()), float((err ** 2).mean())))
    subset = tuple(feature_subset) if feature_subset is not None else training_data.feature_names
    return EvalReport(rows=tuple(rows), feature_subset=subset,
                      train_size=len(training_data), test_size=len(test_data))


def save_model(model: ClusteredModel, path) -> None:
    """Write a self-describing JSON snapshot sufficient for prediction."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "feature_subset": list(model.feature_subset),
        "scaling": {
            "mins": model.scaling.mins.tolist(),
            "maxs": model.scaling.maxs.tolist(),
        },
        "kmeans": {
            "k": model.kmeans.k,
            "seed": model.kmeans.seed,
            "inertia": model.kmeans.inertia,
            "iterations_run": model.kmeans.iterations_run,
            "centroids": [row.tolist() for row in model.kmeans.centroids],
        },
        "clusters": [
            {"coeffs": lm.coeffs.tolist(), "degenerate": lm.degenerate}
            for lm in model.per_cluster
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_model(path) -> ClusteredModel:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {payload.get('version')}")
    km = payload["kmeans"]
    kmeans = KMeansModel(
        k=int(km["k"]),
        centroids=np.asarray(km["centroids"], dtype=float),
        inertia=float(km["inertia"]),
        seed=int(km["seed"]),
        iterations_run=int(km["iterations_run"]),
    )
    scaling = ScalingParams(
        mins=np.asarray(payload["scaling"]["mins"], dtype=float),
        maxs=np.asarray(payload["scaling"]["maxs"], dtype=float),
    )
    models = tuple(
        LinearModel(coeffs=np.asarray(entry["coeffs"], dtype=float),
                    degenerate=bool(entry["degenerate"]))
        for entry in payload["clusters"]
    )
    return ClusteredModel(kmeans=kmeans, per_cluster=models, scaling=scaling,
                          feature_subset=tuple(payload["feature_subset"]))
