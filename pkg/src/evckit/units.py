"""Discrete content units: K-means codebook fit/assign and run-length dedup."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError, ParameterError, SchemaError

# rows per chunk when computing full distance matrices
_CHUNK = 512


@dataclass(eq=False)
class Codebook:
    """K-means centroids; row index = unit id."""

    centroids: np.ndarray
    inertia_history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        centroids = np.asarray(self.centroids, dtype=np.float64)
        if centroids.ndim != 2 or centroids.shape[0] < 1:
            raise ParameterError("centroids must be a non-empty K x D matrix")
        if not np.all(np.isfinite(centroids)):
            raise ParameterError("centroids must be finite")
        self.centroids = centroids

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


@dataclass
class DedupResult:
    """Run-length encoding of a unit sequence: unique units plus repeat counts."""

    unique_units: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        units = np.asarray(self.unique_units, dtype=np.int64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if units.ndim != 1 or counts.ndim != 1 or units.size != counts.size:
            raise ParameterError("unique_units and counts must be 1-D and equal length")
        if counts.size and counts.min() < 1:
            raise ParameterError("counts must all be >= 1")
        if units.size > 1 and np.any(np.diff(units) == 0):
            raise ParameterError("adjacent unique_units must differ")
        self.unique_units = units
        self.counts = counts

    def __len__(self):
        return self.unique_units.size


def _pairwise_sq_dist(rows: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = rows[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _validate_features(features) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ParameterError("features must be a non-empty T x D matrix")
    if not np.all(np.isfinite(features)):
        raise ParameterError("features must be finite")
    return features


def _kmeanspp_init(features: np.ndarray, k: int, rng) -> np.ndarray:
    n = features.shape[0]
    centroids = np.empty((k, features.shape[1]))
    centroids[0] = features[int(rng.integers(n))]
    d2 = ((features - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centroids[j] = features[idx]
        d2 = np.minimum(d2, ((features - centroids[j]) ** 2).sum(axis=1))
    return centroids


def kmeans_fit(features, k: int, seed: int = 0, max_iters: int = 100,
               debug: bool = False) -> Codebook:
    """Lloyd's algorithm with k-means++ seeding, deterministic per seed.

    Stops at an assignment fixpoint or after max_iters. The per-iteration
    inertia (sum of squared distances to the assigned centroid) is recorded
    on the returned Codebook; with debug=True each step is asserted to be
    non-increasing.
    """
    features = _validate_features(features)
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if features.shape[0] < k:
        raise InsufficientDataError(
            f"need at least k={k} frames to fit, got {features.shape[0]}"
        )
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(features, k, rng)
    n = features.shape[0]
    labels = None
    history = []
    for _ in range(max_iters):
        d2 = np.empty((n, k))
        for start in range(0, n, _CHUNK):
            stop = min(start + _CHUNK, n)
            d2[start:stop] = _pairwise_sq_dist(features[start:stop], centroids)
        new_labels = d2.argmin(axis=1)
        inertia = float(d2[np.arange(n), new_labels].sum())
        history.append(inertia)
        if debug and len(history) > 1:
            # tiny slack for floating-point roundoff in the mean update
            assert inertia <= history[-2] * (1 + 1e-12) + 1e-12, "inertia increased"
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, features)
        counts = np.bincount(labels, minlength=k)
        occupied = counts > 0
        centroids[occupied] = sums[occupied] / counts[occupied, None]
    return Codebook(centroids=centroids, inertia_history=history)


def kmeans_assign(features, codebook: Codebook) -> np.ndarray:
    """Map each frame to its nearest centroid (squared Euclidean, lowest index on ties)."""
    features = _validate_features(features)
    if features.shape[1] != codebook.dim:
        raise ParameterError(
            f"feature dim {features.shape[1]} does not match codebook dim {codebook.dim}"
        )
    n = features.shape[0]
    units = np.empty(n, dtype=np.int64)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        units[start:stop] = _pairwise_sq_dist(features[start:stop], codebook.centroids).argmin(axis=1)
    return units


def dedup(units) -> DedupResult:
    """Run-length encode a unit sequence; counts serve as per-unit durations."""
    units = np.asarray(units, dtype=np.int64)
    if units.ndim != 1:
        raise ParameterError("units must be a 1-D integer sequence")
    if units.size == 0:
        return DedupResult(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    starts = np.concatenate(([0], np.flatnonzero(np.diff(units)) + 1))
    counts = np.diff(np.concatenate((starts, [units.size])))
    return DedupResult(unique_units=units[starts], counts=counts)


def expand(deduped: DedupResult) -> np.ndarray:
    """Inverse of dedup: repeat each unique unit by its count."""
    return np.repeat(deduped.unique_units, deduped.counts)


# ---------------------------------------------------------------------------
# on-disk formats


def save_codebook(path, codebook: Codebook) -> None:
    payload = {
        "k": codebook.k,
        "dim": codebook.dim,
        "centroids": codebook.centroids.tolist(),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n")


def load_codebook(path) -> Codebook:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    try:
        centroids = np.asarray(payload["centroids"], dtype=np.float64)
        k, dim = int(payload["k"]), int(payload["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: missing or malformed codebook fields") from exc
    if centroids.shape != (k, dim):
        raise SchemaError(
            f"{path}: centroids shape {centroids.shape} does not match k={k}, dim={dim}"
        )
    return Codebook(centroids=centroids)


def load_features(path) -> np.ndarray:
    """Load a feature matrix from CSV (one frame per row) or raw float32 binary.

    Binary files need a JSON sidecar at `<path>.json` with {"frames": T, "dim": D};
    samples are little-endian 32-bit floats in row-major order.
    """
    path = Path(path)
    if path.suffix == ".csv":
        features = np.loadtxt(path, delimiter=",", ndmin=2)
        return _validate_features(features)
    sidecar = Path(str(path) + ".json")
    if not sidecar.exists():
        raise SchemaError(f"{sidecar}: missing sidecar for binary feature file")
    try:
        meta = json.loads(sidecar.read_text())
        frames, dim = int(meta["frames"]), int(meta["dim"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{sidecar}: malformed sidecar") from exc
    raw = np.fromfile(path, dtype="<f4")
    if raw.size != frames * dim:
        raise SchemaError(
            f"{path}: expected {frames * dim} float32 values, found {raw.size}"
        )
    return _validate_features(raw.reshape(frames, dim).astype(np.float64))


def save_features(path, features) -> None:
    """Write a feature matrix in the format implied by the extension (.csv or binary)."""
    features = _validate_features(features)
    path = Path(path)
    if path.suffix == ".csv":
        np.savetxt(path, features, delimiter=",")
        return
    features.astype("<f4").tofile(path)
    sidecar = {"frames": int(features.shape[0]), "dim": int(features.shape[1])}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")


def save_units(path, units) -> None:
    units = np.asarray(units, dtype=np.int64)
    text = "\n".join(str(int(u)) for u in units)
    Path(path).write_text(text + "\n" if text else "")


def load_units(path) -> np.ndarray:
    tokens = Path(path).read_text().split()
    try:
        return np.array([int(tok) for tok in tokens], dtype=np.int64)
    except ValueError as exc:
        raise SchemaError(f"{path}: unit files must hold one integer per line") from exc


def save_dedup(path, deduped: DedupResult) -> None:
    payload = {
        "units": deduped.unique_units.tolist(),
        "counts": deduped.counts.tolist(),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n")


def load_dedup(path) -> DedupResult:
    try:
        payload = json.loads(Path(path).read_text())
        units, counts = payload["units"], payload["counts"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: malformed dedup file") from exc
    try:
        return DedupResult(np.asarray(units), np.asarray(counts))
    except ParameterError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
