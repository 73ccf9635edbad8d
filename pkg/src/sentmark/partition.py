"""Semantic-space partitions and their margin tests.

Two interchangeable partition families map a unit embedding to a region
index:

* ``KMeansPartition``: K centroids fitted by spherical k-means (cosine
  assignment, normalized-mean update); region = index of the nearest
  centroid by cosine distance.
* ``LSHPartition``: d Gaussian hyperplane normals; region = the d-bit
  signature with bit i set when ``normals[i] . v > 0``, weighted ``2**i``.

Fitting is bit-reproducible: k-means++ seeding and the hyperplane draws both
consume the package PRNG (:mod:`sentmark.rng`), and every tie anywhere breaks
to the lowest index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateCorpusError,
    DimensionMismatchError,
    InsufficientDataError,
    PartitionLoadError,
)
from .rng import Xoshiro256StarStar, splitmix64

_DISTINCT_TOL = 1e-9
_UNIT_TOL = 1e-6

DEFAULT_MAX_ITERS = 100
DEFAULT_TOL = 1e-6


@dataclass(eq=False)
class KMeansPartition:
    """Fitted spherical k-means partition; treat as immutable."""

    centroids: np.ndarray  # K x h, unit rows
    fit_seed: int
    inertia: float
    n_iters: int = 0
    inertia_trace: tuple = ()

    def __post_init__(self):
        self.centroids = np.ascontiguousarray(self.centroids, dtype=np.float64)
        self.centroids.setflags(write=False)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    @property
    def region_count(self) -> int:
        return self.k

    @property
    def mode(self) -> str:
        return "kmeans"


@dataclass(eq=False)
class LSHPartition:
    """Random-hyperplane partition; regions are the 2**d signature cells."""

    normals: np.ndarray  # d x h, Gaussian rows
    fit_seed: int = 0
    _unit_normals: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.normals = np.ascontiguousarray(self.normals, dtype=np.float64)
        self.normals.setflags(write=False)
        norms = np.linalg.norm(self.normals, axis=1)
        if np.any(norms == 0.0):
            raise DegenerateCorpusError("LSH normal with zero norm")
        self._unit_normals = self.normals / norms[:, None]
        self._unit_normals.setflags(write=False)

    @property
    def d(self) -> int:
        return self.normals.shape[0]

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def region_count(self) -> int:
        return 1 << self.d

    @property
    def mode(self) -> str:
        return "lsh"


def _check_dim(expected: int, v: np.ndarray) -> None:
    if v.shape != (expected,):
        raise DimensionMismatchError(f"vector shape {v.shape} does not match partition dim {expected}")


def _kmeanspp_seed(x: np.ndarray, k: int, rng: Xoshiro256StarStar) -> np.ndarray:
    """k-means++ style seeding under cosine distance.

    For unit vectors the squared chord distance is 2 * d_cos, so weighting by
    d_cos to the nearest chosen center is the faithful analogue of the
    classic squared-Euclidean weighting.
    """
    n = x.shape[0]
    chosen = np.empty((k, x.shape[1]), dtype=np.float64)
    idx = rng.randbelow(n)
    chosen[0] = x[idx]
    dist = 1.0 - x @ chosen[0]
    np.maximum(dist, 0.0, out=dist)
    for j in range(1, k):
        total = float(dist.sum())
        if total <= 0.0:
            raise DegenerateCorpusError(
                f"fewer than {k} distinct points; cannot seed {k} clusters"
            )
        u = rng.random() * total
        cum = np.cumsum(dist)
        idx = int(np.searchsorted(cum, u, side="right"))
        if idx >= n:  # guard against cumsum rounding at the top end
            idx = n - 1
        chosen[j] = x[idx]
        np.minimum(dist, 1.0 - x @ chosen[j], out=dist)
        np.maximum(dist, 0.0, out=dist)
    return chosen


def fit_kmeans(
    embeddings,
    k: int,
    seed: int,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    n_init: int = 10,
) -> KMeansPartition:
    """Lloyd's iterations on the unit sphere, best of ``n_init`` restarts.

    Assignment uses cosine distance; the update step is the arithmetic mean
    of the members re-normalized, which is the cosine-optimal centroid.  An
    emptied cluster is re-seeded with the point farthest from its previous
    centroid (excluding points already used for repair in the same pass).
    Stops when the largest centroid movement (cosine) drops below ``tol``.
    Restart seeds are the splitmix64 expansion of ``seed``, and the
    lowest-inertia run wins (ties to the earliest run), so identical inputs
    and seed always reproduce identical centroids.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatchError("embeddings must form an n x h matrix")
    n = x.shape[0]
    if k < 2:
        raise ValueError("k must be >= 2")
    if n_init < 1:
        raise ValueError("n_init must be >= 1")
    if n < k:
        raise InsufficientDataError(f"{n} points cannot support k={k}")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise DegenerateCorpusError("zero or non-finite embedding in fit corpus")
    x = x / norms[:, None]
    if float(np.max(1.0 - x @ x[0])) <= _DISTINCT_TOL:
        raise DegenerateCorpusError("all points identical; no structure to cluster")

    best = None
    for run_seed in splitmix64(seed, n_init):
        result = _lloyd_once(x, k, run_seed, max_iters, tol)
        if best is None or result[0] < best[0]:
            best = result
    inertia, centroids, iteration, trace = best

    part = KMeansPartition(
        centroids=centroids,
        fit_seed=seed,
        inertia=inertia,
        n_iters=iteration,
        inertia_trace=tuple(trace),
    )
    _validate_centroids(part.centroids)
    return part


def _lloyd_once(x: np.ndarray, k: int, run_seed: int, max_iters: int, tol: float):
    n = x.shape[0]
    rng = Xoshiro256StarStar(run_seed)
    centroids = _kmeanspp_seed(x, k, rng)

    trace = []
    labels = None
    for iteration in range(1, max_iters + 1):
        dists = 1.0 - x @ centroids.T
        labels = np.argmin(dists, axis=1)
        trace.append(float(dists[np.arange(n), labels].sum()))

        new_centroids = np.empty_like(centroids)
        empty = []
        for i in range(k):
            members = x[labels == i]
            if members.shape[0] == 0:
                empty.append(i)
                continue
            mean = members.mean(axis=0)
            norm = np.linalg.norm(mean)
            if norm == 0.0:
                empty.append(i)
                continue
            new_centroids[i] = mean / norm
        used_repairs: set[int] = set()
        for i in empty:
            far = 1.0 - x @ centroids[i]
            order = np.argsort(-far, kind="stable")
            pick = next(int(j) for j in order if int(j) not in used_repairs)
            used_repairs.add(pick)
            new_centroids[i] = x[pick]

        movement = float(np.max(1.0 - np.sum(centroids * new_centroids, axis=1)))
        centroids = new_centroids
        if movement < tol and not empty:
            break

    dists = 1.0 - x @ centroids.T
    labels = np.argmin(dists, axis=1)
    inertia = float(dists[np.arange(n), labels].sum())
    trace.append(inertia)
    return inertia, centroids, iteration, trace


def _validate_centroids(c: np.ndarray) -> None:
    if c.shape[0] < 2:
        raise DegenerateCorpusError("kmeans partition needs K >= 2")
    norms = np.linalg.norm(c, axis=1)
    if np.any(np.abs(norms - 1.0) > _UNIT_TOL):
        raise DegenerateCorpusError("non-unit centroid")
    dots = c @ c.T
    np.fill_diagonal(dots, -1.0)
    if float(dots.max()) >= 1.0 - _DISTINCT_TOL:
        raise DegenerateCorpusError("duplicate centroids after fit")


def assign(partition: KMeansPartition, v: np.ndarray) -> int:
    """Index of the nearest centroid by cosine distance; ties to lowest index."""
    _check_dim(partition.dim, v)
    return int(np.argmin(1.0 - partition.centroids @ v))


def margin_ok(partition: KMeansPartition, v: np.ndarray, m: float) -> bool:
    """True iff v is closer to its centroid than to every other by > m (strict)."""
    if m < 0:
        raise ValueError("margin must be >= 0")
    _check_dim(partition.dim, v)
    d = 1.0 - partition.centroids @ v
    q = int(np.argmin(d))
    dq = d[q]
    d[q] = np.inf
    return bool(dq < float(d.min()) - m)


def fit_lsh(d: int, h: int, seed: int) -> LSHPartition:
    """d Gaussian hyperplane normals in R^h, drawn row-major from the seeded PRNG."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if h < 2:
        raise DimensionMismatchError("h must be >= 2")
    rng = Xoshiro256StarStar(seed)
    normals = np.empty((d, h), dtype=np.float64)
    for i in range(d):
        for j in range(h):
            normals[i, j] = rng.gauss()
    return LSHPartition(normals=normals, fit_seed=seed)


def lsh_signature(partition: LSHPartition, v: np.ndarray) -> int:
    """d-bit signature; bit i set when normals[i] . v > 0 (boundary dot -> 0)."""
    _check_dim(partition.dim, v)
    dots = partition.normals @ v
    value = 0
    for i, dot in enumerate(dots):
        if dot > 0.0:
            value |= 1 << i
    return value


def lsh_margin_ok(partition: LSHPartition, v: np.ndarray, m: float) -> bool:
    """True iff the distance from unit v to every hyperplane exceeds m (strict)."""
    if m < 0:
        raise ValueError("margin must be >= 0")
    _check_dim(partition.dim, v)
    return bool(np.all(np.abs(partition._unit_normals @ v) > m))


def region_of(partition, v: np.ndarray) -> int:
    """Region index under either partition family."""
    if isinstance(partition, KMeansPartition):
        return assign(partition, v)
    if isinstance(partition, LSHPartition):
        return lsh_signature(partition, v)
    raise TypeError(f"not a partition: {type(partition).__name__}")


def partition_margin_ok(partition, v: np.ndarray, m: float) -> bool:
    """Margin test matching the partition family."""
    if isinstance(partition, KMeansPartition):
        return margin_ok(partition, v, m)
    if isinstance(partition, LSHPartition):
        return lsh_margin_ok(partition, v, m)
    raise TypeError(f"not a partition: {type(partition).__name__}")


FILE_VERSION = 1


def save_partition(partition, path) -> None:
    """Write the versioned JSON partition file (row order defines indices)."""
    if isinstance(partition, KMeansPartition):
        obj = {
            "version": FILE_VERSION,
            "type": "kmeans",
            "dim": partition.dim,
            "k": partition.k,
            "rows": [[float(v) for v in row] for row in partition.centroids],
            "fit_seed": partition.fit_seed,
            "inertia": partition.inertia,
        }
    elif isinstance(partition, LSHPartition):
        obj = {
            "version": FILE_VERSION,
            "type": "lsh",
            "dim": partition.dim,
            "d": partition.d,
            "rows": [[float(v) for v in row] for row in partition.normals],
            "fit_seed": partition.fit_seed,
        }
    else:
        raise TypeError(f"not a partition: {type(partition).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load_partition(path):
    """Load and validate a partition file; identical queries are guaranteed
    because rows round-trip losslessly (shortest-repr decimal floats)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, ValueError) as exc:
        raise PartitionLoadError(f"unreadable partition file {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise PartitionLoadError("partition file is not a JSON object")
    if obj.get("version") != FILE_VERSION:
        raise PartitionLoadError(f"unsupported partition file version: {obj.get('version')!r}")
    ptype = obj.get("type")
    try:
        dim = int(obj["dim"])
        rows = np.asarray(obj["rows"], dtype=np.float64)
        fit_seed = int(obj.get("fit_seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise PartitionLoadError(f"malformed partition file: {exc}") from exc
    if rows.ndim != 2 or rows.shape[1] != dim or dim < 2:
        raise PartitionLoadError("row shape disagrees with declared dim")
    if not np.all(np.isfinite(rows)):
        raise PartitionLoadError("non-finite value in partition rows")
    if ptype == "kmeans":
        if int(obj.get("k", -1)) != rows.shape[0]:
            raise PartitionLoadError("declared k disagrees with row count")
        try:
            _validate_centroids(rows)
        except DegenerateCorpusError as exc:
            raise PartitionLoadError(f"invalid centroids: {exc}") from exc
        return KMeansPartition(
            centroids=rows,
            fit_seed=fit_seed,
            inertia=float(obj.get("inertia", 0.0)),
        )
    if ptype == "lsh":
        if int(obj.get("d", -1)) != rows.shape[0]:
            raise PartitionLoadError("declared d disagrees with row count")
        if np.any(np.linalg.norm(rows, axis=1) == 0.0):
            raise PartitionLoadError("zero-norm LSH normal")
        return LSHPartition(normals=rows, fit_seed=fit_seed)
    raise PartitionLoadError(f"unknown partition type: {ptype!r}")


def brute_force_two_cluster_cost(x: np.ndarray, mask) -> float:
    """Spherical 2-means cost of an explicit bipartition; oracle helper.

    Cost = sum of cosine distances to each side's normalized mean.  Infinite
    when a side is empty or its mean has no direction.
    """
    mask = np.asarray(mask, dtype=bool)
    total = 0.0
    for side in (mask, ~mask):
        members = x[side]
        if members.shape[0] == 0:
            return math.inf
        mean = members.mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm == 0.0:
            return math.inf
        centroid = mean / norm
        total += float(np.sum(1.0 - members @ centroid))
    return total
