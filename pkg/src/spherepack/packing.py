"""Packings, validity checks, tangency nerves and kissing statistics.

Two balls with radii ``r1``, ``r2`` and center distance ``d`` (angular on
the ``s3`` chart, Euclidean on ``r3``) have gap ``d - (r1 + r2)``. They are
tangent when ``|gap| <= rtol * (r1 + r2)`` and overlap when
``gap < -rtol * (r1 + r2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import EmptyPackingError, InvalidInputError, OverlapError
from .geometry import (
    UNIT_TOL,
    EuclideanBall,
    SphericalBall,
    angular_distances,
    project_balls,
)

CHARTS = ("s3", "r3")
DEFAULT_RTOL = 1e-9
NERVE_BOUND = 8.0 + 4.0 * math.sqrt(3.0)

# pairs per block in the all-pairs sweeps
_BLOCK = 1 << 21


@dataclass(frozen=True, eq=False)
class Packing:
    """An ordered list of balls in one chart, stored as arrays.

    ``centers`` has shape (n, 4) on ``s3`` and (n, 3) on ``r3``; ``radii``
    holds angular radii on ``s3`` and Euclidean radii on ``r3``.
    """

    chart: str
    centers: np.ndarray
    radii: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise InvalidInputError(f"unknown chart {self.chart!r}")
        dim = 4 if self.chart == "s3" else 3
        c = np.array(self.centers, dtype=float).reshape(-1, dim) if np.size(self.centers) else np.zeros((0, dim))
        r = np.array(self.radii, dtype=float).reshape(-1)
        if len(c) != len(r):
            raise InvalidInputError(f"{len(c)} centers but {len(r)} radii")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(r))):
            raise InvalidInputError("non-finite coordinate or radius")
        if np.any(r <= 0.0):
            i = int(np.flatnonzero(r <= 0.0)[0])
            raise InvalidInputError(f"ball {i} has non-positive radius {r[i]!r}")
        if self.chart == "s3":
            if np.any(r >= np.pi):
                raise InvalidInputError("angular radius must be below pi")
            dev = np.abs(np.linalg.norm(c, axis=1) - 1.0)
            if np.any(dev > UNIT_TOL):
                i = int(np.argmax(dev))
                raise InvalidInputError(f"center {i} is not on the unit 3-sphere")
        labels = self.labels
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != len(r):
                raise InvalidInputError(f"{len(labels)} labels for {len(r)} balls")
        c.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_balls(cls, balls: Sequence[SphericalBall | EuclideanBall], labels=None) -> "Packing":
        if not balls:
            raise InvalidInputError("from_balls needs at least one ball to infer the chart")
        chart = "s3" if isinstance(balls[0], SphericalBall) else "r3"
        return cls(chart, np.array([b.center for b in balls]), np.array([b.radius for b in balls]), labels)

    def __len__(self) -> int:
        return len(self.radii)

    def __getitem__(self, i: int) -> SphericalBall | EuclideanBall:
        if self.chart == "s3":
            return SphericalBall(self.centers[i], float(self.radii[i]))
        return EuclideanBall(self.centers[i], float(self.radii[i]))

    def __iter__(self) -> Iterator[SphericalBall | EuclideanBall]:
        return (self[i] for i in range(len(self)))

    def subset(self, indices) -> "Packing":
        idx = np.asarray(indices, dtype=int)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return Packing(self.chart, self.centers[idx], self.radii[idx], labels)


def project_packing(P: Packing, pole) -> Packing:
    """Stereographic image of an ``s3`` packing in the ``r3`` chart."""
    if P.chart != "s3":
        raise InvalidInputError("only s3 packings can be projected")
    c, r = project_balls(pole, P.centers, P.radii)
    return Packing("r3", c, r, P.labels)


def exterior_pole(P: Packing, n_candidates: int = 20000, seed: int = 0) -> np.ndarray:
    """A point of S^3 far from every ball of ``P``, chosen deterministically.

    Candidates are seeded random points plus antipodes of the centers; the
    one with the largest clearance ``min(d - r)`` wins.
    """
    if P.chart != "s3":
        raise InvalidInputError("exterior_pole needs an s3 packing")
    rng = np.random.default_rng(seed)
    cand = rng.standard_normal((n_candidates, 4))
    cand /= np.linalg.norm(cand, axis=1)[:, None]
    cand = np.vstack([cand, -P.centers])
    best, best_clear = None, -np.inf
    for lo in range(0, len(cand), 2048):
        block = cand[lo:lo + 2048]
        d = angular_distances(block[:, None, :], P.centers[None, :, :])
        clear = np.min(d - P.radii[None, :], axis=1)
        k = int(np.argmax(clear))
        if clear[k] > best_clear:
            best, best_clear = block[k], clear[k]
    return best / np.linalg.norm(best)


# ---------------------------------------------------------------- pair machinery


def _distances(chart: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if chart == "s3":
        return angular_distances(a, b)
    return np.sqrt(np.sum((a - b) ** 2, axis=-1))


def _all_pairs(P: Packing) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (i, j) index arrays covering every unordered pair once."""
    n = len(P)
    rows = max(1, _BLOCK // max(n, 1))
    for lo in range(0, n - 1, rows):
        hi = min(n - 1, lo + rows)
        i = np.repeat(np.arange(lo, hi), [n - 1 - k for k in range(lo, hi)])
        j = np.concatenate([np.arange(k + 1, n) for k in range(lo, hi)])
        yield i, j


_HASH = np.array([73856093, 19349663, 83492791], dtype=np.int64)
_OFFSETS = np.array([(a, b, c) for a in (-1, 0, 1) for b in (-1, 0, 1) for c in (-1, 0, 1)], dtype=np.int64)


def _cell_keys(cells: np.ndarray) -> np.ndarray:
    # collisions only add spurious candidates, which the exact test rejects
    with np.errstate(over="ignore"):
        k = cells * _HASH
    return k[:, 0] ^ k[:, 1] ^ k[:, 2]


def _grid_pairs(P: Packing, rtol: float) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Candidate pairs from a multi-level uniform hash grid (r3 only).

    Balls are grouped by radius octave. Each level is hashed at a cell size
    covering the largest possible contact distance to a ball no larger than
    the level, and only balls of that level or smaller query it. Any pair
    closer than ``(1 + rtol) * (r1 + r2)`` is produced at least once.
    """
    centers, radii = P.centers, P.radii
    levels = np.floor(np.log2(radii)).astype(np.int64)
    for L in np.unique(levels):
        members = np.flatnonzero(levels == L)
        h = 2.0 * float(radii[members].max()) * (1.0 + rtol) * (1.0 + 1e-9)
        lo_box = centers[members].min(axis=0) - h
        hi_box = centers[members].max(axis=0) + h
        q = np.flatnonzero(levels <= L)
        q = q[np.all((centers[q] >= lo_box) & (centers[q] <= hi_box), axis=1)]
        if len(q) == 0:
            continue
        mkeys = _cell_keys(np.floor(centers[members] / h).astype(np.int64))
        order = np.argsort(mkeys, kind="stable")
        mkeys, msorted = mkeys[order], members[order]
        qcells = np.floor(centers[q] / h).astype(np.int64)
        for off in _OFFSETS:
            keys = _cell_keys(qcells + off)
            lo = np.searchsorted(mkeys, keys, side="left")
            cnt = np.searchsorted(mkeys, keys, side="right") - lo
            total = int(cnt.sum())
            if total == 0:
                continue
            qi = np.repeat(q, cnt)
            start = np.repeat(lo - (np.cumsum(cnt) - cnt), cnt)
            mj = msorted[np.arange(total) + start]
            same = levels[qi] == L
            keep = (qi != mj) & (~same | (qi < mj))
            qi, mj = qi[keep], mj[keep]
            yield np.minimum(qi, mj), np.maximum(qi, mj)


def _pair_source(P: Packing, strategy: str, rtol: float):
    if strategy == "all_pairs":
        return _all_pairs(P)
    if strategy == "grid":
        if P.chart != "r3":
            raise InvalidInputError("grid strategy needs an r3 packing; project s3 packings first")
        return _grid_pairs(P, rtol)
    raise InvalidInputError(f"unknown strategy {strategy!r}")


def _classify(P: Packing, pairs, rtol: float):
    """Collect tangent pairs, overlapping pairs and the worst relative gap."""
    tangent, overlap = [], []
    worst = (np.inf, 0.0, None)
    for i, j in pairs:
        if len(i) == 0:
            continue
        rsum = P.radii[i] + P.radii[j]
        gap = _distances(P.chart, P.centers[i], P.centers[j]) - rsum
        rel = gap / rsum
        k = int(np.argmin(rel))
        if rel[k] < worst[0]:
            worst = (float(rel[k]), float(gap[k]), (int(i[k]), int(j[k])))
        t = np.abs(gap) <= rtol * rsum
        tangent.append(np.stack([i[t], j[t]], axis=1))
        o = gap < -rtol * rsum
        if np.any(o):
            overlap.append(np.stack([i[o], j[o], ], axis=1))
    edges = np.concatenate(tangent) if tangent else np.zeros((0, 2), dtype=np.int64)
    edges = np.unique(edges.astype(np.int64), axis=0) if len(edges) else edges.astype(np.int64)
    over = np.unique(np.concatenate(overlap), axis=0) if overlap else np.zeros((0, 2), dtype=np.int64)
    return edges, over, worst


# ---------------------------------------------------------------- validity


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    worst_gap: float | None
    worst_relative_gap: float | None
    worst_pair: tuple[int, int] | None
    overlap_count: int


def validate_packing(P: Packing, rtol: float = DEFAULT_RTOL, strategy: str = "auto") -> ValidityReport:
    """Check that ball interiors are pairwise disjoint within ``rtol``.

    With ``strategy="auto"`` r3 packings use the grid and s3 packings the
    all-pairs sweep. The grid only inspects nearby pairs, so the reported
    worst gap is the minimum over near pairs (always exact when negative).
    """
    if strategy == "auto":
        strategy = "grid" if P.chart == "r3" else "all_pairs"
    _, over, (rel, gap, pair) = _classify(P, _pair_source(P, strategy, rtol), rtol)
    if pair is None:
        return ValidityReport(True, None, None, None, 0)
    return ValidityReport(len(over) == 0, gap, rel, pair, len(over))


# ---------------------------------------------------------------- nerve


@dataclass(frozen=True, eq=False)
class NerveGraph:
    """Tangency graph; ``edge_array`` rows are sorted pairs ``i < j``."""

    vertex_count: int
    edge_array: np.ndarray

    @property
    def edge_count(self) -> int:
        return len(self.edge_array)

    @cached_property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(map(tuple, self.edge_array.tolist()))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edge_array.ravel(), minlength=self.vertex_count)

    @cached_property
    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for i, j in self.edge_array.tolist():
            adj[i].append(j)
            adj[j].append(i)
        return [sorted(a) for a in adj]

    def induced(self, vertices) -> "NerveGraph":
        """Subgraph on ``vertices`` (relabelled to 0..len-1 in the given order)."""
        vertices = np.asarray(vertices, dtype=np.int64)
        index = np.full(self.vertex_count, -1, dtype=np.int64)
        index[vertices] = np.arange(len(vertices))
        e = index[self.edge_array]
        e = e[np.all(e >= 0, axis=1)]
        e = np.sort(e, axis=1)
        e = e[np.lexsort((e[:, 1], e[:, 0]))] if len(e) else e.reshape(0, 2)
        return NerveGraph(len(vertices), e)


def build_nerve(P: Packing, rtol: float = DEFAULT_RTOL, strategy: str = "all_pairs") -> NerveGraph:
    """Tangency nerve of ``P``; raises :class:`OverlapError` on any overlap."""
    edges, over, _ = _classify(P, _pair_source(P, strategy, rtol), rtol)
    if len(over):
        i, j = (int(v) for v in over[0])
        gap = float(_distances(P.chart, P.centers[i], P.centers[j]) - P.radii[i] - P.radii[j])
        raise OverlapError(i, j, gap)
    return NerveGraph(len(P), edges.reshape(-1, 2))


# ---------------------------------------------------------------- statistics


@dataclass(frozen=True)
class PackingStats:
    ball_count: int
    tangency_count: int
    average_kissing: Fraction
    larger_neighbor_max: int

    @property
    def k(self) -> float:
        return float(self.average_kissing)


def larger_neighbor_counts(P: Packing, G: NerveGraph) -> np.ndarray:
    """Per ball, the number of tangent neighbors at least as large as itself."""
    e = G.edge_array
    i, j = e[:, 0], e[:, 1]
    ri, rj = P.radii[i], P.radii[j]
    counts = np.bincount(i[rj >= ri], minlength=len(P))
    counts += np.bincount(j[ri >= rj], minlength=len(P))
    return counts


def packing_stats(P: Packing, G: NerveGraph) -> PackingStats:
    n = len(P)
    if n == 0:
        raise EmptyPackingError("average kissing number of an empty packing is undefined")
    if G.vertex_count != n:
        raise InvalidInputError("nerve does not belong to this packing")
    m = G.edge_count
    return PackingStats(n, m, Fraction(2 * m, n), int(larger_neighbor_counts(P, G).max()))


def check_nerve_condition(vertex_count: int, edge_count: int) -> bool:
    """``2|E| < (8 + 4 sqrt 3) |V|``, necessary for a ball-packing nerve."""
    if vertex_count < 0 or edge_count < 0:
        raise InvalidInputError("counts must be non-negative")
    return 2 * edge_count < NERVE_BOUND * vertex_count
