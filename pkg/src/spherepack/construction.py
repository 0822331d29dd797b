"""The 120-ball packing of S^3 and the layered packings built from it.

Layer indices follow the stacking order toward ``b``: layer 0 is ``-R``,
then ``Q``, ``R``, ``sigma(Q)``, ``sigma(R)``, ... so the k-th image of the
seed occupies layers ``2k``, ``2k + 1`` and ``2k + 2``. Labels on the
generated packings are ``"L<layer>"``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    ClaimFailureError,
    ConstructionError,
    InvalidInputError,
    LayeringError,
    PropertyViolationError,
)
from .geometry import (
    GOLDEN,
    ConformalMapS3,
    SphericalSphere,
    angular_distances,
    apply_conformal_to_balls,
)
from .packing import Packing, build_nerve, validate_packing

BALL_RADIUS = math.pi / 10  # 18 degrees
KISS_ANGLE = math.pi / 5  # 36 degrees
NEXT_ANGLE = math.pi / 3  # 60 degrees
SEED_BALLS = 118
SEED_TANGENCIES = 696
BALLS_PER_LAYER = 106
TANGENCIES_PER_LAYER = 666
LIMIT_K = Fraction(2 * TANGENCIES_PER_LAYER, BALLS_PER_LAYER)  # 666/53
DIRECT_MAX_N = 12
MATCH_RTOL = 1e-6


def _even_permutations(n: int = 4):
    for perm in itertools.permutations(range(n)):
        inversions = sum(perm[a] > perm[b] for a in range(n) for b in range(a + 1, n))
        if inversions % 2 == 0:
            yield perm


def _orbit(base) -> np.ndarray:
    pts = set()
    for perm in _even_permutations():
        permuted = [base[k] for k in perm]
        for signs in itertools.product((1.0, -1.0), repeat=4):
            pts.add(tuple(float(s * v) + 0.0 for s, v in zip(signs, permuted)))
    return np.array(sorted(pts))


def d600_orbits() -> list[np.ndarray]:
    """The three vertex orbits of the 600-cell (sizes 8, 16, 96)."""
    return [
        _orbit((1.0, 0.0, 0.0, 0.0)),
        _orbit((0.5, 0.5, 0.5, 0.5)),
        _orbit((GOLDEN / 2, 0.5, 1 / (2 * GOLDEN), 0.0)),
    ]


def build_d600() -> Packing:
    """120 balls of radius 18 degrees centered at the 600-cell vertices,
    ordered lexicographically by coordinates."""
    pts = np.vstack(d600_orbits())
    pts = pts[np.lexsort(pts.T[::-1])]
    return Packing("s3", pts, np.full(len(pts), BALL_RADIUS))


def _cos_dist(P: Packing) -> np.ndarray:
    return P.centers @ P.centers.T


@dataclass(frozen=True)
class PropertyReport:
    neighbor_counts: tuple[int, ...]
    max_kiss_angle_error: float
    mutual_tangencies: tuple[int, ...]
    neighbor_degrees_ok: bool
    min_non_kissing_angle: float
    self_antipodal: bool
    max_antipode_error: float


def verify_d600_properties(D: Packing, rtol: float = 1e-9) -> PropertyReport:
    G = build_nerve(D, rtol)
    counts = tuple(int(x) for x in G.degrees)
    if any(c != 12 for c in counts):
        raise PropertyViolationError("twelve-neighbors", f"degrees {sorted(set(counts))}")
    e = G.edge_array
    ang = angular_distances(D.centers[e[:, 0]], D.centers[e[:, 1]])
    kiss_err = float(np.max(np.abs(ang - KISS_ANGLE)))
    dots = np.einsum("ij,ij->i", D.centers[e[:, 0]], D.centers[e[:, 1]])
    if kiss_err > 1e-12 or np.max(np.abs(dots - GOLDEN / 2)) > 1e-12:
        raise PropertyViolationError("kissing-distance-36deg", f"max error {kiss_err:.3e}")

    mutual, degrees_ok = [], True
    edges = G.edges
    for v, nbrs in enumerate(G.adjacency):
        inner = [(a, b) for a, b in itertools.combinations(nbrs, 2) if (a, b) in edges]
        mutual.append(len(inner))
        deg = {a: 0 for a in nbrs}
        for a, b in inner:
            deg[a] += 1
            deg[b] += 1
        degrees_ok &= all(d == 5 for d in deg.values())
    if any(m != 30 for m in mutual):
        raise PropertyViolationError("icosahedral-30-mutual", f"counts {sorted(set(mutual))}")
    if not degrees_ok:
        raise PropertyViolationError("icosahedral-degree-5")

    n = len(D)
    adj = np.zeros((n, n), dtype=bool)
    adj[e[:, 0], e[:, 1]] = adj[e[:, 1], e[:, 0]] = True
    np.fill_diagonal(adj, True)
    i, j = np.nonzero(~adj)
    far = angular_distances(D.centers[i], D.centers[j])
    min_far = float(far.min())
    if abs(min_far - NEXT_ANGLE) > 1e-12:
        raise PropertyViolationError("next-nearest-60deg", f"min non-kissing angle {min_far!r}")

    neg = -D.centers
    dist = angular_distances(neg[:, None, :], D.centers[None, :, :])
    anti_err = float(dist.min(axis=1).max())
    if anti_err > 1e-12:
        raise PropertyViolationError("self-antipodal", f"max error {anti_err:.3e}")
    return PropertyReport(counts, kiss_err, tuple(mutual), degrees_ok, min_far, True, anti_err)


# ---------------------------------------------------------------- the contracting map


def inversion_radius() -> float:
    """arccos(sqrt((2 + golden)/5)), about 31.7175 degrees."""
    return math.acos(math.sqrt((2.0 + GOLDEN) / 5.0))


@dataclass(frozen=True, eq=False)
class SeedData:
    D: Packing
    b0_index: int
    b: np.ndarray
    R_indices: tuple[int, ...]
    S: SphericalSphere
    sigma: ConformalMapS3
    antipode_index: int
    kissing_point_radius: float

    @property
    def P0_indices(self) -> np.ndarray:
        drop = {self.b0_index, self.antipode_index}
        return np.array([i for i in range(len(self.D)) if i not in drop])

    @property
    def negR_indices(self) -> tuple[int, ...]:
        """Balls of D kissing ``-B0``, i.e. the antipodes of ``R``."""
        neg = -self.D.centers[list(self.R_indices)]
        d = angular_distances(neg[:, None, :], self.D.centers[None, :, :])
        return tuple(sorted(int(k) for k in d.argmin(axis=1)))

    @property
    def Q_indices(self) -> tuple[int, ...]:
        skip = set(self.R_indices) | set(self.negR_indices)
        return tuple(int(i) for i in self.P0_indices if i not in skip)


def _index_of(D: Packing, point) -> int:
    d = angular_distances(D.centers, np.asarray(point)[None, :])
    k = int(np.argmin(d))
    if d[k] > 1e-9:
        raise InvalidInputError("point is not a ball center of D")
    return k


def build_sigma(D: Packing, b0_index: int | None = None, tol: float = 1e-12) -> SeedData:
    """Inversion sphere ``S`` around ``b`` and the contraction ``p -> I_S(-p)``.

    The radius of ``S`` is taken from the closed form and cross-checked
    against the distance from ``b`` to all 30 kissing points among the
    twelve balls around ``B0``.
    """
    if b0_index is None:
        b0_index = _index_of(D, np.array([1.0, 0.0, 0.0, 0.0]))
    if not 0 <= b0_index < len(D):
        raise InvalidInputError(f"b0_index {b0_index} out of range")
    G = build_nerve(D)
    b = D.centers[b0_index].copy()
    R = tuple(G.adjacency[b0_index])
    if len(R) != 12:
        raise ConstructionError(f"B0 has {len(R)} kissing balls, expected 12")
    alpha = inversion_radius()
    kiss_pts = [
        (D.centers[i] + D.centers[j]) / np.linalg.norm(D.centers[i] + D.centers[j])
        for i, j in itertools.combinations(R, 2)
        if (min(i, j), max(i, j)) in G.edges
    ]
    if len(kiss_pts) != 30:
        raise ConstructionError(f"{len(kiss_pts)} kissing points among R, expected 30")
    radii = angular_distances(np.array(kiss_pts), b[None, :])
    worst = float(np.max(np.abs(radii - alpha)))
    if worst > tol:
        raise ConstructionError(f"inversion radius routes disagree by {worst:.3e} rad")
    S = SphericalSphere(b, alpha)
    sigma = ConformalMapS3(S, pre_antipode=True, power=1)
    seed = SeedData(D, b0_index, b, R, S, sigma, _index_of(D, -b), float(radii[0]))

    negR = list(seed.negR_indices)
    img_c, img_r = apply_conformal_to_balls(sigma, D.centers[negR], D.radii[negR])
    pairing = _match(img_c, img_r, D.centers[list(R)], D.radii[list(R)])
    if pairing is None:
        raise ConstructionError("sigma does not carry -R onto R")
    return seed


# ---------------------------------------------------------------- layered packings


@dataclass(frozen=True)
class LayerTally:
    n: int
    ball_count: int
    tangency_count: int
    k: Fraction


def layer_tally(n: int) -> LayerTally:
    balls = SEED_BALLS + BALLS_PER_LAYER * n
    tangencies = SEED_TANGENCIES + TANGENCIES_PER_LAYER * n
    return LayerTally(n, balls, tangencies, Fraction(2 * tangencies, balls))


def layer_tallies(max_n: int) -> list[LayerTally]:
    if max_n < 0:
        raise InvalidInputError("max_n must be non-negative")
    return [layer_tally(n) for n in range(max_n + 1)]


def _match(c_new, r_new, c_old, r_old, rtol: float = MATCH_RTOL):
    """Nearest-center pairing of two ball lists; None unless every ball has
    a distinct partner within ``rtol`` of its radius in center and radius."""
    d = angular_distances(c_new[:, None, :], c_old[None, :, :])
    nearest = d.argmin(axis=1)
    if len(set(nearest.tolist())) != len(c_old) or len(c_new) != len(c_old):
        return None
    scale = r_old[nearest]
    if np.any(d[np.arange(len(c_new)), nearest] > rtol * scale):
        return None
    if np.any(np.abs(r_new - scale) > rtol * scale):
        return None
    return nearest


def _layer_geometry(seed: SeedData, n: int, match_shared: bool = True):
    """Centers, radii and layer index of ``P_n`` built by iterating sigma.

    With ``match_shared`` each image of ``-R`` is paired against the previous
    image of ``R`` before being dropped as a duplicate.
    """
    D = seed.D
    parts = [list(seed.negR_indices), list(seed.Q_indices), list(seed.R_indices)]
    cur = [(D.centers[p], D.radii[p]) for p in parts]
    layers = list(cur)
    for k in range(1, n + 1):
        cur = [apply_conformal_to_balls(seed.sigma, c, r) for c, r in cur]
        prev_c, prev_r = layers[2 * k]
        if match_shared and _match(cur[0][0], cur[0][1], prev_c, prev_r) is None:
            raise LayeringError(f"shared layer {2 * k} does not match its sigma image", (2 * k, 2 * k))
        layers.extend(cur[1:])
    centers = np.vstack([c for c, _ in layers])
    radii = np.concatenate([r for _, r in layers])
    layer = np.concatenate([np.full(len(r), idx) for idx, (_, r) in enumerate(layers)])
    return centers, radii, layer


def build_pn(seed: SeedData, n: int, mode: str = "direct", rtol: float = 1e-9):
    """Layered packing ``P_n`` and the tallies of ``P_0 .. P_n``.

    ``direct`` validates the whole packing numerically and requires the
    nerve counts to equal the combinatorial tallies. ``windowed`` verifies
    the single window ``P_0 u sigma(P_0)`` and relies on conformal invariance
    for the remaining layers; its geometry is still returned, unvalidated.
    """
    if n < 0:
        raise InvalidInputError("n must be non-negative")
    if mode not in ("direct", "windowed"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    if mode == "direct" and n > DIRECT_MAX_N:
        raise InvalidInputError(f"direct mode supports n <= {DIRECT_MAX_N}; use windowed")
    # squared chord lengths underflow once layers shrink below ~1e-150 rad,
    # so windowed mode leans on the verified window instead of re-matching
    centers, radii, layer = _layer_geometry(seed, n, match_shared=(mode == "direct"))
    if np.any(radii < np.finfo(float).tiny):
        raise InvalidInputError(f"layer radii underflow double precision at n={n}")
    P = Packing("s3", centers, radii, tuple(f"L{k}" for k in layer))
    tallies = layer_tallies(n)
    if mode == "windowed":
        verify_layer_interface(seed, rtol)
        return P, tallies

    report = validate_packing(P, rtol)
    if not report.ok:
        i, j = report.worst_pair
        raise LayeringError(
            f"layers {layer[i]} and {layer[j]} overlap (balls {i}, {j})", (int(layer[i]), int(layer[j]))
        )
    G = build_nerve(P, rtol)
    e = G.edge_array
    span = np.abs(layer[e[:, 0]] - layer[e[:, 1]])
    if np.any(span > 1):
        k = int(np.argmax(span))
        pair = (int(layer[e[k, 0]]), int(layer[e[k, 1]]))
        raise LayeringError(f"non-adjacent layers {pair} touch", pair)
    for t in tallies:
        keep = np.flatnonzero(layer <= 2 * t.n + 2)
        sub = G.induced(keep)
        if len(keep) != t.ball_count or sub.edge_count != t.tangency_count:
            raise LayeringError(
                f"P_{t.n}: nerve has {len(keep)} balls / {sub.edge_count} tangencies, "
                f"expected {t.ball_count} / {t.tangency_count}",
                (2 * t.n + 1, 2 * t.n + 2),
            )
    return P, tallies


# ---------------------------------------------------------------- claims


@dataclass(frozen=True)
class ClaimReport:
    min_center_angle: float
    min_nearest_angle: float
    inversion_radius: float
    slack: float


def verify_separation_claim(seed: SeedData, tol: float = 1e-9) -> ClaimReport:
    """Balls of ``P_0`` outside ``R`` stay clear of ``S``."""
    R = set(seed.R_indices)
    idx = [i for i in seed.P0_indices if i not in R]
    d = angular_distances(seed.D.centers[idx], seed.b[None, :])
    min_center = float(d.min())
    min_near = float((d - seed.D.radii[idx]).min())
    if min_center < NEXT_ANGLE - tol:
        raise ClaimFailureError(f"a ball center is {math.degrees(min_center):.6f} deg from b")
    if min_near < math.radians(42.0) - tol or min_near <= seed.S.radius:
        raise ClaimFailureError(f"a ball reaches {math.degrees(min_near):.6f} deg from b")
    return ClaimReport(min_center, min_near, seed.S.radius, min_near - seed.S.radius)


@dataclass(frozen=True)
class InterfaceReport:
    shared_matches: int
    q_count: int
    q_clearance: float
    window_balls: int
    window_tangencies: int
    new_tangencies: int
    cross_layer_tangencies: dict[tuple[int, int], int]


def verify_layer_interface(seed: SeedData, rtol: float = 1e-9) -> InterfaceReport:
    """Numerically verify the window ``P_0 u sigma(P_0)``.

    Every further window is a conformal image of this one, so this single
    check certifies the whole stack.
    """
    D = seed.D
    R, negR, Q = list(seed.R_indices), list(seed.negR_indices), list(seed.Q_indices)
    img_c, img_r = apply_conformal_to_balls(seed.sigma, D.centers[negR], D.radii[negR])
    pairing = _match(img_c, img_r, D.centers[R], D.radii[R])
    if pairing is None:
        raise LayeringError("sigma(-R) does not coincide with R", (2, 2))

    alpha = seed.S.radius
    dq = angular_distances(D.centers[Q], seed.b[None, :])
    rq = D.radii[Q]
    clearance = float(min((dq - rq - alpha).min(), (math.pi - alpha - dq - rq).min()))
    if clearance <= 0.0:
        raise LayeringError("Q is not strictly between -S and S", (1, 1))

    centers, radii, layer = _layer_geometry(seed, 1)
    W = Packing("s3", centers, radii)
    report = validate_packing(W, rtol)
    if not report.ok:
        i, j = report.worst_pair
        raise LayeringError(f"window layers {layer[i]} and {layer[j]} overlap", (int(layer[i]), int(layer[j])))
    G = build_nerve(W, rtol)
    e = G.edge_array
    la, lb = layer[e[:, 0]], layer[e[:, 1]]
    cross: dict[tuple[int, int], int] = {}
    for a, b in zip(np.minimum(la, lb).tolist(), np.maximum(la, lb).tolist()):
        cross[(a, b)] = cross.get((a, b), 0) + 1
    bad = [p for p in cross if p[1] - p[0] > 1]
    if bad:
        raise LayeringError(f"non-adjacent layers {bad[0]} touch", bad[0])
    p0_edges = G.induced(np.flatnonzero(layer <= 2)).edge_count
    return InterfaceReport(
        shared_matches=len(pairing),
        q_count=len(Q),
        q_clearance=clearance,
        window_balls=len(W),
        window_tangencies=G.edge_count,
        new_tangencies=G.edge_count - p0_edges,
        cross_layer_tangencies=dict(sorted(cross.items())),
    )


def contraction_ratios(P: Packing, n: int) -> np.ndarray:
    """Radius ratios between layer ``Q`` images ``sigma^n(Q)`` and ``sigma^(n-1)(Q)``."""
    layer = np.array([int(s[1:]) for s in P.labels])
    a = P.radii[layer == 2 * n + 1]
    b = P.radii[layer == 2 * n - 1]
    return a / b
