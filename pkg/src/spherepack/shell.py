"""Shell-area bound on the average kissing number of Euclidean ball packings.

Around each ball ``B`` of radius ``r(B)`` sits a concentric sphere of radius
``rho * r(B)``. The fraction ``a(B, C)`` of that sphere covered by ``C`` sums
to at most one over all ``C``, and for each tangent pair the two fractions
add up to at least ``1 - (3 + rho^2) / (4 rho)``. Counting gives
``k(P) <= 2 / (1 - (3 + rho^2) / (4 rho))``, which is ``8 + 4 sqrt 3`` at
``rho = sqrt 3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CertificateError, EmptyPackingError, InvalidInputError
from .packing import NerveGraph, Packing

OCCUPANCY_TOL = 1e-9
PAIR_TOL = 1e-12


@dataclass(frozen=True)
class ShellParams:
    rho: float = math.sqrt(3.0)

    def __post_init__(self):
        if not (1.0 < self.rho < 3.0):
            raise InvalidInputError(f"rho must lie in (1, 3), got {self.rho!r}")

    @property
    def pair_constant(self) -> float:
        return pair_constant(self.rho)

    @property
    def k_bound(self) -> float:
        return 2.0 / self.pair_constant


def pair_constant(rho: float) -> float:
    """``1 - (3 + rho^2) / (4 rho)``: the lower bound on a(B,C) + a(C,B)."""
    return 1.0 - (3.0 + rho * rho) / (4.0 * rho)


@dataclass(frozen=True)
class CapGeometry:
    d: float
    shell_radius: float
    r: float
    cos_theta: float | None
    fraction: float

    @property
    def partial(self) -> bool:
        return self.cos_theta is not None


def _cap_fractions(d, s, r):
    """Vectorized covered fraction of a sphere of radius ``s`` by a ball of
    radius ``r`` whose center is ``d`` away; also returns cos(theta), NaN
    outside the partial case."""
    d, s, r = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (d, s, r)))
    miss = (d - r >= s) | (d + r <= s)
    inside = d + s <= r
    partial = ~(miss | inside)
    with np.errstate(divide="ignore", invalid="ignore"):
        # (d - r)(d + r) rather than d^2 - r^2: avoids cancellation when r >> s
        cos_t = ((d - r) * (d + r) + s * s) / (2.0 * d * s)
    cos_t = np.where(partial, np.clip(cos_t, -1.0, 1.0), np.nan)
    frac = np.where(partial, (1.0 - cos_t) / 2.0, np.where(inside, 1.0, 0.0))
    return frac, cos_t


def cap_area_fraction(d: float, shell_radius: float, r: float) -> CapGeometry:
    """Fraction of the sphere of radius ``shell_radius`` lying inside a ball
    of radius ``r`` whose center is at distance ``d`` from the sphere's."""
    if not (d > 0 and shell_radius > 0 and r > 0):
        raise InvalidInputError("cap_area_fraction needs positive d, shell_radius and r")
    frac, cos_t = _cap_fractions(d, shell_radius, r)
    cos_t = float(cos_t)
    return CapGeometry(d, shell_radius, r, None if math.isnan(cos_t) else cos_t, float(frac))


def kissing_pair_fraction(rB: float, rC: float, params: ShellParams = ShellParams()) -> float:
    """Closed-form a(B, C) for tangent balls, clamped at zero.

    Zero exactly when ``rC < (rho - 1) rB / 2``, where ``C`` no longer
    reaches the shell of ``B``.
    """
    if not (rB > 0 and rC > 0):
        raise InvalidInputError("radii must be positive")
    rho = params.rho
    value = 0.5 - (rB + rho * rho * rB + 2.0 * rC) / (4.0 * rho * (rB + rC))
    return max(0.0, value)


@dataclass(frozen=True)
class PairSum:
    value: float
    partial: bool  # True when one side was clamped to zero


def pair_sum(rB: float, rC: float, params: ShellParams = ShellParams()) -> PairSum:
    a = kissing_pair_fraction(rB, rC, params)
    b = kissing_pair_fraction(rC, rB, params)
    if a > 0.0 and b > 0.0:
        return PairSum(params.pair_constant, False)
    return PairSum(a + b, True)


def optimize_rho(lo: float = 1.01, hi: float = 2.99, xatol: float = 1e-10) -> float:
    """Maximizer of ``pair_constant`` on ``[lo, hi]``."""
    if not (1.0 < lo < hi < 3.0):
        raise InvalidInputError(f"search interval must be a non-empty subset of (1, 3), got ({lo}, {hi})")
    res = minimize_scalar(lambda x: -pair_constant(x), bounds=(lo, hi), method="bounded",
                          options={"xatol": xatol})
    return float(res.x)


@dataclass(frozen=True)
class ShellReport:
    rho: float
    occupancy: np.ndarray
    pair_sums: np.ndarray
    k: float
    k_bound: float
    max_occupancy: float
    min_pair_sum: float
    passed: bool


def occupancies(P: Packing, params: ShellParams = ShellParams(), block: int = 1 << 21) -> np.ndarray:
    """Sum over all other balls of the shell fraction they cover, per ball."""
    n = len(P)
    rho = params.rho
    out = np.zeros(n)
    rows = max(1, block // max(n, 1))
    for lo in range(0, n, rows):
        hi = min(n, lo + rows)
        diff = P.centers[lo:hi, None, :] - P.centers[None, :, :]
        d = np.sqrt(np.sum(diff * diff, axis=-1))
        s = rho * P.radii[lo:hi, None]
        r = np.broadcast_to(P.radii[None, :], d.shape)
        # geometric prefilter: only balls that reach the shell contribute
        near = (np.abs(d - s) < r) | (d + s <= r)
        near[np.arange(hi - lo), np.arange(lo, hi)] = False
        bi, cj = np.nonzero(near)
        frac, _ = _cap_fractions(d[bi, cj], s[bi, 0], r[bi, cj])
        out[lo:hi] += np.bincount(bi, weights=frac, minlength=hi - lo)
    return out


def shell_certificate(P: Packing, G: NerveGraph, params: ShellParams = ShellParams()) -> ShellReport:
    """Check the shell inequalities on a concrete r3 packing.

    Raises :class:`CertificateError` if some shell is more than fully
    covered, which cannot happen for a genuine packing.
    """
    if P.chart != "r3":
        raise InvalidInputError("shell_certificate needs an r3 packing; project s3 packings first")
    n = len(P)
    if n == 0:
        raise EmptyPackingError("k(P) is undefined for an empty packing")
    occ = occupancies(P, params)
    worst = int(np.argmax(occ))
    if occ[worst] > 1.0 + OCCUPANCY_TOL:
        raise CertificateError(f"ball {worst} has shell occupancy {occ[worst]!r} > 1")
    e = G.edge_array
    i, j = e[:, 0], e[:, 1]
    d = np.sqrt(np.sum((P.centers[i] - P.centers[j]) ** 2, axis=1))
    rho = params.rho
    sums = (_cap_fractions(d, rho * P.radii[i], P.radii[j])[0]
            + _cap_fractions(d, rho * P.radii[j], P.radii[i])[0])
    min_sum = float(sums.min()) if len(sums) else math.inf
    k = 2.0 * G.edge_count / n
    passed = min_sum >= params.pair_constant - PAIR_TOL and k < params.k_bound
    return ShellReport(rho, occ, sums, k, params.k_bound, float(occ[worst]), min_sum, bool(passed))
