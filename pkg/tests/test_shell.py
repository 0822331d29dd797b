import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mc_cap_fraction, sphere_samples
from spherepack.errors import CertificateError, EmptyPackingError, InvalidInputError
from spherepack.packing import Packing, build_nerve
from spherepack.shell import (
    ShellParams,
    cap_area_fraction,
    kissing_pair_fraction,
    optimize_rho,
    pair_constant,
    pair_sum,
    shell_certificate,
)

SQ3 = math.sqrt(3.0)


def quantize(x, bits=30):
    """Drop low mantissa bits so that sums of two radii within 2^20 of each
    other are exact in double precision."""
    m, e = np.frexp(x)
    return np.ldexp(np.round(m * 2.0**bits) / 2.0**bits, e)


radius = st.floats(-3, 3).map(lambda t: float(quantize(10.0**t)))


# ---------------------------------------------------------------- cap_area_fraction


def test_cap_for_equal_kissing_unit_balls(rng):
    cap = cap_area_fraction(2.0, SQ3, 1.0)
    assert cap.partial
    assert cap.fraction == pytest.approx((1 - SQ3 / 2) / 2, abs=1e-15)
    assert cap.fraction == pytest.approx(0.0669873, abs=1e-7)
    est = mc_cap_fraction(sphere_samples(10**6, rng), 2.0, SQ3, 1.0, np.array([0.6, 0.0, 0.8]))
    assert est == pytest.approx(cap.fraction, abs=1e-3)


def test_cap_shell_inside_ball():
    cap = cap_area_fraction(0.1, 1.0, 5.0)
    assert cap.fraction == 1.0 and not cap.partial


def test_cap_disjoint():
    assert cap_area_fraction(10.0, 1.0, 1.0).fraction == 0.0


@pytest.mark.parametrize("args", [(0, 1, 1), (1, -1, 1), (1, 1, 0)])
def test_cap_rejects_non_positive(args):
    with pytest.raises(InvalidInputError):
        cap_area_fraction(*args)


# ---------------------------------------------------------------- kissing_pair_fraction


def test_pair_fraction_equal_radii():
    assert kissing_pair_fraction(1, 1) == pytest.approx((1 - SQ3 / 2) / 2, abs=1e-15)
    assert kissing_pair_fraction(1, 1) == pytest.approx(cap_area_fraction(2, SQ3, 1).fraction, abs=1e-15)


def test_pair_fraction_clamps_small_neighbour():
    assert (SQ3 - 1) / 2 == pytest.approx(0.366, abs=1e-3)
    assert kissing_pair_fraction(1, 0.3) == 0.0
    threshold = (SQ3 - 1) / 2
    assert kissing_pair_fraction(1, threshold * (1 + 1e-9)) > 0.0
    assert kissing_pair_fraction(1, threshold * (1 - 1e-9)) == 0.0


def test_pair_fraction_limit():
    limit = 0.5 - 1 / (2 * SQ3)
    assert limit == pytest.approx(0.211325, abs=1e-6)
    vals = [kissing_pair_fraction(1, r) for r in (1, 10, 1e3, 1e6)]
    assert all(a < b < limit for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(limit, abs=1e-6)


def test_pair_fraction_rejects_non_positive():
    with pytest.raises(InvalidInputError):
        kissing_pair_fraction(0, 1)


# ---------------------------------------------------------------- pair_sum and rho


def test_pair_sum_values():
    assert pair_sum(1, 2).value == pytest.approx(1 - SQ3 / 2, abs=1e-15)
    assert pair_sum(1, 2).value == pytest.approx(0.1339746, abs=1e-7)
    assert pair_sum(1, 1.5, ShellParams(2.0)).value == 0.125
    assert pair_constant(1.0) == 0.0
    assert pair_constant(1 + 1e-9) == pytest.approx(0, abs=1e-9)


def test_pair_sum_flags_clamped_case():
    res = pair_sum(1, 0.1)
    assert res.partial
    assert res.value >= pair_constant(SQ3)


def test_params_validated():
    for bad in (1.0, 3.0, 0.5):
        with pytest.raises(InvalidInputError):
            ShellParams(bad)
    assert ShellParams().k_bound == pytest.approx(8 + 4 * SQ3, rel=1e-15)


def test_optimize_rho():
    rho = optimize_rho(1.01, 2.99)
    assert rho == pytest.approx(SQ3, abs=1e-6)
    assert pair_constant(rho) == pytest.approx(0.1339746, abs=1e-7)
    assert pair_constant(SQ3 + 0.1) < pair_constant(SQ3)
    assert pair_constant(SQ3 - 0.1) < pair_constant(SQ3)


@pytest.mark.parametrize("lo,hi", [(2.0, 1.5), (0.5, 2.0), (1.5, 3.5)])
def test_optimize_rho_rejects_bad_interval(lo, hi):
    with pytest.raises(InvalidInputError):
        optimize_rho(lo, hi)


# ---------------------------------------------------------------- properties


@settings(max_examples=300, deadline=None)
@given(radius, radius, st.sampled_from([1.2, SQ3, 2.5]))
def test_closed_form_matches_geometry(rB, rC, rho):
    d = rB + rC
    geo = cap_area_fraction(d, rho * rB, rC)
    closed = kissing_pair_fraction(rB, rC, ShellParams(rho))
    if geo.partial:
        assert closed == pytest.approx(geo.fraction, abs=1e-12)
    else:
        assert closed == 0.0 and geo.fraction == 0.0


@settings(max_examples=300, deadline=None)
@given(radius, radius, st.sampled_from([1.2, SQ3, 2.5]))
def test_pair_sum_never_below_constant(rB, rC, rho):
    p = ShellParams(rho)
    total = cap_area_fraction(rB + rC, rho * rB, rC).fraction + cap_area_fraction(rB + rC, rho * rC, rB).fraction
    assert total >= p.pair_constant - 1e-12
    a, b = kissing_pair_fraction(rB, rC, p), kissing_pair_fraction(rC, rB, p)
    if a > 0 and b > 0:
        assert a + b == pytest.approx(p.pair_constant, abs=1e-12)


# ---------------------------------------------------------------- certificate


def r3(c, r):
    return Packing("r3", np.asarray(c, float), np.asarray(r, float))


def test_certificate_two_unit_balls():
    P = r3([[0, 0, 0], [2, 0, 0]], [1, 1])
    rep = shell_certificate(P, build_nerve(P))
    np.testing.assert_allclose(rep.occupancy, kissing_pair_fraction(1, 1), atol=1e-15)
    assert rep.k == 1.0
    assert rep.k_bound == pytest.approx(14.928, abs=1e-3)
    assert rep.passed


def test_certificate_counts_non_tangent_balls():
    # a small ball floating inside the shell of the big one still occupies it
    P = r3([[0, 0, 0], [1.7, 0, 0]], [1, 0.1])
    rep = shell_certificate(P, build_nerve(P))
    assert build_nerve(P).edge_count == 0
    assert rep.occupancy[0] == pytest.approx(cap_area_fraction(1.7, SQ3, 0.1).fraction)
    assert rep.occupancy[0] > 0


def test_certificate_projected_d(D_r3):
    rep = shell_certificate(D_r3, build_nerve(D_r3, strategy="grid"))
    assert rep.passed
    assert rep.k == 12.0 < 8 + 4 * SQ3
    assert rep.max_occupancy <= 1 + 1e-9


def test_certificate_rejects_overlap_heavy_input():
    # many balls jammed onto one shell: not a packing, occupancy exceeds one
    angles = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    ring = np.stack([SQ3 * np.cos(angles), SQ3 * np.sin(angles), np.zeros_like(angles)], axis=1)
    P = r3(np.vstack([[0, 0, 0], ring]), np.r_[1.0, np.full(400, 0.9)])
    G = build_nerve(r3([[0, 0, 0]], [1.0]))
    G = type(G)(len(P), G.edge_array)
    with pytest.raises(CertificateError):
        shell_certificate(P, G)


def test_certificate_empty_and_chart(D):
    E = Packing("r3", np.zeros((0, 3)), np.zeros(0))
    with pytest.raises(EmptyPackingError):
        shell_certificate(E, build_nerve(E))
    with pytest.raises(InvalidInputError):
        shell_certificate(D, build_nerve(D))
