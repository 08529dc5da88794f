import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from twophase.errors import NotMonotone, OutOfRange
from twophase.inversion import (
    CauchyPair,
    forward_dirichlet,
    identifiability_table,
    is_strictly_monotone,
    no_inclusion_value,
    poisson_nonuniqueness_demo,
    reconstruct_radius,
    scan_forward_map,
    sensitivity,
)
from twophase import inversion

ARGS = dict(R=1.0, sigma_c=2.0, sigma_s=1.0, g=-0.5, N=2)


def bessel_two_layer(rho, R, sc, ss, g):
    """v(R) from a dense solve with I0/K0 (N = 2)."""
    qc, qs = 1 / np.sqrt(sc), 1 / np.sqrt(ss)
    i0, i1, k0, k1 = special.i0, special.i1, special.k0, special.k1
    A = np.array([
        [i0(qc * rho), -i0(qs * rho), -k0(qs * rho)],
        [sc * qc * i1(qc * rho), -ss * qs * i1(qs * rho), ss * qs * k1(qs * rho)],
        [0.0, ss * qs * i1(qs * R), -ss * qs * k1(qs * R)],
    ])
    a, b, c = np.linalg.solve(A, [0.0, 0.0, g])
    return 1 + b * i0(qs * R) + c * k0(qs * R)


@pytest.mark.parametrize("rho", [0.1, 0.4, 0.8])
def test_forward_matches_bessel_oracle(rho):
    assert forward_dirichlet(rho, **ARGS) == pytest.approx(bessel_two_layer(rho, 1.0, 2.0, 1.0, -0.5), rel=1e-11)


def test_no_inclusion_value_frozen():
    # 1 + g I0(1) / I1(1) with g = -0.5, sigma = 1
    oracle = 1 - 0.5 * special.i0(1.0) / special.i1(1.0)
    assert no_inclusion_value(1.0, 1.0, -0.5) == pytest.approx(oracle, rel=1e-13)
    assert oracle == pytest.approx(-0.12009686193504576, rel=1e-13)


def test_vanishing_inclusion_limit():
    assert abs(forward_dirichlet(1e-3, **ARGS) - no_inclusion_value(1.0, 1.0, -0.5)) < 1e-6


def test_equal_conductivities_hide_rho():
    vals = [forward_dirichlet(r, 1.0, 1.3, 1.3, -0.5) for r in (0.2, 0.5, 0.9)]
    assert np.ptp(vals) < 1e-12


def test_forward_preconditions():
    with pytest.raises(ValueError):
        forward_dirichlet(1.0, **ARGS)
    with pytest.raises(ValueError):
        forward_dirichlet(0.5, 1.0, 2.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        CauchyPair(0.0, 1.0)


def test_scan_is_strictly_monotone():
    scan = scan_forward_map(1.0, 2.0, 1.0, -0.5)
    assert len(scan) == 100
    assert is_strictly_monotone(scan)


def test_roundtrip_example():
    pair = CauchyPair(-0.5, forward_dirichlet(0.4, **ARGS))
    rec = reconstruct_radius(pair, 1.0, 2.0, 1.0)
    assert rec.rho == pytest.approx(0.4, abs=1e-3)
    assert rec.residual < 1e-10 and rec.monotone


@settings(max_examples=10, deadline=None)
@given(rho=st.floats(0.05, 0.95), sc=st.sampled_from([0.5, 2.0, 3.0]))
def test_roundtrip_property(rho, sc):
    pair = CauchyPair(-0.5, forward_dirichlet(rho, 1.0, sc, 1.0, -0.5))
    assert reconstruct_radius(pair, 1.0, sc, 1.0, scan_points=40).rho == pytest.approx(rho, abs=1e-3)


def test_noise_moves_estimate_by_sensitivity():
    rho, noise = 0.5, 1e-6
    clean = forward_dirichlet(rho, **ARGS)
    rec = reconstruct_radius(CauchyPair(-0.5, clean + noise), 1.0, 2.0, 1.0)
    predicted = noise / sensitivity(rho, **ARGS)
    assert rec.rho - rho == pytest.approx(predicted, rel=1e-2)


def test_out_of_range_trace():
    with pytest.raises(OutOfRange):
        reconstruct_radius(CauchyPair(-0.5, 5.0), 1.0, 2.0, 1.0)


def test_equal_conductivities_not_identifiable():
    trace = forward_dirichlet(0.5, 1.0, 1.0, 1.0, -0.5)
    try:
        rec = reconstruct_radius(CauchyPair(-0.5, trace + 1e-9), 1.0, 1.0, 1.0)
    except OutOfRange:
        return
    assert not rec.monotone


def test_non_monotone_scan_with_two_roots(monkeypatch):
    def bumpy(rho, R, sc, ss, g, N=2):
        return (rho - 0.5) ** 2

    monkeypatch.setattr(inversion, "forward_dirichlet", bumpy)
    with pytest.raises(NotMonotone) as info:
        reconstruct_radius(CauchyPair(-0.5, 0.04), 1.0, 2.0, 1.0)
    assert sorted(round(r, 6) for r in info.value.roots) == [0.3, 0.7]


def test_poisson_rows_identical():
    rows = poisson_nonuniqueness_demo([0.2, 0.5, 0.8], 2.0, 1.0)
    assert {r.boundary_value for r in rows} == {0.0}
    # sigma_s u'(1) = -1/N
    assert {r.boundary_flux for r in rows} == {-0.5}
    assert len(poisson_nonuniqueness_demo([0.3], 2.0, 1.0)) == 1


def test_identifiability_contrast():
    table = identifiability_table([0.2, 0.5, 0.8], 1.0, 2.0, 1.0, -0.5)
    mod = [row["modified_value"] for row in table]
    assert abs(mod[0] - mod[-1]) > 1e-4
    assert np.ptp([row["poisson_value"] for row in table]) == 0.0
