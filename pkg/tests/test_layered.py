import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from twophase.layered import (
    AnnularConductor,
    LayeredConductor,
    OverdeterminedSpec,
    classify_case,
    find_rho_max,
    poisson_reference,
    solve_auxiliary_annulus,
    solve_auxiliary_concentric,
    solve_overdetermined_radial,
)


def bessel_concentric(rho, R, sc, ss, sm):
    """Core 1 + a I0, shell 1 + b I0 + c K0, exterior d K0 (N = 2), by a dense 4x4 solve."""
    qc, qs, qm = (1 / np.sqrt(x) for x in (sc, ss, sm))
    i0, i1, k0, k1 = special.i0, special.i1, special.k0, special.k1
    A = np.array([
        [i0(qc * rho), -i0(qs * rho), -k0(qs * rho), 0.0],
        [sc * qc * i1(qc * rho), -ss * qs * i1(qs * rho), ss * qs * k1(qs * rho), 0.0],
        [0.0, i0(qs * R), k0(qs * R), -k0(qm * R)],
        [0.0, ss * qs * i1(qs * R), -ss * qs * k1(qs * R), sm * qm * k1(qm * R)],
    ])
    a, b, c, d = np.linalg.solve(A, [0.0, 0.0, -1.0, 0.0])

    def u(r):
        r = np.asarray(r, dtype=float)
        core = 1 + a * i0(qc * r)
        shell = 1 + b * i0(qs * r) + c * k0(qs * r)
        out = d * k0(qm * r)
        return np.where(r < rho, core, np.where(r < R, shell, out))
    return u


def bessel_overdetermined(alpha, beta, c, R, rho, sc, ss):
    qc, qs = np.sqrt(alpha / sc), np.sqrt(alpha / ss)
    i0, i1, k0, k1 = special.i0, special.i1, special.k0, special.k1
    base = beta / alpha
    A = np.array([
        [i0(qc * rho), -i0(qs * rho), -k0(qs * rho)],
        [sc * qc * i1(qc * rho), -ss * qs * i1(qs * rho), ss * qs * k1(qs * rho)],
        [0.0, i0(qs * R), k0(qs * R)],
    ])
    a, b, cc = np.linalg.solve(A, [0.0, 0.0, c - base])
    return ss * (b * qs * i1(qs * R) - cc * qs * k1(qs * R))


def test_concentric_matches_bessel_oracle():
    k = LayeredConductor(0.35, 1.0, 2.0, 1.0, 1.0)
    f = solve_auxiliary_concentric(k)
    ref = bessel_concentric(0.35, 1.0, 2.0, 1.0, 1.0)
    r = np.array([0.05, 0.2, 0.34, 0.36, 0.7, 0.99, 1.01, 1.5, 3.0])
    assert np.allclose(f(r), ref(r), rtol=1e-10, atol=1e-13)


def test_concentric_transmission_and_pde():
    f = solve_auxiliary_concentric(LayeredConductor(0.5, 1.2, 0.6, 1.4, 2.0, N=3))
    for value_jump, flux_jump in f.transmission_residuals():
        assert value_jump < 1e-10 and flux_jump < 1e-10
    assert f.pde_residual() < 1e-8


def test_concentric_values_in_unit_interval_and_decay():
    f = solve_auxiliary_concentric(LayeredConductor(0.35))
    r = np.linspace(0.01, 6.0, 400)
    v = f(r)
    assert np.all((v > 0) & (v < 1))
    assert f(6.0) < 1e-2 * f(1.0)


def test_single_phase_requires_flag():
    with pytest.raises(ValueError):
        LayeredConductor(0.3, 1.0, 1.0, 1.0)
    f = solve_auxiliary_concentric(LayeredConductor(0.3, 1.0, 1.0, 1.0, allow_single_phase=True))
    g = solve_auxiliary_concentric(LayeredConductor(0.6, 1.0, 1.0, 1.0, allow_single_phase=True))
    r = np.array([0.1, 0.5, 0.9, 2.0])
    assert np.allclose(f(r), g(r), atol=1e-12)


@pytest.mark.parametrize("bad", [dict(rho_core=1.2), dict(rho_core=0.3, sigma_s=-1.0)])
def test_conductor_validation(bad):
    kw = dict(rho_core=0.3, rho_outer=1.0, sigma_c=2.0, sigma_s=1.0)
    kw.update(bad)
    with pytest.raises(ValueError):
        LayeredConductor(**kw)


def test_classify_case_uses_shell_singular_coefficient():
    lo = classify_case(solve_auxiliary_concentric(LayeredConductor(0.35, sigma_c=2.0)))
    hi = classify_case(solve_auxiliary_concentric(LayeredConductor(0.35, sigma_c=0.5)))
    assert {lo.label, hi.label} == {"case_ii", "case_iii"}
    assert np.sign(lo.c1_star) == -np.sign(hi.c1_star)


def test_rho_max_is_shell_maximum_when_present():
    f = solve_auxiliary_concentric(LayeredConductor(0.35, sigma_c=2.0))
    label = classify_case(f)
    rm = find_rho_max(f)
    if label.label == "case_iii":
        assert rm is not None
        assert abs(f.layer("shell").profile.evaluate(rm)[1]) < 1e-10
    else:
        assert rm is None


@pytest.mark.parametrize("tup", [
    (0.4, 1.0, 2.0, 1.0, 1.0, None),
    (0.5, 1.0, 0.5, 1.0, 2.0, None),
    (0.3, 0.8, 3.0, 0.7, 1.5, (0.5, 0.6)),
])
def test_annulus_slopes(tup):
    a, b, sc, ss, sm, core = tup
    f = solve_auxiliary_annulus(AnnularConductor(a, b, sc, ss, sm, core))
    assert f.layers[0].profile.evaluate(a)[1] > 0
    assert f.layers[-1].profile.evaluate(b)[1] < 0
    for vj, fj in f.transmission_residuals():
        assert vj < 1e-10 and fj < 1e-10


def test_annulus_core_validation():
    with pytest.raises(ValueError):
        AnnularConductor(0.3, 0.8, core=(0.2, 0.5))


def test_overdetermined_frozen_and_oracle():
    spec = OverdeterminedSpec(1.0, 1.0, 0.0, 1.0, 0.35, 2.0, 1.0)
    field, d = solve_overdetermined_radial(spec)
    oracle = bessel_overdetermined(1.0, 1.0, 0.0, 1.0, 0.35, 2.0, 1.0)
    assert d == pytest.approx(oracle, rel=1e-10)
    assert d == pytest.approx(-0.4466914394557267, rel=1e-10)
    assert field(1.0) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.2, 3.0), beta=st.floats(0.2, 3.0), rho=st.floats(0.1, 0.8),
       sc=st.floats(0.3, 3.0), ss=st.floats(0.3, 3.0), t=st.floats(-2.0, 0.9))
def test_overdetermined_matches_oracle_property(alpha, beta, rho, sc, ss, t):
    c = t * beta / alpha
    _, d = solve_overdetermined_radial(OverdeterminedSpec(alpha, beta, c, 1.0, rho, sc, ss))
    assert d == pytest.approx(bessel_overdetermined(alpha, beta, c, 1.0, rho, sc, ss), rel=1e-8, abs=1e-12)
    assert d < 0


def test_overdetermined_validation():
    with pytest.raises(ValueError):
        OverdeterminedSpec(1.0, 1.0, 2.0, 1.0, 0.35, 2.0, 1.0)
    with pytest.raises(ValueError):
        solve_overdetermined_radial(OverdeterminedSpec(0.0, 1.0, 0.0, 1.0, 0.35, 2.0, 1.0))


def test_poisson_reference_outside_independent_of_rho():
    rows = [poisson_reference(r, 2.0, 1.0) for r in (0.2, 0.5, 0.8)]
    x = np.array([0.85, 0.9, 1.0])
    for ref in rows[1:]:
        assert np.array_equal(ref.v(x), rows[0].v(x))
    # u'(1) = -1/(N sigma_s)
    assert rows[0].dv(1.0) == pytest.approx(-0.5)
    ref = rows[1]
    # flux continuity at rho
    assert 2.0 * ref.dv(0.5 - 1e-12) == pytest.approx(1.0 * ref.dv(0.5 + 1e-12), rel=1e-9)


def test_poisson_reference_rejects_bad_rho():
    with pytest.raises(ValueError):
        poisson_reference(1.0, 2.0, 1.0)
