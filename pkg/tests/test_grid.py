"""Coarse-grid checks of the finite-difference solver (fine grids live in the acceptance module)."""
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophase import grid as fd
from twophase.errors import (
    CurveOutsideGrid,
    GeometryError,
    InstabilityError,
    InsufficientHorizonError,
)
from twophase.layered import (
    LayeredConductor,
    OverdeterminedSpec,
    _LayerSpec,
    solve_auxiliary_concentric,
    solve_layers,
    solve_overdetermined_radial,
)


@pytest.fixture(scope="module")
def geom():
    return fd.Geometry2D(fd.Disk((0.0, 0.0), 1.0), (fd.Disk((0.0, 0.0), 0.35),), 2.0, 1.0, 1.0)


@pytest.fixture(scope="module")
def short_cauchy(geom):
    grid = fd.Grid2D.around(geom, 1 / 16)
    return fd.simulate_cauchy(geom, grid, 0.5, 0.01, record_every=10)


def test_inclusion_must_be_inside():
    with pytest.raises(GeometryError):
        fd.Geometry2D(fd.Disk((0, 0), 1.0), (fd.Disk((0.7, 0.0), 0.35),))


def test_inclusions_must_not_overlap():
    with pytest.raises(GeometryError):
        fd.Geometry2D(fd.Disk((0, 0), 1.0), (fd.Disk((0.2, 0), 0.2), fd.Disk((-0.1, 0), 0.2)))


def test_conductivities_positive():
    with pytest.raises(GeometryError):
        fd.Geometry2D(fd.Disk(), (), 0.0, 1.0, 1.0)


def test_annulus_validation_and_distance():
    with pytest.raises(GeometryError):
        fd.Annulus((0, 0), 1.0, 0.5)
    a = fd.Annulus((0, 0), 0.5, 1.0)
    assert a.signed_distance(0.75, 0.0) == pytest.approx(-0.25)
    assert a.signed_distance(0.0, 0.0) == pytest.approx(0.5)


def test_grid_around_requires_dividing_step(geom):
    with pytest.raises(GeometryError):
        fd.Grid2D.around(geom, 0.07)
    g = fd.Grid2D.around(geom, 1 / 16)
    assert g.shape == (96, 96)
    assert g.x[0] == pytest.approx(-3.0 + 1 / 32)


def test_conductivity_map(geom):
    assert geom.conductivity(0.0, 0.0) == 2.0
    assert geom.conductivity(0.6, 0.0) == 1.0
    assert geom.conductivity(2.0, 0.0) == 1.0


def test_sample_outside_grid_raises(geom):
    g = fd.Grid2D.covering(geom, 1 / 8)
    with pytest.raises(CurveOutsideGrid):
        g.sample(np.zeros(g.shape), np.array([[5.0, 0.0]]))


def test_omega_fraction_area(geom):
    g = fd.Grid2D.around(geom, 1 / 16)
    assert fd.omega_fraction(geom, g).sum() * g.h ** 2 == pytest.approx(np.pi, rel=1e-3)


def test_time_steps_sum_and_grading():
    s = fd.time_steps(12.0, 0.05, coarse_after=4.0, coarse_factor=4)
    assert s.sum() == pytest.approx(12.0, abs=1e-12)
    assert s[0] == pytest.approx(0.05) and s[-1] == pytest.approx(0.2)


@settings(max_examples=30, deadline=None)
@given(T=st.floats(0.05, 20.0), dt=st.floats(0.001, 0.5))
def test_step_sizes_reach_horizon(T, dt):
    steps = fd.time_steps(T, dt)
    assert steps.sum() == pytest.approx(T, rel=1e-12)
    assert np.all(steps > 0) and steps.max() <= dt * (1 + 1e-12)


def test_cauchy_maximum_principle(short_cauchy):
    lo, hi = short_cauchy.value_range
    assert lo >= -1e-12 and hi <= 1 + 1e-12
    for frame in short_cauchy.values:
        assert frame.min() >= -1e-12 and frame.max() <= 1 + 1e-12


def test_cauchy_decay_at_infinity_short_horizon(short_cauchy):
    # far from omega the field stays close to its initial value 1
    g = short_cauchy.grid
    X, Y = g.mesh()
    far = np.hypot(X, Y) > 2.5
    assert (1.0 - short_cauchy.final_values[far]).max() < 0.05


def test_cauchy_field_is_increasing_in_time_inside(short_cauchy):
    g = short_cauchy.grid
    centre = [g.sample(f, np.array([[0.0, 0.0]]))[0] for f in short_cauchy.values]
    assert np.all(np.diff(centre) > 0)


def test_crank_nicolson_large_step_reports_instability(geom):
    g = fd.Grid2D.around(geom, 1 / 16)
    with pytest.raises(InstabilityError):
        fd.simulate_cauchy(geom, g, 0.5, 0.25, scheme="cn")


def test_laplace_requires_horizon(short_cauchy):
    with pytest.raises(InsufficientHorizonError):
        fd.laplace_transform_field(short_cauchy)


def test_ibvp_bounds_and_heating(geom):
    g = fd.Grid2D.covering(geom, 1 / 16)
    ts = fd.simulate_ibvp(geom, g, 0.5, 0.01, record_every=5)
    lo, hi = ts.value_range
    assert lo >= -1e-12 and hi <= 1 + 1e-12
    frames = np.stack(ts.values)
    assert np.all(frames[1:] >= frames[:-1] - 1e-12)


def test_auxiliary_solve_matches_layered(geom):
    # truncation at 4 circumradii keeps the edge error below 1e-4
    g = fd.Grid2D.around(geom, 1 / 16, factor=4)
    f = fd.solve_stationary_transmission(geom, g, "auxiliary")
    ref = solve_auxiliary_concentric(LayeredConductor(0.35))
    err = max(np.abs(f.on_circle((0, 0), r, 64) - ref(r)).max() for r in (0.1, 0.3, 0.5, 0.7, 0.9, 1.3))
    assert err < 2e-3


def test_overdetermined_solve_matches_layered(geom):
    field, _ = solve_overdetermined_radial(OverdeterminedSpec(1.0, 1.0, 0.0, 1.0, 0.35, 2.0, 1.0))
    errs = []
    for h in (1 / 16, 1 / 32):
        g = fd.Grid2D.covering(geom, h)
        f = fd.solve_stationary_transmission(geom, g, "overdetermined")
        errs.append(max(np.abs(f.on_circle((0, 0), r, 64) - field(r)).max() for r in (0.2, 0.7)))
    assert errs[1] < errs[0] < 1e-3


def test_cg_and_direct_agree(geom):
    g = fd.Grid2D.covering(geom, 1 / 16)
    a = fd.solve_stationary_transmission(geom, g, "overdetermined")
    b = fd.solve_stationary_transmission(geom, g, "overdetermined", method="cg")
    assert np.nanmax(np.abs(a.values - b.values)) < 1e-9


def test_modified_neumann_converges_to_layered(geom):
    ref = solve_layers([_LayerSpec(0.35, 2.0, 2.0, 1.0, "core"), _LayerSpec(1.0, 1.0, 1.0, 1.0, "shell")],
                       2, ("neumann", -0.5))
    errs = []
    for h in (1 / 16, 1 / 32):
        f = fd.solve_stationary_transmission(geom, fd.Grid2D.covering(geom, h), "modified-neumann", g=-0.5)
        errs.append(np.abs(f.on_circle((0, 0), 0.6, 32) - ref(0.6)).max())
    assert errs[1] < errs[0] < 1e-2


def test_neumann_trace_of_concentric_solution(geom):
    _, d = solve_overdetermined_radial(OverdeterminedSpec(1.0, 1.0, 0.0, 1.0, 0.35, 2.0, 1.0))
    f = fd.solve_stationary_transmission(geom, fd.Grid2D.covering(geom, 1 / 32), "overdetermined")
    tr = fd.neumann_trace(f, (0, 0), 1.0, conductivity=1.0, boundary_value=0.0)
    assert tr.mean() == pytest.approx(d, abs=1e-2)
    assert np.ptp(tr.values) < 1e-2


def test_unknown_equation_rejected(geom):
    with pytest.raises(ValueError):
        fd.solve_stationary_transmission(geom, fd.Grid2D.covering(geom, 1 / 8), "heat")


def test_exports(tmp_path, short_cauchy):
    g = short_cauchy.grid
    fd.write_field_csv(tmp_path / "f.csv", g, short_cauchy.final_values)
    rows = np.loadtxt(tmp_path / "f.csv", delimiter=",", skiprows=1)
    assert rows.shape == (g.nx * g.ny, 3)
    fd.write_frames_ndjson(tmp_path / "f.ndjson", short_cauchy, stride=2)
    lines = (tmp_path / "f.ndjson").read_text().splitlines()
    assert len(lines) == len(short_cauchy.times[::2])
    assert len(json.loads(lines[0])["values"]) == g.nx * g.ny
