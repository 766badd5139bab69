import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodal_lab import DomainError, ResolutionError
from nodal_lab import sloshing as sl
from nodal_lab.nodal import extract_zero_curves

P3 = sl.SloshingParams(3)
P5 = sl.SloshingParams(5)

# u(1, -1/2) at lam = 3/2 from the Gauss-Legendre oracle below (both node counts agree to 3e-15)
U_FROZEN = 0.2277669476374025


def gauss_legendre_uv(x, y, lam, panels, order=20):
    """Independent route: the raw integrals with kernel 1/(k - lam), composite Gauss-Legendre
    on [0, 60/|y|] (the truncated tail is below exp(-60)); no node falls on k = lam."""
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 60.0 / abs(y), panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    k = (0.5 * (b - a) * t + 0.5 * (a + b)).ravel()
    wk = (0.5 * (b - a) * w).ravel()
    damp = 2 * np.cos(k * math.pi) * np.exp(k * y) / (k - lam)
    return float(wk @ (np.cos(k * x) * damp)), float(wk @ (-np.sin(k * x) * damp))


# parameters -------------------------------------------------------------------


@pytest.mark.parametrize("m", [0, 2, -1, 1.5])
def test_params_reject_even_or_nonpositive(m):
    with pytest.raises(DomainError):
        sl.SloshingParams(m)


def test_lambda_value():
    assert P3.lam == 1.5 and P5.lam == 2.5


# evaluation -------------------------------------------------------------------


def test_u_against_oracle():
    coarse = gauss_legendre_uv(1.0, -0.5, 1.5, 60)
    fine = gauss_legendre_uv(1.0, -0.5, 1.5, 600)
    assert abs(coarse[0] - fine[0]) < 1e-10
    assert abs(fine[0] - U_FROZEN) < 1e-9
    u, v = sl.eval_uv(1.0, -0.5, P3)
    assert abs(u - fine[0]) <= 1e-7
    assert abs(v - fine[1]) <= 1e-7


@pytest.mark.parametrize("m", [1, 3, 5, 7])
def test_quadrature_matches_oracle_and_closed_form(m):
    p = sl.SloshingParams(m)
    for x, y in ((0.3, -0.2), (2.0, -1.5), (math.pi, -0.7), (7.5, -0.05)):
        q = sl.eval_uv(x, y, p)
        ref = gauss_legendre_uv(x, y, p.lam, 400)
        u, v = sl.uv_grid(x, y, p)
        assert abs(q[0] - ref[0]) < 1e-7 and abs(q[1] - ref[1]) < 1e-7
        assert abs(q[0] - float(u)) < 1e-9 and abs(q[1] - float(v)) < 1e-9


@given(st.floats(-9.0, 9.0), st.floats(-4.0, -0.05))
@settings(max_examples=60, deadline=None)
def test_symmetry(x, y):
    u1, v1 = sl.eval_uv(x, y, P3)
    u2, v2 = sl.eval_uv(-x, y, P3)
    assert abs(u1 - u2) < 1e-8 and abs(v1 + v2) < 1e-8


@pytest.mark.parametrize("y", [-0.01, -0.5, -3.0])
def test_v_vanishes_on_axis(y):
    assert sl.eval_uv(0.0, y, P3)[1] == 0.0
    assert float(sl.uv_grid(0.0, y, P5)[1]) == 0.0


def test_closed_form_on_branch_lines():
    # x = +-pi is where the exponential integral needs its one-sided limit
    for x in (math.pi, -math.pi):
        for dx in (0.0, 1e-9, -1e-9):
            u, v = sl.uv_grid(x + dx, -0.4, P3)
            q = sl.eval_uv(x + dx, -0.4, P3)
            assert abs(float(u) - q[0]) < 1e-8 and abs(float(v) - q[1]) < 1e-8


@given(st.floats(-1e-3, 1e-3), st.floats(-5.0, -0.002), st.sampled_from([1, 3, 5]))
@settings(max_examples=80, deadline=None)
def test_quadrature_near_branch_lines(dx, y, m):
    # tiny tail frequencies |x -+ pi| must not upset the oscillatory tail rule
    p = sl.SloshingParams(m)
    q = sl.eval_uv(math.pi + dx, y, p)
    u, v = sl.uv_grid(math.pi + dx, y, p)
    assert abs(q[0] - float(u)) < 1e-9 and abs(q[1] - float(v)) < 1e-9


def test_evaluation_requires_negative_y():
    for y in (0.0, 0.5):
        with pytest.raises(DomainError):
            sl.eval_uv(1.0, y, P3)
        with pytest.raises(DomainError):
            sl.steklov_residual(1.0, y, P3)
        with pytest.raises(DomainError):
            sl.uv_grid(1.0, y, P3)


# Steklov condition ------------------------------------------------------------


def test_steklov_examples():
    assert sl.steklov_residual(0.0, -1.0, P3) == pytest.approx(2 / (math.pi**2 + 1), abs=1e-10)
    assert round(sl.steklov_residual(0.0, -1.0, P3), 4) == 0.1840
    assert abs(sl.steklov_residual(5.0, -0.001, P3)) < 1e-2


def test_steklov_identity_grid():
    worst = max(
        abs(sl.steklov_residual(x, y, P3) - sl.steklov_closed_form(x, y))
        for x in np.linspace(-6, 6, 13)
        for y in -np.linspace(0.05, 4, 9)
    )
    assert worst <= 1e-6


def test_steklov_is_u_y_minus_lam_u():
    # the residual also follows from differencing the potential itself
    x, y, h = 1.3, -0.8, 1e-4
    uy = (sl.eval_uv(x, y + h, P5)[0] - sl.eval_uv(x, y - h, P5)[0]) / (2 * h)
    direct = uy - P5.lam * sl.eval_uv(x, y, P5)[0]
    assert abs(direct - sl.steklov_residual(x, y, P5)) < 1e-6


def test_steklov_even():
    for x in (0.4, 2.5, 7.0):
        assert sl.steklov_residual(x, -0.3, P3) == pytest.approx(sl.steklov_residual(-x, -0.3, P3), abs=1e-12)


# conjugacy and harmonicity ----------------------------------------------------


def test_orientation_probe():
    assert sl.conjugacy_orientation() in (1, -1)
    assert sl.conjugacy_orientation() == sl.conjugacy_orientation(5)


def test_cauchy_riemann_example():
    r1, r2 = sl.cauchy_riemann_residual(1.0, -1.0, P3, 1e-3)
    assert abs(r1) < 1e-5 and abs(r2) < 1e-5


def test_cauchy_riemann_second_order():
    hs = (0.1, 0.05, 0.025)
    errs = [max(map(abs, sl.cauchy_riemann_residual(1.0, -1.0, P3, h))) for h in hs]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    assert all(3.5 < r < 4.5 for r in ratios)


def test_cauchy_riemann_parity_on_axis():
    # u even and v odd in x: u_x and v_y vanish on the axis, u_y = -s v_x survives
    s = sl.conjugacy_orientation()
    h = 1e-3
    uE, vE = sl.eval_uv(h, -0.5, P3)
    uW, vW = sl.eval_uv(-h, -0.5, P3)
    assert abs(uE - uW) < 1e-12
    r1, r2 = sl.cauchy_riemann_residual(0.0, -0.5, P3, h)
    assert abs(r1) < 1e-12 and abs(r2) < 1e-5
    assert s * (vE - vW) != 0


def test_stencil_guard():
    with pytest.raises(DomainError):
        sl.cauchy_riemann_residual(1.0, -0.01, P3, 0.02)
    with pytest.raises(DomainError):
        sl.cauchy_riemann_residual(1.0, -1.0, P3, 0.0)
    with pytest.raises(DomainError):
        sl.laplacian_residual(1.0, -0.01, P3, 0.02)


@pytest.mark.parametrize("which", ["u", "v"])
def test_harmonic(which):
    errs = [abs(sl.laplacian_residual(1.0, -1.0, P3, h, which)) for h in (0.1, 0.05)]
    assert errs[1] < errs[0] / 3.5
    assert abs(sl.laplacian_residual(1.0, -1.0, P3, 1e-2, which)) < 1e-3


def test_gradient_matches_differences():
    x, y, h = 2.2, -0.9, 1e-5
    gx, gy = sl.grad_u(x, y, P3)
    ux = (float(sl.uv_grid(x + h, y, P3)[0]) - float(sl.uv_grid(x - h, y, P3)[0])) / (2 * h)
    uy = (float(sl.uv_grid(x, y + h, P3)[0]) - float(sl.uv_grid(x, y - h, P3)[0])) / (2 * h)
    assert abs(float(gx) - ux) < 1e-6 and abs(float(gy) - uy) < 1e-6


# grids ------------------------------------------------------------------------


def test_sample_grid_layout(tmp_path):
    g = sl.sample_grid(P3, (0.0, math.pi, -math.pi / 2, 0.0), 100)
    assert g.u.shape == (50, 100)
    assert g.x[0] == pytest.approx(g.u.h / 2) and g.y[-1] == pytest.approx(-g.u.h)
    path = tmp_path / "grid.csv"
    g.to_csv(path)
    rows = np.loadtxt(path, delimiter=",", skiprows=1)
    assert open(path).readline().strip() == "x,y,u,v" and rows.shape == (5000, 4)
    u, v = sl.eval_uv(rows[7, 0], rows[7, 1], P3)
    assert abs(rows[7, 2] - u) < 1e-9 and abs(rows[7, 3] - v) < 1e-9


def test_sample_grid_guards():
    with pytest.raises(DomainError):
        sl.sample_grid(P3, (-1.0, 1.0, -1.0, 0.0), 200)
    with pytest.raises(DomainError):
        sl.sample_grid(P3, (0.0, 1.0, -1.0, 0.5), 200)
    with pytest.raises(ResolutionError):
        sl.sample_grid(P3, (0.0, 1.0, -1.0, 0.0), 50)


# counterexamples --------------------------------------------------------------


@pytest.fixture(scope="module")
def three_halves():
    return sl.trace_counterexample(P3)


@pytest.fixture(scope="module")
def five_halves():
    return sl.trace_counterexample(P5)


def test_lambda_three_halves_counterexample(three_halves):
    rep = three_halves.report
    assert three_halves.counterexample and rep.passed, rep.verdicts
    assert three_halves.inventory["right_half"] == {"u": 2, "v": 1}
    assert three_halves.inventory["full_plane"] == {"u": 3, "v": 1}
    assert three_halves.surface_extent == pytest.approx(2.1326, abs=2 * three_halves.h)


def test_bottom_is_closed_streamline(three_halves):
    b = three_halves.bottom
    assert np.allclose(b[0], b[-1]) or (abs(b[0, 1]) < 1e-12 and abs(b[-1, 1]) < 1e-12)
    # mirror symmetric
    assert np.allclose(np.sort(b[:, 0]), np.sort(-b[:, 0]))
    assert np.max(np.abs(sl.uv_grid(b[:, 0], np.minimum(b[:, 1], -1e-12), P3)[1])) < sl.TRACE_TOL


def test_u_node_inside_bottom_hits_surface_twice(three_halves):
    finite = [c for c in three_halves.u_curves if sl._finite(c)]
    assert len(finite) == 1
    c = finite[0]
    assert sorted(c.tags) == ["free-surface", "symmetry-axis"]
    xs = sl.surface_points(c)
    assert len(xs) == 1 and 0 < xs[0] < three_halves.surface_extent
    m = sl.mirrored(c)
    assert abs(m[0, 1]) < 1e-12 and abs(m[-1, 1]) < 1e-12


def test_alternative_bottom(three_halves):
    rep = three_halves.report
    assert rep.verdict("alternative_bottom_is_streamline").status == "PASS"
    assert rep.results["alternative_bottom"]["max_abs_v_on_axis"] == 0.0


def test_refinement_stable(three_halves):
    ref = three_halves.report.results["refinement"]
    assert ref["max_endpoint_shift"] < three_halves.h
    assert (ref["u"], ref["v"]) == (len(three_halves.u_curves), len(three_halves.v_curves))


def test_lambda_five_halves_inventory(five_halves):
    rep = five_halves.report
    assert five_halves.inventory["right_half"] == {"u": 2, "v": 2}
    assert five_halves.inventory["full_plane"] == {"u": 4, "v": 2}
    assert rep.verdict("full_plane_counts_v2_u4").status == "PASS"
    # the literal right-half reading of the reference count is not what the potentials give
    assert rep.verdict("right_half_counts_v2_u4").status == "FAIL"
    assert rep.verdict("finite_u_nodes_inside_basin").status == "PASS"
    assert rep.verdict("refinement_stable").status == "PASS"


def test_v_nodes_have_one_end_on_axis(five_halves):
    for c in five_halves.v_curves:
        assert sorted(c.tags) == ["free-surface", "symmetry-axis"]


def test_report_json(three_halves):
    import json

    data = json.loads(three_halves.report.to_json(timestamps=False))
    assert data["name"] == "sloshing" and data["config"]["m"] == 3


def test_normal_flux_small(five_halves):
    bc = max(
        (c for c in five_halves.v_curves if sorted(c.tags) == ["free-surface", "symmetry-axis"]),
        key=lambda c: sl.surface_points(c)[0],
    )
    assert sl.normal_flux(bc, P5) <= sl.TRACE_TOL


# canal modes ------------------------------------------------------------------


def test_canal_first_mode_line_at_centre():
    mode = sl.rectangular_canal_modes(1.0, 0.5, 1).eigenfunction
    assert mode.nodal_lines() == pytest.approx([0.0])


def test_canal_second_mode_lines():
    a = 1.3
    mode = sl.rectangular_canal_modes(a, 0.7, 2).eigenfunction
    assert mode.nodal_lines() == pytest.approx([-a / 2, a / 2])
    fld = mode.sample(260)
    curves = extract_zero_curves(fld)
    xs = sorted(float(np.mean(c.vertices[:, 0])) for c in curves)
    assert xs == pytest.approx([-a / 2, a / 2], abs=fld.h)
    # oracle: sign pattern of cos(k2 (x + a)) along the surface
    s = np.sign(np.cos(2 * math.pi / (2 * a) * (fld.x + a)))
    assert np.count_nonzero(np.diff(s)) == 2


def test_canal_eigenvalues_increase():
    lam = [sl.rectangular_canal_modes(1.0, 0.4, n).eigenvalue for n in range(1, 9)]
    assert np.all(np.diff(lam) > 0)
    k1 = math.pi / 2
    assert lam[0] == pytest.approx(k1 * math.tanh(k1 * 0.4))


def test_canal_guards():
    with pytest.raises(DomainError):
        sl.rectangular_canal_modes(0.0, 1.0, 1)
    with pytest.raises(DomainError):
        sl.rectangular_canal_modes(1.0, 1.0, 0)


def test_kuttler_count():
    rep = sl.kuttler_count(1.0, 0.5, 6)
    assert rep.passed
    assert [r["domains"] for r in rep.results["rows"]] == [2, 3, 4, 5, 6, 7]
