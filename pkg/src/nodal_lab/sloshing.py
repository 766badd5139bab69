"""Potential/stream-function pair of a sloshing wave in the lower half-plane.

Both functions are Fourier integrals over the wavenumber k with a pole-free
kernel ``1/(k - lam)``: the numerator carries ``cos(k pi)``, which vanishes at
``k = lam`` because ``lam = m/2`` with ``m`` odd.

Two evaluation routes are provided and cross-checked in the tests.

* Quadrature (``eval_uv``): the integral on ``[0, 2 lam]`` is rewritten with
  ``cos(k pi) / (k - lam) = -pi sin(lam pi) sinc(k - lam)``, which is exact and
  free of cancellation; the tail ``[2 lam, inf)`` is a Fourier integral of the
  monotone ``exp(k y) / (k - lam)`` handled by QUADPACK's QAWF rule.
* Closed form (``uv_grid``): ``u + i v = sum_{s=+-1} g(w_s)`` with
  ``w_s = lam (y - i (x - s pi))`` and ``g(w) = exp(w) (E1(w) + i pi sgn Im w)``.
  The ``i pi sgn`` term undoes the branch cut of E1 along the negative real
  axis, which ``w`` crosses on the lines ``x = +-pi``.  On those lines the two
  one-sided limits agree and equal ``-exp(w) Ei(-w)``.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import exp1, expi

from . import DomainError, ResolutionError
from .domains import rect
from .nodal import (
    BAND_CLOSED_FORM,
    NodalCurve,
    ScalarField2D,
    classify_endpoints,
    count_sign_components,
    extract_zero_curves,
    points_in_polygon,
)
from .reports import EigenPair, ExperimentReport

QUAD_TOL = 1e-12
TRACE_TOL = 0.05  # relative tolerance for curve-wise identities on traced polylines
DEFAULT_WINDOW = (0.0, 4 * math.pi, -2 * math.pi, 0.0)
DEFAULT_RESOLUTION = 400

# reference (v, u) node counts for lam = 5/2 with the y-axis excluded: once for
# the right half alone, once for the whole half-plane, where a mirror image
# counts as a separate node unless the curve meets the axis
REFERENCE_COUNTS = {5: {"right_half": (2, 4), "full_plane": (2, 4)}}


@dataclass(frozen=True)
class SloshingParams:
    """Spectral parameter ``lam = m / 2`` with ``m`` odd and positive."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1 or self.m % 2 == 0:
            raise DomainError(f"m must be an odd positive integer, got {self.m}")

    @property
    def lam(self) -> float:
        return self.m / 2


def _check_depth(y: float) -> None:
    if not y < 0:
        raise DomainError(f"evaluation needs y < 0, got y = {y}")


# quadrature route ---------------------------------------------------------


def _tail(y: float, lam: float, freq: float, kind: str) -> float:
    """int_{2 lam}^inf trig(freq k) exp(k y) / (k - lam) dk for freq >= 0."""
    f = lambda k: math.exp(k * y) / (k - lam)
    if freq == 0.0 and kind == "sin":
        return 0.0
    # exp(k y) is below e^-60 past this span; QAWF cycles have length pi/freq and
    # break down when that dwarfs the span, so few oscillations go to plain quad
    span = -60.0 / y
    if freq * span <= 200.0:
        trig = math.cos if kind == "cos" else math.sin
        return quad(
            lambda k: trig(freq * k) * f(k), 2 * lam, 2 * lam + span,
            epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=400,
        )[0]
    return quad(f, 2 * lam, np.inf, weight=kind, wvar=freq, epsabs=QUAD_TOL, limlst=200)[0]


def eval_uv(x: float, y: float, params: SloshingParams) -> tuple[float, float]:
    """Velocity potential and stream function at ``(x, y)`` by quadrature."""
    _check_depth(y)
    lam = params.lam
    amp = -2 * math.pi * math.sin(lam * math.pi)
    head_u = quad(
        lambda k: amp * np.sinc(k - lam) * math.cos(k * x) * math.exp(k * y),
        0.0, 2 * lam, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200,
    )[0]
    # the stream-function kernel is 1/(lam - k): opposite sign
    head_v = quad(
        lambda k: -amp * np.sinc(k - lam) * math.sin(k * x) * math.exp(k * y),
        0.0, 2 * lam, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200,
    )[0]
    tail_u = tail_v = 0.0
    for s in (1.0, -1.0):
        a = x - s * math.pi
        tail_u += _tail(y, lam, abs(a), "cos")
        tail_v -= math.copysign(1.0, a) * _tail(y, lam, abs(a), "sin")
    return head_u + tail_u, head_v + tail_v


def steklov_residual(x: float, y: float, params: SloshingParams) -> float:
    """``u_y - lam u`` at ``(x, y)``.

    Differentiating under the integral multiplies the kernel by ``k``, so the
    combination cancels the denominator and leaves
    ``int_0^inf (cos k(x - pi) + cos k(x + pi)) exp(k y) dk``.
    """
    _check_depth(y)
    total = 0.0
    for s in (1.0, -1.0):
        a = abs(x - s * math.pi)
        f = lambda k: math.exp(k * y)
        if a == 0.0:
            total += quad(f, 0.0, np.inf, epsabs=QUAD_TOL, epsrel=QUAD_TOL)[0]
        else:
            total += quad(f, 0.0, np.inf, weight="cos", wvar=a, epsabs=QUAD_TOL, limlst=200)[0]
    return total


def steklov_closed_form(x, y):
    """The elementary value of the integral in ``steklov_residual``."""
    return -y / ((x - np.pi) ** 2 + y**2) - y / ((x + np.pi) ** 2 + y**2)


@functools.lru_cache(maxsize=None)
def conjugacy_orientation(m: int = 3) -> int:
    """+1 if ``u_x = v_y, u_y = -v_x``; -1 for the opposite pairing.

    Decided once by central differences at the reference point (1, -1).
    """
    p = SloshingParams(m)
    r_plus = np.abs(_cr(1.0, -1.0, p, 1e-3, +1)).max()
    r_minus = np.abs(_cr(1.0, -1.0, p, 1e-3, -1)).max()
    return 1 if r_plus < r_minus else -1


def _cr(x, y, params, h, s):
    uE, vE = eval_uv(x + h, y, params)
    uW, vW = eval_uv(x - h, y, params)
    uN, vN = eval_uv(x, y + h, params)
    uS, vS = eval_uv(x, y - h, params)
    ux, vx = (uE - uW) / (2 * h), (vE - vW) / (2 * h)
    uy, vy = (uN - uS) / (2 * h), (vN - vS) / (2 * h)
    return np.array([ux - s * vy, uy + s * vx])


def cauchy_riemann_residual(x: float, y: float, params: SloshingParams, h: float) -> tuple[float, float]:
    """Central-difference residuals ``(u_x - s v_y, u_y + s v_x)``, s the probed orientation."""
    if not h > 0:
        raise DomainError("step h must be positive")
    if not y + h < 0:
        raise DomainError("difference stencil crosses y = 0")
    r1, r2 = _cr(x, y, params, h, conjugacy_orientation())
    return float(r1), float(r2)


def laplacian_residual(x: float, y: float, params: SloshingParams, h: float, which: str = "u") -> float:
    """Five-point Laplacian of u (or v) at ``(x, y)``."""
    if not h > 0:
        raise DomainError("step h must be positive")
    if not y + h < 0:
        raise DomainError("difference stencil crosses y = 0")
    k = 0 if which == "u" else 1
    c = eval_uv(x, y, params)[k]
    nb = sum(eval_uv(x + dx, y + dy, params)[k] for dx, dy in ((h, 0), (-h, 0), (0, h), (0, -h)))
    return float((nb - 4 * c) / h**2)


# closed-form route --------------------------------------------------------


def _g(w: np.ndarray) -> np.ndarray:
    w = np.atleast_1d(w)
    out = np.exp(w) * (exp1(w) + 1j * np.pi * np.sign(w.imag))
    on_cut = w.imag == 0
    if np.any(on_cut):
        wr = w.real[on_cut]
        out[on_cut] = -np.exp(wr) * expi(-wr)
    return out


def complex_potential(x, y, lam: float) -> np.ndarray:
    """``u + i v`` evaluated in closed form (vectorized; requires y < 0)."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    if np.any(y >= 0):
        raise DomainError("closed form needs y < 0")
    tot = np.zeros(x.shape, dtype=complex)
    for s in (1.0, -1.0):
        tot += _g(lam * (y - 1j * (x - s * np.pi))).reshape(x.shape)
    return tot


def uv_grid(x, y, params: SloshingParams) -> tuple[np.ndarray, np.ndarray]:
    f = complex_potential(x, y, params.lam)
    return f.real, f.imag


def grad_u(x, y, params: SloshingParams) -> tuple[np.ndarray, np.ndarray]:
    """``(u_x, u_y)`` from ``f' = -i lam f - sum 1/(z -+ pi)``, using ``f' = u_x - i u_y``."""
    lam = params.lam
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    z = x + 1j * y
    fp = -1j * lam * complex_potential(x, y, lam) - 1 / (z - np.pi) - 1 / (z + np.pi)
    return fp.real, -fp.imag


# tracing ------------------------------------------------------------------


@dataclass
class GridData:
    x: np.ndarray
    y: np.ndarray
    u: ScalarField2D
    v: ScalarField2D

    def to_csv(self, path) -> None:
        self.u.to_csv(path, self.v, names=("u", "v"))


def sample_grid(params: SloshingParams, window=DEFAULT_WINDOW, resolution: int = DEFAULT_RESOLUTION) -> GridData:
    """Cell-centred samples in x, rows ``y_top - j h`` (j >= 1) in y; square cells."""
    x0, x1, y0, y1 = window
    if x0 < 0 or not x1 > x0 or not y1 > y0 or y1 > 0:
        raise DomainError(f"window {window} must satisfy 0 <= x0 < x1 and y0 < y1 <= 0")
    if resolution < 100:
        raise ResolutionError("resolution must be at least 100 cells across the window")
    h = (x1 - x0) / resolution
    ny = int(round((y1 - y0) / h))
    if ny < 10:
        raise ResolutionError("window too shallow for the chosen resolution")
    xs = x0 + h * (np.arange(resolution) + 0.5)
    ys = y1 - h * np.arange(ny, 0, -1)  # ascending, top row at y1 - h
    X, Y = np.meshgrid(xs, ys)
    u, v = uv_grid(X, Y, params)
    origin = (float(xs[0]), float(ys[0]))
    return GridData(xs, ys, ScalarField2D(origin, h, u), ScalarField2D(origin, h, v))


def _window_features(window):
    x0, x1, y0, y1 = window
    feats = []
    if y1 == 0:
        feats.append(("free-surface", lambda q: np.abs(q[:, 1])))
    else:
        feats.append(("outer-boundary", lambda q: np.abs(q[:, 1] - y1)))
    if x0 == 0:
        feats.append(("symmetry-axis", lambda q: np.abs(q[:, 0])))
    else:
        feats.append(("outer-boundary", lambda q: np.abs(q[:, 0] - x0)))
    feats.append(("outer-boundary", lambda q: np.abs(q[:, 0] - x1)))
    feats.append(("outer-boundary", lambda q: np.abs(q[:, 1] - y0)))
    return feats


def _extend(curve: NodalCurve) -> np.ndarray:
    """Vertices with each surface/axis endpoint snapped by linear extrapolation."""
    pts = curve.vertices.copy()
    out = [pts]
    for end, tag in zip((0, -1), curve.tags):
        a = pts[end]
        b = pts[1] if end == 0 else pts[-2]
        d = a - b
        if tag == "free-surface" and d[1] != 0:
            snap = a - d * (a[1] / d[1])
        elif tag == "symmetry-axis" and d[0] != 0:
            snap = a - d * (a[0] / d[0])
        else:
            continue
        if end == 0:
            out.insert(0, snap[None, :])
        else:
            out.append(snap[None, :])
    return np.vstack(out)


def surface_points(curve: NodalCurve) -> list[float]:
    """x-axis crossings of a curve after endpoint extrapolation."""
    ext = _extend(curve)
    return [float(p[0]) for p, t in zip(ext[[0, -1]], curve.tags) if t == "free-surface"]


def mirrored(curve: NodalCurve) -> np.ndarray:
    """The curve joined with its image in the y-axis, as one polyline.

    Only meaningful when the curve touches the axis once; otherwise the
    image is a separate node and the curve is returned extended.
    """
    ext = _extend(curve)
    if curve.closed or curve.tags.count("symmetry-axis") != 1:
        return ext
    if curve.tags[0] == "symmetry-axis":
        ext = ext[::-1]
    img = ext[::-1] * np.array([-1.0, 1.0])
    return np.vstack([ext, img[1:]])


def full_plane_nodes(curves: list[NodalCurve]) -> int:
    """Nodes in the whole half-plane: a curve touching the axis merges with its image."""
    return sum(1 if "symmetry-axis" in c.tags else 2 for c in curves)


@dataclass
class CounterexampleReport:
    lam: float
    h: float
    u_curves: list[NodalCurve]
    v_curves: list[NodalCurve]
    bottom: np.ndarray | None
    surface_extent: float | None
    counterexample: bool
    inventory: dict
    report: ExperimentReport
    grid: GridData | None = field(default=None, repr=False)


def _trace(params, window, resolution):
    grid = sample_grid(params, window, resolution)
    h = grid.u.h
    feats = _window_features(window)
    out = []
    for fld in (grid.u, grid.v):
        curves = [
            classify_endpoints(c, feats, h, strict=False)
            for c in extract_zero_curves(fld, BAND_CLOSED_FORM)
        ]
        out.append(curves)
    return grid, out[0], out[1]


def _finite(c: NodalCurve) -> bool:
    return c.closed or not any(t in ("outer-boundary", "domain-interior-violation") for t in c.tags)


def _match_endpoints(coarse: list[NodalCurve], fine: list[NodalCurve]) -> float:
    """Worst displacement of extrapolated endpoints after proximity matching; inf if unmatched."""
    worst = 0.0
    for c in coarse:
        if c.closed:
            continue
        best = np.inf
        for f in fine:
            if f.closed or f.tags != c.tags and f.tags[::-1] != c.tags:
                continue
            e1, e2 = _extend(c)[[0, -1]], _extend(f)[[0, -1]]
            d = min(
                np.max(np.linalg.norm(e1 - e2, axis=1)),
                np.max(np.linalg.norm(e1 - e2[::-1], axis=1)),
            )
            best = min(best, d)
        worst = max(worst, best)
    return worst


def trace_counterexample(
    params: SloshingParams,
    window=DEFAULT_WINDOW,
    resolution: int = DEFAULT_RESOLUTION,
    refine: bool = True,
) -> CounterexampleReport:
    """Trace both nodal families in the right half and test the Kuttler counterexample.

    The bottom is the outermost v-curve running from the free surface to
    the y-axis, completed by its mirror image; the basin is the region it
    cuts off.  The counterexample is confirmed when a u-curve in the basin
    has both ends on the free surface (after mirroring when it meets the axis).
    """
    t0 = time.perf_counter()
    lam = params.lam
    rep = ExperimentReport(
        "sloshing",
        config={"m": params.m, "lambda": lam, "window": list(window), "resolution": resolution},
    )
    grid, ucs, vcs = _trace(params, window, resolution)
    h = grid.u.h

    def describe(c):
        return {
            "closed": c.closed,
            "tags": list(c.tags),
            "surface_x": surface_points(c) if not c.closed else [],
            "finite": _finite(c),
        }

    inventory = {
        "right_half": {"u": len(ucs), "v": len(vcs)},
        "full_plane": {"u": full_plane_nodes(ucs), "v": full_plane_nodes(vcs)},
        "u_curves": [describe(c) for c in ucs],
        "v_curves": [describe(c) for c in vcs],
    }
    rep.results["h"] = h
    rep.results["grid_shape"] = list(grid.u.shape)
    rep.results["inventory"] = inventory

    # bottom: outermost v-curve from the surface to the axis
    cands = [c for c in vcs if sorted(c.tags) == ["free-surface", "symmetry-axis"]]
    bottom = a = None
    inside_u: list[NodalCurve] = []
    if cands:
        bc = max(cands, key=lambda c: surface_points(c)[0])
        bottom = mirrored(bc)
        a = surface_points(bc)[0]
        rep.results["surface_extent"] = a
        rep.results["bottom_depth"] = float(-bottom[:, 1].min())
        # the bottom is a streamline (v = 0) and u has no flux through it
        vb = uv_grid(bc.vertices[:, 0], bc.vertices[:, 1], params)[1]
        vmax = float(np.abs(grid.v.values).max())
        rep.add(
            "bottom_is_zero_of_v",
            float(np.abs(vb).max()) <= TRACE_TOL * h * vmax,
            f"max |v| on bottom = {np.abs(vb).max():.2e} (field max {vmax:.2e})",
        )
        flux = normal_flux(bc, params)
        rep.results["bottom_normal_flux"] = flux
        rep.add("grad_u_tangent_to_bottom", flux <= TRACE_TOL, f"max |grad u . n| / max |grad u| = {flux:.3e}")
        for c in ucs:
            if not _finite(c):
                continue
            pts = mirrored(c)
            if np.all(points_in_polygon(pts[1:-1], bottom)):
                inside_u.append(c)
    else:
        rep.add("bottom_found", False, "no v-curve joins the free surface to the y-axis")

    def both_on_surface(c):
        if c.closed:
            return False
        full_tags = sorted(c.tags)
        return full_tags in (["free-surface", "free-surface"], ["free-surface", "symmetry-axis"])

    hits = [c for c in inside_u if both_on_surface(c)]
    confirmed = bool(hits)
    rep.results["u_nodes_inside_W"] = len(inside_u)
    rep.add(
        "u_node_both_ends_on_surface",
        confirmed,
        f"{len(hits)} u-node(s) inside the basin with both ends on the surface"
        + (f" at x = {[round(x, 4) for x in surface_points(hits[0])]}" if hits else ""),
    )
    if bottom is not None:
        # right half of the bottom plus the axis segment below it; v vanishes on the axis by oddness
        depth = float(-bottom[:, 1].min())
        axis = uv_grid(np.zeros(50), -np.linspace(h, depth, 50), params)[1]
        half = np.vstack([_extend(bc), [[0.0, 0.0]]])
        alt = [
            c for c in ucs
            if not c.closed and c.tags == ("free-surface", "free-surface")
            and np.all(points_in_polygon(_extend(c)[1:-1], half))
        ]
        rep.results["alternative_bottom"] = {
            "max_abs_v_on_axis": float(np.abs(axis).max()),
            "u_nodes_both_ends_on_F": len(alt),
        }
        rep.add(
            "alternative_bottom_is_streamline",
            float(np.abs(axis).max()) == 0.0,
            f"max |v(0, y)| = {np.abs(axis).max():.1e} on the axis segment",
        )
    finite_u = [c for c in ucs if _finite(c)]
    rep.add(
        "finite_u_nodes_inside_basin",
        bool(finite_u) and len(inside_u) == len(finite_u),
        f"{len(inside_u)} of {len(finite_u)} finite u-curves lie inside the basin",
    )

    if params.m in REFERENCE_COUNTS:
        for scope, (nv, nu) in REFERENCE_COUNTS[params.m].items():
            got = inventory[scope]
            rep.add(
                f"{scope}_counts_v{nv}_u{nu}",
                got["v"] == nv and got["u"] == nu,
                f"{scope.replace('_', ' ')}: {got['v']} v-node(s), {got['u']} u-node(s)",
            )

    if refine:
        _, ucs2, vcs2 = _trace(params, window, 2 * resolution)
        same_counts = len(ucs2) == len(ucs) and len(vcs2) == len(vcs)
        shift = max(_match_endpoints(ucs, ucs2), _match_endpoints(vcs, vcs2))
        rep.results["refinement"] = {
            "u": len(ucs2),
            "v": len(vcs2),
            "max_endpoint_shift": shift,
        }
        rep.add(
            "refinement_stable",
            same_counts and shift < h,
            f"counts {len(ucs)}/{len(vcs)} -> {len(ucs2)}/{len(vcs2)}, endpoint shift {shift / h:.3f} cells",
        )
    rep.wall_time = time.perf_counter() - t0
    return CounterexampleReport(
        lam, h, ucs, vcs, bottom, a, confirmed, inventory, rep, grid
    )


def normal_flux(curve: NodalCurve, params: SloshingParams) -> float:
    """max |grad u . n| over segment midpoints, relative to max |grad u| on the curve."""
    p = curve.vertices
    mid = 0.5 * (p[1:] + p[:-1])
    t = np.diff(p, axis=0)
    t /= np.linalg.norm(t, axis=1)[:, None]
    n = np.column_stack([-t[:, 1], t[:, 0]])
    gx, gy = grad_u(mid[:, 0], mid[:, 1], params)
    g = np.hypot(gx, gy)
    return float(np.max(np.abs(gx * n[:, 0] + gy * n[:, 1])) / np.max(g))


# separable comparison -------------------------------------------------------


@dataclass(frozen=True)
class CanalMode:
    """``cos(k (x + a)) cosh(k (y + d))`` on the canal ``[-a, a] x [-d, 0]``."""

    a: float
    d: float
    k: float

    def __call__(self, x, y):
        return np.cos(self.k * (np.asarray(x) + self.a)) * np.cosh(self.k * (np.asarray(y) + self.d))

    @property
    def domain(self):
        return rect(2 * self.a, self.d, x0=-self.a, y0=-self.d)

    def nodal_lines(self) -> list[float]:
        """x positions of the vertical nodal lines."""
        n = int(round(2 * self.a * self.k / math.pi))
        return [-self.a + (2 * j + 1) * math.pi / (2 * self.k) for j in range(n)]

    def sample(self, res: int = 200) -> ScalarField2D:
        """Cell-centred samples, ``res`` cells across the width."""
        h = 2 * self.a / res
        ny = max(2, int(round(self.d / h)))
        hy0 = -self.d + 0.5 * h
        return ScalarField2D.sample(self, (-self.a + 0.5 * h, hy0), h, (ny, res))


def rectangular_canal_modes(a: float, d: float, n: int) -> EigenPair:
    """n-th sloshing mode of the rectangular canal of half-width a and depth d."""
    if not (a > 0 and d > 0):
        raise DomainError("canal half-width and depth must be positive")
    if n < 1:
        raise DomainError("mode index n must be >= 1")
    k = n * math.pi / (2 * a)
    return EigenPair(index=n, eigenvalue=k * math.tanh(k * d), eigenfunction=CanalMode(a, d, k))


def kuttler_count(a: float, d: float, n_max: int = 6, res: int = 200) -> ExperimentReport:
    """Nodal domains of the first canal modes against the bound n + 1."""
    rep = ExperimentReport("kuttler_canal", config={"a": a, "d": d, "n_max": n_max, "res": res})
    rows = []
    for n in range(1, n_max + 1):
        mode = rectangular_canal_modes(a, d, n)
        nu = count_sign_components(mode.eigenfunction.sample(res), 4, BAND_CLOSED_FORM).count
        rows.append({"n": n, "lambda": mode.eigenvalue, "domains": nu})
    rep.results["rows"] = rows
    rep.add("kuttler_bound", all(r["domains"] <= r["n"] + 1 for r in rows), f"{n_max} modes")
    return rep
