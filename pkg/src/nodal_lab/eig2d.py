"""Dirichlet Laplacian eigenproblems on masked planar grids and the membrane experiments."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from . import DomainError, ResolutionError
from . import specfun
from .domains import DomainSpec, disc, rect
from .lanczos import smallest_eigenpairs
from .nodal import (
    BAND_CLOSED_FORM,
    BAND_NUMERIC,
    NodalCurve,
    ScalarField2D,
    classify_endpoints,
    count_sign_components,
    extract_zero_curves,
)
from .reports import EigenPair, ExperimentReport

MAX_COUNT = 12


@dataclass
class DiscreteOperator:
    """Five-point -Laplacian on the active samples of a mask, Dirichlet rows folded."""

    matrix: sp.csr_matrix
    h: float
    mask: ScalarField2D
    index: np.ndarray  # grid -> row, -1 outside
    domain: DomainSpec | None = None
    boundary: str = "fitted"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_field(self, vec: np.ndarray) -> ScalarField2D:
        vals = np.zeros(self.mask.shape)
        vals[self.mask.mask] = vec
        return ScalarField2D(self.mask.origin, self.h, vals, self.mask.mask.copy())


def build_mask(spec: DomainSpec, h: float) -> ScalarField2D:
    """Active-sample mask of ``spec`` on the lattice ``h * Z^2`` (rect: anchored at its corner)."""
    if not h > 0:
        raise DomainError("grid spacing must be positive")
    if spec.kind == "explicit-mask":
        p = spec.params
        m = p["mask"]
        return ScalarField2D(p["origin"], p["h"], m.astype(float), m)
    if spec.kind == "punctured-annulus":
        cells = 2 * spec.params["eps"] / h
        if cells < 3:
            raise ResolutionError(f"holes span {cells:.2f} cells on the unit circle; need >= 3")
    x0, y0, x1, y1 = spec.bbox()
    if spec.kind == "rect":
        i = np.arange(0, int(round((x1 - x0) / h)) + 2)
        j = np.arange(0, int(round((y1 - y0) / h)) + 2)
        xs, ys = x0 + h * i, y0 + h * j
    else:
        xs = h * np.arange(math.floor(x0 / h) - 1, math.ceil(x1 / h) + 2)
        ys = h * np.arange(math.floor(y0 / h) - 1, math.ceil(y1 / h) + 2)
    X, Y = np.meshgrid(xs, ys)
    m = spec.contains(X, Y, h)
    return ScalarField2D((float(xs[0]), float(ys[0])), h, m.astype(float), m)


def mask_to_pgm(mask: ScalarField2D) -> str:
    """Plain-text PGM (P2) raster of the active cells, top row = largest y."""
    m = mask.mask[::-1].astype(int)
    rows = "\n".join(" ".join(str(v) for v in row) for row in m)
    return f"P2\n# origin {mask.origin[0]:.10g} {mask.origin[1]:.10g} h {mask.h:.10g}\n{m.shape[1]} {m.shape[0]}\n1\n{rows}\n"


def mask_components(mask: ScalarField2D) -> int:
    return int(ndimage.label(mask.mask)[1])


def build_operator(
    spec: DomainSpec, h: float, boundary: str = "fitted", require_connected: bool = True
) -> DiscreteOperator:
    """Assemble the five-point operator.

    ``boundary="staircase"`` imposes u = 0 at the first inactive neighbour.
    ``"fitted"`` places the zero at the true boundary crossing, a fraction
    theta of the way to that neighbour, by linear extrapolation; this adds
    ``(1/theta - 1) / h^2`` to the diagonal, keeps the matrix symmetric
    positive definite and restores second-order eigenvalue convergence.
    """
    if boundary not in ("fitted", "staircase"):
        raise DomainError(f"boundary must be 'fitted' or 'staircase', got {boundary!r}")
    mask = build_mask(spec, h)
    m = mask.mask
    if require_connected and mask_components(mask) != 1:
        raise DomainError(f"mask of {spec.kind} at h={h} is not connected")
    idx = -np.ones(m.shape, dtype=int)
    n = int(m.sum())
    idx[m] = np.arange(n)
    rows, cols = [], []
    for dj, di in ((0, 1), (1, 0)):
        a = idx[: m.shape[0] - dj, : m.shape[1] - di]
        b = idx[dj:, di:]
        ok = (a >= 0) & (b >= 0)
        rows += [a[ok], b[ok]]
        cols += [b[ok], a[ok]]
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    off = sp.csr_matrix((np.full(r.size, -1.0 / h**2), (r, c)), shape=(n, n))
    diag = np.full(n, 4.0 / h**2)
    if boundary == "fitted" and spec.kind != "explicit-mask":
        X, Y = np.meshgrid(mask.x, mask.y)
        padded = np.pad(m, 1)
        for dj, di in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            nb = padded[1 + dj : 1 + dj + m.shape[0], 1 + di : 1 + di + m.shape[1]]
            cut = m & ~nb
            if not cut.any():
                continue
            pts = np.column_stack([X[cut], Y[cut]])
            theta = spec.exit_fraction(pts, np.array([di * h, dj * h]), h)
            np.add.at(diag, idx[cut], (1.0 / theta - 1.0) / h**2)
    A = (off + sp.diags(diag, format="csr")).tocsr()
    return DiscreteOperator(A, h, mask, idx, spec, boundary)


def discretization_error(op: DiscreteOperator, lam: float) -> float:
    """Relative eigenvalue error estimate: O(h) on staircase boundaries, else O(h^2)."""
    h = op.h
    if op.domain is not None and op.domain.curved and op.boundary == "staircase":
        return h / op.domain.scale
    return lam * h**2 / 12.0


def eigen_smallest(op: DiscreteOperator, count: int) -> list[EigenPair]:
    """The ``count`` smallest eigenpairs, with near-degenerate clusters labelled."""
    if count > MAX_COUNT:
        raise DomainError(f"count must be <= {MAX_COUNT}")
    if op.dim < 10 * count:
        raise ResolutionError(f"operator dimension {op.dim} < 10 * count")
    lam, X, res = smallest_eigenpairs(op.matrix, count)
    cluster = np.zeros(count, dtype=int)
    for k in range(1, count):
        rel = (lam[k] - lam[k - 1]) / lam[k]
        tight = rel < 10 * discretization_error(op, lam[k])
        cluster[k] = cluster[k - 1] if tight else cluster[k - 1] + 1
    mult = np.bincount(cluster)
    out = []
    for k in range(count):
        gap = None if k + 1 >= count else float(lam[k + 1] - lam[k])
        out.append(
            EigenPair(
                index=k + 1,
                eigenvalue=float(lam[k]),
                eigenfunction=op.to_field(X[:, k]),
                multiplicity=int(mult[cluster[k]]),
                residual=float(res[k]),
                gap=gap,
                cluster=int(cluster[k]),
            )
        )
    return out


def cluster_basis(pairs: list[EigenPair], index: int) -> list[EigenPair]:
    c = pairs[index - 1].cluster
    return [p for p in pairs if p.cluster == c]


def rotations(fields: list[ScalarField2D], samples: int, seed: int) -> list[ScalarField2D]:
    """Random unit combinations inside an eigenspace spanned by ``fields``."""
    rng = np.random.default_rng(seed)
    out = []
    base = fields[0]
    for _ in range(samples):
        w = rng.standard_normal(len(fields))
        w /= np.linalg.norm(w)
        vals = sum(wi * f.values for wi, f in zip(w, fields))
        out.append(ScalarField2D(base.origin, base.h, vals, base.mask.copy()))
    return out


def interlacing_check(r: float, h: float | None = None) -> ExperimentReport:
    """Is j01 < mu(r) < j11?  Optionally cross-check mu(r)^2 against the FD annulus."""
    t0 = time.perf_counter()
    root = specfun.cross_product_mu(r)
    j01 = specfun.bessel_first_zero(0)
    j11 = specfun.bessel_first_zero(1)
    rep = ExperimentReport(
        "interlacing",
        config={"r": r, "h": h},
        results={"mu": root.mu, "residual": root.residual, "j01": j01, "j11": j11},
    )
    rep.add("cross_product_residual", abs(root.residual) <= 1e-8, f"|residual| = {abs(root.residual):.2e}")
    inside = j01 < root.mu < j11
    rep.results["interlacing"] = bool(inside)
    rep.add("interlacing_j01_mu_j11", inside, f"{j01:.4f} < {root.mu:.4f} < {j11:.4f} is {inside}")
    if h is not None:
        lam1 = eigen_smallest(build_operator(DomainSpec("annulus", {"r": r}), h), 1)[0].eigenvalue
        rel = abs(lam1 - root.mu**2) / root.mu**2
        rep.results["fd_lambda1"] = lam1
        rep.results["fd_relative_error"] = rel
        rep.add("fd_annulus_matches_mu_squared", rel <= 0.02, f"relative error {rel:.4f}")
    rep.wall_time = time.perf_counter() - t0
    return rep


def _curve_summary(curve: NodalCurve) -> dict:
    return {
        "closed": curve.closed,
        "tags": list(curve.tags),
        "length": curve.length,
        "vertices": len(curve.vertices),
    }


def nodal_topology(field: ScalarField2D, domain: DomainSpec, h: float) -> tuple[list[NodalCurve], dict]:
    """Trace and classify the zero curves of an eigenfunction."""
    curves = [
        classify_endpoints(c, domain, h, strict=False)
        for c in extract_zero_curves(field, BAND_NUMERIC)
    ]
    boundary_hits = sum(
        1 for c in curves if not c.closed for t in c.tags if t != "domain-interior-violation"
    )
    return curves, {
        "curves": [_curve_summary(c) for c in curves],
        "open": sum(1 for c in curves if not c.closed),
        "closed": sum(1 for c in curves if c.closed),
        "boundary_hits": boundary_hits,
    }


def _min_boundary_distance(curves: list[NodalCurve], domain: DomainSpec) -> float:
    feats = domain.boundary_features()
    best = np.inf
    for c in curves:
        for _, fn in feats:
            best = min(best, float(np.min(fn(c.vertices))))
    return best


def payne_experiment(
    N: int, eps: float, r: float, h: float, refine: bool = True, count: int = 3
) -> ExperimentReport:
    """Second eigenpair on the disc-plus-annulus domain D_{N,eps}.

    Closedness of the nodal curve is recorded, never asserted: the domains for
    which it is proven need N far beyond desk-scale resolution.
    """
    t0 = time.perf_counter()
    rep = ExperimentReport("payne", config={"N": N, "eps": eps, "r": r, "h": h, "refine": refine})
    pre = interlacing_check(r)
    rep.results["mu"] = pre.results["mu"]
    rep.add("interlacing_precondition", pre.results["interlacing"], f"mu({r}) = {pre.results['mu']:.4f}")
    spec = DomainSpec("punctured-annulus", {"N": N, "eps": eps, "r": r})
    levels = [h, h / 2] if refine else [h]
    per_level = []
    for hh in levels:
        op = build_operator(spec, hh)
        pairs = eigen_smallest(op, count)
        l1, l2, l3 = (p.eigenvalue for p in pairs[:3])
        simple = pairs[1].multiplicity == 1
        u2 = pairs[1].eigenfunction
        curves, topo = nodal_topology(u2, spec, hh)
        comps = count_sign_components(u2, 4, BAND_NUMERIC).count
        per_level.append(
            {
                "h": hh,
                "dim": op.dim,
                "lambda": [l1, l2, l3],
                "gap": (l3 - l2) / l2,
                "simple": simple,
                "residual": pairs[1].residual,
                "nodal_domains": comps,
                "topology": topo,
                "closed_and_interior": topo["closed"] >= 1 and topo["open"] == 0,
                "min_boundary_distance": _min_boundary_distance(curves, spec) if curves else None,
            }
        )
    rep.results["levels"] = per_level
    first = per_level[0]
    if not first["simple"]:
        rep.add("lambda2_simple", None, "simplicity undetermined: lambda2 lies in a cluster")
    else:
        rep.add("lambda2_simple", None, f"relative gap {first['gap']:.4f}")
    if refine:
        a, b = per_level
        drift = abs(a["lambda"][1] - b["lambda"][1]) / b["lambda"][1]
        rep.results["lambda2_drift"] = drift
        consistent = drift < 0.05 and a["simple"] == b["simple"] and a["gap"] > 0 and b["gap"] > 0
        rep.add(
            "lambda2_refinement_consistent",
            consistent,
            f"lambda2 drift {drift:.4f}; gaps {a['gap']:.4f} -> {b['gap']:.4f}",
        )
    rep.add(
        "nodal_curve_closed",
        None,
        f"closed={first['closed_and_interior']}, curves={first['topology']['closed']} closed"
        f" / {first['topology']['open']} open",
    )
    rep.wall_time = time.perf_counter() - t0
    return rep


def alessandrini_check(spec: DomainSpec, h: float, rotations_n: int = 8, seed: int = 0) -> ExperimentReport:
    """Nodal curve of u2 on a convex domain: one open curve with two boundary points."""
    if not spec.convex:
        raise DomainError("Alessandrini's property concerns convex domains (disc or rect)")
    t0 = time.perf_counter()
    rep = ExperimentReport("alessandrini", config={"domain": spec.kind, "params": spec.params, "h": h})
    op = build_operator(spec, h)
    pairs = eigen_smallest(op, 4)
    basis = cluster_basis(pairs, 2)
    fields = [p.eigenfunction for p in basis]
    cands = list(fields)
    if len(fields) > 1:
        cands += rotations(fields, rotations_n, seed)
    rep.results["lambda"] = [p.eigenvalue for p in pairs]
    rep.results["multiplicity"] = len(fields)
    outcomes = []
    for f in cands:
        curves, topo = nodal_topology(f, spec, h)
        ok = (
            len(curves) == 1
            and not curves[0].closed
            and all(t == "outer-boundary" for t in curves[0].tags)
        )
        outcomes.append({"ok": ok, "boundary_hits": topo["boundary_hits"], "curves": len(curves)})
    rep.results["samples"] = outcomes
    rep.add(
        "u2_meets_boundary_twice",
        all(o["ok"] for o in outcomes),
        f"{sum(o['ok'] for o in outcomes)}/{len(outcomes)} eigenfunctions with one open curve, 2 boundary points",
    )
    rep.wall_time = time.perf_counter() - t0
    return rep


def square_spectrum(kmax: int) -> list[tuple[int, list[tuple[int, int]]]]:
    """Distinct eigenvalues m^2 + n^2 of the (0, pi)^2 square with their (m, n) lists,
    enough to cover indices 1..kmax counted with multiplicity."""
    lim = int(math.isqrt(2 * kmax * 4)) + 4
    table: dict[int, list] = {}
    for m in range(1, lim):
        for n in range(1, lim):
            table.setdefault(m * m + n * n, []).append((m, n))
    out, total = [], 0
    for lam in sorted(table):
        out.append((lam, table[lam]))
        total += len(table[lam])
        if total >= kmax:
            break
    return out


def _square_field(coeffs: dict[tuple[int, int], float], res: int) -> ScalarField2D:
    h = math.pi / res
    return ScalarField2D.sample(
        lambda X, Y: sum(c * np.sin(m * X) * np.sin(n * Y) for (m, n), c in coeffs.items()),
        (0.5 * h, 0.5 * h),
        h,
        (res, res),
    )


def square_nodal_count(coeffs: dict[tuple[int, int], float], res: int = 200) -> int:
    return count_sign_components(_square_field(coeffs, res), 4, BAND_CLOSED_FORM).count


def pleijel_square_scan(k_max: int = 10, angles: int = 48, res: int = 200) -> ExperimentReport:
    """Maximal nodal-domain count per index on the square, over products and
    ``angles`` in-eigenspace combinations (all eigenspaces for k <= 20 are at
    most two-dimensional, so a combination is ``cos t * f1 + sin t * f2``)."""
    if k_max > 20:
        raise DomainError("k_max must be <= 20")
    t0 = time.perf_counter()
    rep = ExperimentReport("pleijel", config={"k_max": k_max, "angles": angles, "res": res})
    rows = []
    k = 0
    for lam, modes in square_spectrum(k_max):
        family = [{mn: 1.0} for mn in modes]
        if len(modes) == 2:
            for t in np.linspace(0.0, math.pi, angles, endpoint=False)[1:]:
                family.append({modes[0]: math.cos(t), modes[1]: math.sin(t)})
        elif len(modes) > 2:
            raise DomainError("eigenspaces above dimension two are outside the scanned family")
        counts = [square_nodal_count(c, res) for c in family]
        best = max(counts)
        for _ in modes:
            k += 1
            if k > k_max:
                break
            rows.append({"k": k, "lambda": lam, "modes": modes, "max_domains": best})
    rep.results["rows"] = rows
    sharp = [r["k"] for r in rows if r["max_domains"] == r["k"]]
    rep.results["courant_sharp"] = sharp
    ok = all(
        (r["max_domains"] == r["k"]) if r["k"] in (1, 2, 4) else (r["max_domains"] < r["k"])
        for r in rows
    )
    rep.add("courant_sharp_only_1_2_4", ok, f"Courant-sharp indices {sharp}")
    rep.wall_time = time.perf_counter() - t0
    return rep


def courant_square(n_max: int = 10, res: int = 200) -> ExperimentReport:
    """nu(u_n) <= n for the product eigenfunctions of the square, ties ordered by m."""
    rep = ExperimentReport("courant_square", config={"n_max": n_max})
    rows = []
    k = 0
    for lam, modes in square_spectrum(n_max):
        for mn in modes:
            k += 1
            if k > n_max:
                break
            nu = square_nodal_count({mn: 1.0}, res)
            rows.append({"n": k, "mode": mn, "lambda": lam, "domains": nu})
    rep.results["rows"] = rows
    rep.add("courant_bound", all(r["domains"] <= r["n"] for r in rows), f"{len(rows)} eigenfunctions")
    return rep


def disc_convergence(hs=(1 / 32, 1 / 64, 1 / 128), boundary: str = "fitted") -> dict:
    """FD disc eigenvalues against j01^2, j11^2 and the fitted error order."""
    j01 = specfun.bessel_first_zero(0)
    j11 = specfun.bessel_first_zero(1)
    l1, l2 = [], []
    for h in hs:
        pairs = eigen_smallest(build_operator(disc(1.0), h, boundary), 3)
        l1.append(pairs[0].eigenvalue)
        l2.append(pairs[1].eigenvalue)
    e1 = np.abs(np.array(l1) - j01**2) / j01**2
    e2 = np.abs(np.array(l2) - j11**2) / j11**2
    return {
        "h": list(hs),
        "lambda1": l1,
        "lambda2": l2,
        "rel_err1": e1.tolist(),
        "rel_err2": e2.tolist(),
        "order1": observed_order(hs, e1),
        "order2": observed_order(hs, e2),
    }


def square_convergence(hs=(1 / 32, 1 / 64, 1 / 128)) -> dict:
    """FD unit-square lambda1 against 2 pi^2 (grid aligned with the boundary)."""
    exact = 2 * math.pi**2
    lam = [eigen_smallest(build_operator(rect(1.0, 1.0), h), 1)[0].eigenvalue for h in hs]
    err = np.abs(np.array(lam) - exact) / exact
    return {"h": list(hs), "lambda1": lam, "rel_err": err.tolist(), "order": observed_order(hs, err)}


def observed_order(hs, errors) -> float:
    """Least-squares slope of log(error) against log(h)."""
    return float(np.polyfit(np.log(np.asarray(hs)), np.log(np.asarray(errors)), 1)[0])
