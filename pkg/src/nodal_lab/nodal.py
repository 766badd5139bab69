"""Nodal-set analytics on sampled fields.

Sign components are counted by 4-connected labelling of the strictly positive
and strictly negative samples; ``"8-mixed"`` additionally joins a diagonal
pair inside a saddle cell when the cell-centre value has their sign, which is
exactly the topology of the marching-squares curves.  Zero curves are traced
with marching squares, vertices placed by linear interpolation along edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from . import DomainError, ResolutionError
from .domains import DomainSpec, Feature

BAND_CLOSED_FORM = 1e-12
BAND_NUMERIC = 1e-9

ENDPOINT_TAGS = (
    "free-surface",
    "bottom",
    "outer-boundary",
    "inner-boundary",
    "symmetry-axis",
    "domain-interior-violation",
)


class DegenerateFieldError(DomainError):
    """Every active sample lies inside the zero band."""


@dataclass
class ScalarField2D:
    """Samples on the grid ``(x0 + i h, y0 + j h)``; ``values[j, i]``.

    ``mask`` marks active samples (domain membership); inactive samples carry
    no meaning.
    """

    origin: tuple[float, float]
    h: float
    values: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or min(self.values.shape) < 2:
            raise DomainError("field needs at least 2x2 samples")
        if not self.h > 0:
            raise DomainError("grid spacing must be positive")
        if self.mask is None:
            self.mask = np.ones(self.values.shape, dtype=bool)
        else:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.values.shape:
                raise DomainError("mask and values differ in shape")

    @classmethod
    def sample(cls, f: Callable, origin, h: float, shape, mask=None) -> "ScalarField2D":
        """Evaluate ``f(X, Y)`` on a ``shape = (ny, nx)`` grid."""
        ny, nx = shape
        x = origin[0] + h * np.arange(nx)
        y = origin[1] + h * np.arange(ny)
        X, Y = np.meshgrid(x, y)
        vals = np.asarray(f(X, Y), dtype=float)
        if mask is not None and callable(mask):
            mask = mask(X, Y)
        return cls(tuple(origin), h, vals, mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def x(self) -> np.ndarray:
        return self.origin[0] + self.h * np.arange(self.shape[1])

    @property
    def y(self) -> np.ndarray:
        return self.origin[1] + self.h * np.arange(self.shape[0])

    def band(self, eps0: float = BAND_CLOSED_FORM) -> float:
        active = self.values[self.mask]
        return eps0 * (np.max(np.abs(active)) if active.size else 0.0)

    def to_csv(self, path, other: "ScalarField2D | None" = None, names=("value",)) -> None:
        """Write ``x,y,<names>`` rows for active samples, 17 significant digits."""
        X, Y = np.meshgrid(self.x, self.y)
        cols = [X[self.mask], Y[self.mask], self.values[self.mask]]
        if other is not None:
            cols.append(other.values[self.mask])
        header = ",".join(("x", "y") + tuple(names))
        np.savetxt(path, np.column_stack(cols), delimiter=",", fmt="%.17g", header=header, comments="")


@dataclass
class SignComponents:
    count: int
    positive: int
    negative: int
    sizes: list[int]
    labels: np.ndarray = field(repr=False)


@dataclass
class NodalDomainReport:
    index: int
    count: int
    bound: int
    sizes: list[int]

    @property
    def ok(self) -> bool:
        return self.count <= self.bound


@dataclass
class NodalCurve:
    """Polyline of the zero set; vertices are (x, y) rows."""

    vertices: np.ndarray
    closed: bool
    tags: tuple = (None, None)

    @property
    def endpoints(self) -> np.ndarray:
        return self.vertices[[0, -1]]

    @property
    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)))

    def to_json(self) -> dict:
        return {
            "closed": bool(self.closed),
            "tags": [t for t in self.tags] if not self.closed else [],
            "vertices": [[float(f"{a:.10g}"), float(f"{b:.10g}")] for a, b in self.vertices],
        }


def _signs(field: ScalarField2D, eps0: float) -> tuple[np.ndarray, np.ndarray]:
    band = field.band(eps0)
    pos = field.mask & (field.values > band)
    neg = field.mask & (field.values < -band)
    return pos, neg


class _UnionFind:
    def __init__(self, n: int):
        self.parent = np.arange(n)

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def count_sign_components(
    field: ScalarField2D, connectivity: int | str = 4, eps0: float = BAND_CLOSED_FORM
) -> SignComponents:
    """Connected components of the positive and of the negative samples."""
    if connectivity not in (4, "8-mixed"):
        raise DomainError(f"connectivity must be 4 or '8-mixed', got {connectivity!r}")
    pos, neg = _signs(field, eps0)
    if not (pos.any() or neg.any()):
        raise DegenerateFieldError("all active samples lie in the zero band")
    lp, npos = ndimage.label(pos)
    ln, nneg = ndimage.label(neg)
    labels = np.where(pos, lp, np.where(neg, ln + npos, 0))
    total = npos + nneg
    if connectivity == "8-mixed" and total > 1:
        uf = _UnionFind(total + 1)
        v = field.values
        center = 0.25 * (v[:-1, :-1] + v[:-1, 1:] + v[1:, :-1] + v[1:, 1:])
        for sgn, m in ((1, pos), (-1, neg)):
            a, b, c, d = m[:-1, :-1], m[:-1, 1:], m[1:, 1:], m[1:, :-1]  # bl br tr tl
            cen = (sgn * center) > 0
            for j, i in zip(*np.nonzero(a & c & ~b & ~d & cen)):
                uf.union(labels[j, i], labels[j + 1, i + 1])
            for j, i in zip(*np.nonzero(b & d & ~a & ~c & cen)):
                uf.union(labels[j, i + 1], labels[j + 1, i])
        roots = np.array([uf.find(k) for k in range(total + 1)])
        _, relabel = np.unique(roots, return_inverse=True)
        labels = relabel[labels]
        npos = len(np.unique(labels[pos]))
        nneg = len(np.unique(labels[neg]))
        total = npos + nneg
    sizes = np.bincount(labels.ravel(), minlength=total + 1)[1:].tolist()
    return SignComponents(total, int(npos), int(nneg), sizes, labels)


def nodal_domain_report(
    field: ScalarField2D, index: int, bound: int | None = None, eps0: float = BAND_CLOSED_FORM
) -> NodalDomainReport:
    """Courant-type verdict; ``bound`` defaults to ``index``."""
    comp = count_sign_components(field, 4, eps0)
    return NodalDomainReport(index, comp.count, index if bound is None else bound, comp.sizes)


# marching squares -----------------------------------------------------------

_BOTTOM, _RIGHT, _TOP, _LEFT = range(4)


def _crossing_vertices(field: ScalarField2D, eps0: float):
    v = field.values.copy()
    band = field.band(eps0)
    v[np.abs(v) <= band] = 0.0
    pos = v >= 0.0  # zero-band samples sit on the positive side
    m = field.mask
    x0, y0 = field.origin
    h = field.h
    # horizontal edges (j, i)-(j, i+1)
    he = m[:, :-1] & m[:, 1:] & (pos[:, :-1] != pos[:, 1:])
    vert_h = {}
    for j, i in zip(*np.nonzero(he)):
        a, b = v[j, i], v[j, i + 1]
        t = a / (a - b)
        vert_h[(j, i)] = (x0 + (i + t) * h, y0 + j * h)
    ve = m[:-1, :] & m[1:, :] & (pos[:-1, :] != pos[1:, :])
    vert_v = {}
    for j, i in zip(*np.nonzero(ve)):
        a, b = v[j, i], v[j + 1, i]
        t = a / (a - b)
        vert_v[(j, i)] = (x0 + i * h, y0 + (j + t) * h)
    return v, pos, vert_h, vert_v


def _cell_segments(field: ScalarField2D, v, pos):
    """Yield (cell, edge_key_a, edge_key_b) for every zero-curve segment."""
    m = field.mask
    act = m[:-1, :-1] & m[:-1, 1:] & m[1:, 1:] & m[1:, :-1]
    bl, br, tr, tl = pos[:-1, :-1], pos[:-1, 1:], pos[1:, 1:], pos[1:, :-1]
    case = bl * 1 + br * 2 + tr * 4 + tl * 8
    mixed = act & (case != 0) & (case != 15)
    for j, i in zip(*np.nonzero(mixed)):
        keys = {
            _BOTTOM: ("h", j, i),
            _TOP: ("h", j + 1, i),
            _LEFT: ("v", j, i),
            _RIGHT: ("v", j, i + 1),
        }
        c = int(case[j, i])
        crossed = []
        if bl[j, i] != br[j, i]:
            crossed.append(_BOTTOM)
        if br[j, i] != tr[j, i]:
            crossed.append(_RIGHT)
        if tr[j, i] != tl[j, i]:
            crossed.append(_TOP)
        if tl[j, i] != bl[j, i]:
            crossed.append(_LEFT)
        if len(crossed) == 2:
            yield (j, i), keys[crossed[0]], keys[crossed[1]]
            continue
        # saddle: the centre value decides which diagonal pair is joined
        centre = 0.25 * (v[j, i] + v[j, i + 1] + v[j + 1, i + 1] + v[j + 1, i])
        if (centre >= 0) == bool(bl[j, i]):
            pairs = ((_BOTTOM, _RIGHT), (_TOP, _LEFT))
        else:
            pairs = ((_LEFT, _BOTTOM), (_RIGHT, _TOP))
        assert c in (5, 10)
        for a, b in pairs:
            yield (j, i), keys[a], keys[b]


def extract_zero_curves(field: ScalarField2D, eps0: float = BAND_CLOSED_FORM) -> list[NodalCurve]:
    """Zero set of the piecewise-linear interpolant as polylines.

    Curves are only traced through cells whose four corners are active, so an
    open curve ends where it leaves the active region.
    """
    v, pos, vert_h, vert_v = _crossing_vertices(field, eps0)

    def point(key):
        kind, j, i = key
        return vert_h[(j, i)] if kind == "h" else vert_v[(j, i)]

    adj: dict[tuple, list[int]] = {}
    segs = []
    for _, a, b in _cell_segments(field, v, pos):
        k = len(segs)
        segs.append((a, b))
        adj.setdefault(a, []).append(k)
        adj.setdefault(b, []).append(k)
    used = np.zeros(len(segs), dtype=bool)

    def walk(start_key, first_seg):
        keys = [start_key]
        key, s = start_key, first_seg
        while s is not None and not used[s]:
            used[s] = True
            a, b = segs[s]
            key = b if a == key else a
            keys.append(key)
            nxt = [t for t in adj[key] if not used[t]]
            s = nxt[0] if nxt else None
        return keys

    curves = []
    # open curves start at edges touched by a single segment
    ends = sorted(k for k, lst in adj.items() if len(lst) == 1)
    for key in ends:
        s = adj[key][0]
        if used[s]:
            continue
        keys = walk(key, s)
        curves.append(NodalCurve(np.array([point(k) for k in keys]), closed=False))
    for s in range(len(segs)):
        if used[s]:
            continue
        start = segs[s][0]
        keys = walk(start, s)
        curves.append(NodalCurve(np.array([point(k) for k in keys]), closed=keys[0] == keys[-1]))
    return curves


def boundary_features(domain, surface: str | None = None) -> list[Feature]:
    if isinstance(domain, DomainSpec):
        return domain.boundary_features(surface)
    return list(domain)


def classify_endpoints(
    curve: NodalCurve,
    domain: DomainSpec | Sequence[Feature],
    h: float,
    surface: str | None = None,
    tol_cells: float = 1.5,
    strict: bool = True,
) -> NodalCurve:
    """Tag each endpoint with the nearest boundary feature within ``tol_cells`` cells.

    The default tolerance of 1.5 cells covers the cell diagonal plus the
    staircase offset of masked boundaries.  An endpoint with no feature in
    reach raises ResolutionError (``strict``) or is tagged as a
    domain-interior violation.
    """
    if curve.closed:
        return replace(curve, tags=())
    feats = boundary_features(domain, surface)
    tags = []
    for p in curve.endpoints:
        best, dist = None, np.inf
        for tag, fn in feats:
            d = float(fn(p[None, :])[0])
            if d < dist:
                best, dist = tag, d
        if dist > tol_cells * h:
            if strict:
                raise ResolutionError(
                    f"curve ends at {tuple(np.round(p, 4))}, {dist / h:.2f} cells from any boundary"
                )
            best = "domain-interior-violation"
        tags.append(best)
    return replace(curve, tags=tuple(tags))


# consistency and geometry helpers -----------------------------------------


def regions_from_curves(
    field: ScalarField2D,
    curves: Sequence[NodalCurve],
    connectivity: int | str = 4,
    eps0: float = BAND_CLOSED_FORM,
) -> int:
    """Number of regions cut out by the curves, ignoring sample signs.

    Neighbouring samples are joined unless a curve vertex lies on the edge
    between them; with ``"8-mixed"`` a diagonal pair inside a cell is also
    joined unless some curve segment crosses that diagonal.
    """
    pos, neg = _signs(field, eps0)
    live = pos | neg
    ny, nx = field.shape
    x0, y0 = field.origin
    h = field.h
    cut_h = np.zeros((ny, nx - 1), dtype=bool)
    cut_v = np.zeros((ny - 1, nx), dtype=bool)
    cell_segs: dict[tuple[int, int], list] = {}
    for c in curves:
        fx = (c.vertices[:, 0] - x0) / h
        fy = (c.vertices[:, 1] - y0) / h
        on_row = np.abs(fy - np.round(fy)) < 1e-7
        for xi, yi, r in zip(fx, fy, on_row):
            if r:
                j, i = int(round(yi)), min(int(np.floor(xi)), nx - 2)
                cut_h[j, i] = True
            else:
                j, i = min(int(np.floor(yi)), ny - 2), int(round(xi))
                cut_v[j, i] = True
        mids = 0.5 * (c.vertices[1:] + c.vertices[:-1])
        for (a, b), mid in zip(zip(c.vertices[:-1], c.vertices[1:]), mids):
            j = min(int(np.floor((mid[1] - y0) / h)), ny - 2)
            i = min(int(np.floor((mid[0] - x0) / h)), nx - 2)
            cell_segs.setdefault((j, i), []).append((a, b))
    idx = np.arange(ny * nx).reshape(ny, nx)
    uf = _UnionFind(ny * nx)
    for j, i in zip(*np.nonzero(live[:, :-1] & live[:, 1:] & ~cut_h)):
        uf.union(idx[j, i], idx[j, i + 1])
    for j, i in zip(*np.nonzero(live[:-1, :] & live[1:, :] & ~cut_v)):
        uf.union(idx[j, i], idx[j + 1, i])
    if connectivity == "8-mixed":
        for j in range(ny - 1):
            for i in range(nx - 1):
                for (ja, ia), (jb, ib) in (((j, i), (j + 1, i + 1)), ((j, i + 1), (j + 1, i))):
                    if not (live[ja, ia] and live[jb, ib]):
                        continue
                    p = np.array([x0 + ia * h, y0 + ja * h])
                    q = np.array([x0 + ib * h, y0 + jb * h])
                    if not any(_segments_cross(p, q, a, b) for a, b in cell_segs.get((j, i), ())):
                        uf.union(idx[ja, ia], idx[jb, ib])
    roots = {uf.find(k) for k in idx[live]}
    return len(roots)


def _segments_cross(p, q, a, b) -> bool:
    def orient(u, v, w):
        return (v[0] - u[0]) * (w[1] - u[1]) - (v[1] - u[1]) * (w[0] - u[0])

    d1, d2 = orient(p, q, a), orient(p, q, b)
    d3, d4 = orient(a, b, p), orient(a, b, q)
    return (d1 * d2 <= 0) and (d3 * d4 <= 0) and not (d1 == d2 == 0)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two vertex sets."""
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))


def points_in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Even-odd rule; polygon is an (m, 2) vertex ring (closing edge implied)."""
    px, py = points[:, 0][:, None], points[:, 1][:, None]
    ax, ay = polygon[:, 0], polygon[:, 1]
    bx, by = np.roll(ax, -1), np.roll(ay, -1)
    straddle = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = ax + (py - ay) * (bx - ax) / (by - ay)
    hits = straddle & (px < xcross)
    return (np.count_nonzero(hits, axis=1) % 2) == 1


def curves_to_json(curves: Sequence[NodalCurve], **extra) -> str:
    payload = dict(extra)
    payload["curves"] = [c.to_json() for c in curves]
    return json.dumps(payload, indent=1, sort_keys=True)
