"""Symbolic planar domains and their boundary features."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import DomainError

# a boundary feature is a tag plus a distance function on (k, 2) point arrays
Feature = tuple[str, Callable[[np.ndarray], np.ndarray]]


def _angle_in_holes(theta: np.ndarray, n: int, eps: float) -> np.ndarray:
    period = 2 * math.pi / n
    off = np.mod(theta + 0.5 * period, period) - 0.5 * period
    return np.abs(off) < eps


def _segment_distance(p: np.ndarray, a, b) -> np.ndarray:
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    d = b - a
    t = np.clip(((p - a) @ d) / (d @ d), 0.0, 1.0)
    return np.linalg.norm(p - (a + t[:, None] * d), axis=1)


@dataclass(frozen=True)
class DomainSpec:
    """Planar domain: disc, annulus(1, r), rect, punctured annulus or explicit mask.

    Use the module-level constructors rather than building instances directly.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        k, p = self.kind, self.params
        if k == "disc":
            if not p["radius"] > 0:
                raise DomainError("disc radius must be positive")
        elif k == "annulus":
            if not p["r"] > 1:
                raise DomainError("annulus needs outer radius r > 1")
        elif k == "rect":
            if not (p["a"] > 0 and p["b"] > 0):
                raise DomainError("rectangle sides must be positive")
        elif k == "punctured-annulus":
            if not p["r"] > 1:
                raise DomainError("punctured annulus needs r > 1")
            if p["N"] < 2:
                raise DomainError("punctured annulus needs N >= 2 holes")
            if not 0 < p["eps"] < math.pi / p["N"]:
                raise DomainError(f"hole half-width must lie in (0, pi/N), got {p['eps']}")
        elif k == "explicit-mask":
            pass
        else:
            raise DomainError(f"unknown domain kind {k!r}")

    @property
    def convex(self) -> bool:
        return self.kind in ("disc", "rect")

    @property
    def curved(self) -> bool:
        return self.kind in ("disc", "annulus", "punctured-annulus")

    @property
    def scale(self) -> float:
        """Characteristic length (outer radius or shorter side)."""
        p = self.params
        if self.kind == "disc":
            return p["radius"]
        if self.kind in ("annulus", "punctured-annulus"):
            return p["r"]
        if self.kind == "rect":
            return min(p["a"], p["b"])
        return 1.0

    def bbox(self) -> tuple[float, float, float, float]:
        p = self.params
        if self.kind == "disc":
            R = p["radius"]
            return (-R, -R, R, R)
        if self.kind in ("annulus", "punctured-annulus"):
            R = p["r"]
            return (-R, -R, R, R)
        if self.kind == "rect":
            return (p["x0"], p["y0"], p["x0"] + p["a"], p["y0"] + p["b"])
        raise DomainError("explicit masks carry their own grid")

    def contains(self, x: np.ndarray, y: np.ndarray, h: float = 0.0) -> np.ndarray:
        """Interior test; for punctured annuli grid points within h/2 of the wall are cut."""
        p = self.params
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        tiny = 1e-9 * max(h, 1e-12)
        if self.kind == "disc":
            return x * x + y * y < p["radius"] ** 2 - tiny
        rho = np.hypot(x, y)
        if self.kind == "annulus":
            return (rho > 1 + tiny) & (rho < p["r"] - tiny)
        if self.kind == "rect":
            return (
                (x > p["x0"] + tiny)
                & (x < p["x0"] + p["a"] - tiny)
                & (y > p["y0"] + tiny)
                & (y < p["y0"] + p["b"] - tiny)
            )
        if self.kind == "punctured-annulus":
            # a grid edge crossing rho = 1 always has an endpoint within h/2 of it
            wall = (np.abs(rho - 1.0) <= 0.5 * h) & ~_angle_in_holes(
                np.arctan2(y, x), p["N"], p["eps"]
            )
            return (rho < p["r"] - tiny) & ~wall
        raise DomainError("explicit masks carry their own grid")

    def exit_fraction(self, points: np.ndarray, step: np.ndarray, h: float) -> np.ndarray:
        """Fraction s in (0, 1] at which ``points + s * step`` first leaves the domain.

        Used for boundary-fitted Dirichlet rows; 1 means the boundary sits at
        the neighbouring grid point (no correction).
        """
        points = np.asarray(points, float)
        if self.kind == "explicit-mask" or len(points) == 0:
            return np.ones(len(points))
        if self.kind == "punctured-annulus":
            p = self.params
            side = np.hypot(points[:, 0], points[:, 1]) < 1.0

            def inside(q):
                rho = np.hypot(q[:, 0], q[:, 1])
                return (rho < p["r"]) & ((rho < 1.0) == side)

        else:

            def inside(q):
                return self.contains(q[:, 0], q[:, 1], 0.0)

        lo = np.zeros(len(points))
        hi = np.ones(len(points))
        out = ~inside(points + step)
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            ok = inside(points + mid[:, None] * step)
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
        theta = np.where(out, hi, 1.0)
        if self.kind == "punctured-annulus":
            q = points + theta[:, None] * step
            in_hole = _angle_in_holes(np.arctan2(q[:, 1], q[:, 0]), self.params["N"], self.params["eps"])
            theta = np.where(in_hole, 1.0, theta)
        return np.clip(theta, 1e-6, 1.0)

    def boundary_features(self, surface: str | None = None) -> list[Feature]:
        """Tagged boundary pieces.

        ``surface="top"`` turns the top side of a rectangle into the free
        surface and the other three sides into the bottom (a canal section).
        """
        p = self.params
        if self.kind == "disc":
            R = p["radius"]
            return [("outer-boundary", lambda q: np.abs(np.hypot(q[:, 0], q[:, 1]) - R))]
        if self.kind in ("annulus", "punctured-annulus"):
            R = p["r"]
            feats: list[Feature] = [
                ("outer-boundary", lambda q: np.abs(np.hypot(q[:, 0], q[:, 1]) - R))
            ]
            if self.kind == "annulus":
                feats.append(("inner-boundary", lambda q: np.abs(np.hypot(q[:, 0], q[:, 1]) - 1)))
            else:
                N, eps = p["N"], p["eps"]

                def wall(q):
                    d = np.abs(np.hypot(q[:, 0], q[:, 1]) - 1.0)
                    th = np.arctan2(q[:, 1], q[:, 0])
                    period = 2 * math.pi / N
                    off = np.abs(np.mod(th + 0.5 * period, period) - 0.5 * period)
                    # inside a hole the nearest wall point is the hole's edge
                    gap = np.where(off < eps, 2 * np.sin(0.5 * (eps - off)), 0.0)
                    return np.hypot(d, gap)

                feats.append(("inner-boundary", wall))
            return feats
        if self.kind == "rect":
            x0, y0, a, b = p["x0"], p["y0"], p["a"], p["b"]
            corners = [(x0, y0), (x0 + a, y0), (x0 + a, y0 + b), (x0, y0 + b)]
            sides = list(zip(corners, corners[1:] + corners[:1]))
            if surface == "top":
                top = sides[2]
                rest = sides[:2] + sides[3:]
                return [
                    ("free-surface", lambda q, s=top: _segment_distance(q, *s)),
                    ("bottom", lambda q: np.min([_segment_distance(q, *s) for s in rest], axis=0)),
                ]
            return [
                ("outer-boundary", lambda q: np.min([_segment_distance(q, *s) for s in sides], axis=0))
            ]
        return []


def disc(radius: float = 1.0) -> DomainSpec:
    return DomainSpec("disc", {"radius": float(radius)})


def annulus(r: float) -> DomainSpec:
    return DomainSpec("annulus", {"r": float(r)})


def rect(a: float, b: float, x0: float = 0.0, y0: float = 0.0) -> DomainSpec:
    return DomainSpec("rect", {"a": float(a), "b": float(b), "x0": float(x0), "y0": float(y0)})


def punctured_annulus(N: int, eps: float, r: float) -> DomainSpec:
    return DomainSpec("punctured-annulus", {"N": int(N), "eps": float(eps), "r": float(r)})


def explicit_mask(mask: np.ndarray, origin=(0.0, 0.0), h: float = 1.0) -> DomainSpec:
    return DomainSpec(
        "explicit-mask", {"mask": np.asarray(mask, bool), "origin": tuple(origin), "h": float(h)}
    )
