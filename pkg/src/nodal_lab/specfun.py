"""Bessel functions J0, J1, Y0, Y1, their first zeros and the annulus cross-product root.

Values come from the ascending power series for ``x <= SWITCH`` and from the
Hankel asymptotic expansion beyond it.  The switch sits at 12 rather than the
more common 8: at x = 8 the smallest asymptotic term is still ~2e-8, at 12 it is
below 1e-11, so both branches agree to 1e-10 in the overlap band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import DomainError

SWITCH = 12.0
EULER_GAMMA = 0.57721566490153286061

# scan step for the first sign change and bisection width for polishing
SCAN_STEP = 0.05
BISECT_WIDTH = 1e-10


@dataclass(frozen=True)
class BesselValue:
    order: int
    kind: str
    argument: float
    value: float


@dataclass(frozen=True)
class CrossProductRoot:
    """Least positive root of J0(m) Y0(m r) - J0(m r) Y0(m)."""

    r: float
    mu: float
    residual: float


def _series_j(order: int, x: float) -> float:
    q = 0.25 * x * x
    term = 1.0 if order == 0 else 0.5 * x
    total = term
    k = 0
    while True:
        k += 1
        term *= -q / (k * (k + order))
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300) and k > x:
            return total


def _series_y0(x: float) -> float:
    q = 0.25 * x * x
    term = 1.0
    harmonic = 0.0
    acc = 0.0
    k = 0
    while True:
        k += 1
        term *= -q / (k * k)
        harmonic += 1.0 / k
        contrib = -term * harmonic
        acc += contrib
        if abs(contrib) < 1e-17 * max(abs(acc), 1e-300) and k > x:
            break
    return (2.0 / math.pi) * ((math.log(0.5 * x) + EULER_GAMMA) * _series_j(0, x) + acc)


def _series_y1(x: float) -> float:
    q = 0.25 * x * x
    term = 0.5 * x
    psi_sum = 1.0 - 2.0 * EULER_GAMMA  # psi(1) + psi(2)
    acc = term * psi_sum
    k = 0
    while True:
        k += 1
        term *= -q / (k * (k + 1))
        psi_sum += 1.0 / k + 1.0 / (k + 1)
        contrib = term * psi_sum
        acc += contrib
        if abs(contrib) < 1e-17 * max(abs(acc), 1e-300) and k > x:
            break
    return (
        -2.0 / (math.pi * x)
        + (2.0 / math.pi) * math.log(0.5 * x) * _series_j(1, x)
        - acc / math.pi
    )


def _hankel_pq(order: int, x: float) -> tuple[float, float]:
    mu = 4.0 * order * order
    p, q = 1.0, 0.0
    a = 1.0
    smallest = 1.0
    k = 0
    while True:
        k += 1
        nxt = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(nxt) >= smallest:
            break  # series started to diverge
        a = nxt
        smallest = abs(a)
        # a_k / x^k carries sign (-1)^floor(k/2) into P (even k) or Q (odd k)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q += sign * a
        else:
            p += sign * a
        if smallest < 1e-17:
            break
    return p, q


def _hankel(order: int, kind: str, x: float) -> float:
    p, q = _hankel_pq(order, x)
    chi = x - (0.5 * order + 0.25) * math.pi
    amp = math.sqrt(2.0 / (math.pi * x))
    if kind == "first":
        return amp * (p * math.cos(chi) - q * math.sin(chi))
    return amp * (p * math.sin(chi) + q * math.cos(chi))


def _series(order: int, kind: str, x: float) -> float:
    if kind == "first":
        return _series_j(order, x)
    return _series_y0(x) if order == 0 else _series_y1(x)


def bessel(order: int, kind: str, x: float) -> float:
    """Bessel function of the first or second kind of order 0 or 1.

    Parameters
    ----------
    order : {0, 1}
    kind : {"first", "second"}
    x : float
        Real argument; must be positive for the second kind.
    """
    if order not in (0, 1):
        raise DomainError(f"order must be 0 or 1, got {order}")
    if kind not in ("first", "second"):
        raise DomainError(f"kind must be 'first' or 'second', got {kind!r}")
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("argument must be finite")
    if kind == "second" and x <= 0.0:
        raise DomainError(f"Y{order} needs x > 0, got {x}")
    if kind == "first" and x < 0.0:
        # J0 even, J1 odd
        return bessel(order, kind, -x) * (1.0 if order == 0 else -1.0)
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x <= SWITCH:
        return _series(order, kind, x)
    return _hankel(order, kind, x)


def bessel_value(order: int, kind: str, x: float) -> BesselValue:
    return BesselValue(order, kind, float(x), bessel(order, kind, x))


def series_branch(order: int, kind: str, x: float) -> float:
    """Power-series branch regardless of the switch point (overlap checks)."""
    return _series(order, kind, float(x))


def asymptotic_branch(order: int, kind: str, x: float) -> float:
    """Hankel-expansion branch regardless of the switch point (overlap checks)."""
    return _hankel(order, kind, float(x))


def j0(x):
    return np.vectorize(lambda t: bessel(0, "first", t), otypes=[float])(x)


def j1(x):
    return np.vectorize(lambda t: bessel(1, "first", t), otypes=[float])(x)


def y0(x):
    return np.vectorize(lambda t: bessel(0, "second", t), otypes=[float])(x)


def y1(x):
    return np.vectorize(lambda t: bessel(1, "second", t), otypes=[float])(x)


def _bisect(f, a: float, b: float, width: float) -> float:
    fa = f(a)
    while b - a > width:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _first_sign_change(f, start: float, step: float, limit: float) -> tuple[float, float]:
    a, fa = start, f(start)
    while a < limit:
        b = a + step
        fb = f(b)
        if fa == 0.0:
            return a, a
        if (fa > 0) != (fb > 0):
            return a, b
        a, fa = b, fb
    raise DomainError(f"no sign change found below {limit}")


def bessel_first_zero(order: int) -> float:
    """Least positive zero of J0 or J1."""
    if order not in (0, 1):
        raise DomainError(f"order must be 0 or 1, got {order}")
    f = lambda t: bessel(order, "first", t)  # noqa: E731
    # J1 vanishes at the origin; start the scan just off it
    a, b = _first_sign_change(f, SCAN_STEP, SCAN_STEP, 50.0)
    if a == b:
        return a
    return _bisect(f, a, b, 1e-12)


def cross_product(lam: float, r: float) -> float:
    """J0(lam) Y0(lam r) - J0(lam r) Y0(lam)."""
    return bessel(0, "first", lam) * bessel(0, "second", lam * r) - bessel(
        0, "first", lam * r
    ) * bessel(0, "second", lam)


def cross_product_mu(r: float) -> CrossProductRoot:
    """Least positive root of the annulus cross-product for radius ratio r > 1.

    mu(r)**2 is the fundamental Dirichlet eigenvalue of the annulus 1 < rho < r.
    The scan starts below j01/r, which bounds mu(r) from below by domain
    monotonicity (the annulus sits inside the disc of radius r).
    """
    r = float(r)
    if not r > 1.0:
        raise DomainError(f"radius ratio must exceed 1, got {r}")
    step = min(SCAN_STEP, 0.1 / r)
    f = lambda t: cross_product(t, r)  # noqa: E731
    a, b = _first_sign_change(f, step, step, 1e4)
    mu = a if a == b else _bisect(f, a, b, BISECT_WIDTH)
    return CrossProductRoot(r=r, mu=mu, residual=f(mu))
