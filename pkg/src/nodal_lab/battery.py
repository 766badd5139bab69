"""The acceptance battery run by ``nodal-lab suite``.

Each check returns a ``Check`` with the headline verdict plus the
experiment reports it was built from.  The quick profile caps membrane grids
at h = 1/64 and random trials at 10^3; the full profile uses the stated
resolutions.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import eig2d, sloshing, specfun, string1d
from .domains import disc, rect
from .reports import ExperimentReport

PROFILES = {
    "quick": {"trials": 1000, "h": 1 / 64, "hs": (1 / 16, 1 / 32, 1 / 64), "payne_h": 1 / 32},
    "full": {"trials": 10000, "h": 1 / 128, "hs": (1 / 32, 1 / 64, 1 / 128), "payne_h": 1 / 64},
}

# tabulated reference values to 3-4 digits
J01, J11 = 2.405, 3.832
MU_TABLE = {2.0: 3.123, 5 / 3: 4.697, 2.5: 2.073}


@dataclass
class Check:
    number: int
    title: str
    ok: bool
    detail: str
    seconds: float = 0.0
    reports: list[ExperimentReport] = field(default_factory=list)

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] criterion {self.number:2d}: {self.title} ({self.detail})"


def _timed(fn):
    def run(profile):
        t0 = time.perf_counter()
        chk = fn(profile)
        chk.seconds = time.perf_counter() - t0
        return chk

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def bessel_zeros(profile) -> Check:
    z0, z1 = specfun.bessel_first_zero(0), specfun.bessel_first_zero(1)
    ok = abs(z0 - J01) <= 1e-3 and abs(z1 - J11) <= 1e-3
    return Check(1, "Bessel zeros", ok, f"j01={z0:.6f}, j11={z1:.6f}")


@_timed
def cross_product_roots(profile) -> Check:
    want = {2.0: "PASS", 5 / 3: "FAIL", 2.5: "FAIL"}
    reps, parts, ok = [], [], True
    for r, mu_ref in MU_TABLE.items():
        rep = eig2d.interlacing_check(r)
        mu = rep.results["mu"]
        status = rep.verdict("interlacing_j01_mu_j11").status
        ok &= abs(mu - mu_ref) <= 1e-2 and status == want[r]
        parts.append(f"mu({r:.4g})={mu:.4f} {status}")
        reps.append(rep)
    return Check(2, "cross-product roots", ok, "; ".join(parts), reports=reps)


@_timed
def herrmann(profile) -> Check:
    reps, worst = [], []
    for bc in string1d.BCS:
        for n in range(1, 13):
            rep = string1d.herrmann_scan(bc, n, profile["trials"], seed=n)
            reps.append(rep)
            if not rep.passed:
                worst.append(f"{bc} n={n}")
    return Check(
        3,
        "Herrmann 1-D node bound",
        not worst,
        f"{len(reps)} scans x {profile['trials']} trials" + (f"; violations {worst}" if worst else ""),
        reports=reps,
    )


@_timed
def thresholds(profile) -> Check:
    reps = [string1d.threshold_sweep(bc) for bc in ("dirichlet", "neumann")]
    return Check(
        4,
        "threshold sharpness",
        all(r.passed for r in reps),
        "; ".join(r.verdicts[0].detail for r in reps),
        reports=reps,
    )


def _orders(fn, hs):
    errs = [max(abs(v) for v in fn(h)) for h in hs]
    return eig2d.observed_order(hs, errs), errs


@_timed
def sloshing_identities(profile) -> Check:
    p = sloshing.SloshingParams(3)
    xs = np.linspace(-6.0, 6.0, 20)
    ys = -np.linspace(0.05, 4.0, 20)
    worst = max(
        abs(sloshing.steklov_residual(x, y, p) - sloshing.steklov_closed_form(x, y)) for x in xs for y in ys
    )
    hs = (0.1, 0.05, 0.025)
    cr_order, _ = _orders(lambda h: sloshing.cauchy_riemann_residual(1.0, -1.0, p, h), hs)
    lap_order, _ = _orders(lambda h: [sloshing.laplacian_residual(1.0, -1.0, p, h)], hs)
    ok = worst <= 1e-6 and cr_order >= 1.8 and lap_order >= 1.8
    return Check(
        5,
        "sloshing identities",
        ok,
        f"Steklov max dev {worst:.1e}; CR order {cr_order:.2f}; Laplacian order {lap_order:.2f}",
    )


@_timed
def counterexample_three_halves(profile) -> Check:
    res = sloshing.trace_counterexample(sloshing.SloshingParams(3))
    rep = res.report
    ok = rep.passed and res.counterexample
    return Check(
        6,
        "lam = 3/2 counterexample",
        ok,
        f"bottom meets surface at +-{res.surface_extent:.4f}; "
        + rep.verdict("u_node_both_ends_on_surface").detail
        + "; "
        + rep.verdict("refinement_stable").detail,
        reports=[rep],
    )


@_timed
def inventory_five_halves(profile) -> Check:
    res = sloshing.trace_counterexample(sloshing.SloshingParams(5))
    rep = res.report
    ok = rep.passed
    inv = res.inventory
    return Check(
        7,
        "lam = 5/2 curve inventory",
        ok,
        f"right half v={inv['right_half']['v']}, u={inv['right_half']['u']}; "
        f"full plane v={inv['full_plane']['v']}, u={inv['full_plane']['u']}; "
        + rep.verdict("finite_u_nodes_inside_basin").detail,
        reports=[rep],
    )


@_timed
def disc_spectrum(profile) -> Check:
    """Scored on the default (boundary-fitted) solver; the staircase variant is reported alongside."""
    hs = profile["hs"]
    fit = eig2d.disc_convergence(hs)
    stair = eig2d.disc_convergence(hs, boundary="staircase")
    sq = eig2d.square_convergence(hs)
    e1, e2 = fit["rel_err1"][-1], fit["rel_err2"][-1]
    ok = e1 <= 0.02 and e2 <= 0.02 and fit["order1"] >= 1 and sq["order"] >= 1.8
    return Check(
        8,
        "disc spectrum",
        ok,
        f"h={hs[-1]:.4g}: rel err {e1:.1e}, {e2:.1e}; disc order {fit['order1']:.2f}; "
        f"square order {sq['order']:.2f}; staircase variant: err {stair['rel_err1'][-1]:.4f}, "
        f"order {stair['order1']:.3f}",
    )


@_timed
def annulus(profile) -> Check:
    rep = eig2d.interlacing_check(2.0, profile["h"])
    rel = rep.results["fd_relative_error"]
    return Check(9, "annulus cross-validation", rel <= 0.02, f"relative error {rel:.1e} at h={profile['h']:.4g}", reports=[rep])


@_timed
def courant_kuttler(profile) -> Check:
    sq = eig2d.courant_square(10)
    canal = sloshing.kuttler_count(1.0, 0.5, 6)
    ok = sq.passed and canal.passed
    return Check(
        10,
        "Courant / Kuttler counting",
        ok,
        f"square domains {[r['domains'] for r in sq.results['rows']]}; canal domains {[r['domains'] for r in canal.results['rows']]}",
        reports=[sq, canal],
    )


@_timed
def pleijel(profile) -> Check:
    rep = eig2d.pleijel_square_scan(10)
    return Check(11, "Pleijel square scan", rep.passed, rep.verdicts[0].detail, reports=[rep])


@_timed
def alessandrini(profile) -> Check:
    h = profile["h"]
    reps = [eig2d.alessandrini_check(disc(1.0), h), eig2d.alessandrini_check(rect(math.pi, 2.0), h)]
    return Check(
        12,
        "Alessandrini property",
        all(r.passed for r in reps),
        "; ".join(f"{r.config['domain']}: {r.verdicts[0].detail}" for r in reps),
        reports=reps,
    )


@_timed
def payne(profile) -> Check:
    rep = eig2d.payne_experiment(3, 0.2, 2.0, profile["payne_h"])
    ok = (
        rep.verdict("interlacing_precondition").status == "PASS"
        and rep.verdict("lambda2_refinement_consistent").status == "PASS"
        and rep.verdict("nodal_curve_closed").status == "OBSERVED"
    )
    return Check(
        13,
        "Payne experiment (property-based)",
        ok,
        rep.verdict("lambda2_refinement_consistent").detail + "; " + rep.verdict("nodal_curve_closed").detail,
        reports=[rep],
    )


CHECKS = (
    bessel_zeros,
    cross_product_roots,
    herrmann,
    thresholds,
    sloshing_identities,
    counterexample_three_halves,
    inventory_five_halves,
    disc_spectrum,
    annulus,
    courant_kuttler,
    pleijel,
    alessandrini,
    payne,
)


def run(profile: str = "quick", only=None) -> list[Check]:
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    prof = PROFILES[profile]
    return [c(prof) for c in CHECKS if only is None or CHECKS.index(c) + 1 in only]
