"""Command-line runner: one subcommand per experiment, JSON/CSV/SVG artifacts.

Precedence for parameters: command-line flags, then ``--config`` key=value
file, then built-in defaults.  The output root is ``--out``, else the
``NODAL_LAB_OUT`` environment variable, else ``./nodal_lab_out``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import DomainError, ResolutionError, SolverError, __version__
from . import battery, eig2d, sloshing, specfun, string1d
from .domains import disc, rect
from .reports import ExperimentReport
from .svg import render_contours

DEFAULT_OUT = "nodal_lab_out"


def real(text: str) -> float:
    """Reals may be written as fractions ("5/3") or with "pi" ("pi/64")."""
    t = text.strip().replace(" ", "")
    try:
        return float(Fraction(t))
    except ValueError:
        pass
    if "pi" in t:
        num, _, den = t.partition("/")
        coef = num.replace("*", "").replace("pi", "")
        coef = {"": "1", "+": "1", "-": "-1"}.get(coef, coef)
        try:
            val = float(Fraction(coef)) * math.pi
            return val / float(Fraction(den)) if den else val
        except (ValueError, ZeroDivisionError):
            pass
    raise argparse.ArgumentTypeError(f"not a real number: {text!r}")


def window(text: str) -> tuple[float, float, float, float]:
    parts = [real(p) for p in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("window needs x0,x1,y0,y1")
    return tuple(parts)


def read_config(path: str) -> dict[str, str]:
    """key=value lines; blank lines and '#' comments ignored; dashes in keys become underscores."""
    cfg = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{n}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        cfg[k.replace("-", "_")] = v
    return cfg


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nodal-lab", description="Nodal-set experiments.")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--out", help="output root (default: $NODAL_LAB_OUT or ./nodal_lab_out)")
    common.add_argument("--no-plots", dest="plots", action="store_false", help="skip SVG output")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bessel", parents=[common], help="Bessel zeros and the cross-product root mu(r)")
    s.add_argument("--r", type=real, default=2.0)

    s = sub.add_parser("herrmann", parents=[common], help="random node-count scan for string combinations")
    s.add_argument("--bc", choices=string1d.BCS, default="dirichlet")
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--trials", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("string", parents=[common], help="string eigenpairs, expansions and node thresholds")
    s.add_argument("--bc", choices=string1d.BCS, default="dirichlet")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--coeffs", help="comma-separated combination coefficients to count nodes of")

    s = sub.add_parser("sl", parents=[common], help="Sturm-Liouville eigenvalues and oscillation counts")
    s.add_argument("--potential", choices=sorted(string1d.SL_POTENTIALS), default="quadratic")
    s.add_argument("--length", type=real, default=1.0)
    s.add_argument("--count", type=int, default=8)
    s.add_argument("--points", type=int, default=2000)

    s = sub.add_parser("sloshing", parents=[common], help="trace the sloshing nodal curves for lambda = m/2")
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--window", type=window, default=sloshing.DEFAULT_WINDOW)
    s.add_argument("--resolution", type=int, default=sloshing.DEFAULT_RESOLUTION)
    s.add_argument("--no-refine", dest="refine", action="store_false")

    s = sub.add_parser("payne", parents=[common], help="second eigenfunction on the disc-plus-annulus domain")
    s.add_argument("--N", type=int, default=3)
    s.add_argument("--eps", type=real, default=0.2)
    s.add_argument("--r", type=real, default=2.0)
    s.add_argument("--h", type=real, default=1 / 64)
    s.add_argument("--no-refine", dest="refine", action="store_false")

    s = sub.add_parser("pleijel", parents=[common], help="maximal nodal counts on the square")
    s.add_argument("--k-max", dest="k_max", type=int, default=10)
    s.add_argument("--angles", type=int, default=48)
    s.add_argument("--resolution", type=int, default=200)

    s = sub.add_parser("alessandrini", parents=[common], help="nodal curve of u2 on a convex domain")
    s.add_argument("--domain", choices=("disc", "rect"), default="disc")
    s.add_argument("--r", type=real, default=1.0, help="disc radius")
    s.add_argument("--a", type=real, default=math.pi, help="rectangle width")
    s.add_argument("--b", type=real, default=2.0, help="rectangle height")
    s.add_argument("--h", type=real, default=1 / 64)
    s.add_argument("--rotations", type=int, default=8)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    s.add_argument("--profile", choices=tuple(battery.PROFILES), default="quick")
    s.add_argument("--only", help="comma-separated criterion numbers")
    return p


def parse(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        bad = sorted(set(cfg) - known)
        if bad:
            parser.error(f"unknown config key(s) {bad} for {args.command}")
        # string defaults are run through each option's type converter
        subparser.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def out_dir(args, name: str) -> Path:
    root = Path(args.out or os.environ.get("NODAL_LAB_OUT") or DEFAULT_OUT)
    d = root / name
    d.mkdir(parents=True, exist_ok=True)
    return d


def write_report(rep: ExperimentReport, d: Path) -> Path:
    path = d / "report.json"
    path.write_text(rep.to_json() + "\n")
    return path


# subcommands ----------------------------------------------------------------


def run_bessel(args, d: Path) -> ExperimentReport:
    rep = eig2d.interlacing_check(args.r)
    rep.name = "bessel"
    rep.results["j0_zero"] = specfun.bessel_first_zero(0)
    rep.results["j1_zero"] = specfun.bessel_first_zero(1)
    return rep


def run_herrmann(args, d: Path) -> ExperimentReport:
    return string1d.herrmann_scan(args.bc, args.n, args.trials, args.seed)


def run_string(args, d: Path) -> ExperimentReport:
    pair = string1d.string_eigenpair(args.bc, args.n)
    rep = ExperimentReport(
        "string",
        config={"bc": args.bc, "n": args.n, "coeffs": args.coeffs},
        results={"eigenvalue": pair.eigenvalue, "modes": [[m.kind, m.freq] for m in pair.modes]},
    )
    if args.bc in ("dirichlet", "neumann") and (args.bc == "dirichlet" or args.n >= 2):
        exp = string1d.chebyshev_expand(args.n, args.bc)
        x = np.linspace(0.0, math.pi, 1001)
        ref = np.sin(args.n * x) if args.bc == "dirichlet" else np.cos((args.n - 1) * x)
        dev = float(np.max(np.abs(exp(x) - ref)))
        rep.results["expansion"] = {"coefficients": exp.coefficients, "max_deviation": dev}
        rep.add("expansion_reproduces_closed_form", dev <= 1e-12, f"max deviation {dev:.1e}")
        sweep = string1d.threshold_sweep(args.bc)
        rep.results["threshold"] = sweep.results
        rep.verdicts += sweep.verdicts
    if args.coeffs:
        coeffs = [real(c) for c in args.coeffs.split(",")]
        spec = string1d.CombinationSpec(args.bc, coeffs)
        nodes = string1d.count_combination_nodes(spec)
        bound = string1d.herrmann_bound(args.bc, len(coeffs) if args.bc != "periodic" else (len(coeffs) + 1) // 2)
        rep.results["nodes"] = nodes
        rep.add("combination_node_bound", nodes <= bound, f"{nodes} nodes, bound {bound}")
    return rep


def run_sl(args, d: Path) -> ExperimentReport:
    return string1d.sl_experiment(args.potential, args.length, args.count, args.points)


def run_sloshing(args, d: Path) -> ExperimentReport:
    params = sloshing.SloshingParams(args.m)
    res = sloshing.trace_counterexample(params, args.window, args.resolution, refine=args.refine)
    rep = res.report
    res.grid.to_csv(d / "grid.csv")
    payload = {
        "m": args.m,
        "u_curves": [c.to_json() for c in res.u_curves],
        "v_curves": [c.to_json() for c in res.v_curves],
    }
    (d / "curves.json").write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    rep.artifacts += ["grid.csv", "curves.json"]
    if args.plots:
        svg = render_contours(
            args.window,
            {
                "u": [sloshing._extend(c) for c in res.u_curves],
                "v": [sloshing._extend(c) for c in res.v_curves],
            },
            {"title": f"lambda = {args.m}/2"},
        )
        (d / "contours.svg").write_text(svg)
        rep.artifacts.append("contours.svg")
    return rep


def run_payne(args, d: Path) -> ExperimentReport:
    rep = eig2d.payne_experiment(args.N, args.eps, args.r, args.h, refine=args.refine)
    spec = eig2d.DomainSpec("punctured-annulus", {"N": args.N, "eps": args.eps, "r": args.r})
    op = eig2d.build_operator(spec, args.h)
    (d / "mask.pgm").write_text(eig2d.mask_to_pgm(op.mask))
    u2 = eig2d.eigen_smallest(op, 3)[1].eigenfunction
    u2.to_csv(d / "u2.csv", names=("u2",))
    rep.artifacts += ["mask.pgm", "u2.csv"]
    if args.plots:
        curves, _ = eig2d.nodal_topology(u2, spec, args.h)
        r = args.r
        svg = render_contours((-r, r, -r, r), {"u": curves}, {"title": f"u2 nodal set, N={args.N}"})
        (d / "u2_nodal.svg").write_text(svg)
        rep.artifacts.append("u2_nodal.svg")
    return rep


def run_pleijel(args, d: Path) -> ExperimentReport:
    return eig2d.pleijel_square_scan(args.k_max, args.angles, args.resolution)


def run_alessandrini(args, d: Path) -> ExperimentReport:
    spec = disc(args.r) if args.domain == "disc" else rect(args.a, args.b)
    return eig2d.alessandrini_check(spec, args.h, args.rotations, args.seed)


def run_suite(args, d: Path) -> ExperimentReport:
    only = None if not args.only else {int(x) for x in args.only.split(",")}
    rep = ExperimentReport("suite", config={"profile": args.profile, "only": sorted(only) if only else None})
    total = 0.0
    for chk in battery.run(args.profile, only):
        print(chk.line(), flush=True)
        sub = d / f"criterion_{chk.number:02d}"
        sub.mkdir(exist_ok=True)
        for k, r in enumerate(chk.reports):
            name = f"{r.name}_{k}.json"
            (sub / name).write_text(r.to_json() + "\n")
            rep.artifacts.append(f"{sub.name}/{name}")
        rep.add(f"criterion_{chk.number:02d}", chk.ok, f"{chk.title}: {chk.detail}")
        total += chk.seconds
    rep.wall_time = total
    return rep


RUNNERS = {
    "bessel": run_bessel,
    "herrmann": run_herrmann,
    "string": run_string,
    "sl": run_sl,
    "sloshing": run_sloshing,
    "payne": run_payne,
    "pleijel": run_pleijel,
    "alessandrini": run_alessandrini,
    "suite": run_suite,
}


def main(argv=None) -> int:
    try:
        args = parse(argv)
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    d = out_dir(args, args.command)
    try:
        rep = RUNNERS[args.command](args, d)
    except (DomainError, ResolutionError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    path = write_report(rep, d)
    for v in rep.verdicts:
        print(f"{v.status:8s} {v.invariant}: {v.detail}")
    print(f"report: {path}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
