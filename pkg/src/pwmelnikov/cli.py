"""Command-line front end.

Exit status: 0 on success, 1 on a domain or input error, 2 when a result
contradicts the closed formulas (a finding).  Findings are always echoed to
stderr and included in the structured output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from . import abelian, oracle, roots, simulate
from .melnikov import Finding, assemble, classify_region
from .model import DomainError, PerturbationSpec, fraction_str, h_of_u, random_spec

EXIT_OK, EXIT_DOMAIN, EXIT_FINDING = 0, 1, 2

DEFAULT_TOLERANCES = {
    "oracle_rel": 1e-8,
    "residual": simulate.RESIDUAL_TOL,
    "width": 1e-9,
}

GRIDS = {
    "default": {"m": range(1, 7), "n": 8, "u": (0.3, 0.7, 1.0, 1.5)},
    "quick": {"m": range(1, 4), "n": 4, "u": (0.5, 1.0)},
}


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    jobs: int = 1
    args: argparse.Namespace = None


def region_group(m: int, n: int) -> str:
    # bound formulas are shared across these groups
    r = classify_region(m, n)
    return {"D2": "D2∪D3", "D3": "D2∪D3", "D5": "D5∪D6", "D6": "D5∪D6"}.get(r, r)


def _read_spec(path: Optional[str]) -> PerturbationSpec:
    if path is None or path == "-":
        text = sys.stdin.read()
    else:
        with open(path) as fh:
            text = fh.read()
    return PerturbationSpec.from_json(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


# ----------------------------------------------------------------- commands

def cmd_reduce(cfg: RunConfig):
    a = cfg.args
    sides = ("plus", "minus") if a.side == "both" else (a.side,)
    out = []
    pairs = [(a.i, a.j)] if a.i is not None else [(i, d - i) for d in range(a.n + 1) for i in range(d, -1, -1)]
    for i, j in pairs:
        if i < 0 or j < 0:
            raise DomainError("indices must be non-negative")
        for side in sides:
            e = abelian.reduce(i, j, a.m, side)
            if a.resolve:
                e = abelian.resolve(e, a.m)
            out.append({"i": i, "j": j, "side": side, "text": str(e), "expr": e.to_json_obj()})
    return _dump_json({"m": a.m, "integrals": out}), []


def cmd_assemble(cfg: RunConfig):
    exp = assemble(_read_spec(cfg.input))
    return _dump_json(exp.to_json_obj()), []


def cmd_count(cfg: RunConfig):
    a = cfg.args
    if a.random:
        m, n = (int(v) for v in a.random.split(","))
        spec = random_spec(m, n, random.Random(cfg.seed))
    else:
        spec = _read_spec(cfg.input)
    exp = assemble(spec)
    rep = roots.count_zeros(exp, width=Fraction(cfg.tolerances["width"]).limit_denominator(10 ** 15))
    obj = rep.to_json_obj()
    obj["spec"] = spec.to_json_obj()
    findings = []
    ub = roots.bound_Z(spec.m, spec.n).upper
    if ub is not None and rep.count > ub:
        findings.append(f"{rep.count} zeros exceed the upper bound {ub} for (m,n)=({spec.m},{spec.n})")
    return _dump_json(obj), findings


def cmd_bounds(cfg: RunConfig):
    a = cfg.args
    rows, findings = [], []
    for m in range(a.m_min, a.m_max + 1):
        for n in range(a.n_min, a.n_max + 1):
            b = roots.bound_Z(m, n)
            rows.append([m, n, region_group(m, n), "" if b.lower is None else b.lower,
                         "" if b.upper is None else b.upper])
            findings += [f"(m,n)=({m},{n}): {f}" for f in b.findings]
    return _csv(rows, ["m", "n", "region", "lower", "upper"]), findings


def cmd_construct(cfg: RunConfig):
    a = cfg.args
    targets = [float(t) for t in a.targets.split(",")] if a.targets else None
    c = roots.construct_max_zeros(a.m, a.n, targets)
    obj = {
        "m": a.m, "n": a.n,
        "targets": c.targets,
        "spec": c.spec.to_json_obj(),
        "coefficients": [[k[0], k[1], fraction_str(v)] for k, v in sorted(c.coefficients.items())],
        "zeros": c.report.to_json_obj(),
        "bounds": {"lower": roots.bound_Z(a.m, a.n).lower, "upper": roots.bound_Z(a.m, a.n).upper},
    }
    return _dump_json(obj), []


def verify_rows(grid: str):
    g = GRIDS[grid]
    for m in g["m"]:
        for d in range(g["n"] + 1):
            for i in range(d, -1, -1):
                j = d - i
                for side in ("plus", "minus"):
                    worst = 0.0
                    for u in g["u"]:
                        closed = abelian.evaluate_J(i, j, u, m, side)
                        quad = oracle.integral_quadrature(i, j, u, m, side).value
                        worst = max(worst, oracle.relative_error(closed, quad, math.sqrt(h_of_u(u, m)) ** (i + j + 1)))
                    yield m, i, j, side, worst


def cmd_verify(cfg: RunConfig):
    tol = cfg.tolerances["oracle_rel"]
    rows, findings = [], []
    for m, i, j, side, err in verify_rows(cfg.args.grid):
        rows.append([m, i, j, side, f"{err:.3e}"])
        if not err < tol:
            findings.append(f"closed form vs quadrature for m={m} ({i},{j},{side}): rel error {err:.3e}")
    return _csv(rows, ["m", "i", "j", "side", "max_rel_error"]), findings


def cmd_simulate(cfg: RunConfig):
    a = cfg.args
    spec = _read_spec(cfg.input)
    if a.u0 is not None:
        start = simulate.PiecewiseState.on_curve(a.u0, spec.m, "below")
        tr = simulate.flow(spec, a.epsilon, start, a.max_time)
        return _csv([[_fmt(t), _fmt(x), _fmt(y), z] for t, x, y, z in tr.rows()], ["t", "x", "y", "zone"]), []
    grid: List = []
    cycles = simulate.find_limit_cycles(spec, a.epsilon, (a.u_min, a.u_max), a.samples,
                                        tol=cfg.tolerances["residual"], jobs=cfg.jobs, grid_out=grid)
    if a.plot_data:
        return _csv([[_fmt(u), _fmt(d)] for u, d in grid], ["u", "delta"]), []
    obj = {"epsilon": a.epsilon, "uRange": [a.u_min, a.u_max], "samples": a.samples,
           "cycles": [c.to_json_obj() for c in cycles]}
    return _dump_json(obj), []


COMMANDS = {
    "reduce": cmd_reduce, "assemble": cmd_assemble, "count": cmd_count, "bounds": cmd_bounds,
    "construct": cmd_construct, "verify": cmd_verify, "simulate": cmd_simulate,
}


def _tolerance(text: str):
    key, _, val = text.partition("=")
    if key not in DEFAULT_TOLERANCES or not val:
        raise argparse.ArgumentTypeError(f"expected one of {sorted(DEFAULT_TOLERANCES)} as KEY=VALUE")
    return key, float(val)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pwmelnikov", description="Melnikov functions for a linear center switched along y = x^m.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write result here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker processes where supported")
    common.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="KEY=VALUE",
                        help=f"override a tolerance ({', '.join(sorted(DEFAULT_TOLERANCES))})")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("reduce", parents=[common], help="closed form of J_ij / I_ij")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--i", type=int)
    s.add_argument("--j", type=int)
    s.add_argument("--n", type=int, default=4, help="all i+j <= n when --i/--j are omitted")
    s.add_argument("--side", choices=("plus", "minus", "both"), default="plus")
    s.add_argument("--resolve", action="store_true", help="express through u, pi and T only")

    s = sub.add_parser("assemble", parents=[common], help="Melnikov expansion of a spec")
    s.add_argument("input", nargs="?", default="-", help="spec JSON file (default stdin)")

    s = sub.add_parser("count", parents=[common], help="certified zero count")
    s.add_argument("input", nargs="?", default="-", help="spec JSON file (default stdin)")
    s.add_argument("--random", metavar="M,N", help="count for a random spec drawn with --seed instead")

    s = sub.add_parser("bounds", parents=[common], help="table of lower/upper bounds")
    s.add_argument("--m-max", type=int, required=True)
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--m-min", type=int, default=1)
    s.add_argument("--n-min", type=int, default=1)

    s = sub.add_parser("construct", parents=[common], help="spec with many simple zeros")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--targets", help="comma separated zero locations")

    s = sub.add_parser("verify", parents=[common], help="closed forms vs quadrature")
    s.add_argument("--grid", choices=sorted(GRIDS), default="default")

    s = sub.add_parser("simulate", parents=[common], help="integrate the switched system")
    s.add_argument("input", nargs="?", default="-")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--u0", type=float, help="emit a trajectory from B(u0) instead of scanning for cycles")
    s.add_argument("--max-time", type=float, default=2 * math.pi)
    s.add_argument("--u-min", type=float, default=0.3)
    s.add_argument("--u-max", type=float, default=2.0)
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--plot-data", action="store_true", help="emit (u, delta) pairs of the scan")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(dict(ns.tol))
    return RunConfig(ns.command, getattr(ns, "input", None), ns.output, tol, ns.seed, ns.jobs, ns)


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        text, findings = COMMANDS[cfg.command](cfg)
    except Finding as exc:
        print(f"FINDING: {exc}", file=stderr)
        return EXIT_FINDING
    except oracle.OracleError as exc:
        print(f"FINDING: {exc}", file=stderr)
        return EXIT_FINDING
    except (DomainError, simulate.SimulationError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_DOMAIN
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    for f in findings:
        print(f"FINDING: {f}", file=stderr)
    return EXIT_FINDING if findings else EXIT_OK


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
