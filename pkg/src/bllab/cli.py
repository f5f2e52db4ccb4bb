"""Command-line front end.  Slots are numbered from 1 on the command line."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .conditions import check_all
from .core import as_rational, builtin_config, format_decimal, format_rational
from .errors import (BLLError, DegenerateConfigurationError, HypothesisFailure,
                     MeasureMismatchError)
from .fileio import ConfigFile, ConfigFormatError, atomic_write, dumps_config, load_config

EXIT_OK, EXIT_HYPOTHESIS, EXIT_INPUT = 0, 1, 2

MARK = {True: "✓", False: "✗", None: "n/a"}


class InputError(ValueError):
    pass


def show(q: Fraction) -> str:
    """12-significant-digit decimal followed by the exact value."""
    return f"{format_decimal(q)} (exact {q.numerator}/{q.denominator})"


def _rationals(text: str, flag: str) -> list[Fraction]:
    try:
        return [as_rational(t) for t in text.split(",") if t.strip()]
    except (TypeError, ValueError) as exc:
        raise InputError(f"{flag}: {exc}") from None


def _slots(text: str, n: int) -> list[int]:
    try:
        out = [int(t) - 1 for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"--slot: expected slot numbers, got {text!r}") from None
    for j in out:
        if not 0 <= j < n:
            raise InputError(f"--slot: slot {j + 1} outside 1..{n}")
    return out


def _need_sets(cf: ConfigFile, cmd: str):
    if cf.sets is None:
        raise InputError(f"{cmd}: the config file has no 'sets' field")
    return cf.sets


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True))
    else:
        print(text)


def _write_csv(args, text: str):
    if args.csv:
        atomic_write(args.csv, text)


# ------------------------------------------------------------ commands


def cmd_check(args) -> int:
    cf = load_config(args.config)
    rep = check_all(cf.config, cf.e)
    verdicts = {
        "nondegenerate": rep.nondegenerate.ok,
        "admissible": None if rep.admissible is None else rep.admissible.ok,
        "strict": None if rep.strictly_admissible is None else rep.strictly_admissible.ok,
        "generic": None if rep.generic is None else rep.generic.ok,
    }
    line = " ".join(f"{k} {MARK[v]}" for k, v in verdicts.items())
    details = []
    if not rep.nondegenerate.ok:
        details.append(f"  nondegeneracy: {json.dumps(rep.nondegenerate.to_json(), ensure_ascii=False)}")
    if rep.admissible is not None:
        for s in rep.admissible.slots:
            if not s.admissible:
                details.append(f"  slot {s.slot + 1} inadmissible: max L = {format_rational(s.max_value)}"
                               f" < e/2 = {format_rational(s.target)}")
    if rep.strictly_admissible is not None:
        for s in rep.strictly_admissible.slots:
            if not s.ok:
                details.append(f"  slot {s.slot + 1} not strict: slack = {format_rational(s.slack)},"
                               f" left derivative = {format_rational(s.left_derivative)}")
    if rep.generic is not None:
        for v in rep.generic.non_generic:
            details.append(f"  vertex ({', '.join(map(format_rational, v.point))}) has"
                           f" {len(v.active_slots)} active slots")
    for k, msg in rep.errors.items():
        details.append(f"  {k}: {msg}")
    _emit(args, rep.to_json(), "\n".join([line] + details))
    return EXIT_OK if rep.all_ok else EXIT_HYPOTHESIS


def cmd_eval(args) -> int:
    from .functional import phi, symmetrized_tuple

    cf = load_config(args.config)
    E = _need_sets(cf, "eval")
    p = phi(cf.config, E)
    ps = phi(cf.config, symmetrized_tuple(E))
    d = ps - p
    _emit(args, {"phi": format_rational(p), "phi_star": format_rational(ps), "deficit": format_rational(d)},
          f"phi = {show(p)}, phi_star = {show(ps)}, deficit = {show(d)}")
    return EXIT_OK


def cmd_kernel(args) -> int:
    from .functional import kernel_breakpoints, kernel_table

    cf = load_config(args.config)
    j = _slots(args.slot or "1", cf.config.n)[0]
    bps = kernel_breakpoints(cf.config, cf.e, j)
    S = max(abs(b) for b in bps)
    grid = args.grid or 16
    pts = [-S + 2 * S * Fraction(k, grid) for k in range(grid + 1)]
    table = kernel_table(cf.config, cf.e, j, pts)
    _write_csv(args, table.to_csv())
    lines = [f"K_{j + 1}: {len(table.pieces)} polynomial pieces, support [{format_rational(-S)}, {format_rational(S)}]"]
    lines += [f"  s = {format_rational(s)}: {show(k)}" for s, k in table.samples]
    payload = {"slot": j + 1, "samples": [[format_rational(s), format_rational(k)] for s, k in table.samples],
               "pieces": [{"lo": format_rational(p.lo), "hi": format_rational(p.hi),
                           "coeffs": [format_rational(c) for c in p.coeffs]} for p in table.pieces]}
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_flow(args) -> int:
    from .flow import flow_trace

    cf = load_config(args.config)
    E = _need_sets(cf, "flow")
    grid = args.grid or 16
    tr = flow_trace(cf.config, E, [Fraction(k, grid) for k in range(grid + 1)])
    _write_csv(args, tr.to_csv())
    lines = [f"t = {format_rational(p.t)}: phi = {show(p.phi)}" + (" [merge]" if p.event_slots else "")
             for p in tr.points]
    ok = tr.is_nondecreasing()
    lines.append(f"nondecreasing {MARK[ok]}")
    payload = {"nondecreasing": ok, "points": [{"t": format_rational(p.t), "phi": format_rational(p.phi),
                                                 "event_slots": [j + 1 for j in p.event_slots]}
                                                for p in tr.points]}
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_HYPOTHESIS


def cmd_dist(args) -> int:
    from .experiments import dist_to_orbit

    cf = load_config(args.config)
    E = _need_sets(cf, "dist")
    od = dist_to_orbit(cf.config, E)
    wit = ", ".join(format_rational(x) for x in od.witness)
    _emit(args, {"dist": format_rational(od.dist), "witness_v": [format_rational(x) for x in od.witness],
                 "certified": od.certified, "method": od.method},
          f"dist = {show(od.dist)} at v = ({wit}) [{od.method}]")
    return EXIT_OK


def cmd_scan(args) -> int:
    from .experiments import stability_scan

    cf = load_config(args.config)
    seed = args.seed if args.seed is not None else 0
    rep = stability_scan(cf.config, cf.e, args.sampler, args.samples or 200, seed, args.csv)
    lines = [f"seed = {seed}, samples = {rep.n}, sampler = {rep.sampler}"]
    mr = rep.min_ratio
    lines.append("min deficit/dist^2 = " + ("n/a (no sample off the orbit)" if mr is None else show(mr)))
    for fam, v in rep.family_minima.items():
        lines.append(f"  {fam}: " + ("n/a" if v is None else show(v)))
    if rep.counterexamples:
        lines.append(f"zero deficit off the orbit: samples {[s.index for s in rep.counterexamples]}")
    _emit(args, rep.to_json(), "\n".join(lines))
    return EXIT_HYPOTHESIS if rep.counterexamples else EXIT_OK


def cmd_psi(args) -> int:
    from .experiments import psi_scan

    cf = load_config(args.config)
    n = cf.config.n
    d = _rationals(args.direction, "--direction") if args.direction else [0] * (n - 1) + [1]
    if len(d) != n:
        raise InputError(f"--direction: {len(d)} entries for {n} slots")
    grid = args.grid or 8
    half = min(cf.e) / 2
    values = [half * Fraction(k, grid) for k in range(-grid, grid + 1)]
    rep = psi_scan(cf.config, cf.e, [d], values)
    lines = [f"psi(0) = {show(rep.psi0)}"]
    for v, p, member, ratio in rep.rows:
        tag = "row space" if member else "off"
        lines.append(f"  v = ({', '.join(map(format_rational, v))}): psi = {show(p)} [{tag}]")
    if rep.quadratic_constant is not None:
        lines.append(f"min (psi(0) - psi(v)) / dist^2 = {show(rep.quadratic_constant)}")
    for b in rep.violations:
        lines.append(f"  violation at v = ({', '.join(b['v'])}): {b['issue']}")
    _emit(args, rep.to_json(), "\n".join(lines))
    return EXIT_HYPOTHESIS if rep.violations else EXIT_OK


def cmd_expansion(args) -> int:
    from .experiments import residual_ladder

    cf = load_config(args.config)
    deltas = _rationals(args.deltas, "--deltas") if args.deltas else [Fraction(1, 2 ** k) for k in (6, 5, 4, 3)]
    slots = _slots(args.slot or "1,2", cf.config.n)
    lad = residual_ladder(cf.config, cf.e, deltas, slots)
    lines = [f"delta = {format_rational(d)}: dist = {show(r)}, residual = {show(res)}" for d, r, res in lad.points]
    if lad.slope is None:
        lines.append("slope: undefined (residual vanishes on the ladder)")
    else:
        lines.append(f"log-log slope of |residual| vs dist = {lad.slope:.6f}")
    payload = {"slots": [j + 1 for j in slots], "slope": lad.slope,
               "points": [{"delta": format_rational(d), "dist": format_rational(r), "residual": format_rational(res)}
                          for d, r, res in lad.points]}
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_gen(args) -> int:
    params = {}
    if args.k is not None:
        params["k"] = args.k
    if args.preset == "random":
        if args.n is None or args.m is None:
            raise InputError("gen --preset random needs --n and --m")
        params.update(n=args.n, m=args.m, seed=args.seed if args.seed is not None else 0)
    e = _rationals(args.e, "--e") if args.e else None
    cfg, ee = builtin_config(args.preset, e, **params)
    text = dumps_config(ConfigFile(cfg, ee))
    if args.out:
        atomic_write(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bllab", description="Exact laboratory for 1-D BLL forms.")
    p.add_argument("--version", action="version", version=f"bllab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, sets=False):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="JSON configuration file" + (" with 'sets'" if sets else ""))
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        sp.set_defaults(func=func)
        return sp

    add("check", cmd_check, "report the structural hypotheses")
    add("eval", cmd_eval, "evaluate phi on the sets", True)
    sp = add("kernel", cmd_kernel, "tabulate the slice kernel of one slot")
    sp.add_argument("--slot", help="slot number (from 1)")
    sp.add_argument("--grid", type=int, help="number of grid intervals")
    sp.add_argument("--csv", help="write the table as CSV")
    sp = add("flow", cmd_flow, "phi along the symmetrization flow", True)
    sp.add_argument("--grid", type=int, help="number of grid intervals on [0, 1]")
    sp.add_argument("--csv", help="write the trace as CSV")
    add("dist", cmd_dist, "distance of the sets to the orbit", True)
    sp = add("scan", cmd_scan, "stability scan near the orbit")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--sampler", default="default", choices=["default", "shell", "shift", "mixed", "orbit"])
    sp.add_argument("--csv", help="write per-sample CSV")
    sp = add("psi", cmd_psi, "interval-shift functional along a ray")
    sp.add_argument("--direction", help="comma-separated rationals, one per slot")
    sp.add_argument("--grid", type=int, help="points per side of 0")
    sp = add("expansion", cmd_expansion, "second-order expansion residual ladder")
    sp.add_argument("--slot", help="comma-separated slot numbers to perturb (default 1,2)")
    sp.add_argument("--deltas", help="comma-separated shell sizes")

    sp = sub.add_parser("gen", help="write a preset configuration")
    sp.add_argument("--preset", required=True, choices=["riesz-sobolev", "gowers", "random"])
    sp.add_argument("--k", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--e", help="comma-separated measures overriding the preset default")
    sp.add_argument("--out", help="output path (default stdout)")
    sp.set_defaults(func=cmd_gen, json=False)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except HypothesisFailure as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(json.dumps(exc.report, indent=2, ensure_ascii=False, default=str), file=sys.stderr)
        return EXIT_HYPOTHESIS
    except DegenerateConfigurationError as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ConfigFormatError, InputError, MeasureMismatchError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, TypeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BLLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


def main():
    sys.exit(run())
