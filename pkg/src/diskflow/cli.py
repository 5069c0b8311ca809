"""Command-line front end.

Subcommands: analyze, portrait, asymptotics, chart, cmf.  Parameters come
from flags or a parameter file (JSON or key=value lines); flags win.  Exit
codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import cmf as cmf_mod
from .compact import infinity_equilibria, to_chart
from .field import PlanarField, make_equilibrium
from .flow import (ALGEBRAIC_RECIPROCAL, EXPONENTIAL, fit_decay, integrate)
from .poly2 import U1, U2, parse_poly
from .render import PortraitSpec, SCHEMA_VERSION, render_portrait, ring_seeds, round6
from .sir import (CRITICAL, SUBCRITICAL, SUPERCRITICAL, SirParams, analyze,
                  make_field)

PARAM_KEYS = ("A", "beta", "mu", "q")


def _load_params_file(path: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad parameter line (expected key=value): {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _sir_params(args, parser) -> SirParams:
    values = {}
    if getattr(args, "params", None):
        file_vals = _load_params_file(args.params)
        for k in PARAM_KEYS:
            if k in file_vals:
                values[k] = file_vals[k]
    for k in PARAM_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            values[k] = v
    missing = [k for k in PARAM_KEYS if k not in values]
    if missing:
        parser.error(f"missing SIR parameter(s): {', '.join('--' + m for m in missing)}")
    try:
        return SirParams.from_mapping(values)
    except (ValueError, ZeroDivisionError) as e:
        parser.error(str(e))


def _field_from_args(args, parser) -> tuple[PlanarField, SirParams | None]:
    """A field either from SIR parameters or from raw polynomial strings."""
    if getattr(args, "P", None) or getattr(args, "Q", None):
        if not (args.P and args.Q):
            parser.error("raw fields need both --P and --Q")
        table = {}
        for kv in getattr(args, "param", []) or []:
            if "=" not in kv:
                parser.error(f"--param expects name=value, got {kv!r}")
            k, v = kv.split("=", 1)
            table[k.strip()] = v.strip()
        f = PlanarField(parse_poly(args.P, params=table),
                        parse_poly(args.Q, params=table))
        return f, None
    p = _sir_params(args, parser)
    return make_field(p), p


def _add_param_flags(sp):
    sp.add_argument("--A", help="birth-input rate (rational string)")
    sp.add_argument("--beta", help="transmission coefficient")
    sp.add_argument("--mu", help="natural mortality rate")
    sp.add_argument("--q", help="recovery rate")
    sp.add_argument("--params", help="parameter file (JSON or key=value lines)")


def _emit(report: dict, out_path: str | None):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _analyze_report(p: SirParams, order: int) -> dict:
    an = analyze(p)
    f = make_field(p)

    equilibria = []
    e0 = make_equilibrium(f, an.e0, exact=an.e0)
    d = e0.to_json_dict()
    d["name"] = "E0"
    equilibria.append(d)
    if an.e_star is not None:
        es = make_equilibrium(f, an.e_star, exact=an.e_star)
        d = es.to_json_dict()
        d["name"] = "E*"
        equilibria.append(d)

    charts = {}
    inf_entries = []
    names = {U2: "E1", U1: "E2"}
    for chart in (U1, U2):
        cf = to_chart(f, chart)
        charts[chart] = cf.to_json_dict()
        for eq in infinity_equilibria(cf):
            entry = eq.to_json_dict()
            entry["name"] = names[chart] if eq.location == (0.0, 0.0) else "other"
            if eq.location == (0.0, 0.0):
                red = cmf_mod.reduce_chart_infinity(cf, order)
                entry["verdict"] = cmf_mod.verdict_to_flow_direction(
                    red, side=1, var_index=0)
                rd = red.to_json_dict()
                if not red.hyperbolic_side_unstable:
                    rd["graph_in_lam"] = [str(c) for c in red.graph_in_variable(0)]
                    rd["reduced_in_lam"] = [str(c) for c in red.reduced_in_variable(0)]
                entry["reduction"] = rd
            inf_entries.append(entry)

    center_manifold = None
    if an.regime == CRITICAL:
        red = cmf_mod.reduce(f, an.e0, order)
        center_manifold = red.to_json_dict()
        center_manifold["graph_in_I"] = [str(c) for c in red.graph_in_variable(1)]
        center_manifold["reduced_in_I"] = [str(c) for c in red.reduced_in_variable(1)]

    def _round_tree(obj):
        if isinstance(obj, float):
            return round6(obj)
        if isinstance(obj, list):
            return [_round_tree(v) for v in obj]
        if isinstance(obj, dict):
            return {k: _round_tree(v) for k, v in obj.items()}
        return obj

    return _round_tree({
        "schema_version": SCHEMA_VERSION,
        "params": p.to_json_dict(),
        "r0": str(an.r0),
        "regime": an.regime,
        "equilibria": equilibria,
        "charts": charts,
        "infinity_equilibria": inf_entries,
        "center_manifold": center_manifold,
        "predictions": {
            "rate": None if an.predicted_rate is None else str(an.predicted_rate),
            "slope": None if an.predicted_slope is None else str(an.predicted_slope),
        },
    })


def cmd_analyze(args, parser) -> int:
    p = _sir_params(args, parser)
    _emit(_analyze_report(p, args.order), args.out)
    return 0


def cmd_chart(args, parser) -> int:
    f, _ = _field_from_args(args, parser)
    cf = to_chart(f, args.chart)
    _emit(cf.to_json_dict(), args.out)
    return 0


def cmd_cmf(args, parser) -> int:
    f, p = _field_from_args(args, parser)
    if args.at in ("u1", "u2"):
        chart = U1 if args.at == "u1" else U2
        red = cmf_mod.reduce_chart_infinity(to_chart(f, chart), args.order)
        rep = red.to_json_dict()
        rep["verdict"] = cmf_mod.verdict_to_flow_direction(red, 1, 0)
    else:  # e0
        if p is None:
            parser.error("--at e0 needs SIR parameters")
        an = analyze(p)
        if an.regime != CRITICAL:
            raise RuntimeError(
                f"E0 is hyperbolic at R0 = {an.r0} (regime {an.regime}); the "
                "center-manifold reduction applies only at R0 = 1")
        red = cmf_mod.reduce(f, an.e0, args.order)
        rep = red.to_json_dict()
        rep["graph_in_I"] = [str(c) for c in red.graph_in_variable(1)]
        rep["reduced_in_I"] = [str(c) for c in red.reduced_in_variable(1)]
        rep["verdict"] = cmf_mod.verdict_to_flow_direction(red, 1, 1)
    _emit(rep, args.out)
    return 0


def cmd_portrait(args, parser) -> int:
    f, p = _field_from_args(args, parser)
    seeds: list[tuple[float, float]] = []
    for s in args.seed or []:
        try:
            a, b = (float(v) for v in s.split(","))
        except ValueError:
            parser.error(f"--seed expects 'S,I', got {s!r}")
        seeds.append((a, b))
    if args.seed_ring:
        center = (0.0, 0.0)
        if p is not None:
            an = analyze(p)
            ctr = an.e_star if an.e_star is not None else an.e0
            center = (float(ctr[0]), float(ctr[1]))
        seeds.extend(ring_seeds(args.seed_ring, args.radius, center))
    if not seeds:
        parser.error("no trajectory seeds: pass --seed and/or --seed-ring")
    for a, b in seeds:
        if a < 0 or b < 0:
            parser.error(f"seed ({a}, {b}) lies outside the first quadrant")
    if not (args.svg or args.json or args.csv):
        parser.error("set at least one of --svg/--json/--csv")

    finite = []
    if p is not None:
        an = analyze(p)
        finite.append(make_equilibrium(f, an.e0, exact=an.e0))
        if an.e_star is not None:
            finite.append(make_equilibrium(f, an.e_star, exact=an.e_star))

    spec = PortraitSpec(field=f, seeds=tuple(seeds), t_max=args.t_max,
                        tol=args.tol, svg_path=args.svg, json_path=args.json,
                        csv_path=args.csv, size_px=args.size)
    render_portrait(spec, finite_equilibria=finite)
    return 0


def cmd_asymptotics(args, parser) -> int:
    p = _sir_params(args, parser)
    an = analyze(p)
    if an.regime == SUPERCRITICAL:
        raise RuntimeError(
            "asymptotic rate fitting covers the subcritical and critical "
            "regimes only; the supercritical approach to E* has no asserted "
            "closed-form rate here")
    try:
        s0, i0 = (float(v) for v in args.seed.split(","))
    except ValueError:
        parser.error(f"--seed expects 'S,I', got {args.seed!r}")
    f = make_field(p)
    traj = integrate(f, (s0, i0), args.t_max, tol=args.tol,
                     max_step=args.t_max / 400.0)
    if an.regime == SUBCRITICAL:
        fit = fit_decay(traj, component=1, model=EXPONENTIAL)
        predicted = float(an.predicted_rate)
    else:
        fit = fit_decay(traj, component=1, model=ALGEBRAIC_RECIPROCAL)
        predicted = float(an.predicted_slope)
    rel_err = abs(fit.rate_or_slope - predicted) / abs(predicted)
    _emit({
        "schema_version": SCHEMA_VERSION,
        "params": p.to_json_dict(),
        "regime": an.regime,
        "model": fit.model,
        "predicted": round6(predicted),
        "predicted_exact": str(an.predicted_rate if an.regime == SUBCRITICAL
                               else an.predicted_slope),
        "fitted": round6(fit.rate_or_slope),
        "relative_error": round6(rel_err),
        "r_squared": round6(fit.r_squared),
        "window": [round6(fit.window[0]), round6(fit.window[1])],
        "terminal": traj.terminal.kind,
    }, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diskflow",
        description="Global analysis of planar polynomial ODE systems on "
                    "the Poincare disk")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="full report: R0, equilibria, charts, "
                                        "infinity verdicts, reductions")
    _add_param_flags(sp)
    sp.add_argument("--order", type=int, default=4,
                    help="center-manifold truncation order (default 4)")
    sp.add_argument("--out", help="write the JSON report here (default stdout)")
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("chart", help="dump the desingularized chart field")
    _add_param_flags(sp)
    sp.add_argument("--P", help="raw dv0/dt polynomial")
    sp.add_argument("--Q", help="raw dv1/dt polynomial")
    sp.add_argument("--param", action="append",
                    help="name=value for symbols in --P/--Q (repeatable)")
    sp.add_argument("--chart", choices=[U1, U2], required=True)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_chart)

    sp = sub.add_parser("cmf", help="dump a center-manifold reduction")
    _add_param_flags(sp)
    sp.add_argument("--P")
    sp.add_argument("--Q")
    sp.add_argument("--param", action="append")
    sp.add_argument("--at", choices=["e0", "u1", "u2"], required=True)
    sp.add_argument("--order", type=int, default=4)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_cmf)

    sp = sub.add_parser("portrait", help="render a Poincare-disk phase portrait")
    _add_param_flags(sp)
    sp.add_argument("--P")
    sp.add_argument("--Q")
    sp.add_argument("--param", action="append")
    sp.add_argument("--seed", action="append",
                    help="trajectory start 'S,I' (repeatable)")
    sp.add_argument("--seed-ring", type=int, default=0, metavar="N",
                    help="N seeds on a ring around the attracting equilibrium")
    sp.add_argument("--radius", type=float, default=1.0,
                    help="ring radius for --seed-ring")
    sp.add_argument("--t-max", type=float, default=200.0)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--svg", help="SVG output path")
    sp.add_argument("--json", help="JSON sidecar path")
    sp.add_argument("--csv", help="CSV trajectory export path")
    sp.add_argument("--size", type=int, default=640, help="figure size in px")
    sp.set_defaults(fn=cmd_portrait)

    sp = sub.add_parser("asymptotics",
                        help="predicted vs fitted decay of the infectious "
                             "component (R0 <= 1)")
    _add_param_flags(sp)
    sp.add_argument("--seed", default="3,0.5", help="trajectory start 'S,I'")
    sp.add_argument("--t-max", type=float, default=200.0)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_asymptotics)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, parser)
    except (RuntimeError, ValueError, OSError) as e:
        print(f"diskflow: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
