"""Command-line interface: ``inductive-link <command> [options]``.

Exit status: 0 on success, 1 on a domain error (bad physics, safety rejection,
failed verification), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import LinkError, SafetyError, UsageError
from .link import SAFETY_K_MAX, Topology, make_design, solve_link, validate_safety
from .mna import power_audit, solve_ac
from .netlist import format_netlist, netlist_from_design, parse_netlist
from .presets import DEFAULT_K, TABLE1
from .sweep import SweepSpec, figure_preset, run_sweep, write_csv
from .tuning import (
    OptimizationProblem,
    optimize_efficiency,
    parallel_tank_cap,
    series_resonance_cap,
    tune_design,
)
from .verify import run_verification

REFERENCE_NOTE = """\
Published operating points and what this model reproduces
---------------------------------------------------------
Reference link: f = 13.56 MHz, L1 = 5.48 uH, L2 = 1 uH, RL1 = 2.12 ohm,
RL2 = 1.63 ohm, Rload = 320 ohm, k = 0.4. The source resistance Rs is not
given; it defaults to 0 ohm here. Capacitors are resonance-tuned.

Series primary + parallel secondary (published: gain ~3.7, efficiency ~0.9)
  model, Rs = 0: gain 3.507, efficiency 0.9050.

Series-tuned primary (published: gain 2.5, efficiency 0.75)
  No single Rs reproduces both numbers with a resonant C1s:
    Rs = 10 ohm   -> gain 2.475 (matches 2.5), efficiency 0.617
    Rs = 4.34 ohm -> gain 3.018, efficiency 0.750 (matches 0.75)
  With Rs = 0 the model gives gain 3.622, efficiency 0.8987.

The efficiency formulas are the real-part closed forms. They equal the true
load/source power ratio only when the secondary mesh is resonant, which holds
for the tuned series-parallel link but never for the series-tuned link (its
secondary keeps the reactance of L2). For the series reference point the
exact power ratio is 0.8926 against 0.8987 from the closed form. `verify`
reports both comparisons.

Published trend statements that the model does not show at these values:
  * gain rising with k: with a resonant primary and k >= 0.2 the link is
    over-coupled (w^2 M^2 > Re[A]|Zsec|), so gain falls as k rises.
  * gain nearly constant for Rload in 0..100 ohm (parallel secondary): the
    gain is proportional to Zload and tends to 0 as Rload -> 0.
  * efficiency flat beyond 100 ohm (parallel secondary): holds to within
    0.05 only for k >= 0.6 with C2p fixed at its 320 ohm tuning.
"""


def _design_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("design")
    g.add_argument("--preset", choices=["table1", "none"], default="table1",
                   help="base parameter set (default: table1)")
    g.add_argument("--topology", default="sp", help="series | sp (default: sp)")
    g.add_argument("--freq", type=float, help="drive frequency, Hz")
    g.add_argument("--l1", type=float, help="primary inductance, H")
    g.add_argument("--l2", type=float, help="secondary inductance, H")
    g.add_argument("--rl1", type=float, help="primary winding resistance, ohm")
    g.add_argument("--rl2", type=float, help="secondary winding resistance, ohm")
    g.add_argument("--k", type=float, help=f"coupling coefficient (default {DEFAULT_K})")
    g.add_argument("--rs", type=float, default=0.0, help="source resistance, ohm (default 0)")
    g.add_argument("--rload", type=float, help="load resistance, ohm")
    g.add_argument("--c1s", type=float, help="primary series capacitor, F")
    g.add_argument("--c2p", type=float, help="secondary parallel capacitor, F")
    g.add_argument("--vs", type=float, default=1.0, help="source amplitude, V (default 1)")
    g.add_argument("--tune", action="store_true", help="choose resonant capacitors")
    g.add_argument("--allow-unsafe", action="store_true",
                   help=f"accept k above the tissue-safety limit {SAFETY_K_MAX}")
    return p


_FIELD_FLAGS = {"freq_hz": "freq", "l1": "l1", "l2": "l2", "r_l1": "rl1", "r_l2": "rl2",
                "r_load": "rload"}


def build_design(args, check_safety: bool = True):
    try:
        topology = Topology.parse(args.topology)
    except LinkError as exc:
        raise UsageError(str(exc)) from None
    base = dict(TABLE1) if args.preset == "table1" else {}
    for field, flag in _FIELD_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            base[field] = v
    missing = [f"--{_FIELD_FLAGS[f]}" for f in _FIELD_FLAGS if f not in base]
    if missing:
        raise UsageError(f"missing design flag(s) {', '.join(missing)} (or use --preset table1)")
    k = DEFAULT_K if args.k is None else args.k
    if args.k is None and args.preset != "table1":
        raise UsageError("missing design flag --k")
    if check_safety and k > SAFETY_K_MAX and not args.allow_unsafe:
        raise SafetyError(f"k = {k:g} exceeds the tissue-safety limit k <= {SAFETY_K_MAX:g}; "
                          "pass --allow-unsafe to evaluate it anyway", k, SAFETY_K_MAX)

    c1s, c2p = args.c1s, args.c2p
    if topology is Topology.SERIES and c2p is not None:
        raise UsageError("--c2p only applies to --topology sp")
    if args.tune:
        if c1s is None:
            c1s = series_resonance_cap(base["freq_hz"], base["l1"])
        if topology is Topology.SERIES_PARALLEL and c2p is None:
            c2p = parallel_tank_cap(base["freq_hz"], base["l2"], base["r_load"])
    else:
        need = ["--c1s"] if c1s is None else []
        if topology is Topology.SERIES_PARALLEL and c2p is None:
            need.append("--c2p")
        if need:
            raise UsageError(f"missing {' and '.join(need)}; give capacitor values or pass --tune")
    return make_design(topology=topology, k=k, rs=args.rs, vs=args.vs, c1s=c1s, c2p=c2p, **base)


def _out(args):
    return open(args.out, "w", newline="") if getattr(args, "out", None) else sys.stdout


def cmd_solve(args) -> int:
    design = build_design(args)
    report = validate_safety(design, allow_unsafe=args.allow_unsafe)
    r = solve_link(design)
    fields = [
        ("topology", design.topology.value), ("k", design.coils.k), ("m_h", r.m),
        ("c1s_f", design.tuning.c1s), ("c2p_f", design.tuning.c2p),
        ("gain_mag", r.gain_mag), ("gain_phase_deg", r.gain_phase_deg),
        ("efficiency", r.efficiency), ("power_ratio", r.power_ratio),
        ("i1_mag", abs(r.i1)), ("i2_mag", abs(r.i2)), ("vload_mag", abs(r.v_load)),
    ]
    fh = _out(args)
    try:
        if args.format == "csv":
            fh.write(",".join(k for k, _ in fields) + "\n")
            fh.write(",".join("" if v is None else (v if isinstance(v, str) else repr(float(v)))
                              for _, v in fields) + "\n")
        else:
            for key, v in fields:
                if v is None or isinstance(v, str):
                    fh.write(f"{key:16s} {v if v is not None else '-'}\n")
                elif key in ("gain_mag", "efficiency", "power_ratio"):
                    fh.write(f"{key:16s} {v:.4f}\n")
                else:
                    fh.write(f"{key:16s} {v:.6g}\n")
            fh.write(f"safety           {report.message}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_sweep(args) -> int:
    if args.figure:
        spec = figure_preset(args.figure)
    else:
        if args.var is None or args.start is None or args.stop is None:
            raise UsageError("custom sweeps need --var, --start and --stop (or use --figure)")
        design = build_design(args, check_safety=False)
        family = tuple(float(v) for v in args.family.split(",")) if args.family else None
        spec = SweepSpec(base=design, variable=args.var, start=args.start, stop=args.stop,
                         steps=args.steps, family=family, family_variable=args.family_var)
    table = run_sweep(spec)
    if table.metadata["unsafe_curves"]:
        print(f"note: curves {', '.join(table.metadata['unsafe_curves'])} exceed the "
              f"tissue-safety limit k <= {SAFETY_K_MAX:g}", file=sys.stderr)
    if table.metadata["errors"]:
        print(f"note: {table.metadata['errors']} sweep point(s) failed (NaN rows)", file=sys.stderr)
    fh = _out(args)
    try:
        write_csv(table, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_tune(args) -> int:
    args.tune = True
    design = build_design(args)
    _, res = tune_design(design)
    print(f"c1s_f            {res.c1s:.6g}")
    print(f"c2p_f            {res.c2p:.6g}" if res.c2p is not None else "c2p_f            -")
    print(f"residual_ohm     {res.achieved_resonance_residual:.3g}")
    return 0


def _parse_bounds(items) -> dict:
    bounds = {}
    for item in items or []:
        try:
            name, rng = item.split("=", 1)
            lo, hi = rng.split(":", 1)
            bounds[name.strip()] = (float(lo), float(hi))
        except ValueError:
            raise UsageError(f"bad --bounds entry {item!r}; expected name=lo:hi") from None
    return bounds


def cmd_optimize(args) -> int:
    design = build_design(args)
    free = tuple(v.strip() for v in args.free.split(",") if v.strip())
    problem = OptimizationProblem(base=design, free_variables=free, bounds=_parse_bounds(args.bounds),
                                  objective=args.objective, allow_unsafe=args.allow_unsafe)
    res = optimize_efficiency(problem)
    for name, v in res.point.items():
        print(f"{name:16s} {v:.8g}")
    print(f"{args.objective:16s} {res.value:.6f}")
    print(f"evaluations      {len(res.trace)}")
    return 0


def cmd_verify(args) -> int:
    rep = run_verification(trials=args.trials, seed=args.seed)
    for line in rep.lines():
        print(line)
    print(f"elapsed {rep.elapsed_s:.2f} s", file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_netlist(args) -> int:
    if args.action == "export":
        design = build_design(args)
        fh = _out(args)
        try:
            fh.write(format_netlist(netlist_from_design(design),
                                    title=f"{design.topology.value} link, f = {design.freq_hz:g} Hz"))
        finally:
            if fh is not sys.stdout:
                fh.close()
        return 0
    if not args.file:
        raise UsageError("netlist solve needs a netlist file")
    if args.freq is None:
        raise UsageError("netlist solve needs --freq <hz>")
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read netlist file {args.file!r}: {exc.strerror}") from None
    net = parse_netlist(text)
    sol = solve_ac(net, args.freq)
    audit = power_audit(sol, net)
    print(f"* AC solution at {args.freq:g} Hz")
    for node, v in sol.node_voltages.items():
        print(f"V({node}) = {v.real:.9g} {v.imag:+.9g}j  |V| = {abs(v):.9g}")
    for name, i in sol.branch_currents.items():
        print(f"I({name}) = {i.real:.9g} {i.imag:+.9g}j  P = {audit.per_element_power[name]:.9g} W")
    print(f"source_power     {audit.source_power:.9g} W")
    print(f"dissipated_power {audit.dissipated_power:.9g} W")
    for note in sol.warnings:
        print(f"warning: {note}", file=sys.stderr)
    return 0


def cmd_explain(args) -> int:
    print(REFERENCE_NOTE, end="")
    return 0


def make_parser() -> argparse.ArgumentParser:
    design = _design_parser()
    parser = argparse.ArgumentParser(prog="inductive-link",
                                     description="Tuned inductive power link simulator and design tool.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--explain-paper", action="store_true",
                        help="same as the explain command")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("solve", parents=[design], help="solve one design point")
    p.add_argument("--format", choices=["plain", "csv"], default="plain")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", parents=[design], help="figure preset or custom sweep, CSV output")
    p.add_argument("--figure", choices=["fig7", "fig8", "fig9", "fig10"])
    p.add_argument("--var", choices=["k", "r_load", "freq_hz"])
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--family", help="comma-separated values of --family-var, one curve each")
    p.add_argument("--family-var", default="k", choices=["k", "r_load", "freq_hz"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tune", parents=[design], help="resonant capacitor values")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("optimize", parents=[design], help="maximize efficiency or gain")
    p.add_argument("--free", required=True, help="comma-separated subset of k,r_load,c1s,c2p")
    p.add_argument("--bounds", nargs="+", help="name=lo:hi per free variable")
    p.add_argument("--objective", choices=["efficiency", "gain_mag"], default="efficiency")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("verify", help="randomized closed-form vs MNA oracle check")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("netlist", parents=[design], help="export a design netlist or solve a netlist file")
    p.add_argument("action", choices=["export", "solve"])
    p.add_argument("file", nargs="?")
    p.add_argument("--out")
    p.set_defaults(func=cmd_netlist)

    p = sub.add_parser("explain", help="how the model compares with the published operating points")
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        if args.explain_paper:
            return cmd_explain(args)
        parser.print_usage(sys.stderr)
        print("usage error: a command is required", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except LinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
