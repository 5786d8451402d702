"""Command-line front end: simulate, coeffs, roots, verify.

Exit codes: 0 on success, 1 on input/configuration errors, 2 when a
verification suite fails.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import config as config_mod
from . import metrics as metrics_mod
from . import stepper, verify
from .closedloop import RootsNotRealSimple
from .config import ConfigError


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, RootsNotRealSimple, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pidsteps",
        description="Exact setpoint-change responses of PID loops with one transport delay",
    )
    sub = parser.add_subparsers(required=True)

    sim = sub.add_parser("simulate", help="solve a scenario and emit a CSV trajectory")
    _scenario_flags(sim)
    sim.add_argument("--dt", type=float, help="CSV sample spacing (delay units)")
    sim.add_argument("--band", type=float, help="settling band fraction")
    sim.add_argument("--out", help="CSV output path (default: stdout)")
    sim.set_defaults(handler=cmd_simulate)

    coeffs = sub.add_parser("coeffs", help="dump segment coefficients for one interval")
    _scenario_flags(coeffs)
    coeffs.add_argument("--n", type=int, required=True, help="interval number, 1-based")
    coeffs.add_argument("--k", type=int, default=1, help="knot gap number, 1-based")
    coeffs.set_defaults(handler=cmd_coeffs)

    roots = sub.add_parser("roots", help="print the delay-free characteristic roots")
    roots.add_argument("--config", required=True, help="scenario TOML path")
    roots.set_defaults(handler=cmd_roots)

    ver = sub.add_parser("verify", help="run the self-check suites")
    ver.add_argument("--level", choices=("quick", "full"), default="quick")
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(handler=cmd_verify)
    return parser


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="scenario TOML path")
    p.add_argument("--horizon", type=int, help="override solved intervals")


def _load_scenario(args):
    cfg = config_mod.load(args.config)
    sim = cfg.simulation
    if getattr(args, "horizon", None) is not None:
        sim = replace(sim, horizon=args.horizon)
    if getattr(args, "dt", None) is not None:
        sim = replace(sim, dt=args.dt)
    if getattr(args, "band", None) is not None:
        sim = replace(sim, band=args.band)
    cfg = replace(cfg, simulation=sim)
    system = config_mod.build_system(cfg)
    init = config_mod.build_initial(cfg)
    forcing = config_mod.build_forcing(cfg)
    return cfg, system, init, forcing


def cmd_simulate(args) -> int:
    cfg, system, init, forcing = _load_scenario(args)
    sim = cfg.simulation
    sol = stepper.solve(system, init, forcing, sim.horizon)

    dt = sim.dt
    samples = round(sim.horizon / dt)
    rows = ["t,y"]
    for i in range(samples + 1):
        t = min(i * dt, float(sim.horizon))
        rows.append(f"{t:.17g},{sol.value(t):.17g}")
    csv_text = "\n".join(rows) + "\n"

    final_setpoint = forcing.value(float(sim.horizon))
    summary = metrics_mod.compute_metrics(
        sol, final_setpoint, horizon=float(sim.horizon), band=sim.band
    )
    metrics_lines = [
        "# metrics",
        f"setpoint = {final_setpoint:.17g}",
        f"overshoot = {summary.overshoot:.17g}",
        "settling_time = "
        + (f"{summary.settling_time:.17g}" if summary.settling_time is not None else "none"),
        f"band = {summary.band:.17g}",
        f"iae = {summary.iae:.17g}",
        "decay_ratio = "
        + (f"{summary.decay_ratio:.17g}" if summary.decay_ratio is not None else "none"),
    ]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        print("\n".join(metrics_lines))
    else:
        sys.stdout.write(csv_text)
        print("\n".join(metrics_lines), file=sys.stderr)
    return 0


def cmd_coeffs(args) -> int:
    cfg, system, init, forcing = _load_scenario(args)
    horizon = max(cfg.simulation.horizon, args.n)
    sol = stepper.solve(system, init, forcing, max(args.n, 1))
    if not 1 <= args.n <= sol.intervals:
        raise ConfigError(f"interval n={args.n} beyond horizon {horizon}")
    if not 1 <= args.k <= sol.q:
        raise ConfigError(f"knot gap k={args.k} outside 1..{sol.q}")
    print("# roots")
    print("p,r")
    for p, r in enumerate(sol.table_roots(), start=1):
        print(f"{p},{r:.17g}")
    print(f"# coefficients n={args.n} k={args.k}")
    print("p,i,G")
    for p, i, g in sol.coefficient_rows(args.n, args.k):
        print(f"{p},{i},{g:.17g}")
    return 0


def cmd_roots(args) -> int:
    cfg = config_mod.load(args.config)
    system = config_mod.build_system(cfg)
    print("p,r")
    for p, r in enumerate(system.roots, start=1):
        print(f"{p},{r:.17g}")
    return 0


def cmd_verify(args) -> int:
    ok = verify.run(level=args.level, seed=args.seed)
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
