"""Command-line interface.

Exit codes: 0 success, 2 configuration or usage error, 3 solver failure,
4 invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import planner as pl
from .config import ConfigError, available_presets, load_config, load_preset
from .dynamics import (
    ControlPath,
    IntegrationError,
    InvariantViolation,
    simulate_epi,
    simulate_planner,
)
from .equilibria import NoEndemicState, df_stability, endemic_stability, write_bifurcation_csv
from .forms import DomainError
from .validation import validate_assumptions

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_INVARIANT = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _grid(text):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:n, got {text!r}") from exc
    if n < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"grid needs n >= 1 and hi >= lo, got {text!r}")
    return lo, hi, n


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--preset", default=None, help=f"named preset ({', '.join(available_presets())})")
    src.add_argument("--config", type=Path, default=None, help="INI config file")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--theta", type=float, default=None, help="discount rate override")
    common.add_argument("--b", type=float, default=None, help="birth rate override")
    common.add_argument("--grid", type=_grid, default=None, help="sweep grid lo:hi:n")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--seed", type=int, default=0, help="seed for multi-start solvers")

    parser = _Parser(prog="epigrowth", description="Epidemic dynamics coupled to a growth planner.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", parents=[common], help="integrate the dynamics")
    p.add_argument("--kind", choices=("epi", "planner"), default="epi")
    p.add_argument("--i0", type=float, default=0.01, help="initial infected fraction")
    p.add_argument("--t-end", type=float, default=200.0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--c", type=float, default=None, help="constant consumption (planner; default 0.95 c*)")
    p.add_argument("--m", type=float, default=0.0, help="constant health spending (planner)")
    p.add_argument("--A", type=float, default=0.0, help="constant control investment (planner)")

    sub.add_parser("equilibrium", parents=[common], help="epidemic equilibria at the origin rates")
    sub.add_parser("steady-state", parents=[common], help="planner steady states at (b, theta)")
    p = sub.add_parser("theta-sweep", parents=[common], help="steady states across discount rates")
    p.add_argument("--mode", choices=ex.MODES, default="WithControl")
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    sub.add_parser("b-sweep", parents=[common], help="no-investment steady states across birth rates")
    p = sub.add_parser("bifurcation", parents=[common], help="equilibrium branches across a sweep")
    p.add_argument("--param", choices=("beta", "p"), default="beta")
    sub.add_parser("validate", parents=[common], help="assumption diagnostics")
    p = sub.add_parser("check-foc", parents=[common], help="re-verify optimality residuals of a CSV")
    p.add_argument("csv", type=Path)
    p.add_argument("--row", type=int, default=None, help="row index (default: all rows)")
    return parser


def _load(args):
    if args.config is not None:
        model, extras = load_config(args.config)
    else:
        model, extras = load_preset(args.preset or "section6")
    changes = {k: getattr(args, k) for k in ("b", "theta") if getattr(args, k) is not None}
    if changes:
        try:
            model = model.with_params(**changes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if args.tol is not None and not 1e-14 <= args.tol <= 1e-2:
        raise ConfigError(f"--tol must lie in [1e-14, 1e-2], got {args.tol}")
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    return model, extras


def _outdir(args):
    try:
        args.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {args.out}: {exc}") from exc
    return args.out


def cmd_simulate(args, model, extras, out):
    P = model.params
    tol = args.tol or 1e-8
    if not 0 <= args.i0 <= 1 - P.p:
        raise ConfigError(f"--i0 must lie in [0, 1 - p], got {args.i0}")
    t_eval = np.linspace(0.0, args.t_end, args.samples)
    if args.kind == "epi":
        beta, gamma = model.rates(0.0, 0.0, 0.0)
        y0 = [1 - P.p - args.i0, args.i0, 0.0, P.p]
        traj = simulate_epi(y0, beta.value, gamma.value, P.b, P.p, (0.0, args.t_end), tol, t_eval)
    else:
        df = pl.solve_disease_free_ss(model)
        # with constant consumption the steady-state capital stock is the unstable
        # root of k' = 0, so the default saves slightly more to stay on the stable side
        c = 0.95 * df.controls.c if args.c is None else args.c
        y0 = [df.state.k, 0.0, 1 - P.p - args.i0, args.i0, 0.0]
        traj = simulate_planner(model, y0, ControlPath.constant(c, args.m, args.A),
                                (0.0, args.t_end), tol, t_eval)
    path = out / "trajectory.csv"
    traj.to_csv(path)
    print(f"wrote {path} ({len(traj.t)} samples, final i = {traj['i'][-1]:.6g})")
    return EXIT_OK


def cmd_equilibrium(args, model, extras, out):
    P = model.params
    beta, gamma = model.rates(0.0, 0.0, 0.0)
    lines = []
    df = df_stability(beta.value, gamma.value, P.b, P.p)
    lines.append(f"R0 = {df.r0:.6g}, R_vac = {df.r_vac:.6g}")
    lines.append(f"disease-free {df.point}: eigenvalues {np.round(df.eigenvalues.real, 10)} "
                 f"stable={df.stable} boundary={df.boundary}")
    try:
        en = endemic_stability(beta.value, gamma.value, P.b, P.p)
        lines.append(f"endemic {en.point}: eigenvalues {en.eigenvalues} stable={en.stable} "
                     f"det_check={en.det_check:.2e}")
        lines += [f"  note: {n}" for n in en.notes]
    except NoEndemicState as exc:
        lines.append(f"endemic: none ({exc})")
    text = "\n".join(lines)
    (out / "equilibrium.txt").write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_steady_state(args, model, extras, out):
    P = model.params
    sols = pl.classify_steady_state(model, seed=args.seed)
    pl.write_steady_state_csv(sols, out / "steady_state.csv")
    text = pl.summary_text(model, P.b, P.theta, sols)
    (out / "steady_state.txt").write_text(text + "\n")
    print(text)
    return EXIT_OK if sols else EXIT_SOLVER


def _axis(args, default):
    if args.grid is None:
        return default
    lo, hi, n = args.grid
    return np.linspace(lo, hi, n)


def cmd_theta_sweep(args, model, extras, out):
    thetas = ex.DEFAULT_THETA_GRID
    if args.grid is not None:
        lo, hi, n = args.grid
        if lo <= 0:
            raise ConfigError("theta grid must be positive")
        thetas = np.geomspace(lo, hi, n)
    rows = ex.theta_sweep(model, thetas=thetas, mode=args.mode, jobs=args.jobs, seed=args.seed)
    path = out / "theta_sweep.csv"
    ex.write_sweep_csv(rows, path)
    if args.gnuplot:
        ex.write_gnuplot_script(path, out / "theta_sweep.gp")
    failed = sum(r.solution is None for r in rows)
    print(f"wrote {path} ({len(rows)} rows, {failed} without a steady state)")
    return EXIT_OK if failed == 0 else EXIT_SOLVER


def cmd_b_sweep(args, model, extras, out):
    rows = ex.b_sweep(model, _axis(args, np.linspace(0.005, 0.13, 50)), jobs=args.jobs)
    path = out / "b_sweep.csv"
    ex.write_sweep_csv(rows, path)
    failed = sum(r.solution is None for r in rows)
    worst = max((r.extra.get("k_gap", 0.0) for r in rows), default=0.0)
    print(f"wrote {path} ({len(rows)} rows, capital closed-form gap {worst:.2e})")
    return EXIT_OK if failed == 0 else EXIT_SOLVER


def cmd_bifurcation(args, model, extras, out):
    values = None
    if args.grid is not None:
        values = _axis(args, None)
    rows = ex.figure2_data(model, args.param, values)
    path = out / "bifurcation.csv"
    write_bifurcation_csv(rows, path)
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


def cmd_validate(args, model, extras, out):
    rep = validate_assumptions(model, extras)
    text = rep.format()
    (out / "validation.txt").write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_check_foc(args, model, extras, out):
    tol = args.tol or pl.FOC_TOL
    if not args.csv.is_file():
        raise ConfigError(f"{args.csv} not found")
    rows = ex.read_sweep_csv(args.csv)
    idx = range(len(rows)) if args.row is None else [args.row]
    bad = 0
    for j in idx:
        if not 0 <= j < len(rows):
            raise ConfigError(f"row {j} out of range (table has {len(rows)} rows)")
        row = rows[j]
        if row["regime"] in ("Failed", "None"):
            print(f"row {j}: no solution ({row.get('status', '')})")
            continue
        res = pl.residuals_from_row(model, row)
        ok = res.max_norm <= tol and not res.sign_violations
        bad += not ok
        flags = f" sign violations: {', '.join(res.sign_violations)}" if res.sign_violations else ""
        print(f"row {j}: {row['regime']} max residual {res.max_norm:.3e} {'ok' if ok else 'FAIL'}{flags}")
    return EXIT_OK if bad == 0 else EXIT_INVARIANT


COMMANDS = {
    "simulate": cmd_simulate,
    "equilibrium": cmd_equilibrium,
    "steady-state": cmd_steady_state,
    "theta-sweep": cmd_theta_sweep,
    "b-sweep": cmd_b_sweep,
    "bifurcation": cmd_bifurcation,
    "validate": cmd_validate,
    "check-foc": cmd_check_foc,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        model, extras = _load(args)
        out = _outdir(args)
        return COMMANDS[args.command](args, model, extras, out)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvariantViolation, DomainError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (pl.SolverError, pl.SingularSystem, IntegrationError, pl.RegimeUnavailable) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
