"""Parameter sweeps over the planner steady state and the bifurcation data.

* ``theta_sweep``  steady states across discount rates, with or without controls
* ``b_sweep``      no-investment steady states across birth rates
* ``figure2_data`` both equilibrium branches across a transmission sweep

Rows carry co-states and multipliers so every written table can be
re-verified against the optimality conditions after loading.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import planner as pl
from .equilibria import NoEndemicState, bifurcation_scan, write_bifurcation_csv
from .forms import Model, f_eval

DEFAULT_THETA_GRID = np.geomspace(0.01, 0.2, 40)
MODES = ("WithControl", "NoControl")

SWEEP_COLUMNS = pl.REPORT_COLUMNS[:-1] + ("y", "residual", "n_solutions", "kkt_ok", "status")


@dataclass
class SweepRow:
    b: float
    theta: float
    regime: str
    solution: pl.SteadyStateSolution | None = None
    y: float = math.nan
    n_solutions: int = 0
    kkt_ok: bool = False
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    def __getattr__(self, name):
        # expose state/control columns directly, nan when the point failed
        if name in ("solution", "extra"):
            raise AttributeError(name)
        sol = self.__dict__.get("solution")
        if name in pl.REPORT_COLUMNS:
            return sol.row()[name] if sol is not None else math.nan
        raise AttributeError(name)

    def as_dict(self) -> dict:
        if self.solution is not None:
            out = self.solution.row()
        else:
            out = {c: math.nan for c in pl.REPORT_COLUMNS}
        out.update(b=self.b, theta=self.theta, regime=self.regime, y=self.y,
                   n_solutions=self.n_solutions, kkt_ok=int(self.kkt_ok), status=self.status)
        return out


def _row_from(model, b, theta, sols, status="ok"):
    if not sols:
        return SweepRow(b, theta, "None", None, n_solutions=0, status=status or "no steady state")
    chosen = next((s for s in sols if s.predicted), sols[0])
    return SweepRow(b, theta, chosen.regime, chosen, y=chosen.output(pl._at(model, b, theta)),
                    n_solutions=len(sols), kkt_ok=pl.is_kkt_consistent(chosen), status=status)


def _no_control_point(model, b, theta):
    """Steady state with m = A = 0 pinned (constant-rate epidemic)."""
    m = pl._at(model, b, theta)
    if pl.is_endemic(m):
        sol = pl.solve_endemic_no_invest(m, enforce_kkt=False)
    else:
        sol = pl.solve_disease_free_ss(m)
    sol.predicted = True
    return [sol]


def _sweep_point(args):
    model, b, theta, mode, seed = args
    try:
        if mode == "NoControl":
            sols = _no_control_point(model, b, theta)
        else:
            sols = pl.classify_steady_state(model, b, theta, seed=seed)
        return _row_from(model, b, theta, sols)
    except (pl.SolverError, pl.SingularSystem, pl.RegimeUnavailable, NoEndemicState, ValueError) as exc:
        return SweepRow(b, theta, "Failed", None, status=f"{type(exc).__name__}: {exc}")


def _parallel_map(fn, tasks, jobs):
    if jobs is None or jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


def theta_sweep(model: Model, b=None, thetas=None, mode="WithControl", jobs=1, seed=0) -> list[SweepRow]:
    """One steady-state row per discount rate.

    ``WithControl`` reports the classifier's solution (the predicted regime
    when several KKT points coexist; ``n_solutions`` records how many).
    ``NoControl`` pins m = A = 0 and returns the constant-rate steady state.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    b = model.params.b if b is None else b
    thetas = DEFAULT_THETA_GRID if thetas is None else np.asarray(thetas, dtype=float)
    if np.any(thetas <= 0) or np.any(thetas >= 1):
        raise ValueError("theta grid must lie in (0, 1)")
    return _parallel_map(_sweep_point, [(model, b, float(t), mode, seed) for t in thetas], jobs)


def capital_closed_form(model: Model, b, theta, l=1.0) -> float:
    """k solving f1(k, l) = theta + delta_K + b - mu for Cobb-Douglas f."""
    P = model.params
    psi = model.production.psi
    return l * (psi / (theta + P.delta_K + b - P.mu)) ** (1.0 / (1.0 - psi))


def capital_root(model: Model, b, theta, l=1.0) -> float:
    """Same quantity by bracketed root finding on f1."""
    P = model.params
    target = theta + P.delta_K + b - P.mu
    fun = lambda k: f_eval(model.production, k, l).f1 - target
    hi = 1.0
    while fun(hi) > 0:
        hi *= 2
    return brentq(fun, 1e-12, hi, xtol=1e-15, rtol=1e-15, maxiter=500)


def b_sweep(model: Model, bs, theta=None, jobs=1) -> list[SweepRow]:
    """No-investment steady states (m = A = 0) across birth rates.

    Each row records the closed-form and root-solved capital stocks and
    whether the no-investment point also satisfies the optimality
    inequalities (``kkt_ok``); inside the endemic window it need not.
    """
    bs = np.asarray(bs, dtype=float)
    if np.any(bs < 0.005 - 1e-15) or np.any(bs > 0.13 + 1e-15):
        raise ValueError("birth-rate grid must lie in [0.005, 0.13]")
    theta = model.params.theta if theta is None else float(theta)
    rows = _parallel_map(_sweep_point, [(model, float(b), theta, "NoControl", 0) for b in bs], jobs)
    for r in rows:
        if r.solution is None:
            continue
        l = r.solution.state.l
        kc = capital_closed_form(model, r.b, theta, l)
        kr = capital_root(model, r.b, theta, l)
        r.extra.update(k_closed=kc, k_root=kr, k_gap=abs(kc - kr) / kc)
    return rows


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            d = r.as_dict()
            w.writerow([d[c] if c in ("regime", "status") else
                        (str(d[c]) if c in ("n_solutions", "kkt_ok") else f"{d[c]:.17g}")
                        for c in SWEEP_COLUMNS])


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        out.append({k: (v if k in ("regime", "status") else
                        int(v) if k in ("n_solutions", "kkt_ok") else float(v)) for k, v in r.items()})
    return out


def reverify_csv(model: Model, path, tol=pl.FOC_TOL) -> list[tuple]:
    """Recompute optimality residuals for every solved row of a sweep table.

    Returns ``(row_index, max_residual, ok)`` per solved row.
    """
    out = []
    for j, row in enumerate(read_sweep_csv(path)):
        if row["regime"] in ("Failed", "None"):
            continue
        res = pl.residuals_from_row(model, row).max_norm
        out.append((j, res, res <= tol))
    return out


def figure2_data(model: Model, param="beta", values=None, n=500) -> list:
    """Bifurcation table with the rates evaluated at A = e = h = 0.

    By default ``beta`` sweeps a range whose vaccination-adjusted
    reproduction number runs from 0.25 to 4.
    """
    P = model.params
    beta0 = model.beta.beta_bar
    gamma0 = model.gamma.gamma_floor
    if values is None:
        if param == "beta":
            crit = (P.b + gamma0) / (1 - P.p)
            values = np.linspace(0.25 * crit, 4 * crit, n)
        else:
            values = np.linspace(0.0, 1.0, n, endpoint=False)
    if param == "beta":
        return bifurcation_scan(values, "beta", gamma=gamma0, b=P.b, p=P.p)
    return bifurcation_scan(values, "p", beta=beta0, gamma=gamma0, b=P.b)


GNUPLOT_TEMPLATE = """# columns follow the CSV header; pipe through: gnuplot -p {name}.gp
set datafile separator ','
set key autotitle columnhead
set xlabel 'theta'
set logscale x
plot for [col in 'k c m A i'] '{csv}' using 'theta':col with linespoints title col
"""


def write_gnuplot_script(csv_path, script_path) -> None:
    import os

    name = os.path.splitext(os.path.basename(script_path))[0]
    with open(script_path, "w") as fh:
        fh.write(GNUPLOT_TEMPLATE.format(name=name, csv=os.path.basename(csv_path)))


__all__ = ["SweepRow", "theta_sweep", "b_sweep", "figure2_data", "write_sweep_csv", "read_sweep_csv",
           "reverify_csv", "write_bifurcation_csv", "capital_closed_form", "capital_root",
           "write_gnuplot_script", "DEFAULT_THETA_GRID"]
