"""Right-hand sides and time integration.

Three systems are covered: raw head counts (S, I, R, V, N), population
fractions (s, i, r, v), and the five-state planner system (k, h, s, i, e)
driven by caller-supplied control paths.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .forms import DomainError, E_eval, Model, f_eval, g_eval
from .states import EpiState, PlannerState, RawState


class IntegrationError(RuntimeError):
    """The integrator gave up; ``t`` and ``y`` hold the last good state."""

    def __init__(self, msg, t=None, y=None):
        super().__init__(msg)
        self.t = t
        self.y = y


class InvariantViolation(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------


def epi_rhs(state, beta, gamma, b, p) -> np.ndarray:
    """Time derivatives of the fractions (s, i, r, v)."""
    s, i, r, v = state.as_array() if isinstance(state, EpiState) else state
    inf = beta * s * i
    return np.array([
        (1 - p) * b - b * s - inf,
        inf - (gamma + b) * i,
        gamma * i - b * r,
        p * b - b * v,
    ])


def raw_rhs(state, beta, gamma, b, mu, p) -> np.ndarray:
    """Time derivatives of the head counts (S, I, R, V, N)."""
    S, I, R, V, N = state.as_array() if isinstance(state, RawState) else state
    if N <= 0:
        raise DomainError(f"population N must be > 0, got {N}")
    inf = beta * S * I / N
    return np.array([
        (1 - p) * b * N - mu * S - inf,
        inf - (gamma + mu) * I,
        gamma * I - mu * R,
        p * b * N - mu * V,
        (b - mu) * N,
    ])


@dataclass(frozen=True)
class ControlPath:
    """Consumption, health expenditure and control investment as functions of time."""

    c: Callable[[float], float]
    m: Callable[[float], float]
    A: Callable[[float], float]
    A_max: float = np.inf

    @classmethod
    def constant(cls, c, m=0.0, A=0.0, A_max=np.inf) -> "ControlPath":
        return cls(lambda t: c, lambda t: m, lambda t: A, A_max)

    def __call__(self, t):
        c, m, A = float(self.c(t)), float(self.m(t)), float(self.A(t))
        if c <= 0 or m < 0 or A < 0 or A > self.A_max:
            raise DomainError(f"inadmissible controls at t={t}: c={c}, m={m}, A={A}")
        return c, m, A


def coupled_rhs(state, controls, model: Model) -> np.ndarray:
    """Derivatives of (k, h, s, i, e) for given control values ``(c, m, A)``."""
    k, h, s, i, e = state.as_array() if isinstance(state, PlannerState) else state
    if k <= 0:
        raise DomainError(f"capital must stay positive, got k={k}")
    c, m, A = controls
    P = model.params
    # tiny negative undershoot from the integrator is clipped for evaluation only
    h_, e_, i_ = max(h, 0.0), max(e, 0.0), min(max(i, 0.0), 1.0)
    beta, gamma = model.rates(A, e_, h_)
    y = f_eval(model.production, k, 1.0 - i_).value
    return np.array([
        y - m - A - c - P.capital_drag * k,
        g_eval(model.production, m).value - P.health_drag * h,
        (1 - P.p) * P.b - P.b * s - beta.value * s * i,
        beta.value * s * i - (gamma.value + P.b) * i,
        E_eval(model.knowledge, A, e_).value - P.delta_E * e,
    ])


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), dim)
    names: tuple
    meta: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)  # additional named columns, e.g. controls

    def __getitem__(self, name) -> np.ndarray:
        if name in self.extra:
            return self.extra[name]
        return self.y[:, self.names.index(name)]

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]

    def columns(self) -> tuple:
        return ("t",) + tuple(self.names) + tuple(self.extra)

    def to_csv(self, path) -> None:
        cols = [self.t] + [self.y[:, j] for j in range(self.y.shape[1])] + list(self.extra.values())
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns())
            for row in zip(*cols):
                w.writerow([f"{x:.17g}" for x in row])


def _check_nonneg(y, tol, names):
    floor = -10 * tol
    bad = y < floor
    if np.any(bad):
        r, c = np.argwhere(bad)[0]
        raise InvariantViolation(f"{names[c]} fell to {y[r, c]:.3e} (< {floor:.1e}) at sample {r}")
    return np.where(y < 0, 0.0, y)


def integrate(rhs, y0, t_span, tol=1e-8, t_eval=None, *, method="RK45", names=None,
              nonnegative=False, step=None) -> Trajectory:
    """Integrate ``y' = rhs(t, y)``.

    The default is an adaptive embedded Runge-Kutta 4(5) pair with relative
    and absolute local error tolerance ``tol`` and dense output at ``t_eval``.
    ``method="rk4"`` switches to classical fixed-step RK4 with step ``step``
    (useful when output must not depend on step-size control).

    With ``nonnegative=True``, samples undershooting zero by at most
    ``10 * tol`` are clamped to zero; larger violations raise
    :class:`InvariantViolation`.
    """
    if not 1e-12 <= tol <= 1e-3:
        raise ValueError(f"tol must lie in [1e-12, 1e-3], got {tol}")
    y0 = np.asarray(y0, dtype=float)
    names = tuple(names) if names else tuple(f"y{j}" for j in range(y0.size))
    t0, t1 = map(float, t_span)
    if t_eval is None:
        t_eval = np.linspace(t0, t1, 201)
    t_eval = np.asarray(t_eval, dtype=float)
    if np.any(np.diff(t_eval) <= 0):
        raise ValueError("t_eval must be strictly increasing")

    if method == "rk4":
        if step is None:
            step = (t1 - t0) / 1000
        t, y, nsteps = _rk4(rhs, y0, t0, t1, step, t_eval)
        meta = {"integrator": "rk4", "step": step, "nsteps": nsteps}
    else:
        try:
            sol = solve_ivp(rhs, (t0, t1), y0, method=method, rtol=tol, atol=tol,
                            t_eval=t_eval, dense_output=False)
        except DomainError as exc:
            raise IntegrationError(f"right-hand side left its domain: {exc}") from exc
        if sol.status != 0:
            last_t = sol.t[-1] if sol.t.size else t0
            last_y = sol.y[:, -1] if sol.t.size else y0
            raise IntegrationError(f"integration failed: {sol.message}", last_t, last_y)
        t, y = sol.t, sol.y.T
        meta = {"integrator": method, "tol": tol, "nfev": sol.nfev}
    if nonnegative:
        y = _check_nonneg(y, tol, names)
    return Trajectory(t=t, y=y, names=names, meta=meta)


def _rk4(rhs, y0, t0, t1, step, t_eval):
    """Classical RK4 on a uniform grid with cubic Hermite sampling at t_eval."""
    n = max(1, int(np.ceil((t1 - t0) / step - 1e-12)))
    h = (t1 - t0) / n
    ts = t0 + h * np.arange(n + 1)
    ys = np.empty((n + 1, y0.size))
    fs = np.empty_like(ys)
    ys[0] = y0
    fs[0] = rhs(ts[0], y0)
    for j in range(n):
        t, y, k1 = ts[j], ys[j], fs[j]
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        ys[j + 1] = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        fs[j + 1] = rhs(ts[j + 1], ys[j + 1])
    idx = np.clip(np.searchsorted(ts, t_eval, side="right") - 1, 0, n - 1)
    u = ((t_eval - ts[idx]) / h)[:, None]
    y0_, y1_, f0, f1 = ys[idx], ys[idx + 1], fs[idx], fs[idx + 1]
    out = ((2 * u**3 - 3 * u**2 + 1) * y0_ + (u**3 - 2 * u**2 + u) * h * f0
           + (-2 * u**3 + 3 * u**2) * y1_ + (u**3 - u**2) * h * f1)
    return t_eval, out, n


# ---------------------------------------------------------------------------
# Convenience drivers
# ---------------------------------------------------------------------------

EPI_NAMES = ("s", "i", "r", "v")
RAW_NAMES = ("S", "I", "R", "V", "N")
PLANNER_NAMES = ("k", "h", "s", "i", "e")


def simulate_epi(y0, beta, gamma, b, p, t_span=(0.0, 200.0), tol=1e-8, t_eval=None, **kw) -> Trajectory:
    """Fraction dynamics with constant rates."""
    y0 = y0.as_array() if isinstance(y0, EpiState) else y0
    return integrate(lambda t, y: epi_rhs(y, beta, gamma, b, p), y0, t_span, tol, t_eval,
                     names=EPI_NAMES, nonnegative=True, **kw)


def simulate_raw(y0, beta, gamma, b, mu, p, t_span=(0.0, 100.0), tol=1e-8, t_eval=None, **kw) -> Trajectory:
    y0 = y0.as_array() if isinstance(y0, RawState) else y0
    return integrate(lambda t, y: raw_rhs(y, beta, gamma, b, mu, p), y0, t_span, tol, t_eval,
                     names=RAW_NAMES, nonnegative=True, **kw)


def simulate_planner(model: Model, y0, controls: ControlPath, t_span=(0.0, 100.0), tol=1e-8,
                     t_eval=None, **kw) -> Trajectory:
    """Five-state planner system under a given control path.

    The returned trajectory carries the control values ``c, m, A`` as extra
    columns at each sample.
    """
    y0 = y0.as_array() if isinstance(y0, PlannerState) else np.asarray(y0, dtype=float)
    traj = integrate(lambda t, y: coupled_rhs(y, controls(t), model), y0, t_span, tol, t_eval,
                     names=PLANNER_NAMES, **kw)
    ctrl = np.array([controls(t) for t in traj.t]).reshape(-1, 3)
    traj.extra = {"c": ctrl[:, 0], "m": ctrl[:, 1], "A": ctrl[:, 2]}
    return traj


def check_raw_fraction_consistency(raw0, beta, gamma, b, mu, p, horizon=100.0, tol=1e-10,
                                   n_samples=201) -> float:
    """Largest gap between integrated head-count ratios and integrated fractions."""
    raw0 = raw0 if isinstance(raw0, RawState) else RawState(*raw0)
    t_eval = np.linspace(0.0, horizon, n_samples)
    raw = simulate_raw(raw0, beta, gamma, b, mu, p, (0.0, horizon), tol, t_eval)
    frac = simulate_epi(raw0.fractions(), beta, gamma, b, p, (0.0, horizon), tol, t_eval)
    ratios = raw.y[:, :4] / raw.y[:, 4:5]
    return float(np.max(np.abs(ratios - frac.y)))
