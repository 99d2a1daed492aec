"""Social planner steady states.

The planner's current-value Lagrangian yields first-order conditions in the
controls (c, m, A), co-state equations for (k, h, s, i, e) and complementary
slackness on the nonnegativity constraints.  At a steady state every co-state
derivative vanishes, which turns the conditions into an algebraic system.
This module solves that system regime by regime:

* ``DiseaseFree``      i = 0, no health spending, no control investment
* ``EndemicNoInvest``  i > 0, m = A = 0
* ``EndemicMOnly``     i > 0, m > 0, A = 0
* ``EndemicAOnly``     i > 0, m = 0, A > 0
* ``EndemicBoth``      i > 0, m > 0, A > 0

and provides the residual map used to certify any candidate point.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.stats import qmc

from .dynamics import coupled_rhs
from .equilibria import NoEndemicState
from .forms import (
    E_eval,
    Model,
    capital_for_mpk,
    f_eval,
    g_eval,
    g_inverse,
    u_eval,
)
from .states import PlannerState

REGIMES = ("DiseaseFree", "EndemicNoInvest", "EndemicMOnly", "EndemicAOnly", "EndemicBoth")

FOC_TOL = 1e-8
NEWTON_TOL = 1e-12
MULTIPLIER_FLOOR = -1e-12
SLACKNESS_TOL = 1e-10
DET_FLOOR = 1e-14


class RegimeUnavailable(ValueError):
    """No KKT-consistent steady state exists in the requested regime."""


class SolverError(RuntimeError):
    """A root finder failed; ``best`` holds the best residual reached."""

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class SingularSystem(ValueError):
    """The linear co-state system is (numerically) singular."""


class NoRoot(ValueError):
    pass


# ---------------------------------------------------------------------------
# Containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Controls:
    c: float
    m: float
    A: float

    def as_tuple(self):
        return (self.c, self.m, self.A)


@dataclass(frozen=True)
class CoStates:
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    lambda5: float

    def as_array(self):
        return np.array(dataclasses.astuple(self))


@dataclass(frozen=True)
class Multipliers:
    nu1: float
    nu2: float
    nu3: float
    nu4: float

    def as_array(self):
        return np.array(dataclasses.astuple(self))


@dataclass
class SteadyStateSolution:
    regime: str
    b: float
    theta: float
    state: PlannerState
    controls: Controls
    costates: CoStates
    multipliers: Multipliers
    residual_norm: float
    unique: bool = True
    predicted: bool = False
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def l(self) -> float:
        return self.state.l

    def output(self, model: Model) -> float:
        return float(f_eval(model.production, self.state.k, self.state.l).value)

    def row(self) -> dict:
        st, ct, lam, nu = self.state, self.controls, self.costates, self.multipliers
        out = {"regime": self.regime, "b": self.b, "theta": self.theta,
               "k": st.k, "h": st.h, "s": st.s, "i": st.i, "e": st.e, "l": st.l,
               "c": ct.c, "m": ct.m, "A": ct.A}
        out.update({f"lambda{j}": v for j, v in enumerate(lam.as_array(), 1)})
        out.update({f"nu{j}": v for j, v in enumerate(nu.as_array(), 1)})
        out["residual"] = self.residual_norm
        return out


@dataclass(frozen=True)
class ThetaThresholds:
    theta1: float
    theta2: float
    roots1: int
    roots2: int
    degenerate1: bool = False
    degenerate2: bool = False
    domain: tuple = (float("nan"), float("nan"))
    positive_roots: tuple = (0, 0)

    @property
    def theta_max(self) -> float:
        return max(_finite_or(self.theta1), _finite_or(self.theta2), 0.0)

    @property
    def theta_min(self) -> float:
        return min(self.theta1, self.theta2)

    def a_only_window(self):
        """Interval of theta where the A-only regime is predicted, or None."""
        if self.theta2 > 0 and self.theta2 >= _finite_or(self.theta1):
            lo = max(0.0, _finite_or(self.theta1))
            if lo < self.theta2:
                return (lo, self.theta2)
        return None

    def m_only_window(self):
        if self.theta1 > 0 and self.theta1 >= _finite_or(self.theta2):
            lo = max(0.0, _finite_or(self.theta2))
            if lo < self.theta1:
                return (lo, self.theta1)
        return None


def _finite_or(x, default=-math.inf):
    return x if np.isfinite(x) else default


# ---------------------------------------------------------------------------
# Pointwise building blocks
# ---------------------------------------------------------------------------


def _at(model: Model, b=None, theta=None) -> Model:
    changes = {}
    if b is not None and b != model.params.b:
        changes["b"] = b
    if theta is not None and theta != model.params.theta:
        changes["theta"] = theta
    return model.with_params(**changes) if changes else model


def is_endemic(model: Model, A=0.0, e=0.0, h=0.0) -> bool:
    beta, gamma = model.rates(A, e, h)
    return (1 - model.params.p) * beta.value > model.params.b + gamma.value


def endemic_window(model: Model) -> tuple:
    """Birth rates ``[mu, (1-p) beta_bar - gamma_floor)`` giving an endemic origin."""
    P = model.params
    return (P.mu, (1 - P.p) * model.beta.beta_bar - model.gamma.gamma_floor)


@dataclass(frozen=True)
class EpiPoint:
    """Endemic epidemic quantities at given (A, e, h)."""

    beta: object
    gamma: object
    s: float
    i: float

    @property
    def l(self):
        return 1.0 - self.i


def epi_point(model: Model, A, e, h) -> EpiPoint:
    P = model.params
    beta, gamma = model.rates(A, e, h)
    if (1 - P.p) * beta.value <= P.b + gamma.value:
        raise NoEndemicState(f"no endemic state at (A, e, h) = ({A}, {e}, {h})")
    s = (gamma.value + P.b) / beta.value
    i = (1 - P.p) * P.b / (gamma.value + P.b) - P.b / beta.value
    return EpiPoint(beta, gamma, float(s), float(i))


def _l_theta_parts(j, pt: EpiPoint, theta, b):
    beta, gamma, s, i = pt.beta.value, pt.gamma.value, pt.s, pt.i
    bj = (pt.beta.dA, pt.beta.de, pt.beta.dh)[j - 1]
    gj = (pt.gamma.dA, pt.gamma.de, pt.gamma.dh)[j - 1]
    x = theta + b
    num = i * (gj * beta * i - (bj * s - gj) * x)
    den = (x + gamma) * (x + beta * i) - beta * s * x
    return float(num), float(den)


def l_theta(j: int, A, e, h, model: Model, theta=None, b=None) -> float:
    """Shadow-labour coefficient of input j (1 = A, 2 = e, 3 = h).

    Raises:
        NoEndemicState: if the epidemic has no endemic state at (A, e, h).
        SingularSystem: if the denominator vanishes.
    """
    if j not in (1, 2, 3):
        raise ValueError("j must be 1, 2 or 3")
    model = _at(model, b, theta)
    pt = epi_point(model, A, e, h)
    num, den = _l_theta_parts(j, pt, model.params.theta, model.params.b)
    if num == 0.0:
        return 0.0
    if abs(den) < DET_FLOOR:
        raise SingularSystem(f"l_theta denominator {den:.3e} vanishes")
    return num / den


def origin_labor(model: Model, variant: str = "eq6") -> float:
    """Effective labour at A = e = h = 0.

    ``variant="no_b"`` reproduces the alternative display that omits ``b``
    from the first denominator; it is kept for comparison only.
    """
    P = model.params
    bb, gg = model.beta.beta_bar, model.gamma.gamma_floor
    if variant == "eq6":
        return 1.0 - ((1 - P.p) * P.b / (gg + P.b) - P.b / bb)
    if variant == "no_b":
        return 1.0 - ((1 - P.p) * P.b / gg - P.b / bb)
    raise ValueError(variant)


def _mpk_target(model: Model) -> float:
    P = model.params
    return P.theta + P.capital_drag


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------


FOC_LABELS = ("dL/dc", "dL/dm", "dL/dA", "lambda1_dot", "lambda2_dot", "lambda3_dot",
              "lambda4_dot", "lambda5_dot")
SLACK_LABELS = ("i*nu1", "m*nu2", "A*nu3", "s*nu4")
STATE_LABELS = ("k_dot", "h_dot", "s_dot", "i_dot", "e_dot")


@dataclass
class FOCResiduals:
    foc: np.ndarray  # 8 stationarity conditions
    slackness: np.ndarray  # 4 complementarity products
    state: np.ndarray  # 5 state derivatives
    sign_violations: list

    @property
    def vector(self) -> np.ndarray:
        """The 12 optimality residuals (stationarity plus complementarity)."""
        return np.concatenate([self.foc, self.slackness])

    @property
    def max_norm(self) -> float:
        return float(np.max(np.abs(np.concatenate([self.foc, self.slackness, self.state]))))

    def labelled(self) -> dict:
        vals = np.concatenate([self.foc, self.slackness, self.state])
        return dict(zip(FOC_LABELS + SLACK_LABELS + STATE_LABELS, vals))


def foc_residuals(model: Model, state: PlannerState, controls: Controls, costates: CoStates,
                  multipliers: Multipliers) -> FOCResiduals:
    """Evaluate every steady-state optimality condition at a candidate point."""
    P = model.params
    k, h, s, i, e = state.as_array()
    c, m, A = controls.as_tuple()
    l1, l2, l3, l4, l5 = costates.as_array()
    n1, n2, n3, n4 = multipliers.as_array()
    th, b = P.theta, P.b
    beta, gamma = model.rates(A, e, h)
    bt, gm = beta.value, gamma.value
    f = f_eval(model.production, k, 1.0 - i)
    g = g_eval(model.production, m)
    E = E_eval(model.knowledge, A, e)
    up = u_eval(model.utility, c).d
    si = s * i
    foc = np.array([
        up - l1,
        -l1 + l2 * g.d + n2,
        -l1 - l3 * beta.dA * si + l4 * (beta.dA * si - gamma.dA * i) + l5 * E.dA + n3,
        l1 * (th + P.capital_drag - f.f1),
        l2 * (th + P.health_drag) + l3 * beta.dh * si - l4 * (beta.dh * si - gamma.dh * i),
        l3 * (th + b + bt * i) - l4 * bt * i - n4,
        l1 * f.f2 + l3 * bt * s + l4 * (th + b + gm - bt * s) - n1,
        l3 * beta.de * si - l4 * (beta.de * si - gamma.de * i) + l5 * (th + P.delta_E - E.de),
    ], dtype=float)
    slack = np.array([i * n1, m * n2, A * n3, s * n4], dtype=float)
    rhs = coupled_rhs(state.as_array(), (c, m, A), model)
    viol = [f"nu{j}" for j, v in enumerate((n1, n2, n3, n4), 1) if v < MULTIPLIER_FLOOR]
    viol += [name for name, v in (("m", m), ("A", A), ("h", h), ("e", e), ("s", s), ("i", i)) if v < 0]
    return FOCResiduals(foc, slack, np.asarray(rhs, dtype=float), viol)


# ---------------------------------------------------------------------------
# Co-states and multipliers at endemic steady states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoStateReport:
    costates: CoStates
    multipliers: Multipliers
    det_residual: float
    closed_form_gap: float
    nu_closed: tuple
    matrix: np.ndarray


def costate_matrix(model: Model, state: PlannerState, controls: Controls):
    """Assemble the 6x6 system for (lambda2..lambda5, nu2, nu3) and its right side."""
    P = model.params
    th, b = P.theta, P.b
    _, h, s, i, e = state.as_array()
    c, m, A = controls.as_tuple()
    beta, gamma = model.rates(A, e, h)
    bt, gm = beta.value, gamma.value
    f = f_eval(model.production, state.k, 1.0 - i)
    up = u_eval(model.utility, c).d
    E = E_eval(model.knowledge, A, e)
    si = s * i
    M = np.zeros((6, 6))
    M[0, 0] = g_eval(model.production, m).d
    M[0, 4] = 1.0
    M[1, 1] = -beta.dA * si
    M[1, 2] = beta.dA * si - gamma.dA * i
    M[1, 3] = E.dA
    M[1, 5] = 1.0
    M[2, 0] = th + b + P.delta_H - P.mu
    M[2, 1] = beta.dh * si
    M[2, 2] = -(beta.dh * si - gamma.dh * i)
    M[3, 1] = th + b + bt * i
    M[3, 2] = -bt * i
    M[4, 1] = bt * s
    M[4, 2] = th + b + gm - bt * s
    M[5, 1] = beta.de * si
    M[5, 2] = -(beta.de * si - gamma.de * i)
    M[5, 3] = th + P.delta_E - E.de
    rhs = np.array([up, up, 0.0, 0.0, -up * f.f2, 0.0])
    return M, rhs


def costates_and_multipliers(model: Model, state: PlannerState, controls: Controls) -> CoStateReport:
    """Solve the linear co-state system and cross-check the closed-form multipliers.

    ``closed_form_gap`` is the larger of the two multiplier discrepancies,
    each scaled by ``max(|closed form|, u'(c))``.
    """
    M, rhs = costate_matrix(model, state, controls)
    det = np.linalg.det(M)
    factored = M[2, 0] * M[5, 3] * (M[3, 1] * M[4, 2] - M[3, 2] * M[4, 1])
    if abs(det) < DET_FLOOR or abs(factored) < DET_FLOOR:
        raise SingularSystem(f"co-state system determinant {det:.3e} is singular")
    sol = np.linalg.solve(M, rhs)
    lam2, lam3, lam4, lam5, nu2, nu3 = sol
    up = rhs[0]

    P = model.params
    _, h, s, i, e = state.as_array()
    c, m, A = controls.as_tuple()
    f2 = f_eval(model.production, state.k, 1.0 - i).f2
    gp = g_eval(model.production, m).d
    E = E_eval(model.knowledge, A, e)
    pt = epi_point(model, A, e, h)
    ls = []
    for j in (1, 2, 3):
        num, den = _l_theta_parts(j, pt, P.theta, P.b)
        ls.append(0.0 if num == 0.0 else num / den)
    nu2_cf = up - up * ls[2] / (P.theta + P.health_drag) * f2 * gp
    nu3_cf = up - up * ls[0] * f2 - up * ls[1] * f2 * E.dA / (P.theta + P.delta_E - E.de)
    gap = max(abs(nu2 - nu2_cf) / max(abs(nu2_cf), up), abs(nu3 - nu3_cf) / max(abs(nu3_cf), up))
    return CoStateReport(
        costates=CoStates(up, lam2, lam3, lam4, lam5),
        multipliers=Multipliers(0.0, nu2, nu3, 0.0),
        det_residual=abs(det - factored) / abs(factored),
        closed_form_gap=float(gap),
        nu_closed=(nu2_cf, nu3_cf),
        matrix=M,
    )


# ---------------------------------------------------------------------------
# Disease-free steady state
# ---------------------------------------------------------------------------


def _bracket_root(fun, lo, hi, grow=2.0, max_iter=200):
    flo, fhi = fun(lo), fun(hi)
    it = 0
    while np.sign(flo) == np.sign(fhi):
        hi *= grow
        fhi = fun(hi)
        it += 1
        if it > max_iter:
            raise SolverError("could not bracket root")
    return lo, hi


def solve_disease_free_ss(model: Model, b=None, theta=None) -> SteadyStateSolution:
    model = _at(model, b, theta)
    P = model.params
    target = _mpk_target(model)
    fun = lambda k: f_eval(model.production, k, 1.0).f1 - target
    lo, hi = _bracket_root(fun, 1e-12, 1.0)
    k = brentq(fun, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    f = f_eval(model.production, k, 1.0)
    c = float(f.value - P.capital_drag * k)
    if c <= 0:
        raise SolverError(f"nonpositive consumption {c} at the disease-free steady state")
    up = float(u_eval(model.utility, c).d)
    bb, gg = model.beta.beta_bar, model.gamma.gamma_floor
    den = P.theta + P.b + gg - bb * (1 - P.p)
    if abs(den) > DET_FLOOR:
        lam4, nu1 = -up * f.f2 / den, 0.0
    else:
        lam4, nu1 = 0.0, up * f.f2
    state = PlannerState(k=float(k), h=0.0, s=1.0 - P.p, i=0.0, e=0.0)
    controls = Controls(c, 0.0, 0.0)
    costates = CoStates(up, 0.0, 0.0, float(lam4), 0.0)
    mult = Multipliers(float(nu1), up, up, 0.0)
    return _finish("DiseaseFree", model, state, controls, costates, mult)


def _finish(regime, model, state, controls, costates, mult, checks=None, notes=None):
    res = foc_residuals(model, state, controls, costates, mult)
    checks = dict(checks or {})
    checks["transversality"] = model.params.theta > 0 and bool(
        np.all(np.isfinite(np.concatenate([state.as_array(), costates.as_array()]))))
    checks["sign_violations"] = res.sign_violations
    return SteadyStateSolution(
        regime=regime, b=model.params.b, theta=model.params.theta, state=state,
        controls=controls, costates=costates, multipliers=mult,
        residual_norm=res.max_norm, checks=checks, notes=list(notes or []),
    )


# ---------------------------------------------------------------------------
# Endemic steady states
# ---------------------------------------------------------------------------


def _endemic_solution(regime, model, A, e, h, m, enforce_kkt=True):
    """Build and certify the endemic steady state at given (A, e, h, m)."""
    P = model.params
    pt = epi_point(model, A, e, h)
    l = pt.l
    k = float(capital_for_mpk(model.production, l, _mpk_target(model)))
    f = f_eval(model.production, k, l)
    c = float(f.value - m - A - P.capital_drag * k)
    if c <= 0:
        raise RegimeUnavailable(f"{regime}: consumption {c:.3e} is not positive")
    state = PlannerState(k=k, h=float(h), s=pt.s, i=pt.i, e=float(e))
    controls = Controls(c, float(m), float(A))
    rep = costates_and_multipliers(model, state, controls)
    nu = rep.multipliers
    # a positive control has a zero multiplier; the solved value is round-off
    # and reappears as the stationarity residual of that control
    checks = {"nu2_solved": nu.nu2, "nu3_solved": nu.nu3}
    nu = Multipliers(nu.nu1, 0.0 if m > 0 else nu.nu2, 0.0 if A > 0 else nu.nu3, nu.nu4)
    checks.update({
        "ineq_health": nu.nu2 >= MULTIPLIER_FLOOR,
        "ineq_control": nu.nu3 >= MULTIPLIER_FLOOR,
        "det_residual": rep.det_residual,
        "closed_form_gap": rep.closed_form_gap,
        "l_below_one": l < 1.0,
    })
    if enforce_kkt and not (checks["ineq_health"] and checks["ineq_control"]):
        raise RegimeUnavailable(
            f"{regime}: multiplier sign condition fails (nu2={nu.nu2:.3e}, nu3={nu.nu3:.3e})")
    return _finish(regime, model, state, controls, rep.costates, nu, checks)


def _require_endemic_origin(model, regime):
    P = model.params
    if P.b < P.mu:
        raise RegimeUnavailable(f"{regime}: birth rate b={P.b} is below mu={P.mu}")
    if not is_endemic(model):
        lo, hi = endemic_window(model)
        raise RegimeUnavailable(f"{regime}: b={P.b} outside endemic window [{lo:.6g}, {hi:.6g})")


def solve_endemic_no_invest(model: Model, b=None, theta=None, enforce_kkt=True) -> SteadyStateSolution:
    """Endemic steady state with m = h = A = e = 0.

    The KKT inequalities for health spending and control investment are
    checked directly; they hold exactly when theta exceeds the larger
    threshold.  ``enforce_kkt=False`` returns the point regardless (used
    when controls are pinned at zero).
    """
    model = _at(model, b, theta)
    _require_endemic_origin(model, "EndemicNoInvest")
    return _endemic_solution("EndemicNoInvest", model, 0.0, 0.0, 0.0, 0.0, enforce_kkt)


# --- scalar pieces -----------------------------------------------------------


def _health_from_spending_target(model, h):
    return float(g_inverse(model.production, model.params.health_drag * h))


def _h_endemic_limit(model, A=0.0, e=0.0, cap=1e3):
    """Largest h keeping (A, e, h) endemic (``cap`` if the condition never binds)."""
    if not is_endemic(model, A, e, 0.0):
        return 0.0
    if is_endemic(model, A, e, cap):
        return cap
    return brentq(lambda h: _endemic_margin(model, A, e, h), 0.0, cap, xtol=1e-15, rtol=1e-14)


def _endemic_margin(model, A, e, h):
    beta, gamma = model.rates(A, e, h)
    P = model.params
    return (1 - P.p) * beta.value - P.b - gamma.value


def _health_condition(model, A, e, h):
    """(theta + b + delta_H - mu) - l_3 f_2 g'(m) with m sustaining h."""
    P = model.params
    pt = epi_point(model, A, e, h)
    k = capital_for_mpk(model.production, pt.l, _mpk_target(model))
    f2 = f_eval(model.production, k, pt.l).f2
    m = _health_from_spending_target(model, h)
    num, den = _l_theta_parts(3, pt, P.theta, P.b)
    l3 = 0.0 if num == 0.0 else num / den
    return (P.theta + P.health_drag) - l3 * f2 * g_eval(model.production, m).d


def _control_condition(model, A, e, h):
    """(theta + delta_E - E_2)(1 - l_1 f_2) - l_2 f_2 E_1."""
    P = model.params
    pt = epi_point(model, A, e, h)
    k = capital_for_mpk(model.production, pt.l, _mpk_target(model))
    f2 = f_eval(model.production, k, pt.l).f2
    E = E_eval(model.knowledge, A, e)
    parts = [_l_theta_parts(j, pt, P.theta, P.b) for j in (1, 2)]
    l1, l2 = (0.0 if n == 0.0 else n / d for n, d in parts)
    return (P.theta + P.delta_E - E.de) * (1 - l1 * f2) - l2 * f2 * E.dA


def knowledge_investment(model: Model, e: float) -> float:
    """Investment A sustaining knowledge stock e, i.e. E(A, e) = delta_E e.

    Raises:
        RegimeUnavailable: if no finite A sustains ``e``.
    """
    dE = model.params.delta_E
    fun = lambda A: E_eval(model.knowledge, A, e).value - dE * e
    hi = 1.0
    while fun(hi) < 0:
        hi *= 2
        if hi > 1e8:
            raise RegimeUnavailable(f"knowledge stock e={e} is not sustainable")
    return brentq(fun, 0.0, hi, xtol=1e-15, rtol=1e-14, maxiter=500)


def sustainable_knowledge_limit(model: Model, cap=1e4) -> float:
    """Supremum of sustainable knowledge stocks (0 when only e = 0 is sustainable)."""
    dE = model.params.delta_E
    big = 1e8
    sup = lambda e: E_eval(model.knowledge, big, e).value - dE * e
    de0 = E_eval(model.knowledge, big, 0.0).de
    if de0 <= dE:
        return 0.0
    hi = 1.0
    while sup(hi) > 0:
        hi *= 2
        if hi > cap:
            return cap
    return brentq(sup, 1e-12, hi, xtol=1e-14, rtol=1e-14)


def _scan_roots(fun, grid):
    """Brent roots at every sign change of ``fun`` along ``grid``."""
    vals = []
    for x in grid:
        try:
            vals.append(fun(x))
        except (NoEndemicState, SingularSystem, RegimeUnavailable, ValueError):
            vals.append(np.nan)
    vals = np.asarray(vals, dtype=float)
    roots = []
    for j in range(len(grid) - 1):
        a, b = vals[j], vals[j + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            roots.append(float(grid[j]))
        elif a * b < 0:
            roots.append(brentq(fun, grid[j], grid[j + 1], xtol=1e-15, rtol=1e-15, maxiter=500))
    if len(grid) and np.isfinite(vals[-1]) and vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots, vals


def _open_grid(lo, hi, n):
    """Grid strictly inside (lo, hi), dense near lo on a log scale."""
    span = hi - lo
    return lo + span * np.unique(np.concatenate([
        np.geomspace(1e-9, 1e-2, n // 3), np.linspace(1e-2, 1 - 1e-9, n - n // 3)]))


def solve_endemic_m_only(model: Model, b=None, theta=None, n_scan=600) -> list:
    """Endemic steady states with positive health spending and no control investment.

    All roots found along a scan of the health stock are returned.
    """
    model = _at(model, b, theta)
    _require_endemic_origin(model, "EndemicMOnly")
    h_hi = _h_endemic_limit(model)
    fun = lambda h: _health_condition(model, 0.0, 0.0, h)
    roots, _ = _scan_roots(fun, _open_grid(0.0, h_hi, n_scan))
    sols, reasons = [], []
    for h in roots:
        if h <= 0:
            continue
        m = _health_from_spending_target(model, h)
        try:
            sols.append(_endemic_solution("EndemicMOnly", model, 0.0, 0.0, h, m))
        except RegimeUnavailable as exc:
            reasons.append(str(exc))
    if not sols:
        raise RegimeUnavailable("EndemicMOnly: no root of the health condition" +
                                (f" ({'; '.join(reasons)})" if reasons else ""))
    return _mark_unique(sols)


def solve_endemic_A_only(model: Model, b=None, theta=None, n_scan=600) -> list:
    """Endemic steady states with positive control investment and no health spending."""
    model = _at(model, b, theta)
    _require_endemic_origin(model, "EndemicAOnly")
    e_hi = sustainable_knowledge_limit(model)
    if e_hi <= 0:
        raise RegimeUnavailable("EndemicAOnly: no positive knowledge stock is sustainable")

    def fun(e):
        A = knowledge_investment(model, e)
        return _control_condition(model, A, e, 0.0)

    roots, _ = _scan_roots(fun, _open_grid(0.0, e_hi, n_scan))
    sols, reasons = [], []
    for e in roots:
        if e <= 0:
            continue
        try:
            A = knowledge_investment(model, e)
            if A <= 0:
                continue
            sols.append(_endemic_solution("EndemicAOnly", model, A, e, 0.0, 0.0))
        except (RegimeUnavailable, NoEndemicState) as exc:
            reasons.append(str(exc))
    if not sols:
        raise RegimeUnavailable("EndemicAOnly: no root of the control condition" +
                                (f" ({'; '.join(reasons)})" if reasons else ""))
    return _mark_unique(sols)


def damped_newton(fun, x0, tol=NEWTON_TOL, max_iter=100, fd_step=1e-7, inside=None):
    """Damped Newton iteration with a forward-difference Jacobian.

    ``inside(x)`` restricts trial points to the admissible domain.  Returns
    ``(x, max_abs_residual, converged)``.
    """
    x = np.asarray(x0, dtype=float)
    r = np.asarray(fun(x), dtype=float)
    norm = np.max(np.abs(r))
    for _ in range(max_iter):
        if norm <= tol:
            return x, norm, True
        J = np.empty((r.size, x.size))
        for j in range(x.size):
            dx = fd_step * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += dx
            if inside is not None and not inside(xp):
                xp[j] = x[j] - dx
                dx = -dx
            J[:, j] = (np.asarray(fun(xp)) - r) / dx
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
        t = 1.0
        while t > 1e-10:
            xn = x + t * step
            if inside is None or inside(xn):
                try:
                    rn = np.asarray(fun(xn), dtype=float)
                except (NoEndemicState, SingularSystem, RegimeUnavailable, ValueError):
                    rn = None
                if rn is not None and np.all(np.isfinite(rn)) and np.max(np.abs(rn)) < norm:
                    break
            t *= 0.5
        else:
            return x, norm, False
        x, r, norm = xn, rn, np.max(np.abs(rn))
    return x, norm, norm <= tol


def _interior_seeds(model, e_box, n_e, n_h):
    """Starting points where the control condition changes sign along a branch
    of zeros of the health condition, traced over a coarse knowledge grid."""
    branches = []
    for e in _open_grid(0.0, e_box, n_e):
        try:
            A = knowledge_investment(model, e)
            h_lim = _h_endemic_limit(model, A, e)
            if h_lim <= 0:
                branches.append((e, []))
                continue
            hs, _ = _scan_roots(lambda h: _health_condition(model, A, e, h), _open_grid(0.0, h_lim, n_h))
            branches.append((e, [(h, _control_condition(model, A, e, h)) for h in hs if h > 0]))
        except (NoEndemicState, SingularSystem, RegimeUnavailable, ValueError):
            branches.append((e, []))
    seeds = []
    for (e0, r0), (e1, r1) in zip(branches, branches[1:]):
        if len(r0) != len(r1):
            continue
        for (h0, c0), (h1, c1) in zip(r0, r1):
            if c0 == 0.0 or c0 * c1 < 0:
                w = c0 / (c0 - c1) if c0 != c1 else 0.0
                seeds.append(np.array([h0 + w * (h1 - h0), e0 + w * (e1 - e0)]))
    return seeds


def solve_endemic_both(model: Model, b=None, theta=None, n_starts=10, seed=0,
                       n_e=60, n_h=80) -> list:
    """Interior endemic steady states (m > 0 and A > 0).

    The unknowns reduce to (h, e): m sustains h, A sustains e, and k follows
    from the marginal-product condition.  The two remaining optimality
    equalities are solved by damped Newton, started from Latin-hypercube
    points and from sign changes found by tracing the health condition's
    zero set over a coarse knowledge grid.
    """
    model = _at(model, b, theta)
    _require_endemic_origin(model, "EndemicBoth")
    e_hi = sustainable_knowledge_limit(model)
    h_hi = _h_endemic_limit(model)
    if e_hi <= 0 or h_hi <= 0:
        raise RegimeUnavailable("EndemicBoth: no interior (h, e) region")

    def inside(x):
        h, e = x
        return 0 < h < h_hi and 0 < e < e_hi and is_endemic(model, knowledge_investment(model, e), e, h)

    def fun(x):
        h, e = x
        A = knowledge_investment(model, e)
        return np.array([_health_condition(model, A, e, h), _control_condition(model, A, e, h)])

    seeds = qmc.LatinHypercube(d=2, seed=seed).random(n_starts)
    h_box = min(h_hi, 50.0)
    e_box = min(e_hi, 50.0)
    starts = [np.clip(np.array([u[0] * h_box, u[1] * e_box]),
                      [1e-9 * h_box, 1e-9 * e_box], [h_box * (1 - 1e-9), e_box * (1 - 1e-9)])
              for u in seeds]
    starts += _interior_seeds(model, e_box, n_e, n_h)
    found, best = [], np.inf
    for x0 in starts:
        try:
            if not inside(x0):
                continue
            x, norm, ok = damped_newton(fun, x0, inside=inside)
        except (NoEndemicState, SingularSystem, RegimeUnavailable, ValueError):
            continue
        best = min(best, norm)
        if ok and not any(np.allclose(x, y, rtol=1e-7, atol=1e-12) for y in found):
            found.append(x)
    sols, reasons = [], []
    for h, e in found:
        A = knowledge_investment(model, e)
        m = _health_from_spending_target(model, h)
        if A <= 0 or m <= 0:
            continue
        try:
            sols.append(_endemic_solution("EndemicBoth", model, A, e, h, m))
        except (RegimeUnavailable, NoEndemicState) as exc:
            reasons.append(str(exc))
    if not sols:
        raise RegimeUnavailable(f"EndemicBoth: no interior solution (best residual {best:.3e})")
    return _mark_unique(sols)


def _mark_unique(sols):
    for s in sols:
        s.unique = len(sols) == 1
    return sols


# ---------------------------------------------------------------------------
# Discount-rate thresholds
# ---------------------------------------------------------------------------


def _origin_terms(model):
    """Quantities at A = e = h = 0 that do not depend on theta."""
    pt = epi_point(model, 0.0, 0.0, 0.0)
    E = E_eval(model.knowledge, 0.0, 0.0)
    gp0 = g_eval(model.production, 0.0).d
    return pt, E, gp0


def _f2_origin(model, theta, l):
    P = model.params
    k = capital_for_mpk(model.production, l, theta + P.capital_drag)
    return f_eval(model.production, k, l).f2


def _rate_partials_vanish(pt: EpiPoint, j) -> bool:
    """True when l_theta,j is identically zero in theta (beta_j = gamma_j = 0)."""
    bj = (pt.beta.dA, pt.beta.de, pt.beta.dh)[j - 1]
    gj = (pt.gamma.dA, pt.gamma.de, pt.gamma.dh)[j - 1]
    return bj == 0.0 and gj == 0.0


def _threshold_structure(model):
    pt, E, gp0 = _origin_terms(model)
    live1 = not _rate_partials_vanish(pt, 3) and gp0 != 0.0
    live2 = not _rate_partials_vanish(pt, 1) or (not _rate_partials_vanish(pt, 2) and E.dA != 0.0)
    return pt, E, gp0, live1, live2


def threshold_residuals(model: Model, theta):
    """Residuals (health equation, control equation) defining the thresholds at ``theta``.

    ``theta`` may be an array.  Terms whose coefficient vanishes identically
    are dropped, so a residual that is linear in theta stays finite everywhere.
    The control equation is used in its undivided form
    ``(theta + delta_E - E2)(1 - l_1 f_2) - l_2 f_2 E1``.
    """
    P = model.params
    theta = np.asarray(theta, dtype=float)
    pt, E, gp0, live1, live2 = _threshold_structure(model)
    lhs1 = theta + P.health_drag
    lin2 = theta + P.delta_E - E.de
    if not (live1 or live2):
        return lhs1, lin2
    f2 = _f2_origin(model, theta, pt.l)
    coef = {}
    for j in (1, 2, 3):
        if _rate_partials_vanish(pt, j):
            coef[j] = 0.0
        else:
            num, den = _l_theta_parts_array(j, pt, theta, P.b)
            coef[j] = num / den * f2
    r1 = lhs1 - coef[3] * gp0
    r2 = lin2 * (1 - coef[1]) - (coef[2] * E.dA if E.dA != 0.0 else 0.0)
    return r1, r2


def _l_theta_parts_array(j, pt, theta, b):
    beta, gamma, s, i = pt.beta.value, pt.gamma.value, pt.s, pt.i
    bj = (pt.beta.dA, pt.beta.de, pt.beta.dh)[j - 1]
    gj = (pt.gamma.dA, pt.gamma.de, pt.gamma.dh)[j - 1]
    x = theta + b
    return i * (gj * beta * i - (bj * s - gj) * x), (x + gamma) * (x + beta * i) - beta * s * x


def _threshold_domain(model, theta_hi):
    """Theta interval on which the l_theta coefficients and f_2 at the origin are finite.

    The denominator of l_theta is ``x^2 + (beta i - b) x + gamma beta i`` in
    ``x = theta + b``; the interval starts right of its largest real zero and
    right of ``theta = -(delta_K + b - mu)`` where the capital target vanishes.
    """
    P = model.params
    lo = -P.capital_drag
    pt = epi_point(model, 0.0, 0.0, 0.0)
    bi, gg = pt.beta.value * pt.i, pt.gamma.value
    disc = (bi - P.b) ** 2 - 4 * gg * bi
    if disc >= 0:
        x_root = (-(bi - P.b) + math.sqrt(disc)) / 2
        lo = max(lo, x_root - P.b)
    span = theta_hi - lo
    return lo + 1e-9 * span, theta_hi


def _grid_roots(fun_vec, fun_scalar, grid):
    vals = fun_vec(grid)
    roots = []
    for j in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        roots.append(brentq(fun_scalar, grid[j], grid[j + 1], xtol=1e-15, rtol=1e-15, maxiter=500))
    roots += [float(x) for x in grid[vals == 0.0]]
    return sorted(roots)


def theta_thresholds(model: Model, b=None, theta_hi=5.0, n_grid=10_000) -> ThetaThresholds:
    """Discount-rate thresholds for health spending (theta1) and control investment (theta2).

    Each defining equation is scanned on ``n_grid`` points over the interval
    where it is finite and every sign change is refined by Brent's method.
    All roots are counted (``roots1``, ``roots2``); when there are several,
    the threshold is the largest one, since the regime above it is what the
    threshold separates.  An equation whose theta-dependent coefficients vanish
    identically is linear and solved in closed form (flagged ``degenerate``).

    Raises:
        RegimeUnavailable: if ``b`` lies outside the endemic window.
    """
    model = _at(model, b)
    P = model.params
    _require_endemic_origin(model, "thresholds")
    pt, E, gp0, live1, live2 = _threshold_structure(model)
    out = []
    for idx, live in ((0, live1), (1, live2)):
        if not live:
            root = -P.health_drag if idx == 0 else E.de - P.delta_E
            out.append((root, 1, True, (-math.inf, math.inf), 1 if root > 0 else 0))
            continue
        lo, hi = _threshold_domain(model, theta_hi)
        grid = np.linspace(lo, hi, n_grid)
        fv = lambda th, idx=idx: threshold_residuals(model, th)[idx]
        fs = lambda th, idx=idx: float(threshold_residuals(model, th)[idx])
        roots = _grid_roots(fv, fs, grid)
        root = max(roots) if roots else math.nan
        out.append((root, len(roots), False, (lo, hi), sum(r > 0 for r in roots)))
    (t1, n1, d1, dom1, p1), (t2, n2, d2, dom2, p2) = out
    return ThetaThresholds(theta1=float(t1), theta2=float(t2), roots1=n1, roots2=n2,
                           degenerate1=d1, degenerate2=d2, domain=(dom1, dom2),
                           positive_roots=(p1, p2))


# ---------------------------------------------------------------------------
# Regime dispatcher
# ---------------------------------------------------------------------------


def predicted_regime(model: Model, b=None, theta=None) -> str:
    """Regime implied by the threshold theorems for (b, theta)."""
    model = _at(model, b, theta)
    if not is_endemic(model):
        return "DiseaseFree"
    th = theta_thresholds(model)
    t = model.params.theta
    if t > th.theta_max:
        return "EndemicNoInvest"
    w = th.a_only_window()
    if w and w[0] < t < w[1]:
        return "EndemicAOnly"
    w = th.m_only_window()
    if w and w[0] < t < w[1]:
        return "EndemicMOnly"
    return "EndemicBoth"


def classify_steady_state(model: Model, b=None, theta=None, seed=0) -> list:
    """Every KKT-consistent steady state found at (b, theta).

    When the epidemic cannot be endemic anywhere (the largest attainable
    vaccination-adjusted reproduction number is at most one), only the
    disease-free state is returned; otherwise all endemic regimes are tried.
    """
    model = _at(model, b, theta)
    if not is_endemic(model):
        sol = solve_disease_free_ss(model)
        sol.predicted = True
        return [sol]
    pred = predicted_regime(model)
    sols = []
    solvers = (solve_endemic_no_invest, solve_endemic_m_only, solve_endemic_A_only,
               lambda mdl: solve_endemic_both(mdl, seed=seed))
    for solver in solvers:
        try:
            got = solver(model)
        except (RegimeUnavailable, SolverError, SingularSystem, NoEndemicState):
            continue
        sols.extend(got if isinstance(got, list) else [got])
    sols = [s for s in sols if is_kkt_consistent(s)]
    for s in sols:
        s.unique = len(sols) == 1
        s.predicted = s.regime == pred
    return sols


def is_kkt_consistent(sol: SteadyStateSolution) -> bool:
    nu = sol.multipliers.as_array()
    return (sol.residual_norm <= FOC_TOL and bool(np.all(nu >= MULTIPLIER_FLOOR))
            and not sol.checks.get("sign_violations"))


# ---------------------------------------------------------------------------
# Comparative statics
# ---------------------------------------------------------------------------


@dataclass
class StaticsReport:
    gprime_decreasing_in_h: bool
    labor_increasing: bool
    capital_increasing: bool
    f2_decreasing: bool
    f1_constant: bool
    f1_spread: float
    grid_shape: tuple

    @property
    def all_pass(self) -> bool:
        return all((self.gprime_decreasing_in_h, self.labor_increasing, self.capital_increasing,
                    self.f2_decreasing, self.f1_constant))


def default_statics_grid(model: Model, n=5, cap=2.0):
    """An (A, e, h) grid on which the epidemic stays endemic everywhere."""
    limits = []
    for axis in range(3):
        def margin(x, axis=axis):
            z = [0.0, 0.0, 0.0]
            z[axis] = x
            return _endemic_margin(model, *z)
        if margin(cap) > 0:
            limits.append(cap)
        else:
            limits.append(0.9 * brentq(margin, 0.0, cap, xtol=1e-15))
    scale = 1.0
    while _endemic_margin(model, *(scale * np.array(limits))) <= 0:
        scale *= 0.8
    return tuple(np.linspace(0.0, scale * lim, n) for lim in limits)


def comparative_statics_check(model: Model, A_values=None, e_values=None, h_values=None,
                              b=None, theta=None, f1_tol=1e-10) -> StaticsReport:
    """Monotonicity of endemic steady-state quantities across an (A, e, h) grid."""
    model = _at(model, b, theta)
    if A_values is None:
        A_values, e_values, h_values = default_statics_grid(model)
    A_values, e_values, h_values = (np.asarray(v, dtype=float) for v in (A_values, e_values, h_values))
    shape = (A_values.size, e_values.size, h_values.size)
    L, K, F1, F2 = (np.empty(shape) for _ in range(4))
    target = _mpk_target(model)
    for a, A in enumerate(A_values):
        for j, e in enumerate(e_values):
            for q, h in enumerate(h_values):
                pt = epi_point(model, A, e, h)
                k = capital_for_mpk(model.production, pt.l, target)
                f = f_eval(model.production, k, pt.l)
                L[a, j, q], K[a, j, q], F1[a, j, q], F2[a, j, q] = pt.l, k, f.f1, f.f2
    gp = np.array([g_eval(model.production, _health_from_spending_target(model, h)).d for h in h_values])

    def mono(arr, sign):
        ok = True
        for ax in range(3):
            d = np.diff(arr, axis=ax) * sign
            scale = np.max(np.abs(arr))
            ok &= bool(np.all(d >= -1e-12 * scale))
        return ok

    spread = float(np.max(np.abs(F1 - target)))
    return StaticsReport(
        gprime_decreasing_in_h=bool(np.all(np.diff(gp) < 0)) if gp.size > 1 else True,
        labor_increasing=mono(L, 1),
        capital_increasing=mono(K, 1),
        f2_decreasing=mono(F2, -1),
        f1_constant=spread <= f1_tol * max(1.0, target),
        f1_spread=spread,
        grid_shape=shape,
    )


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

REPORT_COLUMNS = ("regime", "b", "theta", "k", "h", "s", "i", "e", "l", "c", "m", "A",
                  "lambda1", "lambda2", "lambda3", "lambda4", "lambda5",
                  "nu1", "nu2", "nu3", "nu4", "residual")


def write_steady_state_csv(solutions, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for sol in solutions:
            row = sol.row()
            w.writerow([row[c] if c == "regime" else f"{row[c]:.17g}" for c in REPORT_COLUMNS])


def read_steady_state_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (v if k == "regime" else float(v)) for k, v in r.items()} for r in rows]


def residuals_from_row(model: Model, row: dict) -> FOCResiduals:
    """Recompute the optimality residuals for a row of a steady-state table."""
    model = _at(model, row["b"], row["theta"])
    state = PlannerState(row["k"], row["h"], row["s"], row["i"], row["e"])
    controls = Controls(row["c"], row["m"], row["A"])
    lam = CoStates(*(row[f"lambda{j}"] for j in range(1, 6)))
    nu = Multipliers(*(row[f"nu{j}"] for j in range(1, 5)))
    return foc_residuals(model, state, controls, lam, nu)


def summary_text(model: Model, b, theta, solutions) -> str:
    """Human-readable account of which theorem hypotheses held at (b, theta)."""
    model = _at(model, b, theta)
    P = model.params
    lines = [f"b = {P.b:.6g}, theta = {P.theta:.6g}"]
    lo, hi = endemic_window(model)
    endemic = is_endemic(model)
    lines.append(f"endemic window for b: [{lo:.6g}, {hi:.6g}) -> "
                 f"{'endemic origin' if endemic else 'disease-free only'}")
    if endemic:
        th = theta_thresholds(model)
        lines.append(f"theta1 = {th.theta1:.6g} ({th.roots1} root(s){', degenerate' if th.degenerate1 else ''})")
        lines.append(f"theta2 = {th.theta2:.6g} ({th.roots2} root(s){', degenerate' if th.degenerate2 else ''})")
        lines.append(f"theta_max = {th.theta_max:.6g}; theta > theta_max: {P.theta > th.theta_max}")
        lines.append(f"A-only window: {th.a_only_window()}; m-only window: {th.m_only_window()}")
        lines.append(f"predicted regime: {predicted_regime(model)}")
    for s in solutions:
        lines.append(f"  {s.regime}: k={s.state.k:.6g} c={s.controls.c:.6g} m={s.controls.m:.6g} "
                     f"A={s.controls.A:.6g} i={s.state.i:.6g} residual={s.residual_norm:.2e}"
                     f"{' (predicted)' if s.predicted else ''}")
    if not solutions:
        lines.append("  no KKT-consistent steady state found")
    return "\n".join(lines)
