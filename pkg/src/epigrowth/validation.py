"""Diagnostic report on the modelling assumptions.

Each assumption is checked either exactly (closed-form parameter
conditions) or by sampling the functional forms on a grid.  Nothing here
raises on a failed assumption: the report records a status and, for
failures, a witness point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forms import E_eval, E_second, Model, f_eval, g_eval, u_eval, u_second

PASS, FAIL, SAMPLED, NOTE = "pass", "fail", "sampled-pass", "note"


@dataclass
class Check:
    key: str  # e.g. "A2.2"
    status: str
    detail: str
    witness: object = None

    def line(self) -> str:
        w = f"  witness: {self.witness}" if self.witness is not None else ""
        return f"[{self.status:>12}] {self.key:<7} {self.detail}{w}"


@dataclass
class AssumptionReport:
    checks: list = field(default_factory=list)

    def add(self, key, status, detail, witness=None):
        self.checks.append(Check(key, status, detail, witness))

    def __getitem__(self, key) -> Check:
        for c in self.checks:
            if c.key == key:
                return c
        raise KeyError(key)

    def failures(self) -> list:
        return [c for c in self.checks if c.status == FAIL]

    def notes(self) -> list:
        return [c for c in self.checks if c.status == NOTE]

    def format(self) -> str:
        return "\n".join(c.line() for c in self.checks)


def _grid(n=7, hi=5.0):
    x = np.concatenate([[0.0], np.geomspace(1e-3, hi, n - 1)])
    A, e, h = np.meshgrid(x, x, x, indexing="ij")
    return A.ravel(), e.ravel(), h.ravel()


def _first(mask, *arrays):
    j = int(np.flatnonzero(mask)[0])
    return tuple(float(a[j]) for a in arrays)


def _sampled(report, key, ok, detail, witness_arrays):
    if np.all(ok):
        report.add(key, SAMPLED, detail)
    else:
        report.add(key, FAIL, detail, _first(~ok, *witness_arrays))


def validate_assumptions(model: Model, extras: dict | None = None, n_grid: int = 7) -> AssumptionReport:
    """Check the modelling assumptions for ``model``.

    ``extras`` holds listed-but-unused constants from a config file; each is
    reported as a note.
    """
    P = model.params
    rep = AssumptionReport()
    A, e, h = _grid(n_grid)
    eps = 1e-6

    # parameter-level invariants
    for name in ("delta_K", "delta_H", "delta_E"):
        v = getattr(P, name)
        rep.add(f"P.{name}", PASS if 0 < v < 1 else FAIL, f"{name} = {v} in (0, 1)")
    gfloor = model.gamma.gamma_floor
    rep.add("P.gamma", PASS if gfloor > 0 else FAIL,
            f"gamma1 - gamma0 = {gfloor:.6g} > 0", None if gfloor > 0 else (model.gamma.gamma0, model.gamma.gamma1))
    pr = model.production
    rep.add("P.g0", PASS if pr.psi3 == pr.psi4 else FAIL, f"psi3 = psi4 so that g(0) = 0 (g(0) = {g_eval(pr, 0.0).value:.3g})")

    # Assumption 1
    rep.add("A1", PASS if P.b >= P.mu else FAIL, f"b = {P.b} >= mu = {P.mu}",
            None if P.b >= P.mu else (P.b, P.mu))

    # Assumption 2: transmission
    be = model.beta
    bv = np.array([_rate(model, "beta", *x) for x in zip(A, e, h)])
    _sampled(rep, "A2.1", (bv[:, 0] > 0) & (bv[:, 0] <= 1), "beta maps into (0, 1]", (A, e, h))
    b0 = bv[0, 0]
    rep.add("A2.2", PASS if b0 == 1.0 else NOTE,
            f"beta(0,0,0) = {b0:.6g}; the normalisation beta(0,0,0) = 1 is not enforced "
            "(the calibration uses a small base rate)")
    _sampled(rep, "A2.3", np.all(bv[:, 1:] <= 0, axis=1), "beta partials <= 0", (A, e, h))
    sec = _second_diag(lambda a, ee, hh: _rate(model, "beta", a, ee, hh)[1:], A, e, h, eps)
    _sampled(rep, "A2.4", np.all(sec >= -1e-7, axis=1), "beta own second partials >= 0", (A, e, h))
    near = _rate(model, "beta", 1e-9, 1e-9, 1e-9)[0]
    rep.add("A2.5", PASS if abs(near - be.beta_bar) < 1e-6 else FAIL,
            f"beta -> beta_bar = {be.beta_bar:.6g} at the origin")

    # Assumption 3: recovery
    gv = np.array([_rate(model, "gamma", *x) for x in zip(A, e, h)])
    sup = model.gamma.gamma1
    ok = (gv[:, 0] >= 0) & (gv[:, 0] <= 1)
    if np.all(ok) and sup > 1:
        rep.add("A3.1", FAIL, f"gamma maps into [0, 1]: supremum gamma1 = {sup} exceeds 1", ("h", np.inf))
    else:
        _sampled(rep, "A3.1", ok, "gamma maps into [0, 1]", (A, e, h))
    _sampled(rep, "A3.2", np.all(gv[:, 1:] >= 0, axis=1), "gamma partials >= 0", (A, e, h))
    sec = _second_diag(lambda a, ee, hh: _rate(model, "gamma", a, ee, hh)[1:], A, e, h, eps)
    _sampled(rep, "A3.3", np.all(sec <= 1e-7, axis=1), "gamma own second partials <= 0", (A, e, h))
    rep.add("A3.4", PASS if gfloor == gv[0, 0] else FAIL, f"gamma -> gamma_floor = {gfloor:.6g} at the origin")

    # Assumption 4: goods production
    k = np.geomspace(1e-3, 1e3, 25)
    l = np.linspace(0.05, 1.0, 20)
    K, L = np.meshgrid(k, l, indexing="ij")
    F = f_eval(pr, K, L)
    _sampled(rep, "A4.2a", (F.f1 > 0) & (F.f2 > 0), "gradient of f positive", (K.ravel(), L.ravel()))
    det = F.f11 * F.f22 - F.f12**2
    rel = np.abs(det) / (np.abs(F.f11 * F.f22) + 1e-300)
    if np.all(F.f11 < 0) and np.all(det > 0):
        rep.add("A4.2b", SAMPLED, "Hessian of f negative definite")
    elif np.all(F.f11 < 0) and np.all(rel < 1e-10):
        rep.add("A4.2b", NOTE, "Hessian of f is negative semidefinite but singular "
                "(constant returns to scale); accepted")
    else:
        rep.add("A4.2b", FAIL, "Hessian of f not negative semidefinite")
    inada = f_eval(pr, 1e-12, 1.0).f1 > 1e6 and f_eval(pr, 1e12, 1.0).f1 < 1e-6
    rep.add("A4.3", PASS if inada else FAIL, "f1 -> inf as k -> 0 and f1 -> 0 as k -> inf; f(k,0) = f(0,l) = 0 (limits)")

    # Assumption 5: health production
    m = np.concatenate([[0.0], np.geomspace(1e-4, 1e3, 40)])
    G = g_eval(pr, m)
    g2 = (g_eval(pr, m + eps).d - g_eval(pr, m).d) / eps
    ok5 = (G.d > 0) & (g2 < 0)
    g_lim = g_eval(pr, 1e12).d
    if np.all(ok5) and np.isfinite(G.d[0]) and g_lim < 1e-4 and G.value[0] == 0.0:
        rep.add("A5", SAMPLED, f"g' > 0, g'' < 0, g'(0) = {G.d[0]:.6g} finite, g' -> 0, g(0) = 0")
    else:
        rep.add("A5", FAIL, "health production conditions", _first(~ok5, m) if not np.all(ok5) else None)

    # Assumption 6: utility
    c = np.geomspace(1e-6, 1e3, 40)
    U = u_eval(model.utility, c)
    ok6 = (U.d > 0) & (u_second(model.utility, c) < 0)
    _sampled(rep, "A6", ok6 & (u_eval(model.utility, 1e-8).d > 1e6), "u' > 0, u'' < 0, u'(c) -> inf as c -> 0", (c,))

    # Assumption 7
    rep.add("A7", NOTE, f"capital growth bounded below holds along any path with c + m + A <= f; "
            f"then dk/dt / k >= -(delta_K + b - mu) = {-P.capital_drag:.6g}")

    # Assumption 8: knowledge production
    kn = model.knowledge
    xs = np.geomspace(1e-3, 50.0, 15)
    AA, EE = np.meshgrid(xs, xs, indexing="ij")
    AA, EE = AA.ravel(), EE.ravel()
    rep.add("A8.1", NOTE, "investment is bounded through ControlPath.A_max; steady states stay finite")
    ax0 = max(abs(E_eval(kn, 3.0, 0.0).value), abs(E_eval(kn, 0.0, 5.0).value))
    rep.add("A8.3", PASS if ax0 == 0.0 else FAIL, "E(A, 0) = E(0, e) = 0 exactly")
    Ev = E_eval(kn, AA, EE)
    E11, E12, E22 = E_second(kn, AA, EE)
    _sampled(rep, "A8.4a", (Ev.dA > 0) & (Ev.de > 0) & (E11 < 0) & (E22 < 0),
             "E1, E2 > 0 and E11, E22 < 0 on the positive orthant", (AA, EE))
    _sampled(rep, "A8.4b", E11 * E22 - E12**2 > 0, "E11 E22 - E12^2 > 0", (AA, EE))
    lim = E_eval(kn, 1e6, 1.0).dA < 1e-8 and E_eval(kn, 1.0, 1e6).de < 1e-8
    rep.add("A8.5", PASS if lim else FAIL, "E1 -> 0 as A -> inf and E2 -> 0 as e -> inf")
    rep.add("A8.6-7", PASS, f"origin limits E1_bar = {kn.E1_bar}, E2_bar = {kn.E2_bar} are finite")

    # Assumption 9 (read as the maximum-sustainable-capital condition)
    drag = P.capital_drag
    rep.add("A9", PASS if drag > 0 else FAIL,
            f"maximum sustainable capital k_hat = l (1/{drag:.6g})^(1/(1-psi)) exists since delta_K + b - mu > 0")

    # Assumption 10: E2 never equals theta + delta_E
    target = P.theta + P.delta_E
    if kn.E2_sup < target:
        rep.add("A10", PASS, f"sup E2 = {kn.E2_sup:.6g} < theta + delta_E = {target:.6g}")
    else:
        d = Ev.de - target
        rep.add("A10", FAIL, f"E2 reaches theta + delta_E = {target:.6g} (sup E2 = {kn.E2_sup:.6g})",
                _first(d >= 0, AA, EE) if np.any(d >= 0) else None)

    # Assumption 11: l_theta decreasing in (A, e, h)
    _assumption11(rep, model)

    # shadow labour at the origin must not exceed 1
    from .planner import is_endemic, origin_labor

    if is_endemic(model):
        lv = origin_labor(model)
        rep.add("L.bar", PASS if 0 < lv <= 1 else FAIL, f"effective labour at the origin l_bar = {lv:.6g} in (0, 1]")
        alt = origin_labor(model, "no_b")
        if not 0 < alt <= 1:
            rep.add("L.alt", NOTE, f"alternative display without +b gives l_bar = {alt:.6g}, outside (0, 1]; rejected")

    for key, val in (extras or {}).items():
        rep.add(f"X.{key}", NOTE, f"constant {key} = {val!r} is listed but enters no formula")
    return rep


def _rate(model, which, A, e, h):
    r = model.rates(A, e, h)[0 if which == "beta" else 1]
    return np.array([r.value, r.dA, r.de, r.dh], dtype=float)


def _second_diag(partials, A, e, h, eps):
    """Own second partials by forward differences of the analytic first partials."""
    out = np.empty((A.size, 3))
    for n, (a, ee, hh) in enumerate(zip(A, e, h)):
        base = partials(a, ee, hh)
        out[n] = [
            (partials(a + eps, ee, hh)[0] - base[0]) / eps,
            (partials(a, ee + eps, hh)[1] - base[1]) / eps,
            (partials(a, ee, hh + eps)[2] - base[2]) / eps,
        ]
    return out


def _assumption11(rep, model, n=6):
    from .equilibria import NoEndemicState
    from .planner import default_statics_grid, l_theta

    from .planner import endemic_window, is_endemic

    where = ""
    if not is_endemic(model):
        lo, hi = endemic_window(model)
        if not lo < hi:
            rep.add("A11", NOTE, "no endemic birth-rate window; not applicable")
            return
        b_mid = 0.5 * (lo + hi)
        model = model.with_params(b=b_mid)
        where = f" (checked at b = {b_mid:.6g}, inside the endemic window)"
    try:
        Ag, eg, hg = default_statics_grid(model, n)
    except (NoEndemicState, ValueError):
        rep.add("A11", NOTE, "could not build an endemic grid; not applicable")
        return
    worst = {}
    weak = False
    step = 1e-7
    for a in Ag:
        for ee in eg:
            for hh in hg:
                for j in (1, 2, 3):
                    base = l_theta(j, a, ee, hh, model)
                    for axis, name in enumerate("Aeh"):
                        z = [a, ee, hh]
                        z[axis] += step
                        try:
                            d = (l_theta(j, *z, model) - base) / step
                        except NoEndemicState:
                            continue
                        if d == 0.0:
                            weak = True
                        elif d > 0 and d > worst.get((j, name), (0.0,))[0]:
                            worst[(j, name)] = (d, (float(a), float(ee), float(hh)))
    if worst:
        (j, name), (d, pt) = max(worst.items(), key=lambda kv: kv[1][0])
        rep.add("A11", FAIL, f"l_theta,{j} increases in {name} (slope {d:.3g}); "
                f"{len(worst)} (j, input) pairs violate strict decrease{where}", pt)
    elif weak:
        rep.add("A11", NOTE, "l_theta,j is nonincreasing on the sampled grid but constant in some inputs "
                f"(strict decrease fails where a rate does not depend on the input){where}")
    else:
        rep.add("A11", SAMPLED, f"l_theta,j strictly decreasing in A, e and h on the sampled grid{where}")
