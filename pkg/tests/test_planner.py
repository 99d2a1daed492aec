import dataclasses

import numpy as np
import pytest

import epigrowth.planner as pl
from epigrowth.dynamics import coupled_rhs
from epigrowth.forms import KnowledgeSpec, RecoverySpec, TransmissionSpec, g_eval
from epigrowth.states import PlannerState

# disease-free steady state of the preset at theta = 0.05, frozen from the
# bisection oracle below
K_DF = 2.8762461642045305
C_DF = 1.1048620265431004


def bisect(fun, lo, hi, n=200):
    flo = fun(lo)
    for _ in range(n):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def df_oracle(model):
    """Disease-free steady state from first principles: f_k(k, 1) = theta + delta_K + b - mu."""
    P, psi = model.params, model.production.psi
    target = P.theta + P.delta_K + P.b - P.mu
    k = bisect(lambda k: psi * k ** (psi - 1) - target, 1e-6, 1e3)
    return k, k**psi - (P.delta_K + P.b - P.mu) * k


@pytest.fixture(scope="module")
def product_model(section6):
    """Every rate depends on all three inputs, so no shadow-labour coefficient vanishes."""
    return dataclasses.replace(
        section6,
        beta=TransmissionSpec("product", 0.5, 0.0, 1.0),
        gamma=RecoverySpec("product", 1.0, 1.05, 1.0),
        knowledge=KnowledgeSpec(1.0, 0.5, 0.1),
    ).with_params(b=0.02)


# --- disease-free ------------------------------------------------------------------


def test_disease_free_matches_bisection(section6):
    sol = pl.solve_disease_free_ss(section6, theta=0.05)
    k, c = df_oracle(section6.with_params(theta=0.05))
    assert sol.regime == "DiseaseFree"
    assert sol.state.k == pytest.approx(k, rel=1e-12)
    assert sol.controls.c == pytest.approx(c, rel=1e-12)
    assert sol.state.k == pytest.approx(K_DF, rel=1e-12)
    assert sol.controls.c == pytest.approx(C_DF, rel=1e-12)
    assert sol.state.k == pytest.approx(2.8765, rel=1e-4)
    assert sol.controls.c == pytest.approx(1.1049, rel=1e-4)
    assert sol.residual_norm <= 1e-12
    assert sol.checks["transversality"]


def test_disease_free_capital_decreases_with_theta(section6):
    ks = [pl.solve_disease_free_ss(section6, theta=t).state.k for t in (0.01, 0.05, 0.1, 0.2)]
    assert np.all(np.diff(ks) < 0)


def test_foc_residual_detects_perturbation(section6):
    sol = pl.solve_disease_free_ss(section6)
    bumped = pl.Controls(sol.controls.c * (1 + 1e-3), 0.0, 0.0)
    res = pl.foc_residuals(section6, sol.state, bumped, sol.costates, sol.multipliers)
    u2 = 1 / sol.controls.c**2
    # first-order change of u'(c) - lambda1
    assert abs(res.foc[0]) == pytest.approx(u2 * sol.controls.c * 1e-3, rel=2e-3)
    assert res.vector.size == 12 and res.state.size == 5
    assert set(res.labelled()) >= {"dL/dc", "i*nu1", "k_dot"}


# --- shadow-labour coefficients ----------------------------------------------------


def l_theta_matrix_oracle(model, j, A, e, h):
    """Solve the (lambda3, lambda4) block of the co-state system directly."""
    P = model.params
    x = P.theta + P.b
    beta, gamma = model.rates(A, e, h)
    bt, gm = beta.value, gamma.value
    s = (gm + P.b) / bt
    i = (1 - P.p) * P.b / (gm + P.b) - P.b / bt
    M = np.array([[x + bt * i, -bt * i], [bt * s, x + gm - bt * s]])
    lam3, lam4 = np.linalg.solve(M, [0.0, -1.0])  # per unit of u' f_2
    bj = (beta.dA, beta.de, beta.dh)[j - 1]
    gj = (gamma.dA, gamma.de, gamma.dh)[j - 1]
    # shadow labour value of input j
    return -(lam3 * bj * s * i - lam4 * (bj * s * i - gj * i))


@pytest.mark.parametrize("j", [1, 2, 3])
def test_l_theta_matches_matrix_solve(product_model, j, rng):
    pts = [x for x in rng.uniform(0.0, 1.0, size=(200, 3)) if pl.is_endemic(product_model, *x)]
    assert len(pts) >= 50
    for A, e, h in pts:
        assert pl.l_theta(j, A, e, h, product_model) == pytest.approx(
            l_theta_matrix_oracle(product_model, j, A, e, h), rel=1e-10, abs=1e-15)


def test_l_theta_structural_zeros(section6):
    assert pl.l_theta(1, 0, 0, 0, section6, b=0.008) == 0.0
    assert pl.l_theta(2, 0, 0, 0, section6, b=0.008) == 0.0
    assert pl.l_theta(3, 0, 0, 0, section6, b=0.008) > 0
    with pytest.raises(ValueError):
        pl.l_theta(4, 0, 0, 0, section6, b=0.008)
    with pytest.raises(pl.NoEndemicState):
        pl.l_theta(3, 0, 0, 0, section6)  # the preset birth rate is disease-free


def test_origin_labor_variants(section6):
    m = section6.with_params(b=0.008)
    assert pl.origin_labor(m) == pytest.approx(pl.epi_point(m, 0, 0, 0).l, rel=1e-14)
    assert pl.origin_labor(m, "no_b") != pl.origin_labor(m)


# --- co-states -----------------------------------------------------------------------


def random_endemic_solutions(model, rng, n):
    out = []
    while len(out) < n:
        A, e, h = rng.uniform(0.0, 1.0, 3)
        if not pl.is_endemic(model, A, e, h):
            continue
        m = pl._health_from_spending_target(model, h)
        try:
            out.append(pl._endemic_solution("probe", model, A, e, h, m, enforce_kkt=False))
        except pl.RegimeUnavailable:
            continue
    return out


def test_costates_dual_path(product_model, rng):
    for sol in random_endemic_solutions(product_model, rng, 100):
        rep = pl.costates_and_multipliers(product_model, sol.state, sol.controls)
        assert rep.det_residual <= 1e-10
        assert rep.closed_form_gap <= 1e-10
        lhs = rep.matrix @ np.r_[rep.costates.as_array()[1:], rep.multipliers.nu2, rep.multipliers.nu3]
        _, rhs = pl.costate_matrix(product_model, sol.state, sol.controls)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-14)


def test_costates_zero_the_stationarity_conditions(product_model, rng):
    for sol in random_endemic_solutions(product_model, rng, 10):
        rep = pl.costates_and_multipliers(product_model, sol.state, sol.controls)
        res = pl.foc_residuals(product_model, sol.state, sol.controls, rep.costates, rep.multipliers)
        # only the capital Euler equation involves k, and it holds by construction
        assert np.max(np.abs(res.foc)) <= 1e-10


# --- regimes and thresholds ------------------------------------------------------------


def assert_kkt(model, sol):
    res = pl.foc_residuals(model, sol.state, sol.controls, sol.costates, sol.multipliers)
    assert np.max(np.abs(res.foc)) <= 1e-8
    assert np.max(np.abs(res.slackness)) <= 1e-10
    assert np.all(sol.multipliers.as_array() >= -1e-12)
    assert np.max(np.abs(coupled_rhs(sol.state, sol.controls.as_tuple(), model))) <= 1e-10
    assert not res.sign_violations


def test_no_invest_above_threshold(section6):
    m = section6.with_params(b=0.008)
    th = pl.theta_thresholds(m)
    sol = pl.solve_endemic_no_invest(m, theta=th.theta_max + 0.05)
    assert sol.controls.m == 0 and sol.controls.A == 0
    assert_kkt(m.with_params(theta=th.theta_max + 0.05), sol)
    with pytest.raises(pl.RegimeUnavailable):
        pl.solve_endemic_no_invest(m, theta=0.05)


def test_m_only_below_threshold(section6):
    m = section6.with_params(b=0.008, theta=0.05)
    sols = pl.solve_endemic_m_only(m)
    assert [s.regime for s in sols] == ["EndemicMOnly"]
    assert sols[0].controls.m > 0 and sols[0].controls.A == 0
    assert_kkt(m, sols[0])
    # the health condition binds: the solved multiplier is zero up to round-off
    assert sols[0].multipliers.nu2 == 0.0
    assert abs(sols[0].checks["nu2_solved"]) <= 1e-10


def test_thresholds_section6(section6):
    th = pl.theta_thresholds(section6, b=0.008)
    assert th.theta1 == pytest.approx(0.129, abs=1e-3)
    assert th.degenerate2 and th.theta2 == pytest.approx(-0.05)
    assert th.positive_roots[0] == 1
    r1, _ = pl.threshold_residuals(section6.with_params(b=0.008), th.theta1)
    assert abs(r1) < 1e-12
    assert th.a_only_window() is None
    assert th.m_only_window() == (0.0, th.theta1)


def test_thresholds_outside_window(section6):
    with pytest.raises(pl.RegimeUnavailable):
        pl.theta_thresholds(section6)  # preset b is disease-free


def test_threshold_vector_matches_scalar(section6):
    m = section6.with_params(b=0.01)
    grid = np.linspace(0.01, 0.3, 7)
    r1, r2 = pl.threshold_residuals(m, grid)
    for t, a, b in zip(grid, r1, r2):
        s1, s2 = pl.threshold_residuals(m, t)
        assert a == pytest.approx(float(s1), rel=1e-14) and b == pytest.approx(float(s2), rel=1e-14)


def test_classifier_regimes_section6(section6):
    (df,) = pl.classify_steady_state(section6)
    assert df.regime == "DiseaseFree" and df.predicted
    (lo,) = pl.classify_steady_state(section6, b=0.008, theta=0.05)
    assert lo.regime == "EndemicMOnly" and lo.predicted and lo.unique
    (hi,) = pl.classify_steady_state(section6, b=0.008, theta=0.2)
    assert hi.regime == "EndemicNoInvest" and hi.predicted


def test_learning_preset_has_coexisting_regimes(learning):
    sols = pl.classify_steady_state(learning, theta=0.08)
    regimes = {s.regime for s in sols}
    assert {"EndemicMOnly", "EndemicAOnly", "EndemicBoth"} <= regimes
    assert not any(s.unique for s in sols)
    for s in sols:
        assert_kkt(learning.with_params(theta=0.08), s)
        if s.regime in ("EndemicAOnly", "EndemicBoth"):
            assert s.controls.A > 0 and s.state.e > 0


def test_knowledge_investment_inverts_E(learning):
    from epigrowth.forms import E_eval

    e = 0.5 * pl.sustainable_knowledge_limit(learning)
    A = pl.knowledge_investment(learning, e)
    assert E_eval(learning.knowledge, A, e).value == pytest.approx(learning.params.delta_E * e, rel=1e-12)
    assert pl.sustainable_knowledge_limit(dataclasses.replace(learning, knowledge=KnowledgeSpec())) == 0.0


def test_damped_newton_solves_small_system():
    fun = lambda x: np.array([x[0] ** 2 + x[1] ** 2 - 4, x[0] - x[1]])
    x, norm, ok = pl.damped_newton(fun, [1.0, 0.5])
    assert ok and np.allclose(x, [np.sqrt(2), np.sqrt(2)])


def test_comparative_statics(section6):
    rep = pl.comparative_statics_check(section6, b=0.008)
    assert rep.all_pass and rep.grid_shape == (5, 5, 5)
    assert rep.f1_spread <= 1e-10


def test_constant_rates_give_degenerate_statics(section6):
    flat = dataclasses.replace(section6, beta=TransmissionSpec("health", 0.023, 0.023, 0.0),
                               gamma=RecoverySpec("health", 1.0, 1.01, 0.0))
    m = flat.with_params(b=0.008)
    assert pl.l_theta(3, 0, 0, 0, m) == 0.0
    rep = pl.comparative_statics_check(m)
    assert rep.labor_increasing and rep.capital_increasing and rep.f1_constant
    (sol,) = pl.classify_steady_state(m)
    assert sol.regime == "EndemicNoInvest"


def test_steady_state_csv_round_trip(tmp_path, section6):
    sols = pl.classify_steady_state(section6, b=0.008, theta=0.05)
    path = tmp_path / "ss.csv"
    pl.write_steady_state_csv(sols, path)
    (row,) = pl.read_steady_state_csv(path)
    assert row["regime"] == "EndemicMOnly"
    assert pl.residuals_from_row(section6, row).max_norm <= 1e-8
    text = pl.summary_text(section6, 0.008, 0.05, sols)
    assert "predicted regime: EndemicMOnly" in text
