import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import epigrowth.planner as pl
from epigrowth.dynamics import epi_rhs
from epigrowth.equilibria import endemic_eq, endemic_stability
from epigrowth.forms import ProductionSpec, capital_for_mpk, f_eval, g_eval, g_inverse

rate = st.floats(0.01, 2.0)
frac = st.floats(0.0, 0.95)


@settings(max_examples=200, deadline=None)
@given(beta=rate, gamma=rate, b=st.floats(0.001, 0.2), p=frac)
def test_endemic_state_is_rest_point_on_simplex(beta, gamma, b, p):
    assume((1 - p) * beta > (b + gamma) * (1 + 1e-6))
    stt = endemic_eq(beta, gamma, b, p)
    assert min(stt.s, stt.i, stt.r) >= -1e-15
    assert abs(stt.total - 1) <= 1e-14
    assert np.max(np.abs(epi_rhs(stt, beta, gamma, b, p))) <= 1e-12
    assert endemic_stability(beta, gamma, b, p).stable


@settings(max_examples=200, deadline=None)
@given(l=st.floats(0.05, 1.0), target=st.floats(0.01, 2.0))
def test_capital_target_is_exact(l, target):
    k = capital_for_mpk(ProductionSpec(), l, target)
    assert abs(f_eval(ProductionSpec(), k, l).f1 / target - 1) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(m=st.floats(0.0, 50.0))
def test_health_inverse(m):
    spec = ProductionSpec()
    assert abs(g_inverse(spec, g_eval(spec, m).value) - m) <= 1e-9 * max(1.0, m)


@settings(max_examples=30, deadline=None)
@given(b=st.floats(0.005, 0.0129), theta=st.floats(0.01, 0.3))
def test_classifier_returns_kkt_points(section6, b, theta):
    sols = pl.classify_steady_state(section6, b=b, theta=theta)
    assert len(sols) == 1
    (sol,) = sols
    assert pl.is_kkt_consistent(sol)
    assert sol.regime == pl.predicted_regime(section6, b, theta)
