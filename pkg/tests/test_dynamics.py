import numpy as np
import pytest

from epigrowth.dynamics import (
    ControlPath,
    IntegrationError,
    InvariantViolation,
    check_raw_fraction_consistency,
    coupled_rhs,
    epi_rhs,
    integrate,
    raw_rhs,
    simulate_epi,
    simulate_planner,
)
from epigrowth.forms import DomainError
from epigrowth.planner import solve_disease_free_ss
from epigrowth.states import RawState


def test_fraction_rhs_sums_to_zero_on_simplex():
    y = np.array([0.4, 0.1, 0.2, 0.3])
    assert abs(epi_rhs(y, 0.5, 0.1, 0.02, 0.3).sum()) < 1e-16


def test_raw_rhs_population_growth():
    d = raw_rhs(RawState(60, 10, 10, 20, 100), 0.5, 0.1, 0.03, 0.01, 0.2)
    assert d[4] == pytest.approx(2.0)
    assert d[:4].sum() == pytest.approx(d[4])
    with pytest.raises(DomainError):
        raw_rhs([1, 0, 0, 0, 0], 0.5, 0.1, 0.03, 0.01, 0.2)


def test_epidemic_converges_to_endemic_state():
    from epigrowth.equilibria import endemic_eq

    traj = simulate_epi([0.79, 0.01, 0.0, 0.2], 0.5, 0.1, 0.02, 0.2, (0, 2000), 1e-10,
                        np.linspace(0, 2000, 11))
    assert np.allclose(traj.final, endemic_eq(0.5, 0.1, 0.02, 0.2).as_array(), atol=1e-6)


def test_rk4_fourth_order():
    # halving the step cuts the error by about 2^4 on y' = -y
    errs = []
    for step in (0.1, 0.05):
        tr = integrate(lambda t, y: -y, [1.0], (0, 2), t_eval=[2.0], method="rk4", step=step)
        errs.append(abs(tr.final[0] - np.exp(-2)))
    assert 14 < errs[0] / errs[1] < 18


def test_raw_and_fraction_agree():
    gap = check_raw_fraction_consistency(RawState(790, 10, 0, 200, 1000), 0.5, 0.1, 0.02, 0.01, 0.2)
    assert gap < 1e-7


def test_nonnegativity_guard():
    with pytest.raises(InvariantViolation):
        integrate(lambda t, y: -np.ones(1), [0.5], (0, 1), names=("x",), nonnegative=True)
    with pytest.raises(ValueError):
        integrate(lambda t, y: y, [1.0], (0, 1), tol=1e-20)


def test_integration_error_reports_last_state(section6):
    df = solve_disease_free_ss(section6)
    # consuming all output drives capital to zero in finite time
    ctrl = ControlPath.constant(5.0)
    with pytest.raises(IntegrationError):
        simulate_planner(section6, [df.state.k, 0, 0.5, 0.0, 0], ctrl, (0, 100))


def test_planner_steady_state_is_a_rest_point(section6):
    df = solve_disease_free_ss(section6)
    rhs = coupled_rhs(df.state, df.controls.as_tuple(), section6)
    assert np.max(np.abs(rhs)) < 1e-12


def test_planner_trajectory_carries_controls(section6):
    df = solve_disease_free_ss(section6)
    ctrl = ControlPath.constant(0.95 * df.controls.c, 0.1, 0.0)
    tr = simulate_planner(section6, [df.state.k, 0, 0.49, 0.01, 0], ctrl, (0, 20), t_eval=np.linspace(0, 20, 5))
    assert tr.columns() == ("t", "k", "h", "s", "i", "e", "c", "m", "A")
    assert np.all(tr["m"] == 0.1)
    assert np.all(tr["h"][1:] > 0)


def test_control_path_rejects_inadmissible():
    with pytest.raises(DomainError):
        ControlPath.constant(0.0)(0.0)
    with pytest.raises(DomainError):
        ControlPath.constant(1.0, A=2.0, A_max=1.0)(0.0)
