import numpy as np
import pytest

from epigrowth.dynamics import epi_rhs
from epigrowth.equilibria import (
    NoEndemicState,
    bifurcation_scan,
    df_stability,
    disease_free_eq,
    endemic_closed_form_eigenvalues,
    endemic_eq,
    endemic_stability,
    epi_jacobian,
    reproduction_numbers,
    write_bifurcation_csv,
)


def test_reproduction_numbers_example():
    r0, r_vac, p_crit = reproduction_numbers(0.046, 0.01, 0.0482, 0.5)
    assert r0 == pytest.approx(0.046 / 0.0582)
    assert r_vac == pytest.approx(0.5 * r0)
    assert p_crit == 0.0  # r0 < 1 already


def test_endemic_example_values():
    beta, gamma, b, p = 0.5, 0.1, 0.02, 0.2
    st = endemic_eq(beta, gamma, b, p)
    assert st.s == pytest.approx(0.24)
    assert st.i == pytest.approx(0.8 * 0.02 / 0.12 - 0.04)
    assert st.v == p
    assert type(st.s) is float
    assert st.total == pytest.approx(1.0, abs=1e-15)
    assert np.max(np.abs(epi_rhs(st, beta, gamma, b, p))) < 1e-15


def test_endemic_absent_below_threshold():
    with pytest.raises(NoEndemicState):
        endemic_eq(0.1, 0.1, 0.02, 0.2)
    # exactly at the threshold there is no endemic state either
    with pytest.raises(NoEndemicState):
        endemic_eq(0.15, 0.1, 0.02, 0.2)


def test_disease_free_spectrum_sign():
    rep = df_stability(0.5, 0.1, 0.02, 0.2)
    assert not rep.stable
    assert max(rep.eigenvalues.real) == pytest.approx(0.5 * 0.8 - 0.12)
    rep = df_stability(0.1, 0.1, 0.02, 0.2)
    assert rep.stable
    assert rep.closed_form_error < 1e-14


def test_endemic_spectrum_and_closed_form_pair():
    rep = endemic_stability(0.5, 0.1, 0.02, 0.2)
    assert rep.stable
    assert rep.det_check < 1e-12
    assert rep.closed_form_error < 1e-10
    assert not rep.notes


def test_jacobian_matches_finite_differences():
    beta, gamma, b, p = 0.4, 0.07, 0.03, 0.1
    st = endemic_eq(beta, gamma, b, p)
    x = st.as_array()
    J = epi_jacobian(st, beta, gamma, b)
    fd = np.empty((4, 4))
    for j in range(4):
        d = np.zeros(4)
        d[j] = 1e-6
        fd[:, j] = (epi_rhs(x + d, beta, gamma, b, p) - epi_rhs(x - d, beta, gamma, b, p)) / 2e-6
    assert np.allclose(J, fd, atol=1e-9)


def test_closed_form_eigs_oracle_independent_of_numeric():
    # compare with the roots of the 2x2 block characteristic polynomial
    beta, gamma, b, p = 0.9, 0.2, 0.05, 0.3
    st = endemic_eq(beta, gamma, b, p)
    J = epi_jacobian(st, beta, gamma, b)[:2, :2]
    roots = np.roots([1.0, -np.trace(J), np.linalg.det(J)])
    cf = endemic_closed_form_eigenvalues(beta, gamma, b, p)[:2]
    assert np.allclose(np.sort_complex(roots), np.sort_complex(cf), atol=1e-12)


def test_bifurcation_scan_and_csv(tmp_path):
    gamma, b, p = 0.01, 0.02, 0.5
    crit = (b + gamma) / (1 - p)
    rows = bifurcation_scan(np.linspace(0.5 * crit, 2 * crit, 51), "beta", gamma=gamma, b=b, p=p)
    assert rows[0].df_stable and not rows[-1].df_stable
    assert np.isnan(rows[0].i_endemic) and rows[-1].i_endemic > 0
    rows_p = bifurcation_scan(np.linspace(0.0, 0.9, 10), "p", beta=0.2, gamma=gamma, b=b)
    assert not rows_p[0].df_stable and rows_p[-1].df_stable
    path = tmp_path / "bif.csv"
    write_bifurcation_csv(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r_vac,i_df,i_endemic,df_stable,endemic_stable"
    assert len(lines) == 52
    with pytest.raises(ValueError):
        bifurcation_scan([0.1, 0.3, 0.2], "beta", gamma=gamma, b=b, p=p)


def test_disease_free_point():
    assert disease_free_eq(0.3).as_array().tolist() == [0.7, 0.0, 0.0, 0.3]
