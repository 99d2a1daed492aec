"""Epidemic equilibria, reproduction numbers, Jacobian spectra and bifurcation scans.

Jacobians are assembled analytically from the fraction dynamics and their
spectra are computed numerically.  The closed-form eigenvalues and the
determinant identity are kept as independent cross-checks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .states import EpiState

BOUNDARY_TOL = 1e-12


class NoEndemicState(ValueError):
    """The vaccination-adjusted reproduction number does not exceed one."""


@dataclass(frozen=True)
class EquilibriumReport:
    kind: str  # "disease_free" or "endemic"
    point: EpiState
    r0: float
    r_vac: float
    eigenvalues: np.ndarray
    stable: bool
    boundary: bool = False
    det_check: float = 0.0
    closed_form: Optional[np.ndarray] = None
    closed_form_error: float = 0.0
    notes: list = field(default_factory=list)


def reproduction_numbers(beta, gamma, b, p):
    """Return ``(r0, r_vac, p_crit)``.

    ``p_crit`` is the smallest vaccinated fraction at recruitment that pushes
    the reproduction number to one or below.
    """
    r0 = beta / (b + gamma)
    r_vac = (1.0 - p) * r0
    p_crit = max(0.0, 1.0 - 1.0 / r0)
    return r0, r_vac, p_crit


def disease_free_eq(p) -> EpiState:
    return EpiState(s=1.0 - p, i=0.0, r=0.0, v=p)


def endemic_eq(beta, gamma, b, p) -> EpiState:
    """Endemic fixed point of the fraction dynamics.

    Raises:
        NoEndemicState: if ``(1 - p) beta / (b + gamma) <= 1``.
    """
    if (1.0 - p) * beta <= b + gamma:
        raise NoEndemicState(
            f"(1-p) R0 = {(1 - p) * beta / (b + gamma):.6g} <= 1: no endemic state"
        )
    s = (gamma + b) / beta
    i = (1.0 - p) * b / (gamma + b) - b / beta
    return EpiState(s=float(s), i=float(i), r=float(1.0 - s - i - p), v=float(p))


def epi_jacobian(state: EpiState, beta, gamma, b) -> np.ndarray:
    """Jacobian of the (s, i, r, v) fraction dynamics at ``state``."""
    s, i = state.s, state.i
    return np.array(
        [
            [-b - beta * i, -beta * s, 0.0, 0.0],
            [beta * i, beta * s - gamma - b, 0.0, 0.0],
            [0.0, gamma, -b, 0.0],
            [0.0, 0.0, 0.0, -b],
        ]
    )


def df_stability(beta, gamma, b, p) -> EquilibriumReport:
    point = disease_free_eq(p)
    r0, r_vac, _ = reproduction_numbers(beta, gamma, b, p)
    eig = np.linalg.eigvals(epi_jacobian(point, beta, gamma, b))
    lead = beta * (1 - p) - b - gamma
    closed = np.array([lead, -b, -b, -b], dtype=complex)
    err = _spectrum_distance(eig, closed)
    boundary = abs(lead) <= BOUNDARY_TOL
    stable = bool(np.all(eig.real < 0)) and not boundary
    return EquilibriumReport(
        kind="disease_free", point=point, r0=r0, r_vac=r_vac, eigenvalues=eig,
        stable=stable, boundary=boundary, closed_form=closed, closed_form_error=err,
    )


def endemic_closed_form_eigenvalues(beta, gamma, b, p) -> np.ndarray:
    """Eigenvalues from the published discriminant expression (oracle only)."""
    x2 = (
        b**2 * beta**2 * p**2 + 4 * b**4 - 4 * b**3 * beta + b**2 * beta**2
        + 4 * b * gamma**3 + 4 * (3 * b**2 - b * beta) * gamma**2
        + 4 * (3 * b**3 - 2 * b**2 * beta) * gamma
        + 2 * (2 * b**3 * beta - b**2 * beta**2 + 4 * b**2 * beta * gamma + 2 * b * beta * gamma**2) * p
    )
    x = np.sqrt(complex(x2))
    lead = -(1 - p) * beta * b
    den = 2 * (b + gamma)
    return np.array([(lead - x) / den, (lead + x) / den, -b, -b], dtype=complex)


def endemic_stability(beta, gamma, b, p, xcheck_tol: float = 1e-8) -> EquilibriumReport:
    point = endemic_eq(beta, gamma, b, p)
    r0, r_vac, _ = reproduction_numbers(beta, gamma, b, p)
    J = epi_jacobian(point, beta, gamma, b)
    eig = np.linalg.eigvals(J)
    det_closed = b**3 * ((1 - p) * beta - (b + gamma))
    det_check = abs(np.linalg.det(J) - det_closed) / abs(det_closed)
    closed = endemic_closed_form_eigenvalues(beta, gamma, b, p)
    err = _spectrum_distance(eig, closed)
    notes = []
    scale = max(1.0, float(np.max(np.abs(eig))))
    if err > xcheck_tol * scale:
        notes.append(f"closed-form eigenvalue pair disagrees with numeric spectrum by {err:.3e}")
    boundary = abs((1 - p) * beta - (b + gamma)) <= BOUNDARY_TOL
    return EquilibriumReport(
        kind="endemic", point=point, r0=r0, r_vac=r_vac, eigenvalues=eig,
        stable=bool(np.all(eig.real < 0)) and not boundary, boundary=boundary,
        det_check=det_check, closed_form=closed, closed_form_error=err, notes=notes,
    )


def _spectrum_distance(a, b) -> float:
    """Max distance after greedy matching of two eigenvalue lists."""
    remaining = list(np.asarray(b, dtype=complex))
    worst = 0.0
    for z in np.asarray(a, dtype=complex):
        j = int(np.argmin([abs(z - w) for w in remaining]))
        worst = max(worst, abs(z - remaining.pop(j)))
    return worst


# ---------------------------------------------------------------------------
# Bifurcation scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BifurcationRow:
    value: float  # swept parameter value
    r_vac: float
    i_df: float
    i_endemic: float  # nan where no endemic branch exists
    df_stable: bool
    endemic_stable: bool
    boundary: bool


BIFURCATION_COLUMNS = ("r_vac", "i_df", "i_endemic", "df_stable", "endemic_stable")


def bifurcation_scan(values, param: str = "beta", *, beta=None, gamma, b, p=None) -> list[BifurcationRow]:
    """Trace both equilibrium branches while sweeping ``beta`` or ``p``.

    ``values`` must be monotone.  The fixed parameters are passed by keyword;
    the swept one is taken from ``values``.
    """
    values = np.asarray(values, dtype=float)
    d = np.diff(values)
    if values.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError("sweep grid must be strictly monotone")
    if param not in ("beta", "p"):
        raise ValueError("param must be 'beta' or 'p'")
    rows = []
    for x in values:
        bt, pp = (x, p) if param == "beta" else (beta, x)
        df = df_stability(bt, gamma, b, pp)
        margin = (1 - pp) * bt - (b + gamma)
        if abs(margin) <= BOUNDARY_TOL:
            i_end, end_stable = 0.0, False
        elif margin > 0:
            i_end = endemic_eq(bt, gamma, b, pp).i
            end_stable = endemic_stability(bt, gamma, b, pp).stable
        else:
            i_end, end_stable = float("nan"), False
        rows.append(BifurcationRow(float(x), df.r_vac, 0.0, i_end, df.stable, end_stable, df.boundary))
    return rows


def write_bifurcation_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BIFURCATION_COLUMNS)
        for r in rows:
            w.writerow([f"{r.r_vac:.17g}", f"{r.i_df:.17g}", f"{r.i_endemic:.17g}",
                        int(r.df_stable), int(r.endemic_stable)])
