"""Model parameters and functional forms.

Every evaluator returns the value together with its analytic first partials
so that analytic/numeric agreement can be checked in one place.  Inputs may be
scalars or numpy arrays.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class DomainError(ValueError):
    """Raised when an evaluator is called outside its domain."""


def _nonneg(name, x):
    if np.any(np.asarray(x) < 0):
        raise DomainError(f"{name} must be >= 0, got {x!r}")


def _positive(name, x):
    if np.any(np.asarray(x) <= 0):
        raise DomainError(f"{name} must be > 0, got {x!r}")


# ---------------------------------------------------------------------------
# Parameter containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    """Demographic and economic constants.

    Only structural sanity (finite numbers, ``p`` in [0, 1], positive rates) is
    enforced here.  Economic assumptions such as ``b >= mu`` are reported by
    :func:`epigrowth.validation.validate_assumptions` instead of raising, so
    that an inconsistent configuration can still be inspected.
    """

    b: float = 0.0482
    mu: float = 0.005
    p: float = 0.5
    theta: float = 0.05
    delta_K: float = 0.05
    delta_H: float = 0.05
    delta_E: float = 0.05

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        for name in ("b", "mu", "theta", "delta_K", "delta_H", "delta_E"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def capital_drag(self) -> float:
        """Effective per-capita depreciation of physical capital, delta_K + b - mu."""
        return self.delta_K + self.b - self.mu

    @property
    def health_drag(self) -> float:
        return self.delta_H + self.b - self.mu


class RateEval(NamedTuple):
    value: float
    dA: float
    de: float
    dh: float


class KnowledgeEval(NamedTuple):
    value: float
    dA: float
    de: float


class ProductionEval(NamedTuple):
    value: float
    f1: float
    f2: float
    f11: float
    f12: float
    f22: float


class ScalarEval(NamedTuple):
    value: float
    d: float


TRANSMISSION_VARIANTS = ("knowledge", "health", "product")
RECOVERY_VARIANTS = ("product", "health")


@dataclass(frozen=True)
class TransmissionSpec:
    """Transmission rate beta(A, e, h).

    ``knowledge``: beta0 * exp(-eta e)
    ``health``:    beta1 + beta0 * exp(-eta h)
    ``product``:   beta0 * exp(-eta A e h)
    """

    variant: str = "health"
    beta0: float = 0.023
    beta1: float = 0.023
    eta: float = 1.0

    def __post_init__(self):
        if self.variant not in TRANSMISSION_VARIANTS:
            raise ValueError(f"unknown transmission variant {self.variant!r}")
        if self.beta0 <= 0 or self.beta1 < 0 or self.eta < 0:
            raise ValueError("need beta0 > 0, beta1 >= 0, eta >= 0")

    @property
    def beta_bar(self) -> float:
        """beta at (A, e, h) = (0, 0, 0), the largest attainable rate."""
        return self.beta0 + self.beta1 if self.variant == "health" else self.beta0


@dataclass(frozen=True)
class RecoverySpec:
    """Recovery rate gamma(A, e, h).

    ``product``: gamma1 - gamma0 * exp(-eta2 A e h)
    ``health``:  gamma1 - gamma0 * exp(-eta2 h)
    """

    variant: str = "health"
    gamma0: float = 1.0
    gamma1: float = 1.01
    eta2: float = 1.0

    def __post_init__(self):
        if self.variant not in RECOVERY_VARIANTS:
            raise ValueError(f"unknown recovery variant {self.variant!r}")
        if self.gamma0 < 0 or self.eta2 < 0:
            raise ValueError("need gamma0 >= 0, eta2 >= 0")
        if self.gamma0 >= self.gamma1:
            raise ValueError(f"need gamma0 < gamma1 so recovery stays positive, got {self.gamma0} >= {self.gamma1}")

    @property
    def gamma_floor(self) -> float:
        """gamma at the origin, the smallest attainable rate."""
        return self.gamma1 - self.gamma0


@dataclass(frozen=True)
class KnowledgeSpec:
    """Learning-by-controlling production E(A, e) = a3 (1 - e^{-a1 A}) (1 - e^{-a2 e}).

    Both inputs are essential (E vanishes on either axis) and the partials
    stay bounded at the origin, where they tend to 0.
    """

    a1: float = 0.023
    a2: float = 0.023
    a3: float = 1.0

    def __post_init__(self):
        if min(self.a1, self.a2, self.a3) <= 0:
            raise ValueError("knowledge coefficients must be positive")

    @property
    def E1_bar(self) -> float:
        return 0.0

    @property
    def E2_bar(self) -> float:
        return 0.0

    @property
    def E2_sup(self) -> float:
        """Supremum of dE/de over the positive orthant."""
        return self.a2 * self.a3


@dataclass(frozen=True)
class ProductionSpec:
    """Cobb-Douglas goods technology and concave health technology.

    f(k, l) = k^psi l^(1 - psi)
    g(m) = psi3 (m + psi1)^psi2 - psi4 psi1^psi2
    """

    psi: float = 0.3
    psi1: float = 0.2
    psi2: float = 0.5
    psi3: float = 0.5
    psi4: float = 0.5

    def __post_init__(self):
        if not 0 < self.psi < 1:
            raise ValueError("need 0 < psi < 1")
        if not 0 < self.psi2 < 1 or self.psi1 < 0 or self.psi3 < 0 or self.psi4 < 0:
            raise ValueError("need 0 < psi2 < 1 and psi1, psi3, psi4 >= 0")


@dataclass(frozen=True)
class UtilitySpec:
    form: str = "log"
    sigma: float = 2.0

    def __post_init__(self):
        if self.form not in ("log", "crra"):
            raise ValueError(f"unknown utility form {self.form!r}")
        if self.form == "crra" and (self.sigma <= 0 or self.sigma == 1):
            raise ValueError("CRRA needs sigma > 0 and sigma != 1")


@dataclass(frozen=True)
class Model:
    """Bundle of parameters and functional forms passed around the package."""

    params: ModelParams = ModelParams()
    beta: TransmissionSpec = TransmissionSpec()
    gamma: RecoverySpec = RecoverySpec()
    knowledge: KnowledgeSpec = KnowledgeSpec()
    production: ProductionSpec = ProductionSpec()
    utility: UtilitySpec = UtilitySpec()

    def with_params(self, **changes) -> "Model":
        return dataclasses.replace(self, params=dataclasses.replace(self.params, **changes))

    def rates(self, A, e, h) -> tuple[RateEval, RateEval]:
        return beta_eval(self.beta, A, e, h), gamma_eval(self.gamma, A, e, h)


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------


def beta_eval(spec: TransmissionSpec, A, e, h) -> RateEval:
    """Transmission rate and its partials with respect to (A, e, h)."""
    _nonneg("A", A)
    _nonneg("e", e)
    _nonneg("h", h)
    b0, eta = spec.beta0, spec.eta
    zero = 0.0 * (np.asarray(A) + np.asarray(e) + np.asarray(h))
    if spec.variant == "knowledge":
        x = b0 * np.exp(-eta * e)
        return RateEval(x, zero, -eta * x, zero)
    if spec.variant == "health":
        x = b0 * np.exp(-eta * h)
        return RateEval(spec.beta1 + x, zero, zero, -eta * x)
    x = b0 * np.exp(-eta * A * e * h)
    return RateEval(x, -eta * e * h * x, -eta * A * h * x, -eta * A * e * x)


def gamma_eval(spec: RecoverySpec, A, e, h) -> RateEval:
    """Recovery rate and its partials with respect to (A, e, h)."""
    _nonneg("A", A)
    _nonneg("e", e)
    _nonneg("h", h)
    g0, g1, eta2 = spec.gamma0, spec.gamma1, spec.eta2
    zero = 0.0 * (np.asarray(A) + np.asarray(e) + np.asarray(h))
    if spec.variant == "health":
        x = g0 * np.exp(-eta2 * h)
        return RateEval(g1 - x, zero, zero, eta2 * x)
    x = g0 * np.exp(-eta2 * A * e * h)
    return RateEval(g1 - x, eta2 * e * h * x, eta2 * A * h * x, eta2 * A * e * x)


def E_eval(spec: KnowledgeSpec, A, e) -> KnowledgeEval:
    """Knowledge production and its partials."""
    _nonneg("A", A)
    _nonneg("e", e)
    ua = np.exp(-spec.a1 * A)
    ue = np.exp(-spec.a2 * e)
    # -expm1 keeps 1 - exp(-x) accurate for small x
    va = -np.expm1(-spec.a1 * A)
    ve = -np.expm1(-spec.a2 * e)
    return KnowledgeEval(
        spec.a3 * va * ve,
        spec.a3 * spec.a1 * ua * ve,
        spec.a3 * spec.a2 * ue * va,
    )


def E_second(spec: KnowledgeSpec, A, e) -> tuple:
    """Second partials (E11, E12, E22)."""
    ua = np.exp(-spec.a1 * A)
    ue = np.exp(-spec.a2 * e)
    va = -np.expm1(-spec.a1 * A)
    ve = -np.expm1(-spec.a2 * e)
    a1, a2, a3 = spec.a1, spec.a2, spec.a3
    return (-a3 * a1**2 * ua * ve, a3 * a1 * a2 * ua * ue, -a3 * a2**2 * ue * va)


def f_eval(spec: ProductionSpec, k, l) -> ProductionEval:
    """Cobb-Douglas output with gradient and Hessian entries."""
    _positive("k", k)
    _positive("l", l)
    psi = spec.psi
    y = k**psi * l ** (1 - psi)
    return ProductionEval(
        y,
        psi * y / k,
        (1 - psi) * y / l,
        psi * (psi - 1) * y / k**2,
        psi * (1 - psi) * y / (k * l),
        -psi * (1 - psi) * y / l**2,
    )


def capital_for_mpk(spec: ProductionSpec, l, target):
    """Capital k solving f1(k, l) = target (closed form for Cobb-Douglas)."""
    _positive("target", target)
    _positive("l", l)
    return l * (spec.psi / target) ** (1.0 / (1.0 - spec.psi))


def g_eval(spec: ProductionSpec, m) -> ScalarEval:
    """Health production and its derivative."""
    _nonneg("m", m)
    p1, p2, p3, p4 = spec.psi1, spec.psi2, spec.psi3, spec.psi4
    return ScalarEval(p3 * (m + p1) ** p2 - p4 * p1**p2, p3 * p2 * (m + p1) ** (p2 - 1))


def g_inverse(spec: ProductionSpec, value):
    """Expenditure m with g(m) = value."""
    p1, p2, p3, p4 = spec.psi1, spec.psi2, spec.psi3, spec.psi4
    m = ((value + p4 * p1**p2) / p3) ** (1.0 / p2) - p1
    return np.maximum(m, 0.0)


def u_eval(spec: UtilitySpec, c) -> ScalarEval:
    """Period utility and marginal utility."""
    _positive("c", c)
    if spec.form == "log":
        return ScalarEval(np.log(c), 1.0 / c)
    s = spec.sigma
    return ScalarEval((c ** (1 - s) - 1) / (1 - s), c ** (-s))


def u_second(spec: UtilitySpec, c):
    _positive("c", c)
    if spec.form == "log":
        return -1.0 / c**2
    return -spec.sigma * c ** (-spec.sigma - 1)
