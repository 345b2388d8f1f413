"""Exponent algebra for the restriction and Strichartz functionals.

Everything downstream is parametrised by a validated :class:`ExponentConfig`
(for the pure-norm functional) or :class:`AdmissiblePair` (for the mixed
norm). Validation happens here so that no quadrature is ever started on a
divergent integral.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

# Snap tolerance used when deciding whether beta is an integer.
INTEGER_SNAP = 1e-12
# Margin on the integrability condition (d-1)(q-2) > 2.
INTEGRABILITY_MARGIN = 1e-9
ADMISSIBLE_RTOL = 1e-12


class DomainError(ValueError):
    """Raised when exponents fall outside the range where the theory applies."""


class Case(enum.Enum):
    SUBCRITICAL = "subcritical"  # p < 2
    CRITICAL = "critical"  # p == 2
    SUPERCRITICAL = "supercritical"  # p > 2


def _check_dimension(d: int) -> None:
    if isinstance(d, bool) or int(d) != d or d < 2:
        raise DomainError(f"dimension d must be an integer >= 2, got {d!r}")


def p_upper(d: int) -> float:
    """Open upper end 2d/(d-1) of the admissible p-range."""
    return 2.0 * d / (d - 1)


def dual_exponent(p: float, d: int) -> float:
    """Return q with 1/q = (d-1)/(d+1) * (1 - 1/p)."""
    _check_dimension(d)
    if not (math.isfinite(p) and 1.0 < p < p_upper(d)):
        raise DomainError(f"p must lie in (1, {p_upper(d):g}) for d={d}, got {p!r}")
    return (d + 1) * p / ((d - 1) * (p - 1.0))


def _snap(x: float) -> float:
    n = round(x)
    return float(n) if abs(x - n) <= INTEGER_SNAP * max(1.0, abs(x)) else x


@dataclass(frozen=True)
class ExponentConfig:
    """Validated (d, p, q) triple with derived series parameters.

    ``beta`` is (d-1)(q-2)/4, the power of (1+it)^{-1} in the reduced
    integral, and ``k0`` is the first series index for which the contour
    formula applies with a nonnegative exponent.
    """

    d: int
    p: float
    q: float
    beta: float
    k0: int
    case: Case

    @property
    def beta_is_integer(self) -> bool:
        return float(self.beta).is_integer()

    @property
    def ratio_target(self) -> float:
        """(2-p)/(q-2), the ratio a Gaussian critical point would force on I_k."""
        return (2.0 - self.p) / (self.q - 2.0)

    @property
    def decay_exponent(self) -> float:
        """Algebraic decay rate (d-1)(q-2)/2 of the reduced integrand."""
        return 2.0 * self.beta

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "p": self.p,
            "q": self.q,
            "beta": self.beta,
            "k0": self.k0,
            "case": self.case.value,
        }


def make_config(p: float, d: int) -> ExponentConfig:
    q = dual_exponent(p, d)
    d = int(d)
    if (d - 1) * (q - 2.0) <= 2.0 + INTEGRABILITY_MARGIN:
        raise DomainError(
            f"(d-1)(q-2) = {(d - 1) * (q - 2.0):.17g} must exceed 2 for the reduced integral to converge"
        )
    if p == 2.0:
        case = Case.CRITICAL
        # p = 2 gives q = 2(d+1)/(d-1) and beta = 1 exactly.
        q = 2.0 * (d + 1) / (d - 1)
        beta = 1.0
    else:
        case = Case.SUBCRITICAL if p < 2.0 else Case.SUPERCRITICAL
        beta = _snap((d - 1) * (q - 2.0) / 4.0)
    k0 = math.ceil(beta)
    if k0 < 1:
        raise DomainError(f"k0 = {k0} < 1 (beta = {beta!r})")
    if case is Case.SUPERCRITICAL and not (0.5 <= beta < 1.0):
        raise DomainError(f"supercritical beta must lie in [1/2, 1), got {beta!r}")
    return ExponentConfig(d=d, p=float(p), q=float(q), beta=float(beta), k0=int(k0), case=case)


@dataclass(frozen=True)
class AdmissiblePair:
    d: int
    q: float
    r: float

    @property
    def slice_power(self) -> float:
        """(r/q)(d-1)(q-2)/4, which the scaling relation forces to equal 1."""
        return self.r / self.q * (self.d - 1) * (self.q - 2.0) / 4.0

    def as_dict(self) -> dict:
        return {"d": self.d, "q": self.q, "r": self.r}


@dataclass(frozen=True)
class Rejection:
    """A pair failing 2/r + (d-1)/q = (d-1)/2; ``residual`` is LHS - RHS."""

    d: int
    q: float
    r: float
    residual: float
    reason: str

    def __bool__(self) -> bool:
        return False


def admissibility_residual(r: float, q: float, d: int) -> float:
    return 2.0 / r + (d - 1) / q - (d - 1) / 2.0


def check_admissible(r: float, q: float, d: int) -> AdmissiblePair | Rejection:
    """Accept (r, q) iff the Strichartz scaling relation holds to 1e-12 relative.

    A failing pair is returned as a falsy :class:`Rejection` rather than raised.
    """
    _check_dimension(d)
    d = int(d)
    for name, val in (("q", q), ("r", r)):
        if not math.isfinite(val) or val < 2.0:
            return Rejection(d, q, r, math.nan, f"{name} must be finite and >= 2, got {val!r}")
    res = admissibility_residual(r, q, d)
    if abs(res) > ADMISSIBLE_RTOL * (d - 1) / 2.0:
        return Rejection(d, float(q), float(r), res, f"2/r + (d-1)/q - (d-1)/2 = {res:.17g}")
    return AdmissiblePair(d=d, q=float(q), r=float(r))


def diagonal_pair(d: int) -> AdmissiblePair:
    """The pair r = q = q(2, d), where the mixed norm reduces to the p = 2 case."""
    q = make_config(2.0, d).q
    pair = check_admissible(q, q, d)
    assert isinstance(pair, AdmissiblePair)
    return pair
