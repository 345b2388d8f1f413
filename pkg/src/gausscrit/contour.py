"""Contour evaluation of the reduced Euler-Lagrange integrals.

Every integral here has the shape

    int_R (1+it)^gamma H(t) dt,

with H a product of powers of (1-it) and (q-1-it), an optional integer
power of an affine factor c + b it, and an optional factor
exp(a (it - (1+t^2)/(q-1-it))). Such H is holomorphic in the closed upper
half-plane, so the integral folds onto the branch cut of (1+it)^gamma:

    gamma > -1:  -2 sin(gamma pi) int_0^inf y^gamma H(i+iy) dy
    gamma = -1:  2 pi H(i)

On the ray t = i+iy every factor of H is real, so the folded integral is a
real, non-oscillatory half-line integral. The real-line integral is kept as
an independent oracle and the two are cross-checked.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from gausscrit.branch import BranchFactor, branch_log, shifted_base
from gausscrit.exponents import AdmissiblePair, Case, DomainError, ExponentConfig
from gausscrit.quadrature import (
    ConvergenceError,
    IntegralResult,
    QuadSpec,
    integrate_half_line,
    integrate_real_line,
)

GAMMA_POLE_TOL = 1e-12
CROSS_CHECK_RTOL = 1e-8
SERIES_MAX_TERMS = 60

_ONE_PLUS = BranchFactor.one_plus_it()
_ONE_MINUS = BranchFactor.one_minus_it()


class CrossCheckError(AssertionError):
    """Two independent evaluations of the same integral disagree."""


def sin_pi(x: float) -> float:
    """sin(pi x), exactly zero at integers."""
    r = x - 2.0 * round(x / 2.0)  # r in [-1, 1]
    if r == round(r):
        return 0.0
    return math.sin(math.pi * r)


def gauss_exponent_line(t, q: float):
    """it - (1+t^2)/(q-1-it), rewritten as ((q-1)it - 1)/(q-1-it) to avoid cancellation."""
    it = 1j * np.asarray(t, dtype=float)
    return ((q - 1.0) * it - 1.0) / (q - 1.0 - it)


def gauss_exponent_ray(y, q: float):
    """The same exponent at t = i+iy: -(q + (q-1) y)/(q + y), real."""
    y = np.asarray(y, dtype=float)
    return -(q + (q - 1.0) * y) / (q + y)


@dataclass(frozen=True)
class HSpec:
    """H(t) = (1-it)^exp_minus (q-1-it)^exp_q (poly_const + poly_it_coeff it)^poly_k
    exp(gauss_a (it - (1+t^2)/(q-1-it)))."""

    exp_minus: float
    exp_q: float
    q: float
    gauss_a: float = 0.0
    poly_k: int = 0
    poly_const: float = 0.0
    poly_it_coeff: float = 0.0

    def __post_init__(self):
        if not self.q > 2.0:
            raise DomainError(f"HSpec needs q > 2, got {self.q!r}")
        if self.gauss_a < 0:
            raise DomainError("gauss_a must be >= 0")
        if self.poly_k < 0 or int(self.poly_k) != self.poly_k:
            raise DomainError("poly_k must be a nonnegative integer")

    @property
    def _qfactor(self) -> BranchFactor:
        return BranchFactor.q_minus_1_minus_it(self.q)

    @property
    def growth(self) -> float:
        """Algebraic growth exponent of |H(t)| as |t| -> inf."""
        k = self.poly_k if self.poly_it_coeff != 0 else 0
        return self.exp_minus + self.exp_q + k

    def decay(self, gamma: float) -> float:
        """s with |(1+it)^gamma H(t)| ~ |t|^-s."""
        return -(gamma + self.growth)

    def log_on_line(self, t):
        t = np.asarray(t, dtype=float)
        out = self.exp_minus * branch_log(_ONE_MINUS, t) + self.exp_q * branch_log(self._qfactor, t)
        if self.poly_k:
            # integer power: any branch of log gives the same value
            out = out + self.poly_k * np.log(self.poly_const + 1j * self.poly_it_coeff * t)
        if self.gauss_a:
            out = out + self.gauss_a * gauss_exponent_line(t, self.q)
        return out

    def on_line(self, t):
        return np.exp(self.log_on_line(t))

    def log_on_ray(self, y):
        """(log|H(i+iy)|, sign H(i+iy)) for y >= 0."""
        y = np.asarray(y, dtype=float)
        logabs = self.exp_minus * np.log(shifted_base(_ONE_MINUS, y)) + self.exp_q * np.log(
            shifted_base(self._qfactor, y)
        )
        sign = np.ones_like(y)
        if self.poly_k:
            aff = self.poly_const - self.poly_it_coeff * (1.0 + y)
            with np.errstate(divide="ignore"):
                logabs = logabs + self.poly_k * np.log(np.abs(aff))
            sign = np.sign(aff) ** self.poly_k
        if self.gauss_a:
            logabs = logabs + self.gauss_a * gauss_exponent_ray(y, self.q)
        return logabs, sign

    def on_ray(self, y):
        la, sg = self.log_on_ray(y)
        return sg * np.exp(la)

    def at_i(self) -> float:
        """H(i) = 2^exp_minus q^exp_q (poly_const - poly_it_coeff)^poly_k e^-a."""
        return float(self.on_ray(0.0))


def _check_decay(gamma: float, h: HSpec) -> float:
    s = h.decay(gamma)
    if not s > 1.0:
        raise DomainError(f"|(1+it)^gamma H(t)| decays like |t|^-{s:g}; need an exponent > 1")
    return s


def lemma_integration(
    gamma: float, h: HSpec, spec: QuadSpec = QuadSpec(), *, require_positive: bool = False
) -> IntegralResult:
    """int_R (1+it)^gamma H(t) dt by folding onto the cut of (1+it)^gamma.

    With ``require_positive`` the routine asserts H(i+iy) > 0 at every node it
    touches.
    """
    if gamma < -1.0 - GAMMA_POLE_TOL:
        raise DomainError(f"contour form needs gamma >= -1, got {gamma!r}")
    s = _check_decay(gamma, h)
    if abs(gamma + 1.0) <= GAMMA_POLE_TOL:
        hi = h.at_i()
        if require_positive and not hi > 0:
            raise AssertionError(f"H(i) = {hi!r} is not positive")
        return IntegralResult(2.0 * math.pi * hi, 0.0, 1, True)
    factor = -2.0 * sin_pi(gamma)

    def log_g(y):
        la, sg = h.log_on_ray(y)
        if require_positive and not np.all(sg > 0):
            raise AssertionError("H(i+iy) is not positive on the shifted ray")
        return la, sg

    if factor == 0.0:
        if require_positive:
            log_g(np.linspace(0.0, 10.0, 11))
        return IntegralResult(0.0, 0.0, 0, True)
    sub = QuadSpec(
        abs_tol=spec.abs_tol / abs(factor),
        rel_tol=spec.rel_tol,
        max_evaluations=spec.max_evaluations,
        decay_exponent=s,
    )
    return integrate_half_line(None, gamma, sub, log_g=log_g).scaled(factor)


def real_line_form(gamma: float, h: HSpec, spec: QuadSpec = QuadSpec()) -> IntegralResult:
    """Direct quadrature of int_R (1+it)^gamma H(t) dt, the independent oracle."""
    s = _check_decay(gamma, h)

    def f(t):
        return np.exp(gamma * branch_log(_ONE_PLUS, t) + h.log_on_line(t))

    return integrate_real_line(f, spec.with_decay(s))


def cross_check(primary: IntegralResult, oracle: IntegralResult, what: str, rtol: float = CROSS_CHECK_RTOL) -> None:
    diff = abs(primary.value - oracle.value)
    if diff > rtol * max(1.0, abs(primary.value)) + primary.err_estimate + oracle.err_estimate:
        raise CrossCheckError(
            f"{what}: contour {primary.value!r} vs real line {oracle.value!r} (diff {diff:.3g})"
        )


def _real(res: IntegralResult) -> IntegralResult:
    return IntegralResult(complex(res.value.real), res.err_estimate + abs(res.value.imag), res.evaluations, res.converged)


# ---------------------------------------------------------------------------
# the named integrals


def i_integrand_hspec(cfg: ExponentConfig, a: float) -> HSpec:
    n = cfg.d - 1
    return HSpec(exp_minus=-cfg.beta + n / 2, exp_q=-n / 2, q=cfg.q, gauss_a=a)


def h_k(cfg: ExponentConfig, k: int) -> HSpec:
    n = cfg.d - 1
    return HSpec(exp_minus=-cfg.beta + n / 2, exp_q=-k - n / 2, q=cfg.q)


def h_prime_k(cfg: ExponentConfig, k: int) -> HSpec:
    n = cfg.d - 1
    p, q = cfg.p, cfg.q
    return HSpec(
        exp_minus=-cfg.beta + n / 2,
        exp_q=-k - n / 2,
        q=q,
        poly_k=k,
        poly_const=p * q - p - q,
        poly_it_coeff=q - p,
    )


@lru_cache(maxsize=4096)
def series_I_k(k: int, cfg: ExponentConfig, spec: QuadSpec = QuadSpec(), check: bool = True) -> IntegralResult:
    """Coefficient I_k of the subcritical expansion e^a I(a) = sum a^k (q-2)^k I_k / k!.

    The contour form applies when k - beta >= -1; below that only the real
    line form is available. When both apply they are cross-checked.
    """
    if cfg.case is not Case.SUBCRITICAL:
        raise DomainError("I_k is defined for the subcritical case p < 2")
    if k < 0:
        raise DomainError("k must be >= 0")
    alpha = k - cfg.beta
    h = h_k(cfg, k)
    if alpha < -1.0 - GAMMA_POLE_TOL:
        return _real(real_line_form(alpha, h, spec)).require(f"I_{k}")
    primary = lemma_integration(alpha, h, spec, require_positive=True).require(f"I_{k} (contour)")
    if check:
        cross_check(primary, real_line_form(alpha, h, spec).require(f"I_{k} (real line)"), f"I_{k}")
    return primary


@lru_cache(maxsize=4096)
def series_I_prime_k(k: int, cfg: ExponentConfig, spec: QuadSpec = QuadSpec(), check: bool = True) -> IntegralResult:
    """Coefficient I'_k of the supercritical expansion e^{(p-1)a} I(a) = sum a^k I'_k / k!."""
    if cfg.case is not Case.SUPERCRITICAL:
        raise DomainError("I'_k is defined for the supercritical case p > 2")
    if k < 0:
        raise DomainError("k must be >= 0")
    gamma = -cfg.beta
    # +2 sin(beta pi) and -2 sin(gamma pi) must coincide for gamma = -beta
    assert 2.0 * sin_pi(cfg.beta) == -2.0 * sin_pi(gamma)
    h = h_prime_k(cfg, k)
    primary = lemma_integration(gamma, h, spec).require(f"I'_{k} (contour)")
    if check:
        cross_check(primary, real_line_form(gamma, h, spec).require(f"I'_{k} (real line)"), f"I'_{k}")
    return primary


def residue_value_p2(a: float, d: int) -> float:
    """2 pi 2^{(d-3)/2} q^{-(d-1)/2} e^{-a} with q = 2(d+1)/(d-1): I(a) at p = 2."""
    q = 2.0 * (d + 1) / (d - 1)
    return 2.0 * math.pi * 2.0 ** ((d - 3) / 2) * q ** (-(d - 1) / 2) * math.exp(-a)


class Method(enum.Enum):
    REAL_LINE = "real-line"
    SERIES = "series"
    CONTOUR = "contour"


def _series_sum(a: float, coeff, scale: float, spec: QuadSpec) -> IntegralResult:
    """sum_k (scale a)^k c_k / k! with a term-ratio stopping rule and a hard cap."""
    total = 0.0
    err = 0.0
    evals = 0
    x = scale * a
    small = 0
    for k in range(SERIES_MAX_TERMS + 1):
        c = coeff(k)
        w = math.exp(k * math.log(x) - math.lgamma(k + 1)) if x > 0 else (1.0 if k == 0 else 0.0)
        term = w * c.value.real
        total += term
        err += w * c.err_estimate
        evals += c.evaluations
        if w == 0.0:
            return IntegralResult(total, err, evals, True)
        # stop once terms are decreasing and negligible twice in a row
        if k > x and abs(term) <= spec.rel_tol * abs(total) * 1e-2:
            small += 1
            if small >= 2:
                return IntegralResult(total, err + abs(term), evals, True)
        else:
            small = 0
    raise ConvergenceError(f"series did not converge within {SERIES_MAX_TERMS} terms at a={a}")


def I_of_a(
    a: float, cfg: ExponentConfig, method: Method = Method.REAL_LINE, spec: QuadSpec = QuadSpec()
) -> IntegralResult:
    """The reduced integral I(a) whose proportionality to e^{-(p-1)a} decides criticality."""
    if a < 0:
        raise DomainError("a must be >= 0")
    h = i_integrand_hspec(cfg, a)
    if method is Method.REAL_LINE:
        return _real(real_line_form(-cfg.beta, h, spec))
    if method is Method.CONTOUR:
        if cfg.beta > 1.0:
            raise DomainError("contour form of I(a) needs beta <= 1 (p >= 2)")
        return lemma_integration(-cfg.beta, h, spec)
    if cfg.case is Case.CRITICAL:
        raise DomainError("no series expansion is used in the critical case")
    if cfg.case is Case.SUBCRITICAL:
        s = _series_sum(a, lambda k: series_I_k(k, cfg, spec), cfg.q - 2.0, spec)
        return s.scaled(math.exp(-a))
    s = _series_sum(a, lambda k: series_I_prime_k(k, cfg, spec), 1.0, spec)
    return s.scaled(math.exp(-(cfg.p - 1.0) * a))


def j_full_hspec(pair: AdmissiblePair, a: float) -> tuple[float, HSpec]:
    n = pair.d - 1
    g = pair.slice_power
    return -g, HSpec(exp_minus=-g + n / 2, exp_q=-n / 2, q=pair.q, gauss_a=a)


def j_reduced_hspec(pair: AdmissiblePair, a: float) -> HSpec:
    n = pair.d - 1
    return HSpec(exp_minus=(n - 2) / 2, exp_q=-n / 2, q=pair.q, gauss_a=a)


def J_of_a(a: float, pair: AdmissiblePair, spec: QuadSpec = QuadSpec()) -> IntegralResult:
    """Mixed-norm reduced integral; the unsimplified and simplified forms must agree."""
    if a < 0:
        raise DomainError("a must be >= 0")
    gamma, h_full = j_full_hspec(pair, a)
    full = _real(real_line_form(gamma, h_full, spec)).require("J(a), full form")
    reduced = _real(real_line_form(-1.0, j_reduced_hspec(pair, a), spec)).require("J(a), reduced form")
    diff = abs(full.value - reduced.value)
    if diff > CROSS_CHECK_RTOL * abs(reduced.value) + 10 * (full.err_estimate + reduced.err_estimate):
        raise CrossCheckError(f"J({a}): full form {full.value!r} vs reduced {reduced.value!r}")
    return reduced


def j_closed(a: float, pair: AdmissiblePair) -> float:
    """2 pi H(i) for the reduced J integrand."""
    return 2.0 * math.pi * j_reduced_hspec(pair, a).at_i()


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class SeriesReport:
    cfg: ExponentConfig
    ks: list[int]
    values: list[float]
    signs: list[int] = field(default_factory=list)
    ratio_target: float = math.nan
    c_fit: complex = 0j
    consistent: bool = False
    first_violation: int | None = None
    residuals: list[float] = field(default_factory=list)
    tol: float = 1e-6

    def __post_init__(self):
        if len(self.ks) != len(self.values):
            raise ValueError("ks and values must have equal length")
        if not self.signs:
            self.signs = sign_pattern(self.values)

    def as_dict(self) -> dict:
        return {
            "cfg": self.cfg.as_dict(),
            "ks": list(self.ks),
            "values": list(self.values),
            "signs": list(self.signs),
            "ratio_target": self.ratio_target,
            "c_fit": self.c_fit,
            "consistent": self.consistent,
            "first_violation": self.first_violation,
            "residuals": list(self.residuals),
            "tol": self.tol,
        }


def sign_pattern(values, rel_threshold: float = 1e-13) -> list[int]:
    scale = max((abs(v) for v in values), default=0.0)
    thr = rel_threshold * scale
    return [0 if abs(v) <= thr else (1 if v > 0 else -1) for v in values]


def equivalence_suite() -> list[tuple[float, HSpec, float | None]]:
    """25 (gamma, H, closed value or None) instances for the folding identity.

    gamma runs over {-1, -0.75, -0.5, 0.25, 1.6} and the affine power k over
    0..4; the k = 0 members at gamma = -1 and -1/2 have closed values 2pi/3
    and pi.
    """
    out = []
    for gamma in (-1.0, -0.75, -0.5, 0.25, 1.6):
        for k in range(5):
            if k == 0 and gamma == -1.0:
                out.append((gamma, HSpec(exp_minus=0.0, exp_q=-1.0, q=3.0), 2.0 * math.pi / 3.0))
                continue
            if k == 0 and gamma == -0.5:
                out.append((gamma, HSpec(exp_minus=0.0, exp_q=-1.0, q=4.0), math.pi))
                continue
            exp_minus = 0.5 * (k % 3) - 0.25
            h = HSpec(
                exp_minus=exp_minus,
                exp_q=-(gamma + exp_minus + k + 1.6),
                q=3.0 + 0.5 * k,
                gauss_a=0.3 * k,
                poly_k=k,
                poly_const=1.0 + k,
                poly_it_coeff=0.5,
            )
            out.append((gamma, h, None))
    return out
