"""Euler-Lagrange verdicts from the reduced integrals.

For the standard Gaussian f(y) = exp(-|y|^2/2) the left side of the
Euler-Lagrange equation at y is a constant times I(|y|^2/2), while the right
side is a constant times exp(-(p-1)|y|^2/2). The equation therefore holds iff
R(a) = I(a) exp((p-1)a) is constant in a. The mixed-norm equation reduces the
same way with J(a) and exponent 1.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from gausscrit.contour import (
    I_of_a,
    J_of_a,
    Method,
    SeriesReport,
    series_I_k,
    sign_pattern,
)
from gausscrit.exponents import AdmissiblePair, Case, DomainError, ExponentConfig
from gausscrit.quadrature import ConvergenceError, QuadSpec

TOL_CRIT = 1e-6
TOL_NOT = 1e-4
DEFAULT_A_GRID = tuple(np.round(np.linspace(0.0, 8.0, 21), 12))


class Verdict(enum.Enum):
    CRITICAL = "critical"
    NOT_CRITICAL = "not-critical"
    INCONCLUSIVE = "inconclusive"


def classify(max_rel_deviation: float, tol_crit: float = TOL_CRIT, tol_not: float = TOL_NOT) -> Verdict:
    if not math.isfinite(max_rel_deviation):
        return Verdict.INCONCLUSIVE
    if max_rel_deviation < tol_crit:
        return Verdict.CRITICAL
    if max_rel_deviation > tol_not:
        return Verdict.NOT_CRITICAL
    return Verdict.INCONCLUSIVE


@dataclass
class ProfileReport:
    subject: ExponentConfig | AdmissiblePair
    a_grid: list[float]
    R_values: list[float]
    fitted_constant: float
    max_rel_deviation: float
    verdict: Verdict
    max_imag: float = 0.0
    diagnostics: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "subject": self.subject.as_dict(),
            "a_grid": list(self.a_grid),
            "R_values": list(self.R_values),
            "fitted_constant": self.fitted_constant,
            "max_rel_deviation": self.max_rel_deviation,
            "verdict": self.verdict.value,
            "max_imag": self.max_imag,
            "diagnostics": list(self.diagnostics),
        }


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _profile(subject, a_grid, evaluate, weight_exp: float, threads: int, require_positive: bool) -> ProfileReport:
    a_grid = [float(a) for a in a_grid]
    if not a_grid:
        raise DomainError("a_grid must be nonempty")
    if any(a < 0 or a > 10 for a in a_grid):
        raise DomainError("a values must lie in [0, 10]")
    diagnostics: list[str] = []

    def one(a):
        try:
            res = evaluate(a)
        except ConvergenceError as exc:
            return a, None, str(exc)
        if not res.converged:
            return a, None, f"quadrature did not converge at a={a}"
        return a, res.value * math.exp(weight_exp * a), None

    rows = _map(one, a_grid, threads)
    R = [complex(v) if v is not None else complex(math.nan) for _, v, _ in rows]
    diagnostics.extend(msg for _, _, msg in rows if msg)
    real = np.array([z.real for z in R])
    imag = np.array([z.imag for z in R])
    if diagnostics:
        return ProfileReport(subject, a_grid, real.tolist(), math.nan, math.nan, Verdict.INCONCLUSIVE, math.nan, diagnostics)
    mean = float(math.fsum(real) / len(real))
    dev = float(np.max(np.abs(real - mean)) / abs(mean)) if mean != 0 else math.inf
    max_imag = float(np.max(np.abs(imag)))
    if max_imag > 1e-10 * max(np.max(np.abs(real)), 1e-300):
        diagnostics.append(f"R(a) has imaginary part {max_imag:.3g}")
    verdict = classify(dev)
    if require_positive and not np.all(real > 0):
        diagnostics.append("R(a) is not positive on the grid")
        if verdict is Verdict.CRITICAL:
            verdict = Verdict.INCONCLUSIVE
    return ProfileReport(subject, a_grid, real.tolist(), mean, dev, verdict, max_imag, diagnostics)


def el_profile(
    cfg: ExponentConfig,
    a_grid=DEFAULT_A_GRID,
    spec: QuadSpec = QuadSpec(),
    *,
    method: Method = Method.REAL_LINE,
    threads: int = 1,
    require_positive: bool = True,
) -> ProfileReport:
    """R(a) = I(a) e^{(p-1)a} on ``a_grid`` and the resulting verdict."""
    return _profile(cfg, a_grid, lambda a: I_of_a(a, cfg, method, spec), cfg.p - 1.0, threads, require_positive)


def mixed_el_profile(
    pair: AdmissiblePair,
    a_grid=DEFAULT_A_GRID,
    spec: QuadSpec = QuadSpec(),
    *,
    threads: int = 1,
    require_positive: bool = True,
) -> ProfileReport:
    """R(a) = J(a) e^a for an admissible pair."""
    if not isinstance(pair, AdmissiblePair):
        raise DomainError(f"pair is not admissible: {pair}")
    return _profile(pair, a_grid, lambda a: J_of_a(a, pair, spec), 1.0, threads, require_positive)


def series_consistency(cfg: ExponentConfig, kmax: int, spec: QuadSpec = QuadSpec(), tol: float = 1e-6) -> SeriesReport:
    """Test I_k = c ((2-p)/(q-2))^k for k = 0..kmax.

    c is fitted from k = 0, except when beta is an integer: then I_k = 0 for
    k >= k0 forces c = 0.
    """
    if cfg.case is not Case.SUBCRITICAL:
        raise DomainError("series consistency applies to p < 2")
    if kmax < cfg.k0 + 2:
        raise DomainError(f"kmax must be at least k0 + 2 = {cfg.k0 + 2}")
    ks = list(range(kmax + 1))
    values = [series_I_k(k, cfg, spec).value.real for k in ks]
    ratio = cfg.ratio_target
    c = 0.0 if cfg.beta_is_integer else values[0]
    # with c = 0 the bound tol |c| degenerates; measure against the largest coefficient
    thr = tol * (abs(c) if c != 0 else max(abs(v) for v in values))
    residuals = [abs(v - c * ratio**k) for k, v in zip(ks, values)]
    first = next((k for k, r in zip(ks, residuals) if r > thr), None)
    return SeriesReport(
        cfg=cfg,
        ks=ks,
        values=values,
        signs=sign_pattern(values),
        ratio_target=ratio,
        c_fit=complex(c),
        consistent=first is None,
        first_violation=first,
        residuals=residuals,
        tol=tol,
    )


def alternates(signs, start: int = 0) -> bool:
    s = signs[start:]
    return all(a * b == -1 for a, b in zip(s, s[1:]))
