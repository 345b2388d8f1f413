"""Fixed branches of log(1+it), log(1-it) and log(q-1-it).

The cut for log(1+it) is the ray {is : s >= 1}; the cuts for log(1-it) and
log(q-1-it) are the ray {-is : s >= 1}. On the real line every base has
positive real part, so these branches agree with the principal logarithm
there. On the shifted ray t = i + iy (y >= 0) the last two bases are the
positive reals 2+y and q+y, while 1+it = -y sits on its own cut.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class BranchCutError(ValueError):
    """Raised when a base is requested on its own branch cut."""


class Kind(enum.Enum):
    ONE_PLUS_IT = "1+it"
    ONE_MINUS_IT = "1-it"
    Q_MINUS_1_MINUS_IT = "q-1-it"


@dataclass(frozen=True)
class BranchFactor:
    kind: Kind
    q: float | None = None

    def __post_init__(self):
        if self.kind is Kind.Q_MINUS_1_MINUS_IT:
            if self.q is None or not self.q > 2.0:
                raise ValueError(f"q-1-it factor needs q > 2, got {self.q!r}")

    @classmethod
    def one_plus_it(cls) -> "BranchFactor":
        return cls(Kind.ONE_PLUS_IT)

    @classmethod
    def one_minus_it(cls) -> "BranchFactor":
        return cls(Kind.ONE_MINUS_IT)

    @classmethod
    def q_minus_1_minus_it(cls, q: float) -> "BranchFactor":
        return cls(Kind.Q_MINUS_1_MINUS_IT, float(q))


def branch_log(factor: BranchFactor, t):
    """log of the factor's base at real t, on the branch fixed above.

    Modulus is computed with hypot so that |t| up to ~1e300 is safe.
    """
    t = np.asarray(t, dtype=float)
    if factor.kind is Kind.ONE_PLUS_IT:
        return np.log(np.hypot(1.0, t)) + 1j * np.arctan(t)
    if factor.kind is Kind.ONE_MINUS_IT:
        return np.log(np.hypot(1.0, t)) - 1j * np.arctan(t)
    c = factor.q - 1.0
    # real part c > 0: principal branch, continuous across t = 0
    return np.log(np.hypot(c, t)) - 1j * np.arctan2(t, c)


def branch_power(factor: BranchFactor, t, gamma: float):
    """exp(gamma * L(t)) with L the fixed branch; scalar in, scalar out."""
    out = np.exp(gamma * branch_log(factor, t))
    return out[()] if np.ndim(out) == 0 else out


def shifted_base(factor: BranchFactor, y):
    """Base of a non-singular factor at t = i + iy: 2+y or q+y (real, > 0)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("shifted ray parameter y must be >= 0")
    if factor.kind is Kind.ONE_PLUS_IT:
        raise BranchCutError("1+it equals -y on the shifted ray, which is its branch cut")
    out = 2.0 + y if factor.kind is Kind.ONE_MINUS_IT else factor.q + y
    return out[()] if np.ndim(out) == 0 else out
