"""Radial Gaussians on the paraboloid and their Fourier extensions.

Points of the paraboloid are identified with their base point y in R^{d-1},
and the extension of a density g is

    E g(x, t) = int exp(-i x.y - i t |y|^2 / 2) g(y) dy.

Only the standard Gaussian exp(-|y|^2/2) has a closed-form extension here;
every other Gaussian reachable by the symmetry group is handled by
transporting that formula (see :func:`extension`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from gausscrit.branch import BranchFactor, branch_log, branch_power
from gausscrit.exponents import ExponentConfig
from gausscrit.quadrature import IntegralResult

TWO_PI = 2.0 * math.pi


def _vec(v, n: int, dtype=float) -> np.ndarray:
    out = np.zeros(n, dtype=dtype) if v is None else np.asarray(v, dtype=dtype).reshape(-1)
    if out.shape != (n,):
        raise ValueError(f"expected a vector of length {n}, got shape {out.shape}")
    return out


@dataclass(frozen=True, eq=False)
class GaussianParams:
    """y -> c exp(-z |y - y0|^2 + y.v) on R^{d-1}; the dot product is bilinear."""

    c: complex
    z: complex
    y0: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.c == 0:
            raise ValueError("amplitude c must be nonzero")
        if not complex(self.z).real > 0:
            raise ValueError(f"Re z must be positive, got {self.z!r}")
        y0 = np.asarray(self.y0, dtype=float).reshape(-1)
        v = np.asarray(self.v, dtype=complex).reshape(-1)
        if y0.shape != v.shape:
            raise ValueError("y0 and v must have the same length d-1")
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "v", v)

    @property
    def dim(self) -> int:
        """d - 1, the dimension of the base space."""
        return self.y0.shape[0]

    @classmethod
    def standard(cls, d: int) -> "GaussianParams":
        return cls(1.0, 0.5, np.zeros(d - 1), np.zeros(d - 1))

    @classmethod
    def make(cls, d: int, c=1.0, z=0.5, y0=None, v=None) -> "GaussianParams":
        return cls(c, z, _vec(y0, d - 1), _vec(v, d - 1, complex))

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        diff = y - self.y0
        return self.c * np.exp(-self.z * np.sum(diff * diff, axis=-1) + y @ self.v)

    def scaled(self, factor: complex) -> "GaussianParams":
        return GaussianParams(self.c * factor, self.z, self.y0, self.v)

    def allclose(self, other: "GaussianParams", tol: float = 1e-12) -> bool:
        return (
            abs(self.c - other.c) <= tol * max(1.0, abs(self.c))
            and abs(self.z - other.z) <= tol * max(1.0, abs(self.z))
            and np.allclose(self.y0, other.y0, rtol=tol, atol=tol)
            and np.allclose(self.v, other.v, rtol=tol, atol=tol)
        )

    def lp_norm(self, p: float) -> float:
        """Closed-form L^p norm over R^{d-1}."""
        a = p * self.z.real
        b = p * self.v.real
        log_int = (
            p * math.log(abs(self.c))
            + 0.5 * self.dim * math.log(math.pi / a)
            + float(b @ self.y0)
            + float(b @ b) / (4.0 * a)
        )
        return math.exp(log_int / p)


@dataclass(frozen=True, eq=False)
class SymmetryElement:
    """The map f -> (y -> rho f(r A y + v) exp(i y.w))."""

    rho: complex
    r: float
    A: np.ndarray
    v: np.ndarray
    w: np.ndarray = field(default=None)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n) or not np.allclose(A.T @ A, np.eye(n), atol=1e-12, rtol=0):
            raise ValueError("A must be an orthogonal matrix")
        if self.rho == 0 or not self.r > 0:
            raise ValueError("need rho != 0 and r > 0")
        object.__setattr__(self, "rho", complex(self.rho))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "v", _vec(self.v, n))
        object.__setattr__(self, "w", _vec(self.w, n))

    @classmethod
    def identity(cls, d: int) -> "SymmetryElement":
        return cls(1.0, 1.0, np.eye(d - 1), np.zeros(d - 1), np.zeros(d - 1))

    @classmethod
    def random(cls, d: int, rng: np.random.Generator, spread: float = 1.0) -> "SymmetryElement":
        n = d - 1
        q, rmat = np.linalg.qr(rng.standard_normal((n, n)))
        A = q * np.sign(np.diag(rmat))
        rho = complex(*rng.normal(size=2)) or 1.0
        r = float(np.exp(rng.uniform(-0.35, 0.35)))
        return cls(rho, r, A, spread * rng.uniform(-1, 1, n), spread * rng.uniform(-1, 1, n))

    def compose(self, first: "SymmetryElement") -> "SymmetryElement":
        """Return self o first, i.e. apply ``first`` and then ``self``."""
        s1, s2 = first, self
        return SymmetryElement(
            rho=s1.rho * s2.rho * np.exp(1j * float(s2.v @ s1.w)),
            r=s1.r * s2.r,
            A=s1.A @ s2.A,
            v=s1.r * (s1.A @ s2.v) + s1.v,
            w=s2.r * (s2.A.T @ s1.w) + s2.w,
        )


def apply_symmetry(g: GaussianParams, s: SymmetryElement) -> GaussianParams:
    """Parameters of y -> rho g(r A y + v) exp(i y.w)."""
    At = s.A.T
    return GaussianParams(
        c=s.rho * g.c * np.exp(s.v @ g.v),
        z=g.z * s.r**2,
        y0=At @ (g.y0 - s.v) / s.r,
        v=s.r * (At @ g.v) + 1j * s.w,
    )


def symmetry_from_standard(g: GaussianParams) -> SymmetryElement:
    """A group element carrying the standard Gaussian to ``g``.

    Only Gaussians with real width z are reachable: the group has real
    dilations only.
    """
    if abs(g.z.imag) > 1e-14 * abs(g.z):
        raise ValueError("Gaussians with complex width are not reachable from the standard one")
    z = g.z.real
    vr, vi = g.v.real, g.v.imag
    # absorb the real modulation into the centre
    y1 = g.y0 + vr / (2.0 * z)
    log_k = z * float(y1 @ y1) - z * float(g.y0 @ g.y0)
    r = math.sqrt(2.0 * z)
    n = g.dim
    return SymmetryElement(g.c * math.exp(log_k), r, np.eye(n), -r * y1, vi)


def _as_points(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if d - 1 == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != d - 1:
        raise ValueError(f"x must have trailing dimension d-1 = {d - 1}")
    return x


def extension_closed(x, t, d: int):
    """(2 pi)^{(d-1)/2} (1+it)^{-(d-1)/2} exp(-|x|^2 / 2(1+it)) for the standard Gaussian.

    ``x`` has trailing axis of length d-1 (a scalar is accepted for d=2);
    ``t`` broadcasts against the leading axes of ``x``.
    """
    x = _as_points(x, d)
    t = np.asarray(t, dtype=float)
    x2 = np.sum(x * x, axis=-1)
    n = d - 1
    out = TWO_PI ** (n / 2) * branch_power(BranchFactor.one_plus_it(), t, -n / 2) * np.exp(
        -x2 / (2.0 * (1.0 + 1j * t))
    )
    return out[()] if np.ndim(out) == 0 else out


def extension(g: GaussianParams, x, t):
    """Extension of a symmetry-reachable Gaussian, transported from the standard one.

    For h(y) = rho f(r A y + v) exp(i y.w),
    E h(x, t) = rho r^{1-d} exp(i X.v - i T |v|^2 / 2) E f(X - T v, T)
    with X = A (x - w) / r and T = t / r^2.
    """
    s = symmetry_from_standard(g)
    d = g.dim + 1
    x = _as_points(x, d)
    t = np.asarray(t, dtype=float)
    X = (x - s.w) @ s.A.T / s.r
    T = t / s.r**2
    phase = X @ s.v - 0.5 * T * float(s.v @ s.v)
    base = extension_closed(X - T[..., None] * s.v, T, d)
    return s.rho * s.r ** (1 - d) * np.exp(1j * phase) * base


def extension_direct(x, t: float, d: int, n_panels: int | None = None, order: int = 20, half_width: float = 10.0) -> IntegralResult:
    """Tensor-product Gauss-Legendre quadrature of the defining integral.

    The box [-L, L]^{d-1} discards mass below exp(-L^2/2); the error estimate
    compares the rule against one with half as many panels.
    """
    if d not in (2, 3, 4):
        raise ValueError("direct extension oracle supports d in {2, 3, 4}")
    x = _as_points(x, d).reshape(d - 1)
    t = float(t)
    if n_panels is None:
        n_panels = 16 if d < 4 else 8

    nodes, weights = leggauss(order)

    def rule(panels: int):
        edges = np.linspace(-half_width, half_width, panels + 1)
        h = 0.5 * np.diff(edges)
        mids = 0.5 * (edges[1:] + edges[:-1])
        y = (mids[:, None] + h[:, None] * nodes[None, :]).ravel()
        w = (h[:, None] * weights[None, :]).ravel()
        n = d - 1
        # integrand at every tensor node, chunked along the first axis
        rest = np.stack(np.meshgrid(*([y] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1) if n > 1 else np.zeros((1, 0))
        w_rest = np.prod(np.stack(np.meshgrid(*([w] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1), axis=-1) if n > 1 else np.ones(1)
        total = 0j
        block = max(1, 2**20 // rest.shape[0])
        for i in range(0, y.size, block):
            y1 = y[i : i + block]
            pts = np.concatenate(
                [np.repeat(y1, rest.shape[0])[:, None], np.tile(rest, (y1.size, 1))], axis=1
            )
            vals = np.exp(-1j * (pts @ x) - 0.5 * (1.0 + 1j * t) * np.sum(pts * pts, axis=1))
            total += complex(vals.reshape(y1.size, -1) @ w_rest @ w[i : i + block])
        return total, y.size**n

    fine, n_fine = rule(n_panels)
    coarse, n_coarse = rule(n_panels // 2)
    err = abs(fine - coarse) + math.exp(-0.5 * half_width**2) * TWO_PI ** ((d - 1) / 2)
    return IntegralResult(fine, err, n_fine + n_coarse, True)


def kernel_power(x, t, cfg: ExponentConfig):
    """|u|^{q-2} u for u the standard extension, via the closed simplification."""
    d, q = cfg.d, cfg.q
    x = _as_points(x, d)
    t = np.asarray(t, dtype=float)
    n = d - 1
    x2 = np.sum(x * x, axis=-1)
    log_mod = -0.25 * n * (q - 2.0) * np.log1p(t * t)
    out = (
        TWO_PI ** ((q - 1.0) * n / 2)
        * np.exp(log_mod + (-n / 2) * branch_log(BranchFactor.one_plus_it(), t))
        * np.exp(-x2 * (q - 1.0 - 1j * t) / (2.0 * (1.0 + t * t)))
    )
    return out[()] if np.ndim(out) == 0 else out


def slice_norm_power(t, q: float, r: float, d: int):
    """||u(., t)||_{L^q_x}^{r-q} for the standard extension u."""
    t = np.asarray(t, dtype=float)
    n = d - 1
    log_val = (
        0.5 * (r - q) * n * (1.0 + 1.0 / q) * math.log(TWO_PI)
        - n * (r - q) / (2.0 * q) * math.log(q)
        - n * (r - q) * (q - 2.0) / (4.0 * q) * np.log1p(t * t)
    )
    out = np.exp(log_val)
    return out[()] if np.ndim(out) == 0 else out


def slice_lq_norm_q(t, q: float, d: int):
    """int |u(x, t)|^q dx in closed form (Gaussian integral in x)."""
    t = np.asarray(t, dtype=float)
    n = d - 1
    return TWO_PI ** (q * n / 2) * (TWO_PI / q) ** (n / 2) * (1.0 + t * t) ** (-n * (q - 2.0) / 4)


def phi_standard_closed(cfg: ExponentConfig) -> float:
    """||E f||_q^q / ||f||_p^q for the standard Gaussian, via the Beta integral.

    int (1+t^2)^{-beta} dt = sqrt(pi) Gamma(beta - 1/2) / Gamma(beta).
    """
    n = cfg.d - 1
    q, b = cfg.q, cfg.beta
    log_num = (
        q * n / 2 * math.log(TWO_PI)
        + n / 2 * math.log(TWO_PI / q)
        + 0.5 * math.log(math.pi)
        + math.lgamma(b - 0.5)
        - math.lgamma(b)
    )
    norm_p = GaussianParams.standard(cfg.d).lp_norm(cfg.p)
    return math.exp(log_num - q * math.log(norm_p))
