"""Space-time grids, mixed Lebesgue norms and the two functionals.

Fields are sampled on a product grid: a double-exponential map in t handles
the algebraic decay of |E g|^q in time, and a uniform trapezoid in a
reference variable xi handles the Gaussian profile in x. By default the
x-nodes of each time slice are xi * sqrt(1 + t^2), following the spreading
of the standard Gaussian's extension, so a fixed xi-window covers every slice.

    ||F||_{L^r_t L^q_x}^r = sum_t w_t (sum_x w_x |F(x, t)|^q)^{r/q}
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from gausscrit.contour import I_of_a
from gausscrit.exponents import AdmissiblePair, DomainError, ExponentConfig
from gausscrit.gaussian import TWO_PI, GaussianParams, extension
from gausscrit.quadrature import QuadSpec

NOISE_FLOOR = 1e-9


class GridKind(enum.Enum):
    TANH_MAP = "TanhMap"
    UNIFORM = "Uniform"


def _default_n_x(d: int) -> int:
    return {2: 128, 3: 64}.get(d, 24)


@dataclass(frozen=True)
class GridSpec:
    """Construction parameters of a :class:`SpaceTimeGrid`.

    ``decay`` is the algebraic rate kappa of the time integrand, |.| ~ |t|^-kappa;
    it sets where the double-exponential map is truncated.
    """

    d: int
    n_t: int = 256
    n_x: int | None = None
    decay: float = 2.0
    half_width: float = 12.0
    scaled_x: bool = True
    kind: GridKind = GridKind.TANH_MAP
    t_half_width: float = 10.0
    tail_tol: float = 1e-16

    def __post_init__(self):
        if self.d < 2:
            raise DomainError("d must be >= 2")
        if self.n_x is None:
            object.__setattr__(self, "n_x", _default_n_x(self.d))
        if self.n_t < 4 or self.n_x < 4:
            raise DomainError("need at least 4 nodes per axis")
        if self.kind is GridKind.TANH_MAP and not self.decay > 1.0:
            raise DomainError(f"time decay exponent must exceed 1, got {self.decay}")

    def refined(self) -> "GridSpec":
        return replace(self, n_t=2 * self.n_t, n_x=2 * self.n_x)

    def build(self) -> "SpaceTimeGrid":
        n = self.d - 1
        xi = np.linspace(-self.half_width, self.half_width, self.n_x)
        wx = np.full(self.n_x, xi[1] - xi[0])
        wx[[0, -1]] *= 0.5
        if self.kind is GridKind.TANH_MAP:
            k = self.decay - 1.0
            T = min((self.tail_tol * k) ** (-1.0 / k), 1e250)
            U = math.asinh(2.0 / math.pi * math.asinh(T))
            h = 2.0 * U / self.n_t
            u = -U + h * (np.arange(self.n_t) + 0.5)
            s = 0.5 * math.pi * np.sinh(u)
            t = np.sinh(s)
            wt = h * 0.5 * math.pi * np.cosh(u) * np.cosh(s)
        else:
            t = np.linspace(-self.t_half_width, self.t_half_width, self.n_t)
            wt = np.full(self.n_t, t[1] - t[0])
            wt[[0, -1]] *= 0.5
        mesh = np.meshgrid(*([xi] * n), indexing="ij")
        ref = np.stack(mesh, axis=-1).reshape(-1, n)
        ref_w = np.prod(np.stack(np.meshgrid(*([wx] * n), indexing="ij"), axis=-1).reshape(-1, n), axis=-1)
        return SpaceTimeGrid(self, xi, wx, ref, ref_w, t, wt)


@dataclass(frozen=True, eq=False)
class SpaceTimeGrid:
    spec: GridSpec
    xi: np.ndarray
    xi_weights: np.ndarray
    ref_points: np.ndarray
    ref_weights: np.ndarray
    t_nodes: np.ndarray
    t_weights: np.ndarray

    def __post_init__(self):
        for name in ("xi", "t_nodes"):
            if not np.all(np.diff(getattr(self, name)) > 0):
                raise ValueError(f"{name} must be strictly increasing")
        for name in ("xi_weights", "ref_weights", "t_weights"):
            if not np.all(getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive")

    @classmethod
    def default(cls, d: int, **kw) -> "SpaceTimeGrid":
        return GridSpec(d, **kw).build()

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def provenance(self) -> GridKind:
        return self.spec.kind

    @property
    def shape(self) -> tuple[int, int]:
        return self.t_nodes.size, self.ref_weights.size

    @property
    def x_scale(self) -> np.ndarray:
        if self.spec.scaled_x:
            return np.sqrt(1.0 + self.t_nodes**2)
        return np.ones_like(self.t_nodes)

    def x_points(self, rows=slice(None)) -> np.ndarray:
        """Physical x-nodes, shape (rows, N_x, d-1)."""
        return self.x_scale[rows, None, None] * self.ref_points[None, :, :]

    def x_weights(self) -> np.ndarray:
        """Per-slice x-weights, shape (n_t, N_x)."""
        return self.x_scale[:, None] ** (self.d - 1) * self.ref_weights[None, :]


@dataclass(frozen=True, eq=False)
class SampledField:
    grid: SpaceTimeGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values have shape {vals.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)

    def _check(self, other: "SampledField"):
        if other.grid is not self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other: "SampledField") -> "SampledField":
        self._check(other)
        return SampledField(self.grid, self.values + other.values)

    def __mul__(self, c: complex) -> "SampledField":
        return SampledField(self.grid, complex(c) * self.values)

    __rmul__ = __mul__

    def plus(self, z: complex, other: "SampledField") -> "SampledField":
        """self + z * other."""
        self._check(other)
        return SampledField(self.grid, self.values + complex(z) * other.values)

    def to_csv(self, stream=None) -> str | None:
        """Rows of x_1..x_{d-1}, t, Re, Im; returns the text when no stream is given."""
        out = stream if stream is not None else io.StringIO()
        n = self.grid.d - 1
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(n)] + ["t", "re", "im"] if n > 1 else ["x", "t", "re", "im"])
        pts = self.grid.x_points()
        for i, t in enumerate(self.grid.t_nodes):
            for j in range(pts.shape[1]):
                v = self.values[i, j]
                row = [*pts[i, j], t, v.real, v.imag]
                writer.writerow([format(float(c), ".17g") for c in row])
        return out.getvalue() if stream is None else None


def sample_extension(grid: SpaceTimeGrid, g: GaussianParams, threads: int = 1) -> SampledField:
    """E g on every node; rows are filled in independent chunks."""
    if g.dim != grid.d - 1:
        raise ValueError("Gaussian and grid dimensions differ")
    n_t = grid.t_nodes.size
    step = max(1, min(64, n_t // max(threads, 1)))
    chunks = [slice(i, min(i + step, n_t)) for i in range(0, n_t, step)]
    out = np.empty(grid.shape, dtype=complex)

    def fill(rows: slice):
        out[rows] = extension(g, grid.x_points(rows), grid.t_nodes[rows, None])

    if threads <= 1:
        for rows in chunks:
            fill(rows)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, chunks))
    return SampledField(grid, out)


def _slice_integrals(F: SampledField, q: float) -> np.ndarray:
    """int |F(x, t)|^q dx for every t-node."""
    return np.sum(np.abs(F.values) ** q * F.grid.x_weights(), axis=1)


def mixed_norm_power(F: SampledField, q: float, r: float) -> float:
    """||F||^r in L^r_t L^q_x."""
    if not (q > 1 and r > 1):
        raise DomainError("q and r must exceed 1")
    return float(np.sum(F.grid.t_weights * _slice_integrals(F, q) ** (r / q)))


def mixed_norm_value(F: SampledField, q: float, r: float) -> float:
    return mixed_norm_power(F, q, r) ** (1.0 / r)


def first_variation(F: SampledField, G: SampledField, q: float, r: float, z: complex) -> float:
    """r sum_t w_t ||F_t||_q^{r-q} sum_x w_x |F|^q Re(z G / F); nodes with F = 0 drop out.

    |F|^q Re(zG/F) is evaluated as |F|^{q-1} Re(zG conj(F)/|F|), which never
    divides by a tiny F.
    """
    F._check(G)
    S = _slice_integrals(F, q)
    absF = np.abs(F.values)
    # conj(F)/|F| from the angle: dividing subnormal values can overflow
    phase = np.where(absF > 0, np.exp(-1j * np.angle(F.values)), 0.0)
    inner = np.sum(absF ** (q - 1) * (complex(z) * G.values * phase).real * F.grid.x_weights(), axis=1)
    pos = S > 0
    slice_pow = np.zeros_like(S)
    slice_pow[pos] = S[pos] ** ((r - q) / q)
    return float(r * np.sum(F.grid.t_weights * slice_pow * inner))


@dataclass
class VariationReport:
    base_norm_r: float
    first_order_coeff: float
    remainders: list[tuple[float, float]]
    fitted_slope: float
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "base_norm_r": self.base_norm_r,
            "first_order_coeff": self.first_order_coeff,
            "remainders": [list(pair) for pair in self.remainders],
            "fitted_slope": self.fitted_slope,
            "degenerate": self.degenerate,
            "notes": list(self.notes),
        }


def remainder_slope(
    F: SampledField, G: SampledField, q: float, r: float, z_magnitudes, phase: complex = 1.0
) -> VariationReport:
    """Log-log slope of |N(F + zG) - N(F) - first_variation(z)| against |z|, N = ||.||^r.

    z runs over m * phase for m in ``z_magnitudes``; first_order_coeff is the
    first variation at z = phase.
    """
    mags = [float(m) for m in z_magnitudes]
    if len(mags) < 4 or any(not 1e-5 <= m <= 1e-1 for m in mags):
        raise DomainError("need at least 4 magnitudes in [1e-5, 1e-1]")
    phase = complex(phase) / abs(phase)
    base = mixed_norm_power(F, q, r)
    coeff = first_variation(F, G, q, r, phase)
    rem = []
    for m in mags:
        full = mixed_norm_power(F.plus(m * phase, G), q, r)
        rem.append((m, abs(full - base - m * coeff)))
    notes = []
    floor = 64 * np.finfo(float).eps * base
    degenerate = any(v <= floor for _, v in rem)
    if degenerate:
        notes.append(f"some remainders are at the rounding floor {floor:.3g}; slope unreliable")
    if not all(math.isfinite(v) for _, v in rem):
        raise FloatingPointError("non-finite remainder")
    logs = np.log([(m, max(v, 1e-300)) for m, v in rem])
    slope = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    return VariationReport(base, coeff, rem, slope, degenerate, notes)


# ---------------------------------------------------------------------------
# functionals


def phi_grid(cfg: ExponentConfig, **kw) -> SpaceTimeGrid:
    """Grid suited to |E g|^q, whose time integrand decays like |t|^{-2 beta}."""
    return GridSpec(cfg.d, decay=2.0 * cfg.beta, **kw).build()


def phi_numerator(F: SampledField, q: float) -> float:
    return float(np.sum(F.grid.t_weights * _slice_integrals(F, q)))


def phi_value(g: GaussianParams, cfg: ExponentConfig, grid: SpaceTimeGrid | None = None) -> float:
    """||E g||_q^q / ||g||_p^q with the numerator on the grid, the denominator closed."""
    if g.dim != cfg.d - 1:
        raise DomainError("Gaussian dimension does not match cfg.d")
    grid = grid or phi_grid(cfg)
    return phi_numerator(sample_extension(grid, g), cfg.q) / g.lp_norm(cfg.p) ** cfg.q


def psi_value(g: GaussianParams, pair: AdmissiblePair, grid: SpaceTimeGrid | None = None) -> float:
    """||E g||^r_{L^r_t L^q_x} / ||g||_2^r."""
    if not isinstance(pair, AdmissiblePair):
        raise DomainError(f"pair is not admissible: {pair}")
    if g.dim != pair.d - 1:
        raise DomainError("Gaussian dimension does not match pair.d")
    grid = grid or GridSpec(pair.d, decay=2.0).build()
    return mixed_norm_power(sample_extension(grid, g), pair.q, pair.r) / g.lp_norm(2.0) ** pair.r


# ---------------------------------------------------------------------------
# directional derivatives (d = 2)


def direction_dictionary() -> dict[str, GaussianParams]:
    """Named Gaussian perturbation directions in d = 2."""
    return {
        "width-z1": GaussianParams.make(2, z=1.0),
        "width-z0.25": GaussianParams.make(2, z=0.25),
        "shifted": GaussianParams.make(2, z=0.5, y0=[0.6]),
        "boosted": GaussianParams.make(2, z=0.5, v=[0.8j]),
        "tilted": GaussianParams.make(2, z=0.7, y0=[-0.3], v=[0.4 + 0.5j]),
    }


def _y_nodes(gs, p: float, per_width: int = 12, span: float = 12.0):
    """Trapezoid nodes on R covering every Gaussian in ``gs`` (d = 2)."""
    lo, hi, width = math.inf, -math.inf, math.inf
    for g in gs:
        zr = g.z.real
        centre = float(g.y0[0] + g.v.real[0] / (2 * zr))
        w = 1.0 / math.sqrt(min(p, 2.0) * zr)
        lo, hi, width = min(lo, centre - span * w), max(hi, centre + span * w), min(width, w)
    n = int(math.ceil((hi - lo) / (width / per_width))) + 1
    y = np.linspace(lo, hi, n)
    w = np.full(n, y[1] - y[0])
    w[[0, -1]] *= 0.5
    return y, w


@dataclass
class DerivativeReport:
    real: float
    imag: float
    phi: float
    eps: list[float]
    real_estimates: list[float]
    imag_estimates: list[float]
    noise_floor: bool = False

    @property
    def magnitude(self) -> float:
        return math.hypot(self.real, self.imag)

    @property
    def relative(self) -> float:
        return self.magnitude / self.phi

    def as_dict(self) -> dict:
        return {
            "real": self.real,
            "imag": self.imag,
            "magnitude": self.magnitude,
            "relative": self.relative,
            "phi": self.phi,
            "eps": list(self.eps),
            "real_estimates": list(self.real_estimates),
            "imag_estimates": list(self.imag_estimates),
            "noise_floor": self.noise_floor,
        }


def richardson_zero(eps, values) -> float:
    """Neville extrapolation to eps = 0 of values with an expansion in eps^2."""
    x = [e * e for e in eps]
    P = list(values)
    n = len(P)
    for m in range(1, n):
        for i in range(n - m):
            P[i] = (x[i + m] * P[i] - x[i] * P[i + 1]) / (x[i + m] - x[i])
    return P[0]


def directional_derivative_phi(
    g: GaussianParams,
    direction: GaussianParams,
    cfg: ExponentConfig,
    eps_list=(1e-2, 5e-3, 2.5e-3),
    grid: SpaceTimeGrid | None = None,
) -> DerivativeReport:
    """d/de Phi(g + e * direction) at e = 0 for real e and for imaginary e.

    Central differences are extrapolated to zero step. The numerator uses the
    grid; the denominator ||g + e dir||_p uses a fine trapezoid in y.
    """
    if cfg.d != 2:
        raise DomainError("directional derivatives are implemented for d = 2")
    if len(eps_list) < 1 or any(not e > 0 for e in eps_list):
        raise DomainError("eps_list must hold positive steps")
    grid = grid or phi_grid(cfg)
    p, q = cfg.p, cfg.q
    U = sample_extension(grid, g)
    V = sample_extension(grid, direction)
    y, wy = _y_nodes([g, direction], p)
    fy = g(y[:, None])
    gy = direction(y[:, None])

    def phi_at(e: complex) -> float:
        num = phi_numerator(U.plus(e, V), q)
        den = float(np.sum(wy * np.abs(fy + e * gy) ** p)) ** (q / p)
        return num / den

    phi0 = phi_at(0.0)
    est = {}
    floor = True
    for unit in (1.0, 1j):
        diffs = []
        for e in eps_list:
            hi, lo = phi_at(e * unit), phi_at(-e * unit)
            floor = floor and abs(hi - lo) < NOISE_FLOOR * phi0
            diffs.append((hi - lo) / (2.0 * e))
        est[unit] = diffs
    return DerivativeReport(
        real=richardson_zero(eps_list, est[1.0]),
        imag=richardson_zero(eps_list, est[1j]),
        phi=phi0,
        eps=[float(e) for e in eps_list],
        real_estimates=est[1.0],
        imag_estimates=est[1j],
        noise_floor=floor,
    )


def adjoint_kernel(y, cfg: ExponentConfig, spec: QuadSpec = QuadSpec()) -> np.ndarray:
    """W(y) = (2 pi)^{(d-1) q / 2} I(|y|^2 / 2), the adjoint extension of |u|^{q-2} u.

    Here u is the extension of the standard Gaussian; W is real.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if y.shape[-1] != cfg.d - 1:
        y = y.reshape(-1, cfg.d - 1)
    a = 0.5 * np.sum(y * y, axis=-1)
    uniq, inv = np.unique(a, return_inverse=True)
    vals = np.array([I_of_a(float(x), cfg, spec=spec).value.real for x in uniq])
    return TWO_PI ** ((cfg.d - 1) * cfg.q / 2) * vals[inv]


@dataclass
class PairingReport:
    real: float
    imag: float
    phi: float
    numerator: float

    @property
    def magnitude(self) -> float:
        return math.hypot(self.real, self.imag)

    def as_dict(self) -> dict:
        return {"real": self.real, "imag": self.imag, "magnitude": self.magnitude, "phi": self.phi, "numerator": self.numerator}


def el_pairing_derivative(direction: GaussianParams, cfg: ExponentConfig, spec: QuadSpec = QuadSpec()) -> PairingReport:
    """Derivative of Phi at the standard Gaussian predicted by pairing both sides
    of the Euler-Lagrange equation against ``direction`` (d = 2).

    dPhi = q/D (<dir, W> - N/||f||_p^p <dir, f^{p-1}>), real part for real steps
    and minus the imaginary part for imaginary steps.
    """
    if cfg.d != 2:
        raise DomainError("the pairing derivative is implemented for d = 2")
    f = GaussianParams.standard(2)
    p, q = cfg.p, cfg.q
    y, wy = _y_nodes([f, direction], p)
    W = adjoint_kernel(y[:, None], cfg, spec)
    fy = f(y[:, None]).real
    gy = direction(y[:, None])
    N = float(np.sum(wy * fy * W))
    fp = float(np.sum(wy * fy**p))
    D = fp ** (q / p)
    PN = complex(np.sum(wy * gy * W))
    PD = complex(np.sum(wy * fy ** (p - 1) * gy))
    lam = N / fp
    d_complex = q / D * (PN - lam * PD)
    return PairingReport(d_complex.real, -d_complex.imag, N / D, N)
