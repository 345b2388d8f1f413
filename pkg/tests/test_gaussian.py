import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gausscrit.exponents import make_config
from gausscrit.gaussian import (
    GaussianParams,
    SymmetryElement,
    apply_symmetry,
    extension,
    extension_closed,
    extension_direct,
    kernel_power,
    phi_standard_closed,
    slice_lq_norm_q,
    slice_norm_power,
    symmetry_from_standard,
)
from gausscrit.quadrature import QuadSpec, integrate_real_line

TWO_PI = 2 * math.pi


def test_standard():
    g = GaussianParams.standard(3)
    assert g.c == 1 and g.z == 0.5 and not g.y0.any() and not g.v.any()
    y = np.array([[0.3, -1.2]])
    assert g(y)[0] == pytest.approx(math.exp(-0.5 * (0.09 + 1.44)))


def test_invalid_params():
    with pytest.raises(ValueError):
        GaussianParams.make(2, z=-0.1)
    with pytest.raises(ValueError):
        GaussianParams.make(2, c=0)
    with pytest.raises(ValueError):
        SymmetryElement(1, 1, [[1, 1], [0, 1]], [0, 0], [0, 0])


def test_lp_norm_against_quadrature():
    g = GaussianParams.make(2, c=1.5 - 0.5j, z=0.8, y0=[0.4], v=[0.3 + 0.7j])
    for p in (1.5, 2.0, 2.5):
        y = np.linspace(-20, 20, 40001)
        num = (np.sum(np.abs(g(y[:, None])) ** p) * (y[1] - y[0])) ** (1 / p)
        assert g.lp_norm(p) == pytest.approx(num, rel=1e-12)


def test_extension_closed_examples():
    assert extension_closed(np.zeros(2), 0.0, 3) == pytest.approx(TWO_PI, rel=1e-15)
    assert abs(extension_closed(0.0, 1.0, 2)) == pytest.approx(math.sqrt(TWO_PI) * 2**-0.25, rel=1e-15)
    x = np.array([0.7, -1.1])
    assert extension_closed(x, 0.4, 3) == extension_closed(-x, 0.4, 3)


def test_extension_direct_examples():
    r = extension_direct(0.0, 0.0, 2)
    assert abs(r.value - math.sqrt(TWO_PI)) <= 1e-10
    assert abs(extension_direct([1.0], 0.5, 2).value - extension_closed(1.0, 0.5, 2)) <= 1e-8
    assert abs(extension_direct([1.0, 1.0], 2.0, 3).value - extension_closed([1.0, 1.0], 2.0, 3)) <= 1e-8


def test_extension_direct_d4():
    x = np.array([0.5, -0.2, 0.3])
    r = extension_direct(x, 0.7, 4)
    assert abs(r.value - extension_closed(x, 0.7, 4)) <= 1e-8


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-50, 50), st.integers(2, 5))
def test_modulus_law(x1, x2, t, d):
    x = np.array([x1, x2, 0.3, -0.4])[: d - 1]
    n = d - 1
    expected = TWO_PI ** (n / 2) * (1 + t * t) ** (-n / 4) * math.exp(-float(x @ x) / (2 * (1 + t * t)))
    assert abs(extension_closed(x, t, d)) == pytest.approx(expected, rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("d", [2, 3])
def test_kernel_examples(d):
    cfg = make_config(2.0 if d == 3 else 1.5, d)
    n = d - 1
    assert kernel_power(np.zeros(n), 0.0, cfg) == pytest.approx(TWO_PI ** ((cfg.q - 1) * n / 2), rel=1e-14)
    x = np.full(n, 0.6)
    expected = TWO_PI ** ((cfg.q - 1) * n / 2) * math.exp(-float(x @ x) * (cfg.q - 1) / 2)
    assert kernel_power(x, 0.0, cfg) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(-30, 30), st.sampled_from([(1.5, 2), (2.5, 2), (2.0, 3), (1.25, 3)]))
def test_kernel_identity(x1, x2, t, pd):
    cfg = make_config(*pd)
    x = np.array([x1, x2])[: cfg.d - 1]
    u = extension_closed(x, t, cfg.d)
    expected = abs(u) ** (cfg.q - 2) * u
    assert abs(kernel_power(x, t, cfg) - expected) <= 1e-12 * abs(expected)


def test_slice_norm_power():
    assert slice_norm_power(3.0, 4.0, 4.0, 3) == 1.0
    q, r, d = 4.0, 8.0, 2
    pref = TWO_PI ** ((r - q) * (1 + 1 / q) / 2) * q ** (-(r - q) / (2 * q))
    assert slice_norm_power(0.0, q, r, d) == pytest.approx(pref, rel=1e-14)
    x = np.linspace(-40, 40, 80001)
    lq = np.sum(np.abs(extension_closed(x, 1.0, 2)) ** q) * (x[1] - x[0])
    assert abs(lq ** ((r - q) / q) - slice_norm_power(1.0, q, r, d)) <= 1e-8 * lq ** ((r - q) / q)
    assert slice_lq_norm_q(1.0, q, d) == pytest.approx(lq, rel=1e-8)


def test_symmetry_examples():
    g = GaussianParams.make(3, c=2 - 1j, z=0.7, y0=[0.2, -0.3], v=[0.1 + 0.2j, -0.4j])
    assert apply_symmetry(g, SymmetryElement.identity(3)).allclose(g)
    w = np.array([0.3, -1.2])
    mod = apply_symmetry(g, SymmetryElement(1, 1, np.eye(2), np.zeros(2), w))
    assert mod.allclose(GaussianParams(g.c, g.z, g.y0, g.v + 1j * w))
    dil = apply_symmetry(GaussianParams.standard(3), SymmetryElement(1, 1.7, np.eye(2), np.zeros(2), np.zeros(2)))
    assert dil.z == pytest.approx(1.7**2 / 2) and not dil.y0.any() and not dil.v.any() and dil.c == 1


@pytest.mark.parametrize("seed", range(20))
def test_symmetry_acts_pointwise(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 3
    g = apply_symmetry(GaussianParams.standard(d), SymmetryElement.random(d, rng))
    s = SymmetryElement.random(d, rng)
    h = apply_symmetry(g, s)
    y = rng.normal(size=(7, d - 1))
    direct = s.rho * g((y @ s.A.T) * s.r + s.v) * np.exp(1j * y @ s.w)
    assert np.allclose(h(y), direct, rtol=1e-12, atol=0)


@pytest.mark.parametrize("seed", range(30))
def test_group_law(seed):
    rng = np.random.default_rng(100 + seed)
    d = 2 + seed % 3
    g = GaussianParams.make(d, c=1 + 0.5j, z=0.6, y0=rng.normal(size=d - 1), v=rng.normal(size=d - 1) + 1j * rng.normal(size=d - 1))
    s1, s2 = SymmetryElement.random(d, rng), SymmetryElement.random(d, rng)
    assert apply_symmetry(apply_symmetry(g, s1), s2).allclose(apply_symmetry(g, s2.compose(s1)), tol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_symmetry_from_standard_roundtrip(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 2
    g = apply_symmetry(GaussianParams.standard(d), SymmetryElement.random(d, rng))
    back = apply_symmetry(GaussianParams.standard(d), symmetry_from_standard(g))
    y = rng.normal(size=(5, d - 1))
    assert np.allclose(back(y), g(y), rtol=1e-12, atol=0)


def test_complex_width_unreachable():
    with pytest.raises(ValueError):
        symmetry_from_standard(GaussianParams.make(2, z=0.5 + 0.2j))


@pytest.mark.parametrize("seed", range(6))
def test_transported_extension_matches_direct(seed):
    rng = np.random.default_rng(seed)
    d = 2
    g = apply_symmetry(GaussianParams.standard(d), SymmetryElement.random(d, rng, spread=0.8))
    for x, t in ((0.3, 0.0), (-1.2, 0.8), (2.0, -1.5)):
        ys = np.linspace(-30, 30, 120001)
        vals = np.exp(-1j * (x * ys + 0.5 * t * ys**2)) * g(ys[:, None])
        ref = np.sum(vals) * (ys[1] - ys[0])
        assert abs(extension(g, x, t) - ref) <= 1e-9 * max(1.0, abs(ref))


@pytest.mark.parametrize("d", [2, 3])
def test_oracle_agreement_grid(d):
    for x1 in np.linspace(-2, 2, 5):
        for t in np.linspace(-2, 2, 5):
            x = np.full(d - 1, x1)
            r = extension_direct(x, t, d)
            assert abs(r.value - extension_closed(x, t, d)) <= 1e-8


@pytest.mark.parametrize("p,d", [(2.0, 2), (2.0, 3), (1.5, 2), (2.5, 2)])
def test_phi_closed_against_quadrature(p, d):
    cfg = make_config(p, d)
    lq = integrate_real_line(lambda t: slice_lq_norm_q(t, cfg.q, d), QuadSpec(decay_exponent=2 * cfg.beta)).value.real
    f = GaussianParams.standard(d)
    assert phi_standard_closed(cfg) == pytest.approx(lq / f.lp_norm(p) ** cfg.q, rel=1e-10)
    if p == 2.0 and d == 2:
        assert phi_standard_closed(cfg) == pytest.approx(TWO_PI**3 / math.sqrt(3), rel=1e-14)
