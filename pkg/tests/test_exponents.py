import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gausscrit.exponents import (
    AdmissiblePair,
    Case,
    DomainError,
    Rejection,
    check_admissible,
    diagonal_pair,
    dual_exponent,
    make_config,
    p_upper,
)


@pytest.mark.parametrize("p,d,q", [(2.0, 3, 4.0), (2.0, 2, 6.0), (1.5, 3, 6.0)])
def test_dual_exponent_examples(p, d, q):
    assert dual_exponent(p, d) == pytest.approx(q, rel=1e-15)


@pytest.mark.parametrize(
    "p,d,q,beta,k0,case",
    [
        (1.5, 2, 9.0, 1.75, 2, Case.SUBCRITICAL),
        (2.0, 3, 4.0, 1.0, 1, Case.CRITICAL),
        (2.5, 2, 5.0, 0.75, 1, Case.SUPERCRITICAL),
    ],
)
def test_make_config_examples(p, d, q, beta, k0, case):
    cfg = make_config(p, d)
    assert cfg.q == pytest.approx(q, rel=1e-14)
    assert cfg.beta == pytest.approx(beta, rel=1e-14)
    assert cfg.k0 == k0
    assert cfg.case is case


def test_integer_beta_is_snapped():
    cfg = make_config(1.5, 3)
    assert cfg.beta == 2.0 and cfg.beta_is_integer and cfg.k0 == 2


def test_critical_beta_exact():
    for d in range(2, 9):
        cfg = make_config(2.0, d)
        assert cfg.beta == 1.0
        assert cfg.q == 2.0 * (d + 1) / (d - 1)


@pytest.mark.parametrize("p,d", [(1.0, 2), (0.5, 2), (4.0, 2), (3.0, 3), (1.5, 1), (float("nan"), 2)])
def test_domain_errors(p, d):
    with pytest.raises(DomainError):
        make_config(p, d)


def test_error_names_constraint():
    with pytest.raises(DomainError, match="p must lie in"):
        make_config(0.5, 2)


def test_boundary_rejected_by_integrability():
    # just below the upper endpoint (d-1)(q-2) is barely above 2
    with pytest.raises(DomainError):
        make_config(p_upper(3) * (1 - 1e-12), 3)


@pytest.mark.parametrize(
    "r,q,d,ok,residual",
    [(4, 4, 3, True, 0.0), (8, 4, 2, True, 0.0), (4, 4, 2, False, 0.25)],
)
def test_check_admissible_examples(r, q, d, ok, residual):
    out = check_admissible(r, q, d)
    assert bool(out) is ok
    if ok:
        assert isinstance(out, AdmissiblePair)
        assert out.slice_power == pytest.approx(1.0, rel=1e-14)
    else:
        assert isinstance(out, Rejection)
        assert out.residual == pytest.approx(residual, rel=1e-14)


def test_rejects_small_or_infinite():
    assert not check_admissible(1.5, 4, 3)
    assert not check_admissible(float("inf"), 2.0, 3)
    assert not check_admissible(7.9, 4, 2)


@pytest.mark.parametrize("d", range(2, 9))
def test_diagonal_consistency(d):
    pair = diagonal_pair(d)
    assert pair.q == pair.r == make_config(2.0, d).q


valid = st.integers(2, 8).flatmap(
    lambda d: st.tuples(st.floats(1.0 + 1e-6, p_upper(d) * (1 - 1e-6)), st.just(d))
)


def _valid(p, d):
    try:
        return make_config(p, d)
    except DomainError:
        return None


@settings(max_examples=1000, deadline=None, derandomize=True)
@given(valid)
def test_round_trip(pd):
    p, d = pd
    cfg = _valid(p, d)
    if cfg is None:  # only the integrability margin at the top end
        assert (d - 1) * (dual_exponent(p, d) - 2) <= 2 + 1e-9
        return
    # 1/q = ((d-1)/(d+1))(1 - 1/p) solved back for p
    p_back = 1.0 / (1.0 - (d + 1) / ((d - 1) * cfg.q))
    assert abs(p_back - p) <= 1e-12 * p
    assert cfg.q > 2 * d / (d - 1)
    assert cfg.k0 == math.ceil(cfg.beta) >= 1
    assert cfg.case is (Case.SUBCRITICAL if p < 2 else Case.CRITICAL if p == 2 else Case.SUPERCRITICAL)
    if cfg.case is Case.SUPERCRITICAL:
        assert 0.5 <= cfg.beta < 1.0


@pytest.mark.parametrize("d", range(2, 9))
def test_monotone_in_p(d):
    ps = np.linspace(1.0, p_upper(d), 2001)[1:-1]
    qs = [dual_exponent(p, d) for p in ps]
    assert all(a > b for a, b in zip(qs, qs[1:]))
