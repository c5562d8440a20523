import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slowescape.errors import CapacityError, DomainError
from slowescape.maps import (
    CATALOG_NAMES, QUASIREGULAR, catalog, circle_minimum, evaluate, iter_maxmod,
    iter_maxmod_bracket, max_modulus, parse_map,
)
from slowescape.numeric_tower import LevelIndex, from_real

CATALOG = [f.spec for f in catalog()]


def _dense_max(f, r, n=1 << 16):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return float(np.max(np.abs(f(r * np.exp(1j * t)))))


def test_catalog_names_parse():
    for name in CATALOG_NAMES:
        assert parse_map(name).name == name
    with pytest.raises(DomainError):
        parse_map("cosh")


@pytest.mark.parametrize("spec", CATALOG + ["poly:1,0,1", "poly:1j,2.5"])
def test_spec_round_trip(spec):
    canon = parse_map(spec).spec
    assert parse_map(canon).spec == canon
    if not spec.startswith("poly"):
        assert canon == spec


@pytest.mark.parametrize("spec", CATALOG + ["poly:1,-2,0,1"])
@pytest.mark.parametrize("r", [0.7, 3.0, 12.0])
def test_max_modulus_matches_dense_sampling(spec, r):
    f = parse_map(spec)
    dense = _dense_max(f, r)
    assert max_modulus(f, r) >= dense * (1 - 1e-12)
    assert max_modulus(f, r) == pytest.approx(dense, rel=1e-6)


def test_closed_form_max_modulus():
    assert max_modulus(parse_map("exp"), 5.0) == pytest.approx(math.exp(5.0), rel=1e-15)
    assert max_modulus(parse_map("lambda_exp:0.5"), 5.0) == pytest.approx(0.5 * math.exp(5.0), rel=1e-15)
    assert max_modulus(parse_map("zexp"), 5.0) == pytest.approx(5 * math.exp(5.0), rel=1e-15)
    want = math.prod(1 + 40.0 / 2.0 ** (k * k) for k in range(1, 12))
    assert max_modulus(parse_map("sparse_product"), 40.0) == pytest.approx(want, rel=1e-14)


def test_max_modulus_overflow():
    with pytest.raises(CapacityError):
        max_modulus(parse_map("exp"), 800.0)
    with pytest.raises(DomainError):
        max_modulus(parse_map("exp"), -1.0)


def test_iter_maxmod_exp_is_exact():
    for n in range(1, 51):
        assert iter_maxmod(parse_map("exp"), 2, n) == LevelIndex(n, 2.0)


def test_iter_maxmod_small_depth_oracle():
    f = parse_map("zexp")
    r1 = 2 * math.exp(2)
    assert iter_maxmod(f, 2, 1).to_real() == pytest.approx(r1, rel=1e-13)
    assert iter_maxmod(f, 2, 2).to_real() == pytest.approx(r1 * math.exp(r1), rel=1e-12)
    assert iter_maxmod(f, 2, 0) == from_real(2.0)


def test_iter_maxmod_numeric_bracket():
    lo, hi = iter_maxmod_bracket(parse_map("sin"), 3.0, 2)
    assert lo <= hi
    # M(3, sin) is attained on the imaginary axis
    assert iter_maxmod(parse_map("sin"), 3.0, 1).to_real() == pytest.approx(math.sinh(3.0), rel=1e-9)


@pytest.mark.parametrize("spec", CATALOG)
def test_double_and_mp_evaluation_agree(spec):
    f = parse_map(spec)
    z = np.array([1.5 + 0.5j, -2.0 + 3.0j, 0.25 - 4.0j])
    with mpmath.workprec(80):
        mp = [complex(f.mp_eval(mpmath.mpc(c))) for c in z]
    np.testing.assert_allclose(f(z), mp, rtol=1e-12)


@pytest.mark.parametrize("spec", [s for s in CATALOG if not s.startswith("stretch")])
def test_derivative_matches_finite_difference(spec):
    f = parse_map(spec)
    with mpmath.workprec(120):
        z = mpmath.mpc(1.25, -0.75)
        fd = mpmath.diff(f.mp_eval, z)
        assert abs(f.mp_derivative(z) - fd) <= 1e-20 * abs(fd)
    assert complex(f.derivative(np.array([complex(z)]))[0]) == pytest.approx(complex(fd), rel=1e-12)


def test_stretch_exp_is_quasiregular():
    f = parse_map("stretch_exp:K=3")
    assert f.kind == QUASIREGULAR and f.dilatation_K == 3.0
    assert f.derivative(np.array([1j])) is None
    with pytest.raises(DomainError):
        parse_map("stretch_exp:K=0.5")


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(["exp", "lambda_exp:0.5", "sin", "zexp",
                                                             "stretch_exp:K=2.0"]))
def test_inverse_candidates_are_preimages(x, y, spec):
    f = parse_map(spec)
    with mpmath.workprec(100):
        w = f.mp_eval(mpmath.mpc(x, y))
        if abs(w) < 1e-6:
            return
        cands = f.inverse_candidates(w, mpmath.mpc(x, y), count=1)
        assert cands
        for z in cands:
            assert abs(f.mp_eval(z) - w) <= 1e-20 * max(abs(w), 1)


def test_evaluate_precision_ladder():
    f = parse_map("exp")
    v = evaluate(f, 100 + 1j)
    with mpmath.workprec(200):
        assert abs(v - mpmath.exp(mpmath.mpc(100, 1))) <= 1e-12 * abs(v)


def test_circle_minimum_finds_zero_of_sin():
    m, z = circle_minimum(parse_map("sin"), 0.0, math.pi)
    assert m < 1e-8
    assert abs(abs(z) - math.pi) < 1e-9


def test_lambda_exp_tower_against_mpmath():
    # M^2(1) for 2 e^z is 2 exp(2e)
    got = iter_maxmod(parse_map("lambda_exp:2.0"), 1.0, 2).to_real()
    with mpmath.workprec(128):
        want = 2 * mpmath.exp(2 * mpmath.e)
    assert got == pytest.approx(float(want), rel=1e-12)
    assert round(got, 2) == 459.30
