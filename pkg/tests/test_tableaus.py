"""Tableau construction and the symplectic-condition predicate."""

import math

import numpy as np
import pytest

from rough_symplectic.tableaus import (
    BUILTIN_TABLEAU_NAMES,
    ButcherTableau,
    builtin_tableau,
    is_symplectic,
    method2_coefficient,
    symplectic_residual,
)


def test_builtin_names_cover_three_methods():
    assert BUILTIN_TABLEAU_NAMES == ("midpoint", "method-1", "method-2")


def test_midpoint_tableau_values():
    t = builtin_tableau("midpoint")
    assert t.stages == 1
    assert t.a.tolist() == [[0.5]]
    assert t.b.tolist() == [1.0]


def test_method_1_is_the_two_stage_gauss_tableau():
    t = builtin_tableau("method-1")
    s3 = math.sqrt(3.0)
    expected_a = np.array([[0.25, 0.25 - s3 / 6.0], [0.25 + s3 / 6.0, 0.25]])
    assert t.stages == 2
    np.testing.assert_allclose(t.a, expected_a, rtol=0, atol=1e-16)
    np.testing.assert_array_equal(t.b, [0.5, 0.5])


def test_method_2_has_three_stages_and_consistent_weights():
    t = builtin_tableau("method-2")
    assert t.stages == 3
    # row-sum consistency: the weights integrate constants exactly
    assert math.isclose(t.b.sum(), 1.0, rel_tol=0, abs_tol=1e-15)


def test_builtin_tableaus_satisfy_symplectic_condition_exactly():
    # b_a a_ab + b_b a_ba - b_a b_b vanishes in exact arithmetic for all
    # three methods; the float64 residual is exactly zero as well because
    # every term pairs with its own negation.
    for name in BUILTIN_TABLEAU_NAMES:
        t = builtin_tableau(name)
        assert symplectic_residual(t) == 0.0
        assert is_symplectic(t)


def test_explicit_euler_fails_the_predicate():
    t = ButcherTableau(name="explicit-euler", a=np.array([[0.0]]), b=np.array([1.0]))
    assert symplectic_residual(t) == 1.0
    assert not is_symplectic(t)


def test_classical_rk4_fails_the_predicate():
    a = np.array(
        [
            [0.0, 0.0, 0.0, 0.0],
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )
    b = np.array([1.0, 2.0, 2.0, 1.0]) / 6.0
    assert not is_symplectic(ButcherTableau(name="rk4", a=a, b=b))


def test_method2_coefficient_matches_arbitrary_precision_root():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    exact = mp.findroot(lambda x: 6 * x**3 - 12 * x**2 + 6 * x - 1, mp.mpf("1.35"))
    c = method2_coefficient()
    # Newton in float64 may stop one ulp from the correctly rounded root.
    assert abs(float(mp.mpf(c) - exact)) <= 2 * np.spacing(c)


def test_method2_coefficient_is_a_float64_fixed_point():
    c = method2_coefficient()
    assert 6 * c**3 - 12 * c**2 + 6 * c - 1 == 0.0
    assert 1.3 < c < 1.4


def test_tableau_arrays_are_read_only():
    t = builtin_tableau("midpoint")
    with pytest.raises(ValueError):
        t.a[0, 0] = 0.0
    with pytest.raises(ValueError):
        t.b[0] = 2.0


def test_tableau_validation_rejects_bad_shapes():
    with pytest.raises(ValueError):
        ButcherTableau(name="bad", a=np.zeros((2, 3)), b=np.zeros(2))
    with pytest.raises(ValueError):
        ButcherTableau(name="bad", a=np.zeros((2, 2)), b=np.zeros(3))
    with pytest.raises(ValueError):
        ButcherTableau(name="bad", a=np.array([[np.nan]]), b=np.array([1.0]))


def test_unknown_builtin_name_raises():
    with pytest.raises(ValueError, match="unknown tableau"):
        builtin_tableau("leapfrog")


def test_random_perturbations_break_symplecticity():
    # property: almost-sure failure under generic perturbation of a valid
    # tableau, so the predicate is not trivially true
    rng = np.random.default_rng(52)
    base = builtin_tableau("method-1")
    for _ in range(20):
        delta = rng.normal(scale=1e-3, size=base.a.shape)
        t = ButcherTableau(name="perturbed", a=base.a + delta, b=base.b)
        assert symplectic_residual(t) > 1e-6
