"""Built-in systems: field values, derivatives, and the Kubo closed form."""

import numpy as np
import pytest

from rough_symplectic.systems import (
    SYSTEM_NAMES,
    KuboParams,
    SystemSpec,
    kubo_exact,
    kubo_system,
    system_from_name,
    trig_system,
)


def finite_difference_jacobian(system, i, y, eps=1e-6):
    cols = []
    for b in range(system.state_dim):
        e = np.zeros(system.state_dim)
        e[b] = eps
        cols.append(
            (system.vector_field(i, y + e) - system.vector_field(i, y - e))
            / (2 * eps)
        )
    return np.stack(cols, axis=1)


def finite_difference_hessian(system, i, y, eps=1e-5):
    out = np.zeros((system.state_dim,) * 3)
    for b in range(system.state_dim):
        e = np.zeros(system.state_dim)
        e[b] = eps
        diff = (
            system.jacobian_field(i, y + e) - system.jacobian_field(i, y - e)
        ) / (2 * eps)
        out[:, b, :] = diff
    return out


# ---------------------------------------------------------------------------
# trig system
# ---------------------------------------------------------------------------

def test_trig_field_values_at_reference_point():
    system = trig_system()
    y = np.array([np.pi / 2, 0.0])
    np.testing.assert_allclose(system.vector_field(0, y), [0.0, 0.0], atol=1e-16)
    np.testing.assert_array_equal(system.vector_field(1, y), [0.0, -1.0])
    np.testing.assert_array_equal(system.vector_field(2, y), [-1.0, 0.0])


def test_trig_fields_are_bounded():
    system = trig_system()
    rng = np.random.default_rng(21)
    for _ in range(50):
        y = rng.uniform(-10, 10, size=2)
        for i in range(3):
            assert np.linalg.norm(system.vector_field(i, y)) <= np.sqrt(2) + 1e-15
            assert np.abs(system.jacobian_field(i, y)).max() <= 1.0 + 1e-15


def test_trig_has_no_closed_form_but_a_compiled_kernel():
    system = trig_system()
    assert system.exact_solution is None
    assert system.linear_form is None
    assert system.kernel_id == "trig"
    assert system.state_dim == 2
    assert system.noise_dim == 2


def test_trig_channel_out_of_range():
    system = trig_system()
    with pytest.raises(ValueError):
        system.vector_field(3, np.zeros(2))


# ---------------------------------------------------------------------------
# analytic derivatives vs finite differences (both systems)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", SYSTEM_NAMES)
def test_jacobians_match_finite_differences(name):
    system = system_from_name(name)
    rng = np.random.default_rng(33)
    for _ in range(25):
        y = rng.uniform(-2, 2, size=system.state_dim)
        for i in range(system.noise_dim + 1):
            np.testing.assert_allclose(
                system.jacobian_field(i, y),
                finite_difference_jacobian(system, i, y),
                rtol=0,
                atol=1e-6,
            )


@pytest.mark.parametrize("name", SYSTEM_NAMES)
def test_hessians_match_finite_differences(name):
    system = system_from_name(name)
    rng = np.random.default_rng(34)
    for _ in range(25):
        y = rng.uniform(-2, 2, size=system.state_dim)
        for i in range(system.noise_dim + 1):
            np.testing.assert_allclose(
                system.hessian_field(i, y),
                finite_difference_hessian(system, i, y),
                rtol=0,
                atol=1e-4,
            )


@pytest.mark.parametrize("name", SYSTEM_NAMES)
def test_hessians_are_symmetric_in_the_derivative_axes(name):
    system = system_from_name(name)
    rng = np.random.default_rng(35)
    for _ in range(10):
        y = rng.uniform(-3, 3, size=system.state_dim)
        for i in range(system.noise_dim + 1):
            hess = system.hessian_field(i, y)
            np.testing.assert_array_equal(hess, np.swapaxes(hess, 1, 2))


# ---------------------------------------------------------------------------
# Kubo oscillator
# ---------------------------------------------------------------------------

def test_kubo_fields_are_linear_with_matching_matrices():
    system = kubo_system(KuboParams(epsilon=1.5, dims=2))
    assert system.linear_form.shape == (3, 2, 2)
    rng = np.random.default_rng(40)
    for _ in range(10):
        y = rng.normal(size=2)
        for i in range(3):
            np.testing.assert_array_equal(
                system.vector_field(i, y), system.linear_form[i] @ y
            )
            np.testing.assert_array_equal(
                system.jacobian_field(i, y), system.linear_form[i]
            )


def test_kubo_noise_matrices_scale_with_epsilon():
    system = kubo_system(KuboParams(epsilon=2.0, dims=1))
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(system.linear_form[0], rot)
    np.testing.assert_array_equal(system.linear_form[1], 2.0 * rot)


def test_kubo_matrices_are_read_only():
    system = kubo_system()
    with pytest.raises(ValueError):
        system.linear_form[0, 0, 0] = 1.0


def test_kubo_exact_is_an_isometry():
    params = KuboParams(epsilon=1.3, dims=3)
    rng = np.random.default_rng(41)
    for _ in range(20):
        z = rng.normal(size=2)
        x = rng.normal(size=3)
        t = rng.uniform(0, 10)
        out = kubo_exact(params, z, t, x)
        assert np.isclose(
            np.linalg.norm(out), np.linalg.norm(z), rtol=0, atol=1e-13
        )


def test_kubo_exact_at_time_zero_is_the_initial_value():
    params = KuboParams()
    z = np.array([0.7, -0.2])
    np.testing.assert_array_equal(kubo_exact(params, z, 0.0, np.zeros(3)), z)


def test_kubo_exact_solves_the_equation_in_time():
    # with the noise values frozen, d/dt of the closed form is A_0 applied
    # to the current state
    params = KuboParams(epsilon=0.8, dims=2)
    system = kubo_system(params)
    z = np.array([1.0, 1.0])
    x = np.array([0.3, -0.4])
    t, eps = 1.7, 1e-7
    derivative = (
        kubo_exact(params, z, t + eps, x) - kubo_exact(params, z, t - eps, x)
    ) / (2 * eps)
    state = kubo_exact(params, z, t, x)
    np.testing.assert_allclose(
        derivative, system.linear_form[0] @ state, rtol=0, atol=1e-7
    )


def test_kubo_exact_shifts_angle_by_noise_sum():
    # theta depends on the channel values only through their epsilon-scaled
    # sum, one rotation generator shared by every channel
    params = KuboParams(epsilon=0.5, dims=3)
    z = np.array([1.0, 0.0])
    a = kubo_exact(params, z, 1.0, np.array([0.2, 0.3, -0.1]))
    b = kubo_exact(params, z, 1.0, np.array([0.4, 0.0, 0.0]))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)


def test_kubo_params_validation():
    with pytest.raises(ValueError):
        KuboParams(dims=0)
    # epsilon = 0 is the legitimate noise-free limit
    system = kubo_system(KuboParams(epsilon=0.0, dims=1))
    np.testing.assert_array_equal(system.linear_form[1], np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# increment helpers and registry
# ---------------------------------------------------------------------------

def test_field_increment_matches_dense_sum():
    system = trig_system()
    rng = np.random.default_rng(44)
    y = rng.normal(size=2)
    dx = np.array([0.1, 0.0, -0.3])  # middle channel inactive
    expected = sum(
        system.vector_field(i, y) * dx[i] for i in range(3) if dx[i] != 0.0
    )
    np.testing.assert_array_equal(system.field_increment(y, dx), expected)
    np.testing.assert_array_equal(
        system.jacobian_increment(y, dx),
        system.jacobian_field(0, y) * 0.1 + system.jacobian_field(2, y) * -0.3,
    )


def test_jacobian_increment_requires_jacobian_field():
    bare = SystemSpec(
        name="bare",
        state_dim=1,
        noise_dim=0,
        vector_field=lambda i, y: -y,
    )
    with pytest.raises(ValueError, match="jacobian"):
        bare.jacobian_increment(np.ones(1), np.array([0.1]))


def test_system_from_name_registry():
    assert SYSTEM_NAMES == ("trig", "kubo")
    trig = system_from_name("trig", epsilon=9.0, dims=7)
    assert trig.noise_dim == 2  # fixed shape, parameters do not apply
    kubo = system_from_name("kubo", epsilon=2.5, dims=4)
    assert kubo.noise_dim == 4
    np.testing.assert_array_equal(
        kubo.linear_form[1], 2.5 * np.array([[0.0, -1.0], [1.0, 0.0]])
    )
    with pytest.raises(ValueError, match="unknown system"):
        system_from_name("pendulum")
