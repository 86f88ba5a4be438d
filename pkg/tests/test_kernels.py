"""Compiled kernels vs their pure-Python bodies: identical bits, same API."""

import os
import subprocess
import sys

import numpy as np
import pytest

from rough_symplectic import kernels
from rough_symplectic.systems import KuboParams, kubo_system
from rough_symplectic.tableaus import builtin_tableau


def pure(func):
    """The uncompiled body, regardless of the process-level JIT flag."""
    return getattr(func, "py_func", func)


def random_inputs(seed, steps=40, dims=3):
    rng = np.random.default_rng(seed)
    mats = kubo_system(KuboParams(epsilon=1.3, dims=dims)).linear_form
    increments = np.empty((steps, dims + 1))
    increments[:, 0] = 0.01
    increments[:, 1:] = rng.normal(scale=0.05, size=(steps, dims))
    y0 = rng.normal(size=2)
    return np.ascontiguousarray(mats), increments, y0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_linear_fixed_point_kernel_matches_python_bitwise(seed):
    mats, increments, y0 = random_inputs(seed)
    tableau = builtin_tableau("method-1")
    args = (mats, tableau.a, tableau.b, y0, increments, 1e-12, 100)
    compiled = kernels.linear_rk_fixed_point(*args)
    python = pure(kernels._linear_rk_fixed_point)(*args)
    for got, want in zip(compiled, python):
        np.testing.assert_array_equal(got, want)
    states, iterations, fail_step, _ = compiled
    assert fail_step == -1
    assert iterations.max() <= 100
    assert np.isfinite(states).all()


@pytest.mark.parametrize("seed", [3, 4])
def test_trig_kernel_matches_python_bitwise(seed):
    rng = np.random.default_rng(seed)
    increments = np.empty((30, 3))
    increments[:, 0] = 0.02
    increments[:, 1:] = rng.normal(scale=0.05, size=(30, 2))
    y0 = np.array([1.0, 2.0])
    tableau = builtin_tableau("midpoint")
    args = (tableau.a, tableau.b, y0, increments, 1e-12, 100)
    compiled = kernels.trig_rk_fixed_point(*args)
    python = pure(kernels._trig_rk_fixed_point)(*args)
    for got, want in zip(compiled, python):
        np.testing.assert_array_equal(got, want)


@pytest.mark.parametrize("seed", [5, 6])
def test_midpoint_direct_kernel_matches_python_bitwise(seed):
    mats, increments, y0 = random_inputs(seed)
    compiled = kernels.linear_midpoint_direct(mats, y0, increments)
    python = pure(kernels._linear_midpoint_direct)(mats, y0, increments)
    np.testing.assert_array_equal(compiled, python)


@pytest.mark.parametrize("order", [2, 3])
def test_euler_kernel_matches_python_bitwise(order):
    mats, increments, y0 = random_inputs(7 + order)
    compiled = kernels.linear_euler(mats, y0, increments, order)
    python = pure(kernels._linear_euler)(mats, y0, increments, order)
    np.testing.assert_array_equal(compiled, python)


def test_fixed_point_kernel_reports_failure_step():
    mats, increments, y0 = random_inputs(9)
    increments[17, 1] = 50.0  # non-contracting stage map at step 17
    tableau = builtin_tableau("midpoint")
    _, _, fail_step, fail_residual = kernels.linear_rk_fixed_point(
        mats, tableau.a, tableau.b, y0, increments, 1e-12, 100
    )
    assert fail_step == 17
    assert fail_residual > 1e-12


def test_jit_flag_reflects_environment():
    # a fresh interpreter with the flag off must select the python bodies
    # and still produce bit-identical trajectories
    code = (
        "import numpy as np\n"
        "from rough_symplectic import kernels\n"
        "from rough_symplectic.paths import FbmConfig, sample_fbm\n"
        "from rough_symplectic.systems import kubo_system\n"
        "from rough_symplectic.integrators import integrate, scheme_from_name\n"
        "print(kernels.JIT_ENABLED)\n"
        "print(hasattr(kernels.linear_euler, 'py_func'))\n"
        "path = sample_fbm(FbmConfig(hurst=0.4, dims=3, horizon=1.0, steps=50, seed=1))\n"
        "traj = integrate(kubo_system(), scheme_from_name('midpoint'), path,"
        " np.array([1.0, 1.0]))\n"
        "print(traj.states.tobytes().hex())\n"
    )

    def run(flag):
        env = dict(os.environ, ROUGH_SYMPLECTIC_JIT=flag)
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        return out.stdout.split()

    off = run("0")
    assert off[0] == "False"
    assert off[1] == "False"  # plain function, no dispatcher attached
    on = run("1")
    assert on[0] == "True"
    assert off[2] == on[2]  # trajectories agree bit for bit


def test_flag_parser_accepts_common_spellings():
    for raw in ("0", "false", "off", "no", "False", "OFF"):
        assert not kernels._flag_enabled(raw)
    for raw in ("1", "true", "on", "yes", ""):
        assert kernels._flag_enabled(raw)
