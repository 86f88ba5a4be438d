"""Hot integration loops, compiled with numba unless disabled.

Set ROUGH_SYMPLECTIC_JIT=0 (or "false"/"off") before import to run the
same functions as plain Python.  The compiled and interpreted variants
execute identical statements in identical order, so their outputs are
bit-for-bit equal; only the speed differs.  benchmarks/benchmark_kernels.py
measures the gap.

All kernels work on raw float64 arrays:

    mats        (c, m, m)  stacked channel matrices A_0..A_d, c = d+1
    a, b        (s, s), (s,)  Runge-Kutta coefficients
    y0          (m,)       initial state
    increments  (n, c)     per-step driver increments, column 0 is h

Implicit kernels return (states, iterations, fail_step, fail_residual)
with fail_step = -1 on success; a nonnegative fail_step is the first step
whose stage iteration still exceeded tol after max_iter updates, and the
states beyond it are unspecified.  Iteration counting: one iteration is
one update of all stage vectors, so an increment of zero converges in 0
iterations.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "JIT_ENABLED",
    "NUMBA_AVAILABLE",
    "linear_rk_fixed_point",
    "trig_rk_fixed_point",
    "linear_midpoint_direct",
    "linear_euler",
]


def _flag_enabled(raw: str) -> bool:
    return raw.strip().lower() not in ("0", "false", "off", "no")


JIT_ENABLED = _flag_enabled(os.environ.get("ROUGH_SYMPLECTIC_JIT", "1"))

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        return wrap


def _select(func):
    """Pick the compiled dispatcher or its pure-Python original."""
    if JIT_ENABLED and NUMBA_AVAILABLE:
        return func
    return getattr(func, "py_func", func)


@njit(cache=True)
def _linear_rk_fixed_point(mats, a, b, y0, increments, tol, max_iter):
    n, c = increments.shape
    m = y0.shape[0]
    s = b.shape[0]
    states = np.empty((n + 1, m))
    iterations = np.zeros(n, dtype=np.int64)
    for p in range(m):
        states[0, p] = y0[p]
    step_matrix = np.empty((m, m))
    stages = np.empty((s, m))
    fields = np.empty((s, m))
    residual = np.empty((s, m))
    for k in range(n):
        for p in range(m):
            for q in range(m):
                acc = 0.0
                for i in range(c):
                    acc += mats[i, p, q] * increments[k, i]
                step_matrix[p, q] = acc
        for alpha in range(s):
            for p in range(m):
                stages[alpha, p] = states[k, p]
        count = 0
        while True:
            for alpha in range(s):
                for p in range(m):
                    acc = 0.0
                    for q in range(m):
                        acc += step_matrix[p, q] * stages[alpha, q]
                    fields[alpha, p] = acc
            sup = 0.0
            for alpha in range(s):
                for p in range(m):
                    acc = states[k, p] - stages[alpha, p]
                    for beta in range(s):
                        acc += a[alpha, beta] * fields[beta, p]
                    residual[alpha, p] = acc
                    mag = abs(acc)
                    if mag > sup:
                        sup = mag
            if sup <= tol:
                break
            if count >= max_iter:
                iterations[k] = count
                return states, iterations, k, sup
            for alpha in range(s):
                for p in range(m):
                    stages[alpha, p] += residual[alpha, p]
            count += 1
        iterations[k] = count
        for p in range(m):
            acc = states[k, p]
            for alpha in range(s):
                acc += b[alpha] * fields[alpha, p]
            states[k + 1, p] = acc
    return states, iterations, np.int64(-1), 0.0


@njit(cache=True)
def _trig_rk_fixed_point(a, b, y0, increments, tol, max_iter):
    # dP = sin(P)sin(Q) dx0 - cos(Q) dx2, dQ = cos(P)cos(Q) dx0 - sin(P) dx1
    n = increments.shape[0]
    s = b.shape[0]
    states = np.empty((n + 1, 2))
    iterations = np.zeros(n, dtype=np.int64)
    states[0, 0] = y0[0]
    states[0, 1] = y0[1]
    stages = np.empty((s, 2))
    fields = np.empty((s, 2))
    residual = np.empty((s, 2))
    for k in range(n):
        dx0 = increments[k, 0]
        dx1 = increments[k, 1]
        dx2 = increments[k, 2]
        for alpha in range(s):
            stages[alpha, 0] = states[k, 0]
            stages[alpha, 1] = states[k, 1]
        count = 0
        while True:
            for alpha in range(s):
                sp = np.sin(stages[alpha, 0])
                cp = np.cos(stages[alpha, 0])
                sq = np.sin(stages[alpha, 1])
                cq = np.cos(stages[alpha, 1])
                fields[alpha, 0] = sp * sq * dx0 - cq * dx2
                fields[alpha, 1] = cp * cq * dx0 - sp * dx1
            sup = 0.0
            for alpha in range(s):
                for p in range(2):
                    acc = states[k, p] - stages[alpha, p]
                    for beta in range(s):
                        acc += a[alpha, beta] * fields[beta, p]
                    residual[alpha, p] = acc
                    mag = abs(acc)
                    if mag > sup:
                        sup = mag
            if sup <= tol:
                break
            if count >= max_iter:
                iterations[k] = count
                return states, iterations, k, sup
            for alpha in range(s):
                stages[alpha, 0] += residual[alpha, 0]
                stages[alpha, 1] += residual[alpha, 1]
            count += 1
        iterations[k] = count
        acc0 = states[k, 0]
        acc1 = states[k, 1]
        for alpha in range(s):
            acc0 += b[alpha] * fields[alpha, 0]
            acc1 += b[alpha] * fields[alpha, 1]
        states[k + 1, 0] = acc0
        states[k + 1, 1] = acc1
    return states, iterations, np.int64(-1), 0.0


@njit(cache=True)
def _linear_midpoint_direct(mats, y0, increments):
    # Solve (I - M/2) y_mid = y_k per step, then y_{k+1} = y_k + M y_mid.
    n, c = increments.shape
    m = y0.shape[0]
    states = np.empty((n + 1, m))
    for p in range(m):
        states[0, p] = y0[p]
    step_matrix = np.empty((m, m))
    lhs = np.empty((m, m))
    rhs = np.empty((m, 1))
    for k in range(n):
        for p in range(m):
            for q in range(m):
                acc = 0.0
                for i in range(c):
                    acc += mats[i, p, q] * increments[k, i]
                step_matrix[p, q] = acc
        for p in range(m):
            for q in range(m):
                lhs[p, q] = -0.5 * step_matrix[p, q]
            lhs[p, p] += 1.0
            rhs[p, 0] = states[k, p]
        midpoint = np.linalg.solve(lhs, rhs)
        for p in range(m):
            acc = states[k, p]
            for q in range(m):
                acc += step_matrix[p, q] * midpoint[q, 0]
            states[k + 1, p] = acc
    return states


@njit(cache=True)
def _linear_euler(mats, y0, increments, order):
    # order 2: y + My + M^2 y / 2; order 3 adds M^3 y / 6.
    n, c = increments.shape
    m = y0.shape[0]
    states = np.empty((n + 1, m))
    for p in range(m):
        states[0, p] = y0[p]
    step_matrix = np.empty((m, m))
    v1 = np.empty(m)
    v2 = np.empty(m)
    v3 = np.empty(m)
    for k in range(n):
        for p in range(m):
            for q in range(m):
                acc = 0.0
                for i in range(c):
                    acc += mats[i, p, q] * increments[k, i]
                step_matrix[p, q] = acc
        for p in range(m):
            acc = 0.0
            for q in range(m):
                acc += step_matrix[p, q] * states[k, q]
            v1[p] = acc
        for p in range(m):
            acc = 0.0
            for q in range(m):
                acc += step_matrix[p, q] * v1[q]
            v2[p] = acc
        if order == 3:
            for p in range(m):
                acc = 0.0
                for q in range(m):
                    acc += step_matrix[p, q] * v2[q]
                v3[p] = acc
            for p in range(m):
                states[k + 1, p] = states[k, p] + v1[p] + 0.5 * v2[p] + v3[p] / 6.0
        else:
            for p in range(m):
                states[k + 1, p] = states[k, p] + v1[p] + 0.5 * v2[p]
    return states


linear_rk_fixed_point = _select(_linear_rk_fixed_point)
trig_rk_fixed_point = _select(_trig_rk_fixed_point)
linear_midpoint_direct = _select(_linear_midpoint_direct)
linear_euler = _select(_linear_euler)
