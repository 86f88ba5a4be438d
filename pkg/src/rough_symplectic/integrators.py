"""Implicit Runge-Kutta steppers and explicit baselines for rough drivers.

One step of the s-stage scheme applies

    Z_a     = y_k + sum_b a[a,b] V(Z_b) . dx     (implicit stage equations)
    y_{k+1} = y_k + sum_a b[a]   V(Z_a) . dx

where V(y) . dx = sum_i V_i(y) dx^i runs over all channels of the driver
increment, time channel included (dx^0 = h).  Symplectic tableaus make the
step a symplectic map of the phase space; the propagated flow Jacobian
then keeps determinant 1 for one degree of freedom.

Stage equations are solved by damped-free fixed-point iteration by
default; a Newton strategy and, for linear systems, a direct solve of the
stage system are available through SolverConfig.  Unconverged stages raise
NonConvergence: accepting such a step silently would void the structural
guarantees this package exists to test.

Two explicit baselines accompany the implicit schemes: the simplified
step-2/step-3 Euler schemes, Taylor-type updates in which iterated driver
integrals are replaced by symmetrized increment products.  They are
cheaper but not symplectic, which the area and drift experiments make
visible.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import kernels
from .paths import SamplePath
from .systems import SystemSpec
from .tableaus import ButcherTableau, builtin_tableau

__all__ = [
    "SolverConfig",
    "Trajectory",
    "NonConvergence",
    "RungeKutta",
    "SimplifiedEuler",
    "LinearMidpoint",
    "Scheme",
    "SCHEME_NAMES",
    "scheme_from_name",
    "solve_stages",
    "rk_step",
    "midpoint_step_linear",
    "simplified_euler_step",
    "integrate",
    "write_trajectory_csv",
]

_STRATEGIES = ("fixed-point", "newton", "direct-linear")

SCHEME_NAMES = (
    "midpoint",
    "method-1",
    "method-2",
    "euler2",
    "euler3",
    "linear-midpoint",
)


class NonConvergence(RuntimeError):
    """The stage iteration missed its tolerance; the step is untrusted.

    Signals a step size too large relative to the noise increment.  Callers
    must not silently retry or accept the step: an unconverged implicit
    stage voids the symplecticity and rate guarantees under test.
    """

    def __init__(self, residual: float, iterations: int, step: Optional[int] = None):
        self.residual = float(residual)
        self.iterations = int(iterations)
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(
            f"stage iteration stalled{where}: residual {self.residual:.3e} "
            f"after {self.iterations} iterations (step size too large for "
            f"this noise increment)"
        )


@dataclass(frozen=True)
class SolverConfig:
    """How implicit stage equations are solved.

    fixed-point: damping-free iteration from Z_a = y_k; contracts whenever
        s * max|a| * Lip(V) * |dx| < 1, true at desk-scale steps.
    newton: full Newton on the stacked stage system; needs jacobian_field.
    direct-linear: one dense solve of the stage system; linear systems only.
    """

    tolerance: float = 1e-12
    max_iterations: int = 100
    strategy: str = "fixed-point"

    def __post_init__(self) -> None:
        if not self.tolerance > 0.0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.strategy not in _STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; choose from {', '.join(_STRATEGIES)}"
            )


@dataclass(frozen=True)
class RungeKutta:
    """Implicit s-stage scheme defined by a tableau plus a stage solver."""

    tableau: ButcherTableau
    solver: SolverConfig = SolverConfig()

    @property
    def label(self) -> str:
        return self.tableau.name


@dataclass(frozen=True)
class SimplifiedEuler:
    """Explicit Taylor-type step of order 2 or 3 in the increment.

    order 2:  y + v + M v / 2
    order 3:  y + v + M v / 2 + (H(v, v) + M M v) / 6

    with v = sum_i V_i(y) dx^i, M = sum_i DV_i(y) dx^i and H(u, w) the
    dx-weighted second-derivative contraction.
    """

    order: int

    def __post_init__(self) -> None:
        if self.order not in (2, 3):
            raise ValueError(f"order must be 2 or 3, got {self.order}")

    @property
    def label(self) -> str:
        return f"euler{self.order}"


@dataclass(frozen=True)
class LinearMidpoint:
    """Midpoint scheme with the stage solved exactly by linear algebra.

    Equivalent map to the fixed-point midpoint on linear systems but free
    of iteration tolerance, so invariant drift stays at rounding level over
    arbitrarily many steps.  Solvable whenever I - M/2 is nonsingular,
    always true for skew-symmetric channel matrices.
    """

    @property
    def label(self) -> str:
        return "linear-midpoint"


Scheme = Union[RungeKutta, SimplifiedEuler, LinearMidpoint]


def scheme_from_name(name: str, solver: Optional[SolverConfig] = None) -> Scheme:
    """Build a scheme from its CLI name; solver applies to implicit ones."""
    if name in ("midpoint", "method-1", "method-2"):
        return RungeKutta(builtin_tableau(name), solver or SolverConfig())
    if name == "euler2":
        return SimplifiedEuler(2)
    if name == "euler3":
        return SimplifiedEuler(3)
    if name == "linear-midpoint":
        return LinearMidpoint()
    raise ValueError(f"unknown scheme {name!r}; choose from {', '.join(SCHEME_NAMES)}")


@dataclass(frozen=True)
class Trajectory:
    """Numerical solution on the driver grid.

    states[k] is the state after k steps (states[0] is the initial value).
    jacobians, when propagated, holds the flow derivative with respect to
    the initial value, starting from the identity.  stage_iterations gives
    the per-step fixed-point/Newton iteration count for implicit schemes
    and is None for explicit or directly solved ones.
    """

    times: np.ndarray
    states: np.ndarray
    jacobians: Optional[np.ndarray] = None
    stage_iterations: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.states.ndim != 2 or self.states.shape[0] != self.times.shape[0]:
            raise ValueError("states must be (len(times), state_dim)")
        if self.jacobians is not None and self.jacobians.shape != (
            self.states.shape[0],
            self.states.shape[1],
            self.states.shape[1],
        ):
            raise ValueError("jacobians must be (len(times), state_dim, state_dim)")

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]


def solve_stages(
    system: SystemSpec,
    tableau: ButcherTableau,
    y_k: np.ndarray,
    dx: np.ndarray,
    cfg: SolverConfig,
) -> tuple[np.ndarray, int]:
    """Solve the stage equations; returns (stages, iteration count).

    The residual is R_a = y_k + sum_b a[a,b] V(Z_b).dx - Z_a and the
    iteration updates Z += R, starting from Z_a = y_k.  Convergence means
    sup|R| <= cfg.tolerance; a zero increment therefore converges with 0
    iterations.  Counts are 0 for the non-iterative direct-linear strategy.
    """
    y_k = np.asarray(y_k, dtype=np.float64)
    dx = np.asarray(dx, dtype=np.float64)
    s = tableau.stages
    a = tableau.a

    if cfg.strategy == "direct-linear":
        mats = system.linear_form
        if mats is None:
            raise ValueError(
                f"direct-linear strategy needs linear_form on system {system.name!r}"
            )
        m = system.state_dim
        step_matrix = np.tensordot(dx, mats, axes=1)
        block = np.eye(s * m)
        for alpha in range(s):
            for beta in range(s):
                block[alpha * m : (alpha + 1) * m, beta * m : (beta + 1) * m] -= (
                    a[alpha, beta] * step_matrix
                )
        stages = np.linalg.solve(block, np.tile(y_k, s)).reshape(s, -1)
        return stages, 0

    stages = np.tile(y_k, (s, 1))
    if cfg.strategy == "fixed-point":
        count = 0
        while True:
            fields = np.stack([system.field_increment(stages[b], dx) for b in range(s)])
            residual = y_k + a @ fields - stages
            sup = float(np.abs(residual).max())
            if sup <= cfg.tolerance:
                return stages, count
            if count >= cfg.max_iterations:
                raise NonConvergence(sup, count)
            stages += residual
            count += 1

    # Newton on the stacked system G(Z) = Z - y_k - a V(Z).dx = 0.
    if system.jacobian_field is None:
        raise ValueError(f"newton strategy needs jacobian_field on system {system.name!r}")
    m = system.state_dim
    count = 0
    while True:
        fields = np.stack([system.field_increment(stages[b], dx) for b in range(s)])
        residual = y_k + a @ fields - stages
        sup = float(np.abs(residual).max())
        if sup <= cfg.tolerance:
            return stages, count
        if count >= cfg.max_iterations:
            raise NonConvergence(sup, count)
        block = np.eye(s * m)
        for beta in range(s):
            stage_jac = system.jacobian_increment(stages[beta], dx)
            for alpha in range(s):
                block[alpha * m : (alpha + 1) * m, beta * m : (beta + 1) * m] -= (
                    a[alpha, beta] * stage_jac
                )
        delta = np.linalg.solve(block, residual.reshape(s * m))
        stages += delta.reshape(s, m)
        count += 1


def rk_step(
    system: SystemSpec,
    tableau: ButcherTableau,
    y_k: np.ndarray,
    dx: np.ndarray,
    cfg: SolverConfig,
) -> np.ndarray:
    """One implicit Runge-Kutta step y_k -> y_{k+1}."""
    y_k = np.asarray(y_k, dtype=np.float64)
    dx = np.asarray(dx, dtype=np.float64)
    stages, _ = solve_stages(system, tableau, y_k, dx, cfg)
    fields = np.stack(
        [system.field_increment(stages[alpha], dx) for alpha in range(tableau.stages)]
    )
    return y_k + tableau.b @ fields


def midpoint_step_linear(
    matrices: np.ndarray, y_k: np.ndarray, dx: np.ndarray
) -> np.ndarray:
    """One midpoint step of a linear system, stage solved directly.

    Solves (I - M/2) Y_mid = y_k with M = sum_i A_i dx^i, then returns
    y_k + M Y_mid.  Raises numpy's LinAlgError when the resolvent is
    singular (impossible for skew-symmetric channel matrices).
    """
    matrices = np.asarray(matrices, dtype=np.float64)
    y_k = np.asarray(y_k, dtype=np.float64)
    dx = np.asarray(dx, dtype=np.float64)
    m = matrices.shape[1]
    step_matrix = np.tensordot(dx, matrices, axes=1)
    midpoint = np.linalg.solve(np.eye(m) - 0.5 * step_matrix, y_k)
    return y_k + step_matrix @ midpoint


def _hessian_contraction(
    system: SystemSpec, y: np.ndarray, dx: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """sum_i dx^i D^2 V_i(y) contracted once with v: a (2m, 2m) matrix."""
    if system.hessian_field is None:
        raise ValueError(f"system {system.name!r} provides no hessian_field")
    out = np.zeros((system.state_dim, system.state_dim))
    for i in range(system.noise_dim + 1):
        if dx[i] != 0.0:
            out += dx[i] * (system.hessian_field(i, y) @ v)
    return out


def simplified_euler_step(
    system: SystemSpec, order: int, y_k: np.ndarray, dx: np.ndarray
) -> np.ndarray:
    """One explicit simplified step-2 or step-3 Euler step."""
    if order not in (2, 3):
        raise ValueError(f"order must be 2 or 3, got {order}")
    y_k = np.asarray(y_k, dtype=np.float64)
    dx = np.asarray(dx, dtype=np.float64)
    if system.jacobian_field is None:
        raise ValueError(f"system {system.name!r} provides no jacobian_field")
    v = system.field_increment(y_k, dx)
    jac = system.jacobian_increment(y_k, dx)
    out = y_k + v + 0.5 * (jac @ v)
    if order == 3:
        hvv = _hessian_contraction(system, y_k, dx, v) @ v
        out = out + (hvv + jac @ (jac @ v)) / 6.0
    return out


def _require_linear(system: SystemSpec, what: str) -> np.ndarray:
    if system.linear_form is None:
        raise ValueError(f"{what} needs linear_form on system {system.name!r}")
    return np.ascontiguousarray(system.linear_form)


def _locate_singular_step(mats: np.ndarray, z: np.ndarray, inc: np.ndarray) -> int:
    y = z.copy()
    eye = np.eye(len(z))
    for k in range(inc.shape[0]):
        step_matrix = np.tensordot(inc[k], mats, axes=1)
        try:
            mid = np.linalg.solve(eye - 0.5 * step_matrix, y)
        except np.linalg.LinAlgError:
            return k
        y = y + step_matrix @ mid
    return -1


def _integrate_rk_python(
    system: SystemSpec,
    scheme: RungeKutta,
    inc: np.ndarray,
    z: np.ndarray,
    with_jacobian: bool,
) -> tuple[np.ndarray, Optional[np.ndarray], np.ndarray]:
    n = inc.shape[0]
    m = system.state_dim
    tableau, cfg = scheme.tableau, scheme.solver
    s = tableau.stages
    states = np.empty((n + 1, m))
    states[0] = z
    iterations = np.zeros(n, dtype=np.int64)
    jacobians = None
    if with_jacobian:
        jacobians = np.empty((n + 1, m, m))
        jacobians[0] = np.eye(m)
    for k in range(n):
        dx = inc[k]
        try:
            stages, iterations[k] = solve_stages(system, tableau, states[k], dx, cfg)
        except NonConvergence as exc:
            raise NonConvergence(exc.residual, exc.iterations, step=k) from None
        fields = np.stack(
            [system.field_increment(stages[alpha], dx) for alpha in range(s)]
        )
        states[k + 1] = states[k] + tableau.b @ fields
        if with_jacobian:
            jacobians[k + 1] = _propagate_jacobian_rk(
                system, tableau, jacobians[k], stages, dx
            )
    return states, jacobians, iterations


def _propagate_jacobian_rk(
    system: SystemSpec,
    tableau: ButcherTableau,
    jac: np.ndarray,
    stages: np.ndarray,
    dx: np.ndarray,
) -> np.ndarray:
    """Advance the flow Jacobian through one implicit step.

    The Jacobian block of the augmented system has fields DV_i(Y) J, linear
    in J, so with the converged state stages Z_a fixed, the J-stages solve
    the dense linear system K_a - sum_b a[a,b] M_b K_b = J with
    M_b = sum_i DV_i(Z_b) dx^i.
    """
    s = tableau.stages
    m = jac.shape[0]
    a, b = tableau.a, tableau.b
    stage_jacs = [system.jacobian_increment(stages[beta], dx) for beta in range(s)]
    block = np.eye(s * m)
    for alpha in range(s):
        for beta in range(s):
            block[alpha * m : (alpha + 1) * m, beta * m : (beta + 1) * m] -= (
                a[alpha, beta] * stage_jacs[beta]
            )
    solved = np.linalg.solve(block, np.tile(jac, (s, 1)))
    out = jac.copy()
    for alpha in range(s):
        out += b[alpha] * (stage_jacs[alpha] @ solved[alpha * m : (alpha + 1) * m])
    return out


def _integrate_linear_midpoint_aug(
    mats: np.ndarray, inc: np.ndarray, z: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    n = inc.shape[0]
    m = len(z)
    states = np.empty((n + 1, m))
    jacobians = np.empty((n + 1, m, m))
    states[0] = z
    jacobians[0] = np.eye(m)
    eye = np.eye(m)
    rhs = np.empty((m, m + 1))
    for k in range(n):
        step_matrix = np.tensordot(inc[k], mats, axes=1)
        rhs[:, 0] = states[k]
        rhs[:, 1:] = jacobians[k]
        try:
            mid = np.linalg.solve(eye - 0.5 * step_matrix, rhs)
        except np.linalg.LinAlgError:
            raise np.linalg.LinAlgError(
                f"singular midpoint resolvent at step {k}"
            ) from None
        states[k + 1] = states[k] + step_matrix @ mid[:, 0]
        jacobians[k + 1] = jacobians[k] + step_matrix @ mid[:, 1:]
    return states, jacobians


def _integrate_euler_python(
    system: SystemSpec,
    order: int,
    inc: np.ndarray,
    z: np.ndarray,
    with_jacobian: bool,
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    n = inc.shape[0]
    m = system.state_dim
    states = np.empty((n + 1, m))
    states[0] = z
    jacobians = None
    if with_jacobian:
        if order == 3 and system.linear_form is None:
            raise ValueError(
                "Jacobian propagation for the step-3 scheme on a nonlinear "
                "system needs third derivatives, which SystemSpec does not carry"
            )
        jacobians = np.empty((n + 1, m, m))
        jacobians[0] = np.eye(m)
    for k in range(n):
        dx = inc[k]
        y = states[k]
        states[k + 1] = simplified_euler_step(system, order, y, dx)
        if jacobians is None:
            continue
        jac_inc = system.jacobian_increment(y, dx)
        if system.linear_form is not None:
            poly = np.eye(m) + jac_inc + 0.5 * (jac_inc @ jac_inc)
            if order == 3:
                poly += (jac_inc @ jac_inc @ jac_inc) / 6.0
            jacobians[k + 1] = poly @ jacobians[k]
        else:
            v = system.field_increment(y, dx)
            hessian_v = _hessian_contraction(system, y, dx, v)
            update = (
                np.eye(m) + jac_inc + 0.5 * (hessian_v + jac_inc @ jac_inc)
            )
            jacobians[k + 1] = update @ jacobians[k]
    return states, jacobians


def integrate(
    system: SystemSpec,
    scheme: Scheme,
    path: SamplePath,
    z: np.ndarray,
    with_jacobian: bool = False,
) -> Trajectory:
    """Run one scheme over one driver path; a pure function of its inputs.

    Jacobian propagation applies the same scheme to the augmented state
    (Y, J) whose J-block fields are DV_i(Y) J; converged Y-stage values
    feed the (linear) J-stage solve.  Step-level failures carry the index
    of the failing step.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (system.state_dim,):
        raise ValueError(
            f"initial state must have shape ({system.state_dim},), got {z.shape}"
        )
    if path.dims != system.noise_dim:
        raise ValueError(
            f"path carries {path.dims} noise channels but system "
            f"{system.name!r} needs {system.noise_dim}"
        )
    inc = np.ascontiguousarray(path.increments())
    times = path.times

    if isinstance(scheme, LinearMidpoint):
        mats = _require_linear(system, "linear-midpoint scheme")
        if with_jacobian:
            states, jacobians = _integrate_linear_midpoint_aug(mats, inc, z)
            return Trajectory(times, states, jacobians)
        try:
            states = kernels.linear_midpoint_direct(mats, z, inc)
        except np.linalg.LinAlgError:
            k = _locate_singular_step(mats, z, inc)
            raise np.linalg.LinAlgError(
                f"singular midpoint resolvent at step {k}"
            ) from None
        return Trajectory(times, states)

    if isinstance(scheme, SimplifiedEuler):
        if system.linear_form is not None and not with_jacobian:
            mats = _require_linear(system, "simplified Euler")
            states = kernels.linear_euler(mats, z, inc, scheme.order)
            return Trajectory(times, states)
        states, jacobians = _integrate_euler_python(
            system, scheme.order, inc, z, with_jacobian
        )
        return Trajectory(times, states, jacobians)

    if not isinstance(scheme, RungeKutta):
        raise TypeError(f"unknown scheme type {type(scheme).__name__}")

    cfg = scheme.solver
    fast_fixed_point = (
        cfg.strategy == "fixed-point"
        and not with_jacobian
        and (system.linear_form is not None or system.kernel_id == "trig")
    )
    if fast_fixed_point:
        tableau = scheme.tableau
        args = (
            np.ascontiguousarray(tableau.a),
            np.ascontiguousarray(tableau.b),
            z,
            inc,
            cfg.tolerance,
            cfg.max_iterations,
        )
        if system.linear_form is not None:
            mats = _require_linear(system, "fixed-point kernel")
            states, iterations, fail_step, fail_residual = kernels.linear_rk_fixed_point(
                mats, *args
            )
        else:
            states, iterations, fail_step, fail_residual = kernels.trig_rk_fixed_point(
                *args
            )
        if fail_step >= 0:
            raise NonConvergence(
                fail_residual, int(iterations[fail_step]), step=int(fail_step)
            )
        return Trajectory(times, states, stage_iterations=iterations)

    states, jacobians, iterations = _integrate_rk_python(
        system, scheme, inc, z, with_jacobian
    )
    if cfg.strategy == "direct-linear":
        iterations = None
    return Trajectory(times, states, jacobians, iterations)


def write_trajectory_csv(trajectory: Trajectory, fileobj: io.TextIOBase) -> None:
    """CSV export: t,y1,...,y2m[,j11,...,j(2m)(2m)] at 17 significant digits."""
    m = trajectory.state_dim
    columns = ["t"] + [f"y{i}" for i in range(1, m + 1)]
    if trajectory.jacobians is not None:
        columns += [f"j{r}{c}" for r in range(1, m + 1) for c in range(1, m + 1)]
    fileobj.write(",".join(columns) + "\n")
    for k in range(len(trajectory.times)):
        row = [trajectory.times[k], *trajectory.states[k]]
        if trajectory.jacobians is not None:
            row.extend(trajectory.jacobians[k].ravel())
        fileobj.write(",".join(f"{value:.17g}" for value in row) + "\n")
