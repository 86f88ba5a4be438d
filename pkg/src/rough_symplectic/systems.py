"""System descriptors for equations dY = sum_i V_i(Y) dX^i.

Channel 0 is the time channel (dX^0 = dt), channels 1..d carry the noise.
For a Hamiltonian system with state Y = (P, Q) the fields have the
structure V_i = (-dH_i/dQ, dH_i/dP).

Two built-in systems are provided:

* ``trig_system``: H_0 = sin(P)cos(Q), H_1 = cos(P), H_2 = sin(Q);
  bounded fields with bounded derivatives.
* ``kubo_system``: the Kubo oscillator, a linear system with
  skew-symmetric matrices and a known rotation-type exact solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "SystemSpec",
    "KuboParams",
    "trig_system",
    "kubo_system",
    "kubo_exact",
    "system_from_name",
    "SYSTEM_NAMES",
]

SYSTEM_NAMES = ("trig", "kubo")


@dataclass(frozen=True)
class SystemSpec:
    """Value-style descriptor of the vector fields of one system.

    vector_field(i, y) evaluates V_i at state y, i in {0..noise_dim}.
    jacobian_field(i, y) returns DV_i(y) as a (state_dim, state_dim) matrix
    with entry [a, b] = dV_i^a / dy^b.
    hessian_field(i, y), when present, returns D^2 V_i(y) as a rank-3 array
    with entry [a, b, c] = d^2 V_i^a / (dy^b dy^c); only the step-3
    simplified Euler scheme needs it.
    linear_form, when present, stacks matrices A_0..A_d with V_i(y) = A_i y.
    exact_solution(z, t, x) maps the initial value, a time, and the noise
    channel values X^1_t..X^d_t at that time to the exact state.
    kernel_id names a compiled fast path ("trig"); linear systems are
    recognized through linear_form instead.
    """

    name: str
    state_dim: int
    noise_dim: int
    vector_field: Callable[[int, np.ndarray], np.ndarray]
    jacobian_field: Optional[Callable[[int, np.ndarray], np.ndarray]] = None
    hessian_field: Optional[Callable[[int, np.ndarray], np.ndarray]] = None
    linear_form: Optional[np.ndarray] = None
    exact_solution: Optional[Callable[[np.ndarray, float, np.ndarray], np.ndarray]] = None
    kernel_id: Optional[str] = None

    def field_increment(self, y: np.ndarray, dx: np.ndarray) -> np.ndarray:
        """sum_i V_i(y) dx^i for one increment vector dx in R^{d+1}."""
        out = np.zeros(self.state_dim)
        for i in range(self.noise_dim + 1):
            if dx[i] != 0.0:
                out += self.vector_field(i, y) * dx[i]
        return out

    def jacobian_increment(self, y: np.ndarray, dx: np.ndarray) -> np.ndarray:
        """sum_i DV_i(y) dx^i."""
        if self.jacobian_field is None:
            raise ValueError(f"system {self.name!r} provides no jacobian_field")
        out = np.zeros((self.state_dim, self.state_dim))
        for i in range(self.noise_dim + 1):
            if dx[i] != 0.0:
                out += self.jacobian_field(i, y) * dx[i]
        return out


@dataclass(frozen=True)
class KuboParams:
    """Kubo oscillator parameters: noise amplitude, channel count, start point."""

    epsilon: float = 1.0
    dims: int = 3
    initial: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self) -> None:
        if self.dims < 1:
            raise ValueError(f"dims must be >= 1, got {self.dims}")


def trig_system() -> SystemSpec:
    """Two-channel trigonometric system.

        dP = sin(P)sin(Q) dt - cos(Q) dX^2
        dQ = cos(P)cos(Q) dt - sin(P) dX^1

    All fields are bounded by sqrt(2) with all derivatives bounded.
    Analytic Jacobians and Hessians are supplied; there is no closed-form
    solution.
    """

    def field(i: int, y: np.ndarray) -> np.ndarray:
        p, q = y
        if i == 0:
            return np.array([np.sin(p) * np.sin(q), np.cos(p) * np.cos(q)])
        if i == 1:
            return np.array([0.0, -np.sin(p)])
        if i == 2:
            return np.array([-np.cos(q), 0.0])
        raise ValueError(f"channel {i} out of range for trig system")

    def jacobian(i: int, y: np.ndarray) -> np.ndarray:
        p, q = y
        if i == 0:
            return np.array(
                [
                    [np.cos(p) * np.sin(q), np.sin(p) * np.cos(q)],
                    [-np.sin(p) * np.cos(q), -np.cos(p) * np.sin(q)],
                ]
            )
        if i == 1:
            return np.array([[0.0, 0.0], [-np.cos(p), 0.0]])
        if i == 2:
            return np.array([[0.0, np.sin(q)], [0.0, 0.0]])
        raise ValueError(f"channel {i} out of range for trig system")

    def hessian(i: int, y: np.ndarray) -> np.ndarray:
        p, q = y
        out = np.zeros((2, 2, 2))
        if i == 0:
            sp, cp, sq, cq = np.sin(p), np.cos(p), np.sin(q), np.cos(q)
            out[0] = [[-sp * sq, cp * cq], [cp * cq, -sp * sq]]
            out[1] = [[-cp * cq, sp * sq], [sp * sq, -cp * cq]]
        elif i == 1:
            out[1, 0, 0] = np.sin(p)
        elif i == 2:
            out[0, 1, 1] = np.cos(q)
        else:
            raise ValueError(f"channel {i} out of range for trig system")
        return out

    return SystemSpec(
        name="trig",
        state_dim=2,
        noise_dim=2,
        vector_field=field,
        jacobian_field=jacobian,
        hessian_field=hessian,
        kernel_id="trig",
    )


def _kubo_matrices(params: KuboParams) -> np.ndarray:
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    mats = np.empty((params.dims + 1, 2, 2))
    mats[0] = rot
    mats[1:] = params.epsilon * rot
    return mats


def kubo_exact(
    params: KuboParams, z: np.ndarray, t: float, path_values: np.ndarray
) -> np.ndarray:
    """Exact Kubo solution: rotation by theta = t + epsilon * sum_i X^i_t.

    Rotations are isometries, so P^2 + Q^2 = p^2 + q^2 up to rounding.
    """
    theta = t + params.epsilon * float(np.sum(path_values))
    c, s = np.cos(theta), np.sin(theta)
    p, q = z
    return np.array([p * c - q * s, q * c + p * s])


def kubo_system(params: KuboParams | None = None) -> SystemSpec:
    """Kubo oscillator dY = A_0 Y dt + epsilon sum_i A_rot Y dX^i.

    A_0 and all noise matrices are skew-symmetric rotation generators, so
    |Y_t| is conserved and the midpoint scheme is solvable for any step.
    """
    params = params or KuboParams()
    mats = _kubo_matrices(params)
    mats.setflags(write=False)

    def field(i: int, y: np.ndarray) -> np.ndarray:
        return mats[i] @ y

    def jacobian(i: int, y: np.ndarray) -> np.ndarray:
        return mats[i].copy()

    def hessian(i: int, y: np.ndarray) -> np.ndarray:
        return np.zeros((2, 2, 2))

    def exact(z: np.ndarray, t: float, x: np.ndarray) -> np.ndarray:
        return kubo_exact(params, z, t, x)

    return SystemSpec(
        name="kubo",
        state_dim=2,
        noise_dim=params.dims,
        vector_field=field,
        jacobian_field=jacobian,
        hessian_field=hessian,
        linear_form=mats,
        exact_solution=exact,
    )


def system_from_name(name: str, epsilon: float = 1.0, dims: int = 3) -> SystemSpec:
    """Select a built-in system by its config name.

    epsilon and dims apply to the Kubo oscillator only; the trig system has
    a fixed two-channel shape.
    """
    if name == "trig":
        return trig_system()
    if name == "kubo":
        return kubo_system(KuboParams(epsilon=epsilon, dims=dims))
    raise ValueError(f"unknown system {name!r}; choose from {', '.join(SYSTEM_NAMES)}")
