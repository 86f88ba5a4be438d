"""Runge-Kutta coefficient tables and the symplecticity predicate.

A tableau is symplectic when

    a[i,j] b[i] + a[j,i] b[j] = b[i] b[j]   for all stage pairs (i, j),

which makes the resulting implicit scheme inherit the symplectic
structure of the flow it discretizes.  Three symplectic tables are built
in: the 1-stage midpoint rule, a 2-stage Gauss table ("method-1"), and a
3-stage diagonally-implicit table ("method-2") whose coefficient is the
real root of 6x^3 - 12x^2 + 6x - 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ButcherTableau",
    "is_symplectic",
    "symplectic_residual",
    "builtin_tableau",
    "method2_coefficient",
    "BUILTIN_TABLEAU_NAMES",
]

BUILTIN_TABLEAU_NAMES = ("midpoint", "method-1", "method-2")


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("a must be a square matrix")
        if b.shape != (a.shape[0],):
            raise ValueError("b must have one weight per stage")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("tableau coefficients must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def stages(self) -> int:
        return len(self.b)


def symplectic_residual(tableau: ButcherTableau) -> float:
    """max_{i,j} |a_ij b_i + a_ji b_j - b_i b_j|."""
    ba = tableau.b[:, None] * tableau.a
    return float(np.abs(ba + ba.T - np.outer(tableau.b, tableau.b)).max())


def is_symplectic(tableau: ButcherTableau, tol: float = 1e-12) -> bool:
    return symplectic_residual(tableau) <= tol


def method2_coefficient() -> float:
    """Real root of 6x^3 - 12x^2 + 6x - 1, refined by Newton from 1.351207."""
    x = 1.351207
    for _ in range(50):
        f = ((6.0 * x - 12.0) * x + 6.0) * x - 1.0
        df = (18.0 * x - 24.0) * x + 6.0
        x_next = x - f / df
        if x_next == x:
            break
        x = x_next
    return x


def builtin_tableau(name: str) -> ButcherTableau:
    """Look up one of the built-in symplectic tables by name."""
    if name == "midpoint":
        return ButcherTableau("midpoint", np.array([[0.5]]), np.array([1.0]))
    if name == "method-1":
        root3 = np.sqrt(3.0)
        a = np.array(
            [
                [0.25, (3.0 - 2.0 * root3) / 12.0],
                [(3.0 + 2.0 * root3) / 12.0, 0.25],
            ]
        )
        return ButcherTableau("method-1", a, np.array([0.5, 0.5]))
    if name == "method-2":
        c = method2_coefficient()
        a = np.array(
            [
                [c / 2.0, 0.0, 0.0],
                [c, c / 2.0, 0.0],
                [c, c, 0.5 - c],
            ]
        )
        return ButcherTableau("method-2", a, np.array([c, c, 1.0 - 2.0 * c]))
    raise ValueError(
        f"unknown tableau {name!r}; built-ins are {', '.join(BUILTIN_TABLEAU_NAMES)}"
    )
