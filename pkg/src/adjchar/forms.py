"""Characteristic directions, differential forms and the adjoint ODE residuals.

Production paths work with unit direction components ``(xi, eta)`` rather than
the slope ``t``, so vertical characteristics need no special casing. Slopes are
reported only for comparison with the slope-based formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import StagnantState
from .gas import AIR, GasModel, Primitive2, primitive_from_conservative
from .jacobians import Direction, _factored_closed_forms

# alternating signs of the cofactor expansion: C^1 dpsi1 - C^2 dpsi2 + C^3 dpsi3 - C^4 dpsi4
_FORM_SIGNS = np.array([1.0, -1.0, 1.0, -1.0])
# (u, v) <-> (v, u) relabelling maps psi2 <-> psi3
_SWAP = [0, 2, 1, 3]
# per-row sign relating swapped-frame forms to original-frame forms
_SWAP_ROW_SIGNS = np.array([-1.0, 1.0, 1.0, -1.0])

DEFAULT_RANK_TOL = 1e-8


def _prim(state, gas) -> Primitive2:
    return state if isinstance(state, Primitive2) else primitive_from_conservative(state, gas)


@dataclass(frozen=True)
class CharDirections:
    s_dir: Direction
    c_plus_dir: Optional[Direction] = None
    c_minus_dir: Optional[Direction] = None
    t_plus: Optional[float] = None
    t_minus: Optional[float] = None

    def for_family(self, family: str) -> Optional[Direction]:
        return {"S": self.s_dir, "Cplus": self.c_plus_dir, "Cminus": self.c_minus_dir}[family]


@dataclass(frozen=True)
class FormResidual:
    total: float
    subparts: np.ndarray

    @classmethod
    def from_subparts(cls, parts: Sequence[float]) -> "FormResidual":
        a, b, c, d = (float(x) for x in parts)
        return cls(a + b + c + d, np.array([a, b, c, d]))


def characteristic_directions(state, gas: GasModel = AIR) -> CharDirections:
    """Streamtrace direction and, where M >= 1, the C+/C- directions.

    Directions point downstream; C+ is the velocity rotated by +beta, C- by -beta.
    """
    p = _prim(state, gas)
    if p.stagnant:
        raise StagnantState("flow direction undefined at zero velocity")
    u, v, c = p.u, p.v, p.c
    s_dir = Direction(u, v)
    if p.M < 1.0:
        return CharDirections(s_dir)
    # rotate the velocity by +/-beta in components: exact zeros survive, unlike tan(phi +/- beta)
    w = math.sqrt(max(u * u + v * v - c * c, 0.0))
    cp = Direction(u * w - v * c, v * w + u * c)
    cm = Direction(u * w + v * c, v * w - u * c)
    return CharDirections(s_dir, cp, cm, cp.t, cm.t)


def slope_formula(state, sign: int, gas: GasModel = AIR) -> float:
    """t+ (sign=+1) or t- (sign=-1) from the quotient formula; singular where u^2 = c^2."""
    p = _prim(state, gas)
    u, v, c = p.u, p.v, p.c
    return (u * v + sign * c * math.sqrt(u * u + v * v - c * c)) / (u * u - c * c)


def streamtrace_residuals(state, rate, gas: GasModel = AIR) -> Tuple[FormResidual, FormResidual]:
    """Residuals of the two adjoint ODEs along a streamtrace.

    ``rate`` is dpsi/ds (4 components). Returns ``(r1, r2)`` with subparts
    ``[Ec psi1', H u psi2', H v psi3', H^2 psi4']`` and ``[psi1', u psi2', v psi3', Ec psi4']``.
    """
    p = _prim(state, gas)
    d1, d2, d3, d4 = (float(x) for x in rate)
    H, Ec = p.H, p.Ec
    r1 = FormResidual.from_subparts([Ec * d1, H * p.u * d2, H * p.v * d3, H * H * d4])
    r2 = FormResidual.from_subparts([d1, p.u * d2, p.v * d3, Ec * d4])
    return r1, r2


def characteristic_residual(state, direction: Direction, rate, gas: GasModel = AIR) -> FormResidual:
    """Residual of the C+/C- adjoint ODE in direction-homogeneous form.

    With ``(xi, eta)`` the unit direction the subparts are
    ``[(u xi + v eta) psi1', |U|^2 xi psi2', |U|^2 eta psi3', H (u xi + v eta) psi4']``,
    i.e. ``xi`` times the slope-based form wherever ``xi != 0``.
    """
    p = _prim(state, gas)
    xi, eta = direction.dx, direction.dy
    d1, d2, d3, d4 = (float(x) for x in rate)
    un = p.u * xi + p.v * eta
    q2 = p.u * p.u + p.v * p.v
    return FormResidual.from_subparts([un * d1, q2 * xi * d2, q2 * eta * d3, p.H * un * d4])


def _factored_rows(p: Primitive2, dx: float, dy: float, gas: GasModel):
    bx, by, _, _ = _factored_closed_forms(p, dx, dy, gas)
    return bx * _FORM_SIGNS, by * _FORM_SIGNS


def form_matrix(state, direction: Direction, gas: GasModel = AIR) -> np.ndarray:
    """8x4 matrix of the eight differential forms acting on (dpsi1..dpsi4).

    Rows 0-3 come from the x-derivatives, rows 4-7 from the y-derivatives,
    both built from the factored coefficients. Steep directions are assembled
    in the frame with x and y exchanged.
    """
    p = _prim(state, gas)
    dx, dy = direction.dx, direction.dy
    if abs(dx) >= abs(dy):
        fx, fy = _factored_rows(p, dx, dy, gas)
        return np.vstack([fx, fy])
    swapped = Primitive2(p.rho, p.v, p.u, p.p, p.c, p.M, p.H, p.Ec,
                         math.atan2(p.u, p.v), p.beta, p.stagnant)
    sx, sy = _factored_rows(swapped, dy, dx, gas)
    fx = _SWAP_ROW_SIGNS[:, None] * sy[_SWAP][:, _SWAP]
    fy = _SWAP_ROW_SIGNS[:, None] * sx[_SWAP][:, _SWAP]
    return np.vstack([fx, fy])


def numeric_rank(matrix, rel_tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above ``rel_tol`` times the largest one."""
    s = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def null_space(matrix, rel_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the right null space at the numeric rank."""
    a = np.asarray(matrix, dtype=float)
    r = numeric_rank(a, rel_tol)
    _, _, vt = np.linalg.svd(a)
    return vt[r:].T


def degree_two_residual(state, t: float, gas: GasModel = AIR) -> Tuple[float, float]:
    """Residual of ``g1 (1+t^2) H = g1 (1+t^2) Ec + (t u - v)^2`` and its scale."""
    p = _prim(state, gas)
    g1 = gas.gamma1
    lhs = g1 * (1 + t * t) * p.H
    rhs = g1 * (1 + t * t) * p.Ec + (t * p.u - p.v) ** 2
    return lhs - rhs, max(abs(lhs), abs(rhs))
