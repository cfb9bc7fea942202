"""Flux Jacobian transposes, the 8x8 characteristic system and its cofactor algebra.

The 8x8 system couples the first-order Taylor relations along a displacement
``(dx, dy)`` with the adjoint equations ``-A^T psi_x - B^T psi_y = 0``::

    [ dx*I   dy*I ] [psi_x]   [dpsi]
    [ -A^T   -B^T ] [psi_y] = [ 0  ]

``C^l_{mx}`` is the minor of that matrix obtained by deleting row ``l`` and
column ``m``; ``C^l_{my}`` deletes column ``4 + m`` instead. Tables store them
as ``c_x[m-1, l-1]`` and ``c_y[m-1, l-1]``.

Every coefficient carries the factor ``kappa*dx = u*dy - v*dx`` (``kappa = u*t - v``,
``t = dy/dx``). The closed forms below are written for the factored
coefficients (``C/(kappa*dx)``), which stay finite on streamtraces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DegenerateDirection, SubsonicInput
from .gas import (
    AIR,
    ConservState2,
    ConservState3,
    GasModel,
    Primitive2,
    primitive3_from_conservative,
    primitive_from_conservative,
)


@dataclass(frozen=True)
class Direction:
    """Unit displacement direction; components are normalized on construction."""

    dx: float
    dy: float

    def __post_init__(self):
        n = math.hypot(self.dx, self.dy)
        if not n > 0.0 or not math.isfinite(n):
            raise DegenerateDirection(f"cannot normalize direction ({self.dx}, {self.dy})")
        object.__setattr__(self, "dx", self.dx / n)
        object.__setattr__(self, "dy", self.dy / n)

    @classmethod
    def from_angle(cls, theta: float) -> "Direction":
        return cls(math.cos(theta), math.sin(theta))

    @property
    def ds(self) -> float:
        return 1.0

    @property
    def t(self) -> Optional[float]:
        """Slope dy/dx, or None for a vertical direction."""
        return None if self.dx == 0.0 else self.dy / self.dx

    @property
    def angle(self) -> float:
        return math.atan2(self.dy, self.dx)

    def flipped(self) -> "Direction":
        return Direction(-self.dx, -self.dy)

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy])


def _prim(state, gas) -> Primitive2:
    return state if isinstance(state, Primitive2) else primitive_from_conservative(state, gas)


# -- Jacobians ------------------------------------------------------------------


def _jt2(u, v, H, Ec, gas):
    g, g1 = gas.gamma, gas.gamma1
    A_T = np.array([
        [0.0, g1 * Ec - u * u, -u * v, (g1 * Ec - H) * u],
        [1.0, (3.0 - g) * u, v, H - g1 * u * u],
        [0.0, -g1 * v, u, -g1 * u * v],
        [0.0, g1, 0.0, g * u],
    ])
    B_T = np.array([
        [0.0, -u * v, g1 * Ec - v * v, (g1 * Ec - H) * v],
        [0.0, v, -g1 * u, -g1 * u * v],
        [1.0, u, (3.0 - g) * v, H - g1 * v * v],
        [0.0, 0.0, g1, g * v],
    ])
    return A_T, B_T


def jacobian_transpose_2d(state, gas: GasModel = AIR) -> Tuple[np.ndarray, np.ndarray]:
    """Transposed flux Jacobians ``(A^T, B^T)`` of the 2D Euler equations."""
    p = _prim(state, gas)
    return _jt2(p.u, p.v, p.H, p.Ec, gas)


def jacobian_transpose_3d(state: ConservState3, gas: GasModel = AIR):
    """Transposed flux Jacobians ``(A^T, B^T, C^T)`` of the 3D Euler equations."""
    p = primitive3_from_conservative(state, gas)
    u, v, w, H, Ec = p.u, p.v, p.w, p.H, p.Ec
    g, g1 = gas.gamma, gas.gamma1
    A_T = np.array([
        [0.0, g1 * Ec - u * u, -u * v, -u * w, (g1 * Ec - H) * u],
        [1.0, (2.0 - g1) * u, v, w, H - g1 * u * u],
        [0.0, -g1 * v, u, 0.0, -g1 * u * v],
        [0.0, -g1 * w, 0.0, u, -g1 * u * w],
        [0.0, g1, 0.0, 0.0, g * u],
    ])
    B_T = np.array([
        [0.0, -u * v, g1 * Ec - v * v, -v * w, (g1 * Ec - H) * v],
        [0.0, v, -g1 * u, 0.0, -g1 * u * v],
        [1.0, u, (2.0 - g1) * v, w, H - g1 * v * v],
        [0.0, 0.0, -g1 * w, v, -g1 * v * w],
        [0.0, 0.0, g1, 0.0, g * v],
    ])
    C_T = np.array([
        [0.0, -u * w, -v * w, g1 * Ec - w * w, (g1 * Ec - H) * w],
        [0.0, w, 0.0, -g1 * u, -g1 * u * w],
        [0.0, 0.0, w, -g1 * v, -g1 * v * w],
        [1.0, u, v, (2.0 - g1) * w, H - g1 * w * w],
        [0.0, 0.0, 0.0, g1, g * w],
    ])
    return A_T, B_T, C_T


def euler_flux_2d(q, gas: GasModel = AIR) -> Tuple[np.ndarray, np.ndarray]:
    """Inviscid fluxes ``(F_x, F_y)`` of the conservative vector ``q``."""
    rho, ru, rv, rE = q
    u, v = ru / rho, rv / rho
    p = gas.gamma1 * (rE - 0.5 * rho * (u * u + v * v))
    rH = rE + p
    return (np.array([ru, ru * u + p, ru * v, rH * u]),
            np.array([rv, rv * u, rv * v + p, rH * v]))


def euler_flux_3d(q, gas: GasModel = AIR):
    rho, ru, rv, rw, rE = q
    u, v, w = ru / rho, rv / rho, rw / rho
    p = gas.gamma1 * (rE - 0.5 * rho * (u * u + v * v + w * w))
    rH = rE + p
    return (np.array([ru, ru * u + p, ru * v, ru * w, rH * u]),
            np.array([rv, rv * u, rv * v + p, rv * w, rH * v]),
            np.array([rw, rw * u, rw * v, rw * w + p, rH * w]))


# -- the 8x8 system ----------------------------------------------------------------


def system_matrix(state, direction: Direction, gas: GasModel = AIR) -> np.ndarray:
    """Assemble the 8x8 matrix of the derivative-reconstruction problem."""
    A_T, B_T = jacobian_transpose_2d(state, gas)
    m = np.zeros((8, 8))
    m[:4, :4] = direction.dx * np.eye(4)
    m[:4, 4:] = direction.dy * np.eye(4)
    m[4:, :4] = -A_T
    m[4:, 4:] = -B_T
    return m


def characteristic_determinant(state, direction: Direction, gas: GasModel = AIR) -> Tuple[float, float]:
    """Return ``(det8, factored)``: the assembled determinant and its closed-form product.

    ``factored = K^2 (K + c ds)(K - c ds)`` with ``K = -v dx + u dy``.
    """
    p = _prim(state, gas)
    det8 = float(np.linalg.det(system_matrix(p, direction, gas)))
    k = -p.v * direction.dx + p.u * direction.dy
    cds = p.c * direction.ds
    return det8, k * k * (k + cds) * (k - cds)


# -- cofactor coefficients -------------------------------------------------------------


@dataclass(frozen=True)
class CoeffTable:
    """The 32 coefficients at one (state, direction) pair.

    ``c_x[m-1, l-1]`` holds C^l_{mx}; ``c_y`` likewise. When ``factored`` is
    true the ``kappa*dx`` factor has been divided out.
    """

    c_x: np.ndarray
    c_y: np.ndarray
    kappa: float
    t: Optional[float]
    dx: float
    dy: float
    factored: bool = False

    def get(self, l: int, m: int, axis: str = "x") -> float:
        """C^l_{m axis} with 1-based indices (l: minor row, m: form)."""
        table = self.c_x if axis == "x" else self.c_y
        return float(table[m - 1, l - 1])


def _factored_closed_forms(p: Primitive2, dx: float, dy: float, gas: GasModel):
    g, g1 = gas.gamma, gas.gamma1
    u, v, H, Ec = p.u, p.v, p.H, p.Ec
    t = dy / dx
    k = u * t - v
    q2 = u * u + v * v
    dx2, dxdy = dx * dx, dx * dy

    uvt = u + v * t
    P1 = (2 * t * u + (t * t - 1) * v) * (g1 * H + g1 * Ec + g * v * k) \
        - uvt * (g1 * t * H + g1 * u * k + g * v * k * t)
    Q = g1 * H + g1 * Ec + g * v * k
    R = g1 * u * u * v - u * v * v * t + g * v ** 3 - g1 * (u * t + v) * (Ec + H)
    S = t * g1 * H + t * g1 * Ec - g * u * k
    T = (g + 1) * u * u * v - t * g1 * u * v * v + (v + u * t) * (g1 * Ec + g1 * H - g * u * u)
    W = (t * v * v - u * k) * (-g1 * u + (g + 1) * t * v) \
        - (u * t - (1 + 2 * t * t) * v) * (g1 * Ec + g1 * H - g * v * v)
    Z = (g1 + g * t * t) * u * u * v - 2 * u * v * v * t + g1 * H * k \
        + (g + g1 * t * t) * v ** 3 - g1 * v * (1 + t * t) * Ec
    F = (g1 + g * t * t) * u ** 3 - 2 * u * u * v * t - g1 * t * k * H \
        + (g + g1 * t * t) * u * v * v - g1 * u * (1 + t * t) * Ec
    G = (v * k + u * u) * (v * t - (g1 + g * t * t) * u) \
        - (v * t - (2 + t * t) * u) * (g1 * Ec + g1 * H + g * v * k)

    bx = np.array([
        [-dx2 * P1, dxdy * g1 * q2 * H, -dxdy * g1 * t * q2 * H, dxdy * g1 * uvt * H * H],
        [-dxdy * Q, -dx2 * R, dxdy * R, dxdy * H * Q],
        [dxdy * S, -dxdy * T, dx2 * W, -dxdy * H * S],
        [dxdy * g1 * uvt, -dxdy * g1 * q2, dxdy * g1 * t * q2, -dx2 * Z],
    ])
    by = dx2 * np.array([
        [F, -g1 * q2 * H, g1 * t * q2 * H, -g1 * uvt * H * H],
        [Q, -G, -R, -H * Q],
        [-S, T, -t * T, H * S],
        [-g1 * uvt, g1 * q2, -g1 * t * q2, F],
    ])
    return bx, by, k, t


def coefficient_table_factored(state, direction: Direction, gas: GasModel = AIR) -> CoeffTable:
    """Coefficients with the ``kappa*dx`` factor removed (finite on streamtraces)."""
    if direction.dx == 0.0:
        raise DegenerateDirection("closed forms need dx != 0; use the swapped-axis path")
    p = _prim(state, gas)
    bx, by, k, t = _factored_closed_forms(p, direction.dx, direction.dy, gas)
    return CoeffTable(bx, by, k, t, direction.dx, direction.dy, factored=True)


def coefficient_table(state, direction: Direction, gas: GasModel = AIR) -> CoeffTable:
    """All 32 closed-form coefficients C^l_{mx}, C^l_{my}."""
    bar = coefficient_table_factored(state, direction, gas)
    scale = bar.kappa * direction.dx
    return CoeffTable(bar.c_x * scale, bar.c_y * scale, bar.kappa, bar.t,
                      direction.dx, direction.dy, factored=False)


def minor_coefficients(state, direction: Direction, gas: GasModel = AIR) -> CoeffTable:
    """Coefficients evaluated as explicit 7x7 minor determinants.

    Brute force; kept as an independent check of the closed forms.
    """
    m = system_matrix(state, direction, gas)
    cx = np.empty((4, 4))
    cy = np.empty((4, 4))
    for col in range(4):
        for row in range(4):
            keep_r = [r for r in range(8) if r != row]
            cx[col, row] = np.linalg.det(m[np.ix_(keep_r, [c for c in range(8) if c != col])])
            cy[col, row] = np.linalg.det(m[np.ix_(keep_r, [c for c in range(8) if c != col + 4])])
    p = _prim(state, gas)
    t = direction.t
    kappa = p.u * t - p.v if t is not None else math.nan
    return CoeffTable(cx, cy, kappa, t, direction.dx, direction.dy)


# -- left eigenvectors of the stripe field ---------------------------------------------


def left_eigenvectors(state, alpha: float, gas: GasModel = AIR):
    """Left null vectors of ``A sin(mu) - B cos(mu)`` for ``mu = alpha, alpha+beta, alpha-beta``.

    The state must be supersonic with velocity angle ``alpha``. Returns
    ``(lam_alpha, lam_alpha_plus_beta, lam_alpha_minus_beta)``.
    """
    p = _prim(state, gas)
    if not p.M > 1.0:
        raise SubsonicInput(f"left eigenvectors need M > 1, got M={p.M:.6g}")
    if abs(p.u * math.sin(alpha) - p.v * math.cos(alpha)) > 1e-8 * p.speed:
        raise ValueError(f"velocity angle {p.phi!r} does not match alpha={alpha!r}")
    g1 = gas.gamma1
    rho, c, u, v, M = p.rho, p.c, p.u, p.v, p.M
    beta = math.asin(1.0 / M)
    first = c / rho * (1.0 + 0.5 * g1 * M * M)
    last = g1 / (rho * c)
    am, ap = alpha - beta, alpha + beta
    lam_minus = np.array([
        first,
        (math.sin(am) - g1 * u / c) / rho,
        (-math.cos(am) - g1 * v / c) / rho,
        last,
    ])
    lam_plus = np.array([
        first,
        -(math.sin(ap) + g1 * u / c) / rho,
        -(-math.cos(ap) + g1 * v / c) / rho,
        last,
    ])
    un = math.cos(alpha) * u + math.sin(alpha) * v
    lam_0 = np.array([
        -1.0 - 0.5 * g1 * M * M,
        g1 * u / (c * c) + 2.0 * math.cos(alpha) / un,
        g1 * v / (c * c) + 2.0 * math.sin(alpha) / un,
        -g1 / (c * c),
    ])
    return lam_0, lam_plus, lam_minus
