"""Perfect-gas thermodynamics and classical characteristic quantities.

All angles are in radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import NonPhysicalState, SubsonicInput


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")

    @property
    def gamma1(self) -> float:
        return self.gamma - 1.0


AIR = GasModel(1.4)


@dataclass(frozen=True)
class ConservState2:
    rho: float
    rho_u: float
    rho_v: float
    rho_E: float

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.rho, self.rho_u, self.rho_v, self.rho_E)

    @classmethod
    def from_primitive(cls, rho, u, v, p, gas: GasModel = AIR) -> "ConservState2":
        rho_E = p / gas.gamma1 + 0.5 * rho * (u * u + v * v)
        return cls(rho, rho * u, rho * v, rho_E)

    @classmethod
    def from_mach(cls, M, phi, rho=1.0, c=1.0, gas: GasModel = AIR) -> "ConservState2":
        """State with Mach number ``M``, flow angle ``phi``, density and sound speed."""
        p = rho * c * c / gas.gamma
        V = M * c
        return cls.from_primitive(rho, V * math.cos(phi), V * math.sin(phi), p, gas)


@dataclass(frozen=True)
class ConservState3:
    rho: float
    rho_u: float
    rho_v: float
    rho_w: float
    rho_E: float

    def as_tuple(self):
        return (self.rho, self.rho_u, self.rho_v, self.rho_w, self.rho_E)

    @classmethod
    def from_primitive(cls, rho, u, v, w, p, gas: GasModel = AIR) -> "ConservState3":
        rho_E = p / gas.gamma1 + 0.5 * rho * (u * u + v * v + w * w)
        return cls(rho, rho * u, rho * v, rho * w, rho_E)


@dataclass(frozen=True)
class Primitive2:
    rho: float
    u: float
    v: float
    p: float
    c: float
    M: float
    H: float
    Ec: float
    phi: float
    beta: Optional[float]
    stagnant: bool = False

    @property
    def speed(self) -> float:
        return math.hypot(self.u, self.v)

    def to_conservative(self, gas: GasModel = AIR) -> ConservState2:
        return ConservState2.from_primitive(self.rho, self.u, self.v, self.p, gas)


@dataclass(frozen=True)
class Primitive3:
    rho: float
    u: float
    v: float
    w: float
    p: float
    c: float
    H: float
    Ec: float


def primitive_from_conservative(state: ConservState2, gas: GasModel = AIR) -> Primitive2:
    rho = state.rho
    if not rho > 0.0:
        raise NonPhysicalState(f"non-positive density {rho!r}")
    u = state.rho_u / rho
    v = state.rho_v / rho
    Ec = 0.5 * (u * u + v * v)
    p = gas.gamma1 * (state.rho_E - rho * Ec)
    if not p > 0.0:
        raise NonPhysicalState(f"non-positive pressure {p!r}")
    c = math.sqrt(gas.gamma * p / rho)
    H = c * c / gas.gamma1 + Ec
    speed = math.hypot(u, v)
    M = speed / c
    stagnant = speed == 0.0
    # phi = 0 at rest keeps downstream arithmetic finite; forms reject stagnant states
    phi = 0.0 if stagnant else math.atan2(v, u)
    beta = math.asin(1.0 / M) if M >= 1.0 else None
    return Primitive2(rho, u, v, p, c, M, H, Ec, phi, beta, stagnant)


def primitive3_from_conservative(state: ConservState3, gas: GasModel = AIR) -> Primitive3:
    rho = state.rho
    if not rho > 0.0:
        raise NonPhysicalState(f"non-positive density {rho!r}")
    u, v, w = state.rho_u / rho, state.rho_v / rho, state.rho_w / rho
    Ec = 0.5 * (u * u + v * v + w * w)
    p = gas.gamma1 * (state.rho_E - rho * Ec)
    if not p > 0.0:
        raise NonPhysicalState(f"non-positive pressure {p!r}")
    c = math.sqrt(gas.gamma * p / rho)
    return Primitive3(rho, u, v, w, p, c, c * c / gas.gamma1 + Ec, Ec)


def prandtl_meyer(M: float, gas: GasModel = AIR) -> float:
    """Prandtl-Meyer angle nu(M) in radians, defined for M >= 1."""
    if not M >= 1.0:
        raise SubsonicInput(f"Prandtl-Meyer function needs M >= 1, got {M!r}")
    g = gas.gamma
    if math.isinf(M):
        return (math.sqrt((g + 1) / (g - 1)) - 1.0) * math.pi / 2
    m = math.sqrt(M * M - 1.0)
    k = math.sqrt((g + 1) / (g - 1))
    return k * math.atan(m / k) - math.atan(m)


def riemann_invariants(state: ConservState2, gas: GasModel = AIR) -> Tuple[float, float]:
    """Return ``(k_plus, k_minus) = (phi - nu, phi + nu)``."""
    prim = primitive_from_conservative(state, gas)
    if prim.M < 1.0:
        raise SubsonicInput(f"Riemann invariants need M >= 1, got M={prim.M:.6g}")
    nu = prandtl_meyer(prim.M, gas)
    return prim.phi - nu, prim.phi + nu
