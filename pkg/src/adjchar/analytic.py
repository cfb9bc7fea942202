"""Analytic fixtures: the uniform supersonic stripe adjoint field, Gamma functions
along curves, and the 3D streamtrace row-combination identities.

In a uniform supersonic flow at angle alpha the adjoint field

    psi(x, y) = sum_mu phi_mu(x sin mu - y cos mu) * lam_mu,   mu in {alpha, alpha+beta, alpha-beta}

solves the adjoint Euler equations for arbitrary profiles phi_mu, each stripe
being constant along lines of angle mu.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import MissingAdjoint, OutOfProfileDomain, SubsonicInput
from .field import FieldGrid, save_field
from .forms import characteristic_directions
from .gas import (AIR, ConservState2, ConservState3, GasModel, Primitive2,
                  primitive3_from_conservative, primitive_from_conservative)
from .jacobians import jacobian_transpose_2d, jacobian_transpose_3d, left_eigenvectors
from .tracer import Curve, Termination

DEMO_BBOX = (0.0, 2.0, -1.0, 1.0)  # xmin, xmax, ymin, ymax
DEMO_HALF_WIDTH = 0.25
DEMO_TRACE_LENGTH = 0.75
GAMMA_NAMES = ("S1", "S2", "Cplus", "Cminus")


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear scalar function given by a knot table."""

    knots: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if k.ndim != 1 or k.size < 2 or len(self.values) != k.size:
            raise ValueError("profile needs at least two knots and one value per knot")
        if np.any(np.diff(k) <= 0):
            raise ValueError("profile knots must be strictly increasing")

    @classmethod
    def hat(cls, center, half_width, lo, hi, height=1.0) -> "Profile":
        a, b = center - half_width, center + half_width
        if not lo < a < center < b < hi:
            raise ValueError("hat support must lie strictly inside the profile domain")
        return cls((lo, a, center, b, hi), (0.0, 0.0, height, 0.0, 0.0))

    @classmethod
    def zero(cls, lo, hi) -> "Profile":
        return cls((lo, hi), (0.0, 0.0))

    @property
    def domain(self) -> Tuple[float, float]:
        return self.knots[0], self.knots[-1]

    def _check(self, xi):
        lo, hi = self.domain
        tol = 1e-12 * max(1.0, hi - lo)
        xi = np.asarray(xi, dtype=float)
        if np.any(xi < lo - tol) or np.any(xi > hi + tol):
            raise OutOfProfileDomain(f"profile argument outside [{lo}, {hi}]")
        return xi

    def __call__(self, xi):
        xi = self._check(xi)
        out = np.interp(xi, self.knots, self.values)
        return float(out) if out.ndim == 0 else out

    def slope(self, xi) -> float:
        """Derivative of the segment containing ``xi`` (right segment at a knot)."""
        xi = float(self._check(xi))
        k = min(max(int(np.searchsorted(self.knots, xi, side="right")) - 1, 0), len(self.knots) - 2)
        return (self.values[k + 1] - self.values[k]) / (self.knots[k + 1] - self.knots[k])


def stripe_coordinate(mu: float, x, y):
    return x * math.sin(mu) - y * math.cos(mu)


@dataclass(frozen=True)
class StripeField:
    """Uniform supersonic flow carrying three adjoint stripes.

    ``profiles`` are ordered as the angles ``(alpha, alpha+beta, alpha-beta)``.
    """

    M_inf: float
    alpha: float
    profiles: Tuple[Profile, Profile, Profile]
    gas: GasModel = AIR
    rho_inf: float = 1.0
    c_inf: float = 1.0

    def __post_init__(self):
        if not self.M_inf > 1.0:
            raise SubsonicInput(f"stripe field needs M_inf > 1, got {self.M_inf}")
        if len(self.profiles) != 3:
            raise ValueError("stripe field needs exactly three profiles")

    @property
    def beta(self) -> float:
        return math.asin(1.0 / self.M_inf)

    @property
    def angles(self) -> Tuple[float, float, float]:
        return self.alpha, self.alpha + self.beta, self.alpha - self.beta

    @property
    def state(self) -> ConservState2:
        return ConservState2.from_mach(self.M_inf, self.alpha, self.rho_inf, self.c_inf, self.gas)

    @property
    def primitive(self) -> Primitive2:
        return primitive_from_conservative(self.state, self.gas)

    @property
    def eigenvectors(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return left_eigenvectors(self.state, self.alpha, self.gas)

    @classmethod
    def demo(cls, M_inf=2.0, alpha=0.0, bbox=DEMO_BBOX, gas: GasModel = AIR) -> "StripeField":
        """Unit hats of width 0.5 all crossing the bbox centre, tables covering the bbox."""
        if not M_inf > 1.0:
            raise SubsonicInput(f"stripe field needs M_inf > 1, got {M_inf}")
        x0, x1, y0, y1 = bbox
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        beta = math.asin(1.0 / M_inf)
        profiles = []
        for mu in (alpha, alpha + beta, alpha - beta):
            corners = [stripe_coordinate(mu, x, y) for x in (x0, x1) for y in (y0, y1)]
            c = stripe_coordinate(mu, cx, cy)
            lo = min(min(corners), c - 2 * DEMO_HALF_WIDTH)
            hi = max(max(corners), c + 2 * DEMO_HALF_WIDTH)
            profiles.append(Profile.hat(c, DEMO_HALF_WIDTH, lo, hi))
        return cls(M_inf, alpha, tuple(profiles), gas)


def demo_starts(sf: StripeField, bbox=DEMO_BBOX) -> Dict[str, Tuple[float, float]]:
    """Start points whose against-flow traces of length ``DEMO_TRACE_LENGTH`` end in the overlap.

    Each curve runs parallel to its own stripe, offset from the stripe centre so
    it stays clear of the profile kinks, and ends near the bbox centre so that
    psi differs between its two ends.
    """
    cx, cy = 0.5 * (bbox[0] + bbox[1]), 0.5 * (bbox[2] + bbox[3])
    a, ap, am = sf.angles
    out = {}
    for family, mu, along, off in (("S", a, 0.9, 0.1), ("Cplus", ap, 0.6, 0.05), ("Cminus", am, 0.6, 0.05)):
        out[family] = (cx + along * math.cos(mu) - off * math.sin(mu),
                       cy + along * math.sin(mu) + off * math.cos(mu))
    return out


def stripe_adjoint(sf: StripeField, x, y) -> np.ndarray:
    """psi at a point, or at arrays of points (trailing axis of length 4)."""
    out = 0.0
    for mu, prof, lam in zip(sf.angles, sf.profiles, sf.eigenvectors):
        out = out + np.multiply.outer(prof(stripe_coordinate(mu, x, y)), lam)
    return np.asarray(out)


def stripe_adjoint_gradient(sf: StripeField, x, y) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic (dpsi/dx, dpsi/dy), valid where every profile is smooth."""
    gx = np.zeros(4)
    gy = np.zeros(4)
    for mu, prof, lam in zip(sf.angles, sf.profiles, sf.eigenvectors):
        d = prof.slope(stripe_coordinate(mu, x, y))
        gx += d * math.sin(mu) * lam
        gy -= d * math.cos(mu) * lam
    return gx, gy


def adjoint_pde_residual(sf: StripeField, x, y) -> Tuple[float, float]:
    """Max-norm of -A^T psi_x - B^T psi_y at a point, and its scale ||A^T|| * ||grad psi||."""
    AT, BT = jacobian_transpose_2d(sf.state, sf.gas)
    gx, gy = stripe_adjoint_gradient(sf, x, y)
    r = -AT @ gx - BT @ gy
    scale = max(np.abs(AT).max(), np.abs(BT).max()) * max(np.abs(gx).max(), np.abs(gy).max())
    return float(np.abs(r).max()), float(scale)


def null_eigenvalue_residuals(sf: StripeField) -> Tuple[float, float, float]:
    """u sin(mu) - v cos(mu) + s c for (mu, s) = (alpha, 0), (alpha-beta, +1), (alpha+beta, -1)."""
    p = sf.primitive
    a, ap, am = sf.angles
    return (p.u * math.sin(a) - p.v * math.cos(a),
            p.u * math.sin(am) - p.v * math.cos(am) + p.c,
            p.u * math.sin(ap) - p.v * math.cos(ap) - p.c)


def emit_stripe_grid(sf: StripeField, bbox, ni: int, nj: int, path=None) -> FieldGrid:
    """Cartesian grid with the uniform flow and nodal stripe adjoint; written to ``path`` if given."""
    x0, x1, y0, y1 = bbox
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate bbox {bbox}")
    if ni < 2 or nj < 2:
        raise ValueError("grid needs ni, nj >= 2")
    X, Y = np.meshgrid(np.linspace(x0, x1, ni), np.linspace(y0, y1, nj))
    q = np.broadcast_to(np.array(sf.state.as_tuple()), (nj, ni, 4))
    grid = FieldGrid(X, Y, q, stripe_adjoint(sf, X, Y), sf.gas.gamma)
    if path is not None:
        save_field(grid, path)
    return grid


def analytic_curve(sf: StripeField, family: str, start, length: float, n: int) -> Curve:
    """Straight characteristic of ``family`` traced against the flow with exact psi samples."""
    d = characteristic_directions(sf.primitive, sf.gas).for_family(family)
    s = np.linspace(0.0, length, n)
    x = start[0] - s * d.dx
    y = start[1] - s * d.dy
    q = np.tile(np.array(sf.state.as_tuple()), (n, 1))
    return Curve(family, np.column_stack([x, y, s]), q, stripe_adjoint(sf, x, y),
                 Termination.MAX_LENGTH, gamma=sf.gas.gamma)


# -- Gamma functions ------------------------------------------------------------------


def gamma_terms(state, psi, gas: GasModel = AIR) -> Dict[str, Optional[np.ndarray]]:
    """The four additive terms of each Gamma at one sample.

    The C+/C- entries use the unit characteristic direction (xi, eta), i.e. the
    slope form times xi, and are None where the flow is subsonic.
    """
    p = state if isinstance(state, Primitive2) else primitive_from_conservative(state, gas)
    p1, p2, p3, p4 = (float(v) for v in psi)
    u, v, H, Ec = p.u, p.v, p.H, p.Ec
    out = {
        "S1": np.array([Ec * p1, H * u * p2, H * v * p3, H * H * p4]),
        "S2": np.array([p1, u * p2, v * p3, Ec * p4]),
    }
    dirs = characteristic_directions(p, gas)
    q2 = u * u + v * v
    for name in ("Cplus", "Cminus"):
        d = dirs.for_family(name)
        if d is None:
            out[name] = None
            continue
        un = u * d.dx + v * d.dy
        out[name] = np.array([un * p1, q2 * d.dx * p2, q2 * d.dy * p3, H * un * p4])
    return out


@dataclass
class GammaSamples:
    """Per-sample Gamma values; ``terms[name]`` has shape (N, 4), NaN where undefined."""

    s: np.ndarray
    terms: Dict[str, np.ndarray] = field(default_factory=dict)

    def values(self, name: str) -> np.ndarray:
        a, b, c, d = self.terms[name].T
        return a + b + c + d

    @property
    def gamma_s1(self):
        return self.values("S1")

    @property
    def gamma_s2(self):
        return self.values("S2")

    @property
    def gamma_cplus(self):
        return self.values("Cplus")

    @property
    def gamma_cminus(self):
        return self.values("Cminus")

    def relative_spread(self, name: str) -> float:
        """(max - min) of Gamma over the largest per-sample sum of |terms|."""
        g = self.values(name)
        scale = float(np.max(np.abs(self.terms[name]).sum(axis=1)))
        if scale == 0.0:
            return 0.0
        return float((g.max() - g.min()) / scale)


def gamma_along(curve: Curve) -> GammaSamples:
    if curve.psi is None:
        raise MissingAdjoint("curve carries no adjoint data")
    gas = GasModel(curve.gamma)
    terms = {name: np.full((len(curve), 4), np.nan) for name in GAMMA_NAMES}
    for k, (state, psi) in enumerate(zip(curve.states(), curve.psi)):
        for name, t in gamma_terms(state, psi, gas).items():
            if t is not None:
                terms[name][k] = t
    return GammaSamples(curve.s.copy(), terms)


# -- 3D streamtrace combinations -------------------------------------------------------


def streamtrace_combinations_3d(state: ConservState3, gas: GasModel = AIR):
    """Row combinations of the 3D adjoint system and their target patterns.

    The rows L_i of ``-A^T psi_x - B^T psi_y - C^T psi_z`` are 15-vectors. Returns
    ``[(combo, target), (combo, target)]`` as (3, 5) arrays for the weights
    (1, u, v, w, Ec) and (2Ec-H, u Ec, v Ec, w Ec, Ec H).
    """
    p = primitive3_from_conservative(state, gas)
    AT, BT, CT = jacobian_transpose_3d(state, gas)
    L = -np.stack([AT, BT, CT], axis=1)  # L[i] is row i, split by derivative direction
    u, v, w, H, Ec = p.u, p.v, p.w, p.H, p.Ec
    vel = np.array([u, v, w])
    w2 = np.array([1.0, u, v, w, Ec])
    w1 = np.array([2 * Ec - H, u * Ec, v * Ec, w * Ec, Ec * H])
    t2 = np.array([[a, a * u, a * v, a * w, a * Ec] for a in vel])
    t1 = np.array([[a * Ec, a * u * H, a * v * H, a * w * H, a * H * H] for a in vel])
    return [(-np.einsum("i,idk->dk", w2, L), t2), (-np.einsum("i,idk->dk", w1, L), t1)]


def verify_3d_streamtrace_identity(state: ConservState3, gas: GasModel = AIR) -> Tuple[float, float]:
    """Max-norm residuals ``(r2, r1)`` of the two 3D streamtrace combinations."""
    (c2, t2), (c1, t1) = streamtrace_combinations_3d(state, gas)
    return float(np.abs(c2 - t2).max()), float(np.abs(c1 - t1).max())
