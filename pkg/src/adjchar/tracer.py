"""Streamtrace and C+/C- curve integration through a FieldGrid."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from .errors import (
    MissingAdjoint,
    NonPhysicalState,
    OutOfDomain,
    OutOfDomainAtStart,
    StagnantState,
    StepFailure,
    SubsonicAtStart,
    TooFewPoints,
)
from .field import FieldGrid, SamplePoint
from .forms import characteristic_directions
from .gas import ConservState2, primitive_from_conservative

FAMILIES = ("S", "Cplus", "Cminus")
CURVE_COLUMNS = ("s", "x", "y", "rho", "rho_u", "rho_v", "rho_E", "M",
                 "psi1", "psi2", "psi3", "psi4", "shock_flag")

MAX_HALVINGS = 4


class Termination(str, Enum):
    OUT_OF_DOMAIN = "OutOfDomain"
    SUBSONIC_REACHED = "SubsonicReached"
    MAX_LENGTH = "MaxLength"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class TraceConfig:
    step: float
    max_length: float
    radius_limit: Optional[Tuple[float, float, float]] = None  # (cx, cy, radius)
    direction_sense: str = "against_flow"
    shock_threshold: float = 0.1

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not self.max_length > self.step:
            raise ValueError("max_length must exceed step")
        if self.direction_sense not in ("with_flow", "against_flow"):
            raise ValueError(f"unknown direction sense {self.direction_sense!r}")
        if self.radius_limit is not None and not self.radius_limit[2] > 0:
            raise ValueError("clip radius must be positive")


@dataclass
class Curve:
    """Arc-length sampled curve; ``points`` columns are (x, y, s)."""

    family: str
    points: np.ndarray
    q: np.ndarray
    psi: Optional[np.ndarray]
    termination: Termination
    shock_flag: np.ndarray = field(default=None)
    gamma: float = 1.4
    clip: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if self.shock_flag is None:
            self.shock_flag = np.zeros(len(self.points), dtype=bool)

    def __len__(self):
        return len(self.points)

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def y(self):
        return self.points[:, 1]

    @property
    def s(self):
        return self.points[:, 2]

    def states(self) -> List[ConservState2]:
        return [ConservState2(*row) for row in self.q.tolist()]


class _Stop(Exception):
    def __init__(self, kind: Termination):
        super().__init__(kind.value)
        self.kind = kind


class _Tracer:
    def __init__(self, grid: FieldGrid, family: str, cfg: TraceConfig):
        self.grid = grid
        self.family = family
        self.cfg = cfg
        self.sense = 1.0 if cfg.direction_sense == "with_flow" else -1.0
        self.hint = None

    def probe(self, x, y) -> SamplePoint:
        clip = self.cfg.radius_limit
        if clip is not None and math.hypot(x - clip[0], y - clip[1]) > clip[2]:
            raise _Stop(Termination.OUT_OF_DOMAIN)
        try:
            sp = self.grid.sample(x, y, self.hint)
        except OutOfDomain:
            raise _Stop(Termination.OUT_OF_DOMAIN) from None
        return sp

    def tangent(self, sp: SamplePoint, ref) -> np.ndarray:
        try:
            prim = primitive_from_conservative(sp.state, self.grid.gas)
            if self.family != "S" and prim.M < 1.0:
                raise _Stop(Termination.SUBSONIC_REACHED)
            d = characteristic_directions(prim, self.grid.gas).for_family(self.family)
        except (StagnantState, NonPhysicalState):
            raise _Stop(Termination.STEP_FAILURE) from None
        tan = np.array([d.dx, d.dy]) * self.sense
        if ref is not None and tan @ ref < 0.0:
            tan = -tan
        return tan

    def rk4(self, p, tan0, h):
        k1 = tan0
        k2 = self.tangent(self.probe(*(p + 0.5 * h * k1)), tan0)
        k3 = self.tangent(self.probe(*(p + 0.5 * h * k2)), tan0)
        k4 = self.tangent(self.probe(*(p + h * k3)), tan0)
        p_new = p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        sp = self.probe(*p_new)
        tan_new = self.tangent(sp, tan0)
        return p_new, sp, tan_new


def trace(grid: FieldGrid, start, family: str, cfg: TraceConfig) -> Curve:
    """Integrate a curve of ``family`` from ``start`` with fixed-step RK4.

    The unit tangent is re-aligned with the previous accepted tangent at every
    stage. The length budget is spent in the integration parameter, so the
    endpoint keeps fourth-order accuracy; recorded s is the accumulated chord
    length. A failing step is retried with halved steps (at most four times);
    the reason of the last failure becomes the termination.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown curve family {family!r}")
    tr = _Tracer(grid, family, cfg)
    x0, y0 = (float(v) for v in start)
    try:
        sp = tr.probe(x0, y0)
    except _Stop:
        raise OutOfDomainAtStart(f"start point ({x0}, {y0}) is outside the domain") from None
    try:
        tan = tr.tangent(sp, None)
    except _Stop as stop:
        if stop.kind is Termination.SUBSONIC_REACHED:
            raise SubsonicAtStart(f"{family} curve needs M >= 1 at the start point") from None
        raise StepFailure(f"no characteristic direction at ({x0}, {y0})") from None

    p = np.array([x0, y0])
    pts, samples = [(x0, y0, 0.0)], [sp]
    tr.hint = sp.cell
    s = sigma = 0.0  # chord length and integration parameter (true arc length)
    termination = Termination.MAX_LENGTH
    while True:
        remaining = cfg.max_length - sigma
        if remaining <= 1e-12 * cfg.max_length:
            break
        h = min(cfg.step, remaining)
        for _ in range(MAX_HALVINGS + 1):
            try:
                p_new, sp_new, tan_new = tr.rk4(p, tan, h)
                break
            except _Stop as stop:
                last = stop.kind
                h *= 0.5
        else:
            termination = last
            break
        s += float(math.hypot(*(p_new - p)))
        sigma += h
        p, tan = p_new, tan_new
        tr.hint = sp_new.cell
        pts.append((p[0], p[1], s))
        samples.append(sp_new)

    if termination is Termination.STEP_FAILURE and len(pts) < 2:
        raise StepFailure(f"direction evaluation failed at the first step from ({x0}, {y0})")
    q = np.array([smp.q for smp in samples])
    psi = np.array([smp.adjoint for smp in samples]) if grid.has_adjoint else None
    flags = np.array([grid.density_indicator(smp) > cfg.shock_threshold for smp in samples])
    return Curve(family, np.array(pts), q, psi, termination, flags, grid.gamma, cfg.radius_limit)


def resample_adjoint_rates(curve: Curve) -> np.ndarray:
    """dpsi/ds at every sample, shape (N, 4).

    Second-order central differences on the nonuniform s grid, one-sided
    second order at the ends.
    """
    if curve.psi is None:
        raise MissingAdjoint("curve carries no adjoint data")
    if len(curve) < 3:
        raise TooFewPoints(f"need at least 3 points, curve has {len(curve)}")
    return _gradient(curve.psi, curve.s)


def _gradient(f, s):
    # three-point weights applied to differences, so constant data gives exact zeros
    h = np.diff(s)[:, None]
    df = np.diff(f, axis=0)
    h0, h1, d0, d1 = h[:-1], h[1:], df[:-1], df[1:]
    out = np.empty_like(f, dtype=float)
    out[1:-1] = (h0 * h0 * d1 + h1 * h1 * d0) / (h0 * h1 * (h0 + h1))
    a, b, da, db = h[0], h[1], df[0], df[1]
    out[0] = da * (2 * a + b) / (a * (a + b)) - db * a / (b * (a + b))
    a, b, da, db = h[-2], h[-1], df[-2], df[-1]
    out[-1] = db * (2 * b + a) / (b * (a + b)) - da * b / (a * (a + b))
    return out


def mach_numbers(curve: Curve) -> np.ndarray:
    q = curve.q
    g = curve.gamma
    rho = q[:, 0]
    ke = 0.5 * (q[:, 1] ** 2 + q[:, 2] ** 2) / rho
    p = (g - 1.0) * (q[:, 3] - ke)
    return np.sqrt(2.0 * ke / rho) / np.sqrt(g * p / rho)


def write_curve_csv(curve: Curve, path) -> None:
    n = len(curve)
    psi = curve.psi if curve.psi is not None else np.full((n, 4), np.nan)
    data = np.column_stack([curve.s, curve.x, curve.y, curve.q, mach_numbers(curve), psi])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# family={curve.family} termination={curve.termination.value}\n")
        fh.write(",".join(CURVE_COLUMNS) + "\n")
        for row, flag in zip(data.tolist(), curve.shock_flag.tolist()):
            fh.write(",".join("%.17g" % v for v in row) + f",{int(flag)}\n")


def read_curve_csv(path) -> Curve:
    with open(path, encoding="utf-8") as fh:
        meta = dict(kv.split("=", 1) for kv in fh.readline().lstrip("#").split())
        fh.readline()
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    psi = data[:, 8:12]
    if np.isnan(psi).all():
        psi = None
    points = data[:, [1, 2, 0]]
    return Curve(meta["family"], points, data[:, 3:7], psi, Termination(meta["termination"]),
                 data[:, 12].astype(bool))
