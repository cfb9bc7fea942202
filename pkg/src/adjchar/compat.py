"""Compatibility integrals K along traced curves and their CSV reports."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import FamilyMismatch, IoError, SubsonicInput
from .forms import characteristic_directions, characteristic_residual, streamtrace_residuals
from .gas import GasModel, primitive_from_conservative
from .tracer import Curve, resample_adjoint_rates

KINDS = ("S1", "S2", "Cplus", "Cminus")
_FAMILY_OF = {"S1": "S", "S2": "S", "Cplus": "Cplus", "Cminus": "Cminus"}
REPORT_COLUMNS = ("s", "K_cum", "sub1_cum", "sub2_cum", "sub3_cum", "sub4_cum")


@dataclass
class CompatReport:
    family: str
    kind: str
    K_total: float
    subpart_totals: np.ndarray
    s: np.ndarray
    cumulative: np.ndarray  # (N, 5): K(s) then the four subparts
    clip: Optional[Tuple[float, float, float]] = None
    # C+/C- integrands are the slope form times xi, the x-component of the unit tangent
    scaling: str = "none"

    @property
    def max_abs_subpart(self) -> float:
        return float(np.max(np.abs(self.subpart_totals)))

    @property
    def ratio(self) -> float:
        m = self.max_abs_subpart
        return abs(self.K_total) / m if m > 0.0 else 0.0


def integrands(curve: Curve, kind: str, rates: np.ndarray) -> np.ndarray:
    """Per-sample subpart integrands, shape (N, 4)."""
    gas = GasModel(curve.gamma)
    out = np.empty((len(curve), 4))
    for k, (state, rate) in enumerate(zip(curve.states(), rates)):
        prim = primitive_from_conservative(state, gas)
        if kind in ("S1", "S2"):
            r1, r2 = streamtrace_residuals(prim, rate, gas)
            out[k] = (r1 if kind == "S1" else r2).subparts
        else:
            d = characteristic_directions(prim, gas).for_family(kind)
            if d is None:
                raise SubsonicInput(f"sample {k} of the {kind} curve is subsonic (M={prim.M:.6g})")
            out[k] = characteristic_residual(prim, d, rate, gas).subparts
    return out


def _cumtrapz(f: np.ndarray, s: np.ndarray) -> np.ndarray:
    ds = np.diff(s)[:, None]
    return np.vstack([np.zeros((1, f.shape[1])), np.cumsum(0.5 * ds * (f[1:] + f[:-1]), axis=0)])


def k_integrals(curve: Curve, kind: str) -> CompatReport:
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if _FAMILY_OF[kind] != curve.family:
        raise FamilyMismatch(f"kind {kind} needs a {_FAMILY_OF[kind]} curve, got {curve.family}")
    rates = resample_adjoint_rates(curve)
    sub_cum = _cumtrapz(integrands(curve, kind, rates), curve.s)
    a, b, c, d = sub_cum.T
    k_cum = a + b + c + d
    totals = sub_cum[-1].copy()
    cumulative = np.column_stack([k_cum, sub_cum])
    scaling = "none" if kind in ("S1", "S2") else "xi"
    return CompatReport(curve.family, kind, float(k_cum[-1]), totals, curve.s.copy(), cumulative,
                        curve.clip, scaling)


def write_report(report: CompatReport, path) -> None:
    clip = "none" if report.clip is None else ",".join("%.17g" % v for v in report.clip)
    head = [
        f"# family={report.family}",
        f"# kind={report.kind}",
        "# K_total=%.17g" % report.K_total,
        "# subpart_totals=" + ",".join("%.17g" % v for v in report.subpart_totals),
        "# max_abs_subpart=%.17g" % report.max_abs_subpart,
        "# ratio=%.17g" % report.ratio,
        f"# scaling={report.scaling}",
        f"# clip={clip}",
        ",".join(REPORT_COLUMNS),
    ]
    rows = np.column_stack([report.s, report.cumulative])
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(head) + "\n")
            for row in rows.tolist():
                fh.write(",".join("%.17g" % v for v in row) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_report(path) -> CompatReport:
    meta = {}
    try:
        with open(path, encoding="utf-8") as fh:
            line = fh.readline()
            while line.startswith("#"):
                key, val = line[1:].strip().split("=", 1)
                meta[key] = val
                line = fh.readline()
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    clip = None if meta["clip"] == "none" else tuple(float(v) for v in meta["clip"].split(","))
    return CompatReport(meta["family"], meta["kind"], float(meta["K_total"]),
                        np.array([float(v) for v in meta["subpart_totals"].split(",")]),
                        data[:, 0], data[:, 1:], clip, meta["scaling"])
