"""Structured-grid flow/adjoint fields: ADJCHAR-FIELD I/O and bilinear sampling.

File layout (UTF-8 text)::

    ADJCHAR-FIELD 1
    ni nj gamma periodic_i adjoint_present
    x y rho rho_u rho_v rho_E [psi1 psi2 psi3 psi4]     # ni*nj lines, i fastest

Node ``(i, j)`` is stored on line ``3 + j*ni + i``. With ``periodic_i`` an extra
cell column joins node column ``ni-1`` back to column 0 (O-meshes).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionMismatch, FormatError, IoError, NonPhysicalState, OutOfDomain
from .gas import ConservState2, GasModel

MAGIC = "ADJCHAR-FIELD 1"
FLOW_COLUMNS = ("x", "y", "rho", "rho_u", "rho_v", "rho_E")
ADJOINT_COLUMNS = ("psi1", "psi2", "psi3", "psi4")

_LOCAL_TOL = 1e-10


@dataclass(frozen=True)
class SamplePoint:
    state: ConservState2
    adjoint: Optional[np.ndarray]
    cell: Tuple[int, int]
    xi: float
    eta: float
    q: np.ndarray


def _lerp(a, b, t):
    # exact at both ends and on constant data
    return a + t * (b - a) if t < 0.5 else b - (1.0 - t) * (b - a)


class FieldGrid:
    """Immutable structured grid carrying conservative flow and optional adjoint data.

    Node arrays are indexed ``[j, i]``: ``x``, ``y`` have shape (nj, ni), ``q``
    and ``psi`` have shape (nj, ni, 4).
    """

    def __init__(self, x, y, q, psi=None, gamma: float = 1.4, periodic_i: bool = False):
        x = np.array(x, dtype=float)
        y = np.array(y, dtype=float)
        q = np.array(q, dtype=float)
        if x.ndim != 2 or x.shape != y.shape:
            raise DimensionMismatch(f"coordinate arrays must share a 2D shape, got {x.shape} and {y.shape}")
        nj, ni = x.shape
        if ni < 2 or nj < 2:
            raise DimensionMismatch(f"grid needs ni, nj >= 2, got {ni} x {nj}")
        if q.shape != (nj, ni, 4):
            raise DimensionMismatch(f"flow array shape {q.shape} != {(nj, ni, 4)}")
        if psi is not None:
            psi = np.array(psi, dtype=float)
            if psi.shape != (nj, ni, 4):
                raise DimensionMismatch(f"adjoint array shape {psi.shape} != {(nj, ni, 4)}")
        self.gas = GasModel(gamma)
        self.ni, self.nj = ni, nj
        self.periodic_i = bool(periodic_i)
        self.x, self.y, self.q, self.psi = x, y, q, psi
        for a in (x, y, q, psi):
            if a is not None:
                a.setflags(write=False)
        _check_physical(q, self.gas)
        self._build_cells()

    @property
    def gamma(self) -> float:
        return self.gas.gamma

    @property
    def has_adjoint(self) -> bool:
        return self.psi is not None

    @property
    def n_cells(self) -> Tuple[int, int]:
        """Number of cells along i and j."""
        return (self.ni if self.periodic_i else self.ni - 1), self.nj - 1

    def _corner_idx(self, ci):
        return ci, (ci + 1) % self.ni

    def _build_cells(self):
        nci, ncj = self.n_cells
        i0 = np.arange(nci)
        i1 = (i0 + 1) % self.ni
        x00, x10 = self.x[:-1][:, i0], self.x[:-1][:, i1]
        x01, x11 = self.x[1:][:, i0], self.x[1:][:, i1]
        y00, y10 = self.y[:-1][:, i0], self.y[:-1][:, i1]
        y01, y11 = self.y[1:][:, i0], self.y[1:][:, i1]
        # bilinear Jacobian at the four corners
        jac = np.stack([
            (x10 - x00) * (y01 - y00) - (x01 - x00) * (y10 - y00),
            (x10 - x00) * (y11 - y10) - (x11 - x10) * (y10 - y00),
            (x11 - x01) * (y11 - y10) - (x11 - x10) * (y11 - y01),
            (x11 - x01) * (y01 - y00) - (x01 - x00) * (y11 - y01),
        ])
        orient = 1.0 if jac.sum() >= 0.0 else -1.0
        scale = np.median(np.abs(jac)) if jac.size else 1.0
        self.collapsed = np.any(jac * orient <= 1e-12 * scale, axis=0)
        self.collapsed.setflags(write=False)
        self._bbox = (
            np.minimum.reduce([x00, x10, x01, x11]).ravel(),
            np.maximum.reduce([x00, x10, x01, x11]).ravel(),
            np.minimum.reduce([y00, y10, y01, y11]).ravel(),
            np.maximum.reduce([y00, y10, y01, y11]).ravel(),
        )
        self._valid_flat = ~self.collapsed.ravel()

    # -- geometry ---------------------------------------------------------------

    def _corners(self, ci, cj):
        i0, i1 = self._corner_idx(ci)
        x, y = self.x, self.y
        return ((float(x[cj, i0]), float(y[cj, i0])), (float(x[cj, i1]), float(y[cj, i1])),
                (float(x[cj + 1, i1]), float(y[cj + 1, i1])), (float(x[cj + 1, i0]), float(y[cj + 1, i0])))

    def local_coords(self, ci, cj, x, y) -> Optional[Tuple[float, float]]:
        """Invert the bilinear map of cell ``(ci, cj)`` by Newton iteration."""
        (x0, y0), (x1, y1), (x2, y2), (x3, y3) = self._corners(ci, cj)
        ax, bx, cx, dx = x0, x1 - x0, x3 - x0, x0 - x1 + x2 - x3
        ay, by, cy, dy = y0, y1 - y0, y3 - y0, y0 - y1 + y2 - y3
        xi = eta = 0.5
        for _ in range(25):
            fx = ax + bx * xi + cx * eta + dx * xi * eta - x
            fy = ay + by * xi + cy * eta + dy * xi * eta - y
            j11, j12 = bx + dx * eta, cx + dx * xi
            j21, j22 = by + dy * eta, cy + dy * xi
            det = j11 * j22 - j12 * j21
            if det == 0.0 or not math.isfinite(det):
                return None
            dxi = (fx * j22 - fy * j12) / det
            deta = (fy * j11 - fx * j21) / det
            xi -= dxi
            eta -= deta
            if abs(dxi) + abs(deta) < 1e-15:
                break
        return xi, eta

    def _inside(self, lc):
        return lc is not None and -_LOCAL_TOL <= lc[0] <= 1 + _LOCAL_TOL and -_LOCAL_TOL <= lc[1] <= 1 + _LOCAL_TOL

    def locate_global(self, x, y) -> Tuple[int, int, float, float]:
        xmin, xmax, ymin, ymax = self._bbox
        pad = 1e-12 * (1.0 + abs(x) + abs(y))
        hits = np.flatnonzero((xmin - pad <= x) & (x <= xmax + pad) & (ymin - pad <= y)
                              & (y <= ymax + pad) & self._valid_flat)
        nci = self.n_cells[0]
        for flat in hits:
            cj, ci = divmod(int(flat), nci)
            lc = self.local_coords(ci, cj, x, y)
            if self._inside(lc):
                return ci, cj, lc[0], lc[1]
        raise OutOfDomain(f"point ({x!r}, {y!r}) is outside the grid footprint")

    def locate(self, x, y, hint: Optional[Tuple[int, int]] = None) -> Tuple[int, int, float, float]:
        """Cell and local coordinates of ``(x, y)``, walking from ``hint`` when given."""
        if hint is None:
            return self.locate_global(x, y)
        nci, ncj = self.n_cells
        ci, cj = hint
        for _ in range(nci + ncj + 4):
            if not (0 <= ci < nci and 0 <= cj < ncj) or self.collapsed[cj, ci]:
                break
            lc = self.local_coords(ci, cj, x, y)
            if lc is None:
                break
            if self._inside(lc):
                return ci, cj, lc[0], lc[1]
            ci += int(lc[0] > 1) - int(lc[0] < 0)
            cj += int(lc[1] > 1) - int(lc[1] < 0)
            if self.periodic_i:
                ci %= nci
        return self.locate_global(x, y)

    # -- interpolation ------------------------------------------------------------

    def _bilinear(self, arr, ci, cj, xi, eta):
        i0, i1 = self._corner_idx(ci)
        lo = _lerp(arr[cj, i0], arr[cj, i1], xi)
        hi = _lerp(arr[cj + 1, i0], arr[cj + 1, i1], xi)
        return _lerp(lo, hi, eta)

    def sample(self, x, y, hint=None) -> SamplePoint:
        ci, cj, xi, eta = self.locate(x, y, hint)
        xi = min(max(xi, 0.0), 1.0)
        eta = min(max(eta, 0.0), 1.0)
        q = self._bilinear(self.q, ci, cj, xi, eta)
        psi = None if self.psi is None else self._bilinear(self.psi, ci, cj, xi, eta)
        return SamplePoint(ConservState2(*(float(v) for v in q)), psi, (ci, cj), xi, eta, q)

    def gradient(self, arr, ci, cj, xi, eta) -> np.ndarray:
        """Physical-space gradient of the bilinear interpolant of nodal ``arr`` (shape (2, ...))."""
        i0, i1 = self._corner_idx(ci)
        f00, f10, f11, f01 = arr[cj, i0], arr[cj, i1], arr[cj + 1, i1], arr[cj + 1, i0]
        (x0, y0), (x1, y1), (x2, y2), (x3, y3) = self._corners(ci, cj)

        def d(a00, a10, a11, a01):
            return ((a10 - a00) * (1 - eta) + (a11 - a01) * eta,
                    (a01 - a00) * (1 - xi) + (a11 - a10) * xi)

        x_xi, x_eta = d(x0, x1, x2, x3)
        y_xi, y_eta = d(y0, y1, y2, y3)
        f_xi, f_eta = d(f00, f10, f11, f01)
        det = x_xi * y_eta - x_eta * y_xi
        return np.array([(y_eta * f_xi - y_xi * f_eta) / det, (x_xi * f_eta - x_eta * f_xi) / det])

    def cell_size(self, ci, cj) -> float:
        (x0, y0), (x1, y1), (x2, y2), (x3, y3) = self._corners(ci, cj)
        area = 0.5 * abs((x2 - x0) * (y3 - y1) - (x3 - x1) * (y2 - y0))
        return math.sqrt(area)

    def density_indicator(self, sp: SamplePoint) -> float:
        """|grad rho| * cell size / rho at a sample; large values flag smeared shocks."""
        ci, cj = sp.cell
        g = self.gradient(self.q[..., 0], ci, cj, sp.xi, sp.eta)
        return float(math.hypot(g[0], g[1]) * self.cell_size(ci, cj) / sp.state.rho)


class FunctionField:
    """Grid-free field evaluating closed-form flow (and adjoint) functions.

    Exposes the sampling interface the tracer uses, so curves can be traced
    through manufactured fields without interpolation error.
    """

    def __init__(self, flow_fn, bbox, psi_fn=None, gamma: float = 1.4):
        self.flow_fn, self.psi_fn = flow_fn, psi_fn
        self.bbox = tuple(float(v) for v in bbox)
        self.gas = GasModel(gamma)

    @property
    def gamma(self) -> float:
        return self.gas.gamma

    @property
    def has_adjoint(self) -> bool:
        return self.psi_fn is not None

    def sample(self, x, y, hint=None) -> SamplePoint:
        x0, x1, y0, y1 = self.bbox
        if not (x0 <= x <= x1 and y0 <= y <= y1):
            raise OutOfDomain(f"point ({x!r}, {y!r}) is outside {self.bbox}")
        q = np.array(self.flow_fn(x, y), dtype=float)
        psi = None if self.psi_fn is None else np.array(self.psi_fn(x, y), dtype=float)
        return SamplePoint(ConservState2(*(float(v) for v in q)), psi, (0, 0), 0.0, 0.0, q)

    def density_indicator(self, sp: SamplePoint) -> float:
        return 0.0


def _check_physical(q, gas: GasModel):
    rho = q[..., 0]
    p = gas.gamma1 * (q[..., 3] - 0.5 * (q[..., 1] ** 2 + q[..., 2] ** 2) / np.where(rho > 0, rho, 1.0))
    bad = ~(rho > 0) | ~(p > 0)
    if bad.any():
        j, i = (int(k) for k in np.argwhere(bad)[0])
        what = "density" if not rho[j, i] > 0 else "pressure"
        raise NonPhysicalState(f"non-positive {what} at node (i={i}, j={j})")


def sample(grid: FieldGrid, x, y, hint=None) -> SamplePoint:
    return grid.sample(x, y, hint)


# -- I/O ------------------------------------------------------------------------------


def _parse_header(lines, path):
    if not lines or lines[0].strip() != MAGIC:
        raise FormatError(f"{path}: expected '{MAGIC}'", line=1, column=1)
    if len(lines) < 2:
        raise FormatError(f"{path}: missing dimension line", line=2)
    tok = lines[1].split()
    if len(tok) != 5:
        raise FormatError(f"{path}: dimension line needs 5 fields, got {len(tok)}", line=2)
    kinds = (int, int, float, int, int)
    vals = []
    for col, (t, kind) in enumerate(zip(tok, kinds), start=1):
        try:
            vals.append(kind(t))
        except ValueError:
            raise FormatError(f"{path}: bad header value {t!r}", line=2, column=col) from None
    ni, nj, gamma, per, adj = vals
    if ni < 2 or nj < 2:
        raise DimensionMismatch(f"{path}: ni, nj must be >= 2", line=2)
    for col, flag in ((4, per), (5, adj)):
        if flag not in (0, 1):
            raise FormatError(f"{path}: flag must be 0 or 1", line=2, column=col)
    if not gamma > 1.0:
        raise FormatError(f"{path}: gamma must exceed 1", line=2, column=3)
    return ni, nj, gamma, bool(per), bool(adj)


def load_field(path) -> FieldGrid:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    ni, nj, gamma, periodic, has_adj = _parse_header(lines, path)
    ncol = 10 if has_adj else 6
    body = lines[2:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != ni * nj:
        raise DimensionMismatch(f"{path}: expected {ni * nj} node lines, found {len(body)}")
    try:
        data = np.array(" ".join(body).split(), dtype=float)
        ok = data.size == ni * nj * ncol
    except ValueError:
        ok = False
    if not ok:
        _locate_format_error(body, ncol, path)
    data = data.reshape(nj, ni, ncol)
    psi = data[..., 6:10] if has_adj else None
    return FieldGrid(data[..., 0], data[..., 1], data[..., 2:6], psi, gamma, periodic)


def _locate_format_error(body, ncol, path):
    for k, line in enumerate(body, start=3):
        tok = line.split()
        if len(tok) != ncol:
            raise DimensionMismatch(f"{path}: expected {ncol} fields, got {len(tok)}", line=k)
        for col, t in enumerate(tok, start=1):
            try:
                float(t)
            except ValueError:
                raise FormatError(f"{path}: cannot parse {t!r} as a number", line=k, column=col) from None
    raise FormatError(f"{path}: malformed body")


def save_field(grid: FieldGrid, path) -> None:
    cols = [grid.x[..., None], grid.y[..., None], grid.q]
    if grid.psi is not None:
        cols.append(grid.psi)
    data = np.concatenate(cols, axis=-1).reshape(grid.ni * grid.nj, -1)
    ncol = data.shape[1]
    # formatting a flat list is several times faster than per-row tuples on large grids
    tok = list(map("%.17g".__mod__, data.ravel().tolist()))
    header = f"{MAGIC}\n{grid.ni} {grid.nj} {grid.gamma!r} {int(grid.periodic_i)} {int(grid.has_adjoint)}\n"
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header)
            fh.write("\n".join(" ".join(tok[k:k + ncol]) for k in range(0, len(tok), ncol)))
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def convert_csv(csv_path, out_path, ni=None, nj=None, gamma=1.4, periodic_i=False) -> FieldGrid:
    """Convert a headed CSV (columns named as in the field format) to ADJCHAR-FIELD.

    Node order comes from integer ``i``/``j`` columns when present, otherwise the
    rows must already be in j-major order and ``ni``/``nj`` must be given.
    """
    try:
        with open(csv_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            names = [n.strip() for n in (reader.fieldnames or [])]
            rows = list(reader)
    except OSError as exc:
        raise IoError(f"cannot read {csv_path}: {exc}") from exc
    missing = [c for c in FLOW_COLUMNS if c not in names]
    if missing:
        raise FormatError(f"{csv_path}: missing columns {missing}", line=1)
    has_adj = all(c in names for c in ADJOINT_COLUMNS)
    wanted = FLOW_COLUMNS + (ADJOINT_COLUMNS if has_adj else ())
    try:
        table = np.array([[float(r[c]) for c in wanted] for r in rows])
    except (ValueError, TypeError) as exc:
        raise FormatError(f"{csv_path}: {exc}") from None
    if "i" in names and "j" in names:
        ii = np.array([int(r["i"]) for r in rows])
        jj = np.array([int(r["j"]) for r in rows])
        ni, nj = int(ii.max()) + 1, int(jj.max()) + 1
        if len(rows) != ni * nj:
            raise DimensionMismatch(f"{csv_path}: {len(rows)} rows for a {ni} x {nj} grid")
        table = table[np.lexsort((ii, jj))]
    elif ni is None or nj is None or len(rows) != ni * nj:
        raise DimensionMismatch(f"{csv_path}: need i/j columns or matching ni*nj (got {len(rows)} rows)")
    table = table.reshape(nj, ni, len(wanted))
    grid = FieldGrid(table[..., 0], table[..., 1], table[..., 2:6],
                     table[..., 6:10] if has_adj else None, gamma, periodic_i)
    save_field(grid, out_path)
    return grid
