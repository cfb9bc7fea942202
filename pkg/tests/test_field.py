import math

import numpy as np
import pytest

from adjchar.errors import DimensionMismatch, FormatError, IoError, NonPhysicalState, OutOfDomain
from adjchar.field import FieldGrid, convert_csv, load_field, save_field
from adjchar.gas import ConservState2

Q_INF = np.array(ConservState2.from_mach(2.0, 0.1).as_tuple())


def uniform_q(shape):
    return np.broadcast_to(Q_INF, shape + (4,)).copy()


def curved_grid(ni=21, nj=17):
    # smooth non-orthogonal mapping of the unit square
    a, b = np.meshgrid(np.linspace(0, 1, ni), np.linspace(0, 1, nj))
    x = a + 0.08 * np.sin(math.pi * b)
    y = b + 0.05 * np.sin(2 * math.pi * a) + 0.1 * a
    return x, y


def linear_fields(x, y):
    q = uniform_q(x.shape)
    q[..., 0] = 1.0 + 0.1 * x + 0.2 * y
    psi = np.stack([0.3 * x - y, 2 * y, x + y + 1, -x], axis=-1)
    return q, psi


def test_nodal_exactness():
    x, y = curved_grid()
    q, psi = linear_fields(x, y)
    q[..., 1] += 0.1 * np.sin(7 * x)
    g = FieldGrid(x, y, q, psi)
    for j, i in [(0, 0), (3, 7), (16, 20), (8, 0)]:
        sp = g.sample(x[j, i], y[j, i])
        assert np.allclose(sp.q, q[j, i], rtol=0, atol=1e-13)
        assert np.allclose(sp.adjoint, psi[j, i], rtol=0, atol=1e-13)


def test_bilinear_reproduces_linear_fields_on_parallelograms():
    a, b = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 1, 7))
    x, y = a + 0.3 * b, b - 0.2 * a
    q, psi = linear_fields(x, y)
    g = FieldGrid(x, y, q, psi)
    rng = np.random.default_rng(3)
    for _ in range(200):
        u, v = rng.uniform(0, 1, 2)
        px, py = u + 0.3 * v, v - 0.2 * u
        sp = g.sample(px, py)
        assert sp.state.rho == pytest.approx(1.0 + 0.1 * px + 0.2 * py, abs=1e-12)
        assert np.allclose(sp.adjoint, [0.3 * px - py, 2 * py, px + py + 1, -px], atol=1e-12)


def test_walking_search_matches_global_search():
    x, y = curved_grid(41, 33)
    g = FieldGrid(x, y, uniform_q(x.shape))
    rng = np.random.default_rng(4)
    hint = (0, 0)
    for _ in range(1000):
        u, v = rng.uniform(0, 1, 2)
        px = u + 0.08 * math.sin(math.pi * v)
        py = v + 0.05 * math.sin(2 * math.pi * u) + 0.1 * u
        walked = g.locate(px, py, hint)
        ref = g.locate_global(px, py)
        assert walked[:2] == ref[:2]
        assert walked[2:] == pytest.approx(ref[2:], abs=1e-12)
        hint = walked[:2]


def test_point_outside_raises():
    x, y = curved_grid()
    g = FieldGrid(x, y, uniform_q(x.shape))
    with pytest.raises(OutOfDomain):
        g.sample(-0.5, 0.5)
    with pytest.raises(OutOfDomain):
        g.sample(0.5, 2.0, hint=(3, 3))


def test_minimal_two_by_two_grid(tmp_path):
    path = tmp_path / "min.txt"
    lines = ["ADJCHAR-FIELD 1", "2 2 1.4 0 0"]
    q = " ".join(repr(float(v)) for v in Q_INF)
    for x, y in [(0, 0), (1, 0), (0, 1), (1, 1)]:
        lines.append(f"{x} {y} {q}")
    path.write_text("\n".join(lines) + "\n")
    g = load_field(path)
    assert (g.ni, g.nj) == (2, 2) and not g.has_adjoint and not g.periodic_i
    assert np.allclose(g.sample(0.25, 0.75).q, Q_INF, rtol=1e-15)


def test_save_load_round_trip_is_exact(tmp_path):
    x, y = curved_grid()
    q, psi = linear_fields(x, y)
    q[..., 3] += 0.1 * np.cos(x * y) / 3
    g = FieldGrid(x, y, q, psi, gamma=1.3)
    save_field(g, tmp_path / "f.txt")
    h = load_field(tmp_path / "f.txt")
    assert h.gamma == 1.3 and h.has_adjoint
    for a, b in ((g.x, h.x), (g.y, h.y), (g.q, h.q), (g.psi, h.psi)):
        assert np.array_equal(a, b)


def test_nonphysical_node_is_named():
    x, y = curved_grid(5, 4)
    q = uniform_q(x.shape)
    q[2, 3, 0] = 0.0
    with pytest.raises(NonPhysicalState, match=r"i=3, j=2"):
        FieldGrid(x, y, q)


def test_format_error_reports_line_and_column(tmp_path):
    x, y = curved_grid(3, 2)
    save_field(FieldGrid(x, y, uniform_q(x.shape)), tmp_path / "f.txt")
    lines = (tmp_path / "f.txt").read_text().splitlines()
    tok = lines[4].split()
    tok[2] = "abc"
    lines[4] = " ".join(tok)
    (tmp_path / "bad.txt").write_text("\n".join(lines) + "\n")
    with pytest.raises(FormatError) as info:
        load_field(tmp_path / "bad.txt")
    assert (info.value.line, info.value.column) == (5, 3)


def test_header_and_count_errors(tmp_path):
    p = tmp_path / "f.txt"
    p.write_text("NOT-A-FIELD\n")
    with pytest.raises(FormatError):
        load_field(p)
    p.write_text("ADJCHAR-FIELD 1\n2 2 1.4 0 0\n0 0 1 2 0 5\n")
    with pytest.raises(DimensionMismatch):
        load_field(p)
    with pytest.raises(IoError):
        load_field(tmp_path / "missing.txt")


def test_periodic_o_mesh_wraps():
    # annulus around the origin, node column ni-1 joins back to column 0
    ni, nj = 24, 6
    th = np.linspace(0, 2 * math.pi, ni, endpoint=False)
    r = np.linspace(1.0, 2.0, nj)
    x = r[:, None] * np.cos(th)[None, :]
    y = r[:, None] * np.sin(th)[None, :]
    g = FieldGrid(x, y, uniform_q(x.shape), periodic_i=True)
    assert g.n_cells == (ni, nj - 1)
    ang = th[-1] + 0.5 * (2 * math.pi - th[-1])
    ci, cj, _, _ = g.locate(1.5 * math.cos(ang), 1.5 * math.sin(ang), hint=(0, 2))
    assert ci == ni - 1
    with pytest.raises(OutOfDomain):
        g.sample(0.0, 0.0)


def test_convert_csv_with_index_columns(tmp_path):
    x, y = curved_grid(4, 3)
    q, psi = linear_fields(x, y)
    rows = ["i,j,x,y,rho,rho_u,rho_v,rho_E,psi1,psi2,psi3,psi4"]
    for j in reversed(range(3)):
        for i in range(4):
            vals = [x[j, i], y[j, i], *q[j, i], *psi[j, i]]
            rows.append(f"{i},{j}," + ",".join(repr(float(v)) for v in vals))
    (tmp_path / "in.csv").write_text("\n".join(rows) + "\n")
    convert_csv(tmp_path / "in.csv", tmp_path / "out.txt")
    g = load_field(tmp_path / "out.txt")
    assert np.array_equal(g.x, x) and np.array_equal(g.psi, psi)


def test_convert_csv_needs_dimensions(tmp_path):
    (tmp_path / "in.csv").write_text("x,y,rho,rho_u,rho_v,rho_E\n0,0,1,2,0,5\n")
    with pytest.raises(DimensionMismatch):
        convert_csv(tmp_path / "in.csv", tmp_path / "out.txt")
    (tmp_path / "in.csv").write_text("x,y,rho\n0,0,1\n")
    with pytest.raises(FormatError):
        convert_csv(tmp_path / "in.csv", tmp_path / "out.txt")
