import math

import numpy as np
import pytest

from adjchar.analytic import (DEMO_BBOX, DEMO_TRACE_LENGTH, StripeField, analytic_curve, demo_starts,
                              emit_stripe_grid)
from adjchar.compat import k_integrals, read_report, write_report
from adjchar.errors import FamilyMismatch, MissingAdjoint, SubsonicInput, TooFewPoints
from adjchar.field import FunctionField
from adjchar.gas import ConservState2
from adjchar.tracer import Curve, Termination, TraceConfig, trace

BOX = (-3.0, 3.0, -3.0, 3.0)


def swirl_flow(x, y):
    return ConservState2.from_mach(2.0, 0.3 * math.sin(2 * x) + 0.2 * y).as_tuple()


def smooth_psi(x, y):
    return (math.sin(x) + y, math.cos(y) * x, 0.5 * x * y, math.exp(0.3 * x) - y)


def swirl_curve(family="S", step=0.02, scale=1.0):
    f = FunctionField(swirl_flow, BOX, lambda x, y: np.multiply(scale, smooth_psi(x, y)))
    return trace(f, (0.0, 0.0), family, TraceConfig(step, 1.0))


@pytest.fixture(scope="module")
def stripe():
    sf = StripeField.demo(2.0, 0.0)
    return sf, emit_stripe_grid(sf, DEMO_BBOX, 129, 129)


def test_constant_psi_gives_zero_totals():
    f = FunctionField(swirl_flow, BOX, lambda x, y: (1.0, -2.0, 0.5, 3.0))
    for family, kinds in (("S", ("S1", "S2")), ("Cplus", ("Cplus",)), ("Cminus", ("Cminus",))):
        c = trace(f, (0.0, 0.0), family, TraceConfig(0.05, 1.0))
        for kind in kinds:
            r = k_integrals(c, kind)
            assert r.K_total == 0.0 and not r.subpart_totals.any() and r.ratio == 0.0


def test_totals_are_sums_and_cumulative_endpoints():
    for family, kind in (("S", "S1"), ("S", "S2"), ("Cplus", "Cplus"), ("Cminus", "Cminus")):
        r = k_integrals(swirl_curve(family), kind)
        a, b, c, d = r.subpart_totals.tolist()
        assert r.K_total == a + b + c + d
        assert np.array_equal(r.cumulative[-1, 1:], r.subpart_totals)
        assert r.cumulative[-1, 0] == r.K_total
        assert not r.cumulative[0].any() and r.s[0] == 0.0
        assert r.scaling == ("none" if kind.startswith("S") else "xi")


@pytest.mark.parametrize("lam", [2.0, 0.5, -4.0])
def test_linearity_under_power_of_two_scaling(lam):
    base = k_integrals(swirl_curve(), "S1")
    scaled = k_integrals(swirl_curve(scale=lam), "S1")
    assert scaled.K_total == lam * base.K_total
    assert np.array_equal(scaled.subpart_totals, lam * base.subpart_totals)


def test_linearity_general_factor():
    base = k_integrals(swirl_curve("Cplus"), "Cplus")
    scaled = k_integrals(swirl_curve("Cplus", scale=0.3), "Cplus")
    assert np.allclose(scaled.subpart_totals, 0.3 * base.subpart_totals, rtol=1e-14, atol=0)


def test_refinement_is_second_order():
    k = [k_integrals(swirl_curve(step=0.04 / 2 ** j), "S2").K_total for j in range(3)]
    assert abs(k[0] - k[1]) / abs(k[1] - k[2]) == pytest.approx(4.0, rel=0.15)


def test_precondition_errors():
    c = swirl_curve()
    with pytest.raises(FamilyMismatch):
        k_integrals(c, "Cplus")
    with pytest.raises(FamilyMismatch):
        k_integrals(swirl_curve("Cminus"), "S1")
    with pytest.raises(ValueError):
        k_integrals(c, "S3")
    no_adj = Curve("S", c.points, c.q, None, c.termination)
    with pytest.raises(MissingAdjoint):
        k_integrals(no_adj, "S1")
    with pytest.raises(TooFewPoints):
        k_integrals(Curve("S", c.points[:2], c.q[:2], c.psi[:2], c.termination), "S1")


def test_subsonic_sample_on_characteristic_rejected():
    c = swirl_curve("Cplus")
    q = c.q.copy()
    q[3] = ConservState2.from_mach(0.8, 0.0).as_tuple()
    with pytest.raises(SubsonicInput, match="sample 3"):
        k_integrals(Curve("Cplus", c.points, q, c.psi, c.termination), "Cplus")


def test_report_round_trip(tmp_path):
    r = k_integrals(swirl_curve("Cminus"), "Cminus")
    r.clip = (0.5, 0.0, 3.0)
    write_report(r, tmp_path / "r.csv")
    back = read_report(tmp_path / "r.csv")
    assert back.K_total == r.K_total and back.kind == "Cminus" and back.family == "Cminus"
    assert np.array_equal(back.subpart_totals, r.subpart_totals)
    assert np.array_equal(back.cumulative, r.cumulative) and np.array_equal(back.s, r.s)
    assert back.clip == r.clip and back.scaling == "xi"
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert "s,K_cum,sub1_cum,sub2_cum,sub3_cum,sub4_cum" in lines
    assert any(line.startswith("# ratio=") for line in lines)


def test_stripe_field_reports_vanish(stripe):
    sf, grid = stripe
    starts = demo_starts(sf)
    cfg = TraceConfig(2.0 / 128, DEMO_TRACE_LENGTH)
    for family, kinds in (("S", ("S1", "S2")), ("Cplus", ("Cplus",)), ("Cminus", ("Cminus",))):
        c = trace(grid, starts[family], family, cfg)
        for kind in kinds:
            r = k_integrals(c, kind)
            assert r.max_abs_subpart > 1e-3
            assert r.ratio <= 1e-10


def test_psi1_h_psi4_gives_equal_outer_subparts(stripe):
    sf, _ = stripe
    starts = demo_starts(sf)
    for family in ("Cplus", "Cminus"):
        c = analytic_curve(sf, family, starts[family], DEMO_TRACE_LENGTH, 97)
        assert np.allclose(c.psi[:, 0], sf.primitive.H * c.psi[:, 3], rtol=1e-13, atol=1e-15)
        r = k_integrals(c, family)
        assert r.subpart_totals[0] == pytest.approx(r.subpart_totals[3], rel=1e-12)
