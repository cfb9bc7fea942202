import numpy as np
import pytest

from adjchar.analytic import DEMO_BBOX, StripeField, demo_starts, emit_stripe_grid
from adjchar.cli import main
from adjchar.compat import read_report
from adjchar.field import FieldGrid, load_field, save_field
from adjchar.tracer import read_curve_csv


@pytest.fixture(scope="module")
def stripe_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("stripe") / "field.txt"
    sf = StripeField.demo(2.0, 0.0)
    emit_stripe_grid(sf, DEMO_BBOX, 129, 129, path)
    return path, demo_starts(sf)


def start_arg(p):
    return "%.17g,%.17g" % p


def test_identities_exit_codes(capsys):
    assert main(["identities", "--samples", "50"]) == 0
    assert "all 14 identities" in capsys.readouterr().out
    assert main(["identities", "--samples", "50", "--inject-fault"]) == 1
    out = capsys.readouterr().out
    assert "cxy1" in out.splitlines()[-1]
    assert main(["identities", "--samples", "0"]) == 4


def test_identities_output_is_deterministic(capsys):
    main(["identities", "--samples", "30", "--seed", "3"])
    first = capsys.readouterr().out
    main(["identities", "--samples", "30", "--seed", "3"])
    assert capsys.readouterr().out == first


def test_usage_errors(capsys):
    assert main([]) == 4
    assert main(["trace", "--field", "f.txt"]) == 4
    assert main(["trace", "--field", "f.txt", "--start", "a,b", "--family", "s", "--out", "o"]) == 4
    assert main(["verify", "--field", "f.txt", "--start", "0,0", "--kind", "s1", "--step", "0"]) == 4
    assert "usage" in capsys.readouterr().err


def test_trace_writes_curve(stripe_file, tmp_path, capsys):
    path, starts = stripe_file
    out = tmp_path / "c.csv"
    rc = main(["trace", "--field", str(path), "--start", start_arg(starts["Cplus"]), "--family", "cplus",
               "--step", "0.01", "--max-length", "0.5", "--out", str(out)])
    assert rc == 0
    c = read_curve_csv(out)
    assert c.family == "Cplus" and c.s[-1] == pytest.approx(0.5, rel=1e-12)
    assert "termination=MaxLength" in capsys.readouterr().out


def test_trace_error_exit_codes(stripe_file, tmp_path):
    path, _ = stripe_file
    assert main(["trace", "--field", str(path), "--start", "5,5", "--family", "s",
                 "--out", str(tmp_path / "c.csv")]) == 2
    assert main(["trace", "--field", str(tmp_path / "missing.txt"), "--start", "1,0", "--family", "s",
                 "--out", str(tmp_path / "c.csv")]) == 4


def test_subsonic_start_exit_code(tmp_path):
    x, y = np.meshgrid(np.linspace(0, 1, 3), np.linspace(0, 1, 3))
    q = np.broadcast_to([1.0, 0.5, 0.0, 2.0], (3, 3, 4))
    save_field(FieldGrid(x, y, q), tmp_path / "sub.txt")
    assert main(["trace", "--field", str(tmp_path / "sub.txt"), "--start", "0.5,0.5", "--family", "cminus",
                 "--out", str(tmp_path / "c.csv")]) == 3


@pytest.mark.parametrize("kind,family", [("s1", "s"), ("s2", "s"), ("cplus", "cplus"), ("cminus", "cminus")])
def test_verify_passes_on_stripe_field(stripe_file, tmp_path, kind, family):
    path, starts = stripe_file
    fam = {"s": "S", "cplus": "Cplus", "cminus": "Cminus"}[family]
    out = tmp_path / "r.csv"
    rc = main(["verify", "--field", str(path), "--start", start_arg(starts[fam]), "--kind", kind,
               "--family", family, "--step", "0.015625", "--max-length", "0.75", "--tol", "1e-8",
               "--out", str(out), "--curve-out", str(tmp_path / "c.csv")])
    assert rc == 0
    r = read_report(out)
    assert r.ratio <= 1e-8 and r.max_abs_subpart > 1e-3
    assert read_curve_csv(tmp_path / "c.csv").family == fam


def test_verify_family_mismatch(stripe_file):
    path, starts = stripe_file
    assert main(["verify", "--field", str(path), "--start", start_arg(starts["S"]), "--kind", "s1",
                 "--family", "cplus"]) == 3


def test_verify_detects_corrupted_psi2(stripe_file, tmp_path, capsys):
    path, starts = stripe_file
    g = load_field(path)
    psi = g.psi.copy()
    psi[..., 1] *= 2.0
    bad = tmp_path / "bad.txt"
    save_field(FieldGrid(g.x, g.y, g.q, psi), bad)
    rc = main(["verify", "--field", str(bad), "--start", start_arg(starts["S"]), "--kind", "s1",
               "--max-length", "0.75", "--out", str(tmp_path / "r.csv")])
    assert rc == 1
    assert read_report(tmp_path / "r.csv").ratio > 0.02
    assert "FAIL" in capsys.readouterr().out


def test_stripe_demo_outputs_and_determinism(tmp_path, capsys):
    args = ["stripe-demo", "--grid", "65", "--mach", "1.5", "--alpha", "1"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    names = ["stripe_field.txt", "gamma_S.csv", "gamma_Cplus.csv", "gamma_Cminus.csv"]
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
    head = (tmp_path / "a" / "gamma_Cplus.csv").read_text().splitlines()[0]
    assert head == "s,gamma_s1,gamma_s2,gamma_cplus,gamma_cminus"
    assert "relative spread" in capsys.readouterr().out


def test_stripe_demo_rejects_subsonic_and_small_grid(tmp_path):
    assert main(["stripe-demo", "--mach", "0.8", "--out", str(tmp_path)]) == 3
    assert main(["stripe-demo", "--grid", "1", "--out", str(tmp_path)]) == 4


def test_convert_round_trip(tmp_path, capsys):
    rows = ["x,y,rho,rho_u,rho_v,rho_E"]
    for y in (0.0, 1.0):
        for x in (0.0, 0.5, 1.0):
            rows.append(f"{x},{y},1.0,2.0,0.0,{1 / 0.56 + 2.0!r}")
    (tmp_path / "in.csv").write_text("\n".join(rows) + "\n")
    assert main(["convert", str(tmp_path / "in.csv"), "--out", str(tmp_path / "f.txt"),
                 "--ni", "3", "--nj", "2"]) == 0
    g = load_field(tmp_path / "f.txt")
    assert (g.ni, g.nj) == (3, 2) and g.sample(0.75, 0.5).state.rho == 1.0
    assert main(["convert", str(tmp_path / "in.csv"), "--out", str(tmp_path / "f.txt")]) == 4
