import json
import math

import numpy as np
import pytest

from dymlab import constant_rho as cr
from dymlab.cli import main, parse_complex, read_csv_columns


def run(args, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out


def manifest(out):
    return json.loads((out.parent / (out.name + ".json")).read_text())


@pytest.mark.parametrize("text,value", [("1+2i", 1 + 2j), ("-0.5", -0.5), ("3i", 3j), ("-i", -1j),
                                        ("1e-3-2.5e1i", 1e-3 - 25j), ("+.5+i", 0.5 + 1j)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects():
    for bad in ("", "1+2", "i2", "1,5", "abc"):
        with pytest.raises(Exception):
            parse_complex(bad)


def test_simulate_pure_yang_mills(tmp_path):
    code, out = run(["simulate", "--system", "cartesian", "--rho0", "0.5", "--U0", "0.1", "--xi0", "0,0",
                     "--span=-2:2"], tmp_path)
    assert code == 0
    cols = read_csv_columns(str(out))
    assert list(cols)[:10] == ["s", "z_re", "z_im", "Y_re", "Y_im", "xi_c_re", "xi_c_im", "xi_h_re", "xi_h_im",
                               "constraint"]
    assert np.all(cols["constraint"] == 0.0)
    m = manifest(out)
    assert m["termination"] == "reached-end" and m["version"]
    text = out.read_bytes()
    assert b"\r" not in text and text.endswith(b"\n")


def test_simulate_constraint_handling(tmp_path):
    args = ["simulate", "--system", "cartesian", "--z0", "0.5", "--Y0", "0.1", "--xi0", "0.3,0.2", "--span", "0:1"]
    code, _ = run(args, tmp_path)
    assert code == 1
    code, out = run(args + ["--project-constraint"], tmp_path)
    assert code == 0
    assert manifest(out)["constraint_projected"]
    assert abs(read_csv_columns(str(out))["constraint"]).max() < 1e-10


def test_simulate_blowup_exit_code(tmp_path):
    code, out = run(["simulate", "--system", "polar0", "--rho0", "1.2", "--xi0", "1,1", "--span", "0:10"],
                    tmp_path)
    assert code == 2
    m = manifest(out)
    assert m["singular_s"] and 0 < m["singular_s"][0] < 10
    assert out.exists()


def test_simulate_polar_w_column(tmp_path):
    s = np.linspace(-1, 12, 2601)
    fam = cr.delta0_family(1.0, 0.7, 0.0, s)
    mfile = tmp_path / "metric.csv"
    np.savetxt(mfile, np.c_[s, fam.r], delimiter=",", header="s,r", comments="", fmt="%.17g")
    code, out = run(["simulate", "--system", "polar0", "--rho0", "0.7", "--xi0", "1,1", "--span", "0:10",
                     "--metric", f"file:{mfile}"], tmp_path)
    assert code == 0
    cols = read_csv_columns(str(out))
    W = cols["W"]
    assert np.all(np.diff(W) > -1e-9)
    assert abs(W[-1] - cr.w_infinity(1.0, 0.7)) < 1e-3
    assert np.max(np.abs(cols["rho"] - 0.7)) < 1e-6


def test_family_s1xs2_and_verify(tmp_path):
    code, out = run(["family", "--family", "s1xs2", "--lambda", "1", "--xi0-sq", "8"], tmp_path)
    assert code == 0
    radii = manifest(out)["radii"]
    assert radii["S1"] == pytest.approx(1 / 9, rel=1e-14)
    assert radii["S2"] == pytest.approx(1 / 27, rel=1e-14)
    rep = tmp_path / "rep.json"
    assert main(["verify", "--in", str(out), "--tol", "1e-8", "--out", str(rep)]) == 0
    r = json.loads(rep.read_text())
    assert r["pass"] and r["coupled"]


def test_family_rational_fp(tmp_path):
    code, out = run(["family", "--family", "rational-fp", "--p", "1", "--q", "4"], tmp_path)
    assert code == 0
    m = manifest(out)
    assert m["report"]["rho0"] == pytest.approx(2 / math.sqrt(45), rel=1e-14)
    assert m["stationarity_check"] == "PASS"


def test_family_rho1_first_row(tmp_path):
    code, out = run(["family", "--family", "rho1-delta0", "--xi0-sq", "8"], tmp_path)
    assert code == 0
    cols = read_csv_columns(str(out))
    assert cols["s"][0] == 0 and cols["z_re"][0] == 1 and cols["z_im"][0] == 0
    assert cols["r"][0] == pytest.approx(8 * 1.0 / 8)


def test_family_precondition_named(tmp_path, capsys):
    code, _ = run(["family", "--family", "rho1-delta0", "--W0", "2.0"], tmp_path)
    assert code == 1
    assert "cos W0 > 0" in capsys.readouterr().err


def test_find_periodic(tmp_path):
    args = ["find-periodic", "--branch", "delta0", "--rho-range", "0.02:0.3", "--n-grid", "8",
            "--max-candidates", "1"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert ra["candidates"] == rb["candidates"]
    c = ra["candidates"][0]
    assert c["closure"] <= 1e-5
    assert c["f"] == pytest.approx(c["p"] / c["q"], abs=1e-10)


def test_find_periodic_knobs(tmp_path):
    out = tmp_path / "q.json"
    assert main(["find-periodic", "--branch", "delta0", "--qmax", "1", "--n-grid", "6", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["candidates"] == []
    assert main(["find-periodic", "--branch", "delta0", "--rho-range", "0.3:0.1"]) == 1


def test_verify_pure_yang_mills_uncoupled(tmp_path):
    s = np.linspace(0, 1, 101)
    path = tmp_path / "flat.csv"
    z = np.exp(0.4j)
    rows = np.c_[s, np.full_like(s, z.real), np.full_like(s, z.imag), np.zeros((len(s), 4)), np.full_like(s, 1.5)]
    np.savetxt(path, rows, delimiter=",", header="s,z_re,z_im,xi_c_re,xi_c_im,xi_h_re,xi_h_im,r",
               comments="", fmt="%.17g")
    rep = tmp_path / "rep.json"
    assert main(["verify", "--in", str(path), "--out", str(rep)]) == 0
    assert json.loads(rep.read_text())["coupled"] is False


def test_verify_order_on_simulate_output(tmp_path):
    res = []
    for n in (201, 26):
        code, out = run(["simulate", "--system", "cartesian", "--rho0", "0.6", "--U0", "0.1",
                         "--xi0", "0.5+0.2i,0.3-0.1i", "--span", "0:2", "--rtol", "1e-13", "--atol", "1e-15",
                         "--metric", "form:sine:1,0.3", "--n-out", str(n)], tmp_path, f"c{n}.csv")
        assert code == 0
        rep = tmp_path / f"r{n}.json"
        main(["verify", "--in", str(out), "--out", str(rep)])
        res.append(json.loads(rep.read_text())["residual_max"])
    assert 8 ** 3.5 < res[1] / res[0] < 8 ** 4.5


def test_verify_malformed_csv(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("s,z_re,z_im,xi_c_re,xi_c_im,xi_h_re,xi_h_im,r\n0,1,0,0,0,0,0,1\n0.1,1,zz,0,0,0,0,1\n")
    assert main(["verify", "--in", str(path)]) == 1
    err = capsys.readouterr().err
    assert "row 3" in err and "z_im" in err


def test_verify_report_reproducible(tmp_path):
    code, out = run(["family", "--family", "winfty", "--rho0", "0.6", "--span", "0:0.5"], tmp_path)
    assert code == 0
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify", "--in", str(out), "--out", str(a)])
    main(["verify", "--in", str(out), "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors(tmp_path):
    assert main([]) == 1
    assert main(["simulate", "--system", "cartesian", "--xi0", "1+,2", "--out", str(tmp_path / "x")]) == 1
    assert main(["simulate", "--system", "cartesian", "--metric", "const:-1", "--out", str(tmp_path / "x")]) == 1
