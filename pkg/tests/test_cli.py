import json
import math

import pytest

from sta_dirac import cli


def run(capsys, *args):
    code = cli.main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gegenbauer_csv(capsys):
    code, out, _ = run(capsys, "gegenbauer", "--p-max", "2", "--a", "1", "--points", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "z,C0,C1,C2"
    assert [float(x) for x in lines[2].split(",")] == [0.0, 1.0, 0.0, -1.0]
    assert all(line.split(",")[1] == "1" for line in lines[1:])


def test_output_is_byte_stable(capsys, tmp_path):
    a = run(capsys, "gegenbauer", "--points", "7")[1]
    b = run(capsys, "gegenbauer", "--points", "7")[1]
    assert a == b
    path = tmp_path / "g.csv"
    assert run(capsys, "gegenbauer", "--points", "7", "--out", str(path))[1] == ""
    assert path.read_bytes() == a.encode()


def test_spectrum_json(capsys):
    code, out, _ = run(capsys, "spectrum", "--zalpha", "0.3", "--max-n", "2", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 4
    assert set(rows[0]) == {"n_r", "kappa", "E_shoot", "E_analytic", "rel_err"}
    assert all(r["rel_err"] < 1e-6 for r in rows)


def test_spectrum_tolerance_failure_exits_1(capsys):
    code, out, _ = run(capsys, "spectrum", "--zalpha", "0.3", "--max-n", "1", "--tol", "1e-30")
    assert code == 1 and out.startswith("n_r,kappa")


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\np_max = 1\npoints = 4\n")
    code, out, _ = run(capsys, "gegenbauer", "--config", str(cfg))
    assert code == 0 and out.splitlines()[0] == "z,C0,C1" and len(out.splitlines()) == 5
    code, out, _ = run(capsys, "gegenbauer", "--config", str(cfg), "--points", "2")
    assert len(out.splitlines()) == 3


@pytest.mark.parametrize("args", [
    ["spectrum", "--zalpha", "1.5"],
    ["spectrum", "--max-n", "11"],
    ["gegenbauer", "--a", "0"],
    ["residual", "--config", "/nonexistent/file"],
])
def test_config_errors_exit_2(capsys, args):
    code, _, err = run(capsys, *args)
    assert code == 2 and err.startswith("error:")


def test_bad_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run(capsys, "gegenbauer", "--config", str(cfg))[0] == 2


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["spectrum", "--no-such-flag"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


def test_zero_field_residual_is_zero(capsys):
    code, out, _ = run(capsys, "residual", "--field", "zero", "--grid", "3", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 9
    assert all(r["residual_norm"] == 0.0 and r["psi_norm"] == 0.0 for r in rows)


def test_residual_state_small(capsys):
    code, out, _ = run(capsys, "residual", "--grid", "3", "--format", "json", "--gauge", "xio")
    assert code == 0
    assert max(r["rel_residual"] for r in json.loads(out)) < 1e-6


def test_gauge_check(capsys):
    code, out, _ = run(capsys, "gauge-check", "--grid", "4", "--format", "json")
    rows = json.loads(out)
    assert code == 0
    assert [r["path"] for r in rows] == ["xio", "xis", "dE"]
    assert rows[2]["E"] < 1e-10


def test_angular_in_span(capsys):
    code, out, _ = run(capsys, "angular", "--kappa", "-2", "--n", "1.5", "--points", "5",
                       "--format", "json")
    assert code == 0
    assert all(r["off_span"] < 1e-12 for r in json.loads(out))


def test_angular_not_found_exits_1(capsys):
    code, _, err = run(capsys, "angular", "--kappa", "-1", "--n", "2.5")
    assert code == 1 and "error" in err


def test_nan_rows_exit_1(capsys, monkeypatch):
    monkeypatch.setattr(cli, "gegenbauer", lambda p, a, z: math.nan)
    code, out, _ = run(capsys, "gegenbauer", "--points", "2")
    assert code == 1 and "nan" in out


def test_spectrum_nonrelativistic_binding(capsys):
    za = 1 / 137.035999
    code, out, _ = run(capsys, "spectrum", "--zalpha", repr(za), "--max-n", "1", "--format", "json")
    E = json.loads(out)[0]["E_shoot"]
    assert code == 0
    assert math.isclose(1 - E, za**2 / 2, rel_tol=1e-4)
