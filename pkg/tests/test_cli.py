import json
import os

import numpy as np
import pytest

from kepler_balance.cli import main, parse_grid, parse_profile
from kepler_balance.errors import DomainError


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_profile_inline_and_json(tmp_path):
    p = parse_profile("phi_v_candidate:v=1")
    assert p.kind == "phi_v_candidate" and p.params["v"] == 1
    q = parse_profile('{"kind": "explicit_n", "params": {"n": 3}}')
    assert q.params["n"] == 3
    path = tmp_path / "prof.json"
    path.write_text('{"kind": "sqrt_poincare", "params": {}}')
    r = parse_profile(str(path))
    assert r.kind == "sqrt_poincare"


def test_parse_grid():
    g = parse_grid("0.1:0.9:9")
    assert len(g) == 9
    assert g[0] == pytest.approx(0.1) and g[-1] == pytest.approx(0.9)
    with pytest.raises(DomainError):
        parse_grid("0.5:1.5:3")
    with pytest.raises(DomainError):
        parse_grid("0.1:0.9")


def test_kernel_candidate_grid(capsys, tmp_path):
    out = tmp_path / "k.csv"
    code, _o, _e = run_cli(
        ["kernel", "--profile", "phi_v_candidate:v=1", "--n", "2", "--c", "4",
         "--grid", "0.1:0.9:9", "--out", str(out)],
        capsys,
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,F,defect"
    assert len(lines) == 10
    defects = [abs(float(row.split(",")[2])) for row in lines[1:]]
    assert max(defects) <= 1e-9


def test_kernel_constant_one_point(capsys):
    code, out, _ = run_cli(
        ["kernel", "--profile", "constant_one", "--n", "2", "--t", "0.5", "--c", "4"],
        capsys,
    )
    assert code == 0
    F = float(out.strip().splitlines()[1].split(",")[1])
    assert F == pytest.approx(20.0, rel=1e-9)


def test_kernel_empty_grid_is_config_error(capsys):
    code, _o, err = run_cli(
        ["kernel", "--profile", "constant_one", "--grid", "0.5:0.1:0", "--c", "4"],
        capsys,
    )
    assert code == 1


def test_kernel_requires_t_or_grid(capsys):
    code, _o, err = run_cli(
        ["kernel", "--profile", "constant_one", "--c", "4"], capsys
    )
    assert code == 1


def test_corrupted_profile_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _o, err = run_cli(
        ["kernel", "--profile", str(bad), "--t", "0.5", "--c", "4"], capsys
    )
    assert code == 1


def test_poincare_c0_summary(capsys, tmp_path):
    out = tmp_path / "sol.csv"
    code, _o, err = run_cli(
        ["poincare", "--c", "0", "--tmin", "1e-3", "--out", str(out)], capsys
    )
    assert code == 0
    summary = json.loads(err.strip().splitlines()[-1])
    assert summary["sup_error_vs_exact"] <= 1e-8
    header = out.read_text().splitlines()[0]
    assert header == "t,f,fp,fpp,psi_residual"


def test_poincare_cusp_exit_code(capsys, tmp_path):
    out = tmp_path / "sol.csv"
    code, _o, err = run_cli(
        ["poincare", "--c", "-0.1", "--tmin", "1e-3", "--out", str(out)], capsys
    )
    assert code == 3
    summary = json.loads(err.strip().splitlines()[-1])
    assert summary["t0"] is not None


def test_poincare_c1_exponent(capsys, tmp_path):
    out = tmp_path / "sol.csv"
    code, _o, err = run_cli(
        ["poincare", "--c", "1", "--tmin", "1e-4", "--out", str(out)], capsys
    )
    assert code == 0
    summary = json.loads(err.strip().splitlines()[-1])
    from kepler_balance.poincare import rho

    assert summary["exponent"] == pytest.approx(rho(1.0), abs=1e-3)


def test_asymptotics_json(capsys):
    code, out, _ = run_cli(["asymptotics", "--v", "9", "--order", "6"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["exact"] is True
    assert payload["A"][0] == "1" and payload["A"][1] == "0"
    assert payload["A"][2] == "-1/2"


def test_lerch_json(capsys):
    code, out, _ = run_cli(["lerch", "--t", "0.5", "--s", "1"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["direct"] == pytest.approx(2 * np.log(2))
    assert payload["diff"] <= 1e-10


def test_profile_eval(capsys):
    code, out, _ = run_cli(
        ["profile-eval", "--profile", "sqrt_poincare", "--t", "0.25"], capsys
    )
    assert code == 0
    row = out.strip().splitlines()[1].split(",")
    assert [float(x) for x in row] == [0.25, 1.0, -2.0, 4.0, 1.0]


def test_verify_only_filter(capsys):
    code, _o, _e = run_cli(["verify", "--only", "monge"], capsys)
    assert code == 0
    code, _o, _e = run_cli(["verify", "--only", "nonexistent-criterion"], capsys)
    assert code == 1


def test_determinism_across_threads(capsys, tmp_path, monkeypatch):
    args = ["kernel", "--profile", "phi_v_candidate:v=1", "--c", "4",
            "--grid", "0.1:0.5:5"]
    monkeypatch.setenv("KEPLER_BALANCE_THREADS", "1")
    a = tmp_path / "a.csv"
    run_cli(args + ["--out", str(a)], capsys)
    monkeypatch.setenv("KEPLER_BALANCE_THREADS", "4")
    b = tmp_path / "b.csv"
    run_cli(args + ["--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_numerical_failure_exit_code(capsys):
    # t this close to 1 exceeds the hard series-term cap
    code, _o, err = run_cli(
        ["kernel", "--profile", "constant_one", "--t", "0.9999999", "--c", "4",
         "--tol", "1e-12"],
        capsys,
    )
    assert code == 2
    assert "numerical failure" in err


def test_kernel_json_format(capsys):
    code, out, _ = run_cli(
        ["kernel", "--profile", "constant_one", "--t", "0.25", "--c", "4",
         "--format", "json"],
        capsys,
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["c"] == 4.0
    assert payload["rows"][0]["t"] == 0.25
