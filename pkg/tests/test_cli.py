"""Command-line contract: exit codes, file formats, determinism.

Everything runs in-process through selab.cli.main so coverage tools see
it and failures carry Python tracebacks instead of subprocess noise.
"""

import filecmp
import json
import re

import numpy as np
import pytest

from selab.cli import main

T1 = "theorem1.cfg"
T2 = "theorem2.cfg"
T3 = "theorem3.cfg"

# descends safely below theorem1's first-node boundary-layer value
# (about 2.7e-3) so the positivity gate sees a positive limit
SHORT_SCHEDULE = "0.01,0.001,0.0001"


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# ------------------------------------------------------------ exit codes


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "solve" in capsys.readouterr().out


def test_usage_errors_exit_three(capsys):
    assert main(["frobnicate"]) == 3
    assert main([]) == 3
    assert main(["solve"]) == 3  # --config is required
    assert main(["sweep", "--config", T3, "--points", "many"]) == 3
    err = capsys.readouterr().err
    assert "error" in err


def test_missing_config_exits_one(tmp_path, capsys):
    code = main(["eigen", "--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path)])
    assert code == 1
    assert "not found" in capsys.readouterr().err


# ------------------------------------------------------------ solve


def test_solve_writes_field_and_report(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--config", T1, "--out", str(out)]) == 0
    assert (out / "u.csv").exists()
    rep = read_json(out / "report.json")
    assert set(rep) == {"converged", "iterations", "residual_inf",
                        "eps_path", "min_interior", "diagnostics"}
    assert rep["converged"] is True
    assert rep["residual_inf"] < 1e-8
    assert rep["min_interior"] > 0
    assert rep["diagnostics"]["verdict"] == "converged"


def test_solve_nonexistence_exits_two(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--config", T2, "--out", str(out)]) == 2
    rep = read_json(out / "report.json")
    assert rep["converged"] is False
    assert rep["diagnostics"]["verdict"] == "nonexistence-indicated"


def test_solve_custom_paths_and_overrides(tmp_path):
    csv = tmp_path / "custom" / "field.csv"
    report = tmp_path / "custom" / "r.json"
    code = main(["solve", "--config", T1, "--lambda", "0.5",
                 "--eps-schedule", SHORT_SCHEDULE,
                 "--out", str(csv), "--report", str(report)])
    assert code == 0
    assert csv.exists()
    rep = read_json(report)
    assert rep["eps_path"] == [0.01, 0.001, 0.0001]


def test_solve_rejects_bad_schedule(tmp_path, capsys):
    code = main(["solve", "--config", T1,
                 "--eps-schedule", "0.1,0.2", "--out", str(tmp_path)])
    assert code == 3
    assert "decreasing" in capsys.readouterr().err


# ------------------------------------------------------------ sweep


def test_sweep_csv_contract(tmp_path):
    out = tmp_path / "s"
    code = main(["sweep", "--config", T3, "--lambdas", "2,20,60",
                 "--out", str(out)])
    assert code == 0
    lines = (out / "sweep.csv").read_text().strip().splitlines()
    assert lines[0] == "lambda,verdict,max_u,min_u,mass_integral"
    assert len(lines) == 4
    for line in lines[1:]:
        lam, verdict, max_u, min_u, mass = line.split(",")
        assert verdict in {"converged", "nonexistence-indicated"}
        assert float(max_u) >= float(min_u) >= 0.0
        assert float(mass) > 0.0
    assert float(lines[1].split(",")[0]) == 2.0


# ------------------------------------------------------------ lambda-star


def test_lambda_star_json_contract(tmp_path):
    out = tmp_path / "ls"
    code = main(["lambda-star", "--config", T3, "--iters", "4",
                 "--out", str(out)])
    assert code == 0
    est = read_json(out / "lambda_star.json")
    assert set(est) == {"lo", "hi", "iters", "lambda0", "grid_n"}
    assert est["lambda0"] == 1.0
    assert est["grid_n"] == 64
    assert 0.1 < est["lo"] < est["hi"] < 100.0


# ------------------------------------------------------------ eigen / hode


def test_eigen_prints_closed_form(tmp_path, capsys):
    assert main(["eigen", "--config", T1, "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    printed = float(re.search(r"lambda1=([^ ]+)", out).group(1))
    h = 1.0 / 128.0
    assert printed == pytest.approx(2.0 / h**2 * (1 - np.cos(np.pi * h)),
                                    rel=1e-12)
    assert (tmp_path / "phi1.csv").exists()


def test_hode_tabulates_profile(tmp_path):
    code = main(["hode", "--config", T3, "--alpha", "0.5",
                 "--T", "1.0", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "hprofile.csv").read_text().strip().splitlines()
    assert lines[0] == "t,h,dh"
    h_vals = [float(line.split(",")[1]) for line in lines[1:]]
    assert len(h_vals) > 10
    assert all(b >= a for a, b in zip(h_vals, h_vals[1:]))


def test_hode_nonintegrable_exits_one(tmp_path, capsys):
    code = main(["hode", "--config", T3, "--alpha", "1.5",
                 "--out", str(tmp_path)])
    assert code == 1
    assert capsys.readouterr().err


# ------------------------------------------------------------ construct


def test_construct_json_keys(tmp_path):
    out = tmp_path / "c"
    code = main(["construct", "--config", T3, "--kind", "sub-eigen",
                 "--lambda", "150", "--out", str(out)])
    assert code == 0
    meta = read_json(out / "sub_eigen.json")
    assert set(meta) == {"kind", "M", "delta", "lambda_threshold",
                         "c1", "c2", "residual_max"}
    assert meta["M"] is not None and meta["delta"] is not None
    assert meta["lambda_threshold"] is not None
    assert (out / "sub_eigen.csv").exists()

    code = main(["construct", "--config", T3, "--kind", "super",
                 "--out", str(out)])
    assert code == 0
    sup = read_json(out / "super.json")
    assert set(sup) == set(meta)
    assert sup["c1"] is not None and sup["c2"] is not None
    assert sup["lambda_threshold"] is None


def test_construct_below_threshold_exits_one(tmp_path, capsys):
    code = main(["construct", "--config", T3, "--kind", "sub-eigen",
                 "--lambda", "5", "--out", str(tmp_path)])
    assert code == 1
    assert "lambda" in capsys.readouterr().err


# ------------------------------------------------------------ compare


def test_compare_certified_pair(tmp_path):
    out = tmp_path / "cmp"
    # pull the certificate threshold off a construct run, then pair the
    # eigen sub-solution with the envelope at twice that lambda
    assert main(["construct", "--config", T3, "--kind", "sub-eigen",
                 "--lambda", "150", "--out", str(out)]) == 0
    thr = read_json(out / "sub_eigen.json")["lambda_threshold"]
    lam = repr(2.0 * thr)
    assert main(["construct", "--config", T3, "--kind", "sub-eigen",
                 "--lambda", lam, "--out", str(out)]) == 0
    assert main(["construct", "--config", T3, "--kind", "super",
                 "--lambda", lam, "--out", str(out)]) == 0
    code = main(["compare", "--config", T3, "--lambda", lam,
                 str(out / "sub_eigen.csv"), str(out / "super.csv"),
                 "--out", str(out)])
    assert code == 0
    rep = read_json(out / "compare.json")
    assert rep["verdict"] == "ordered"
    assert rep["max_violation"] <= 1e-8
    assert rep["sub_share"] == 1.0 and rep["super_share"] == 1.0


def test_compare_wrong_grid_exits_one(tmp_path, capsys):
    out = tmp_path / "w"
    assert main(["construct", "--config", T3, "--kind", "super",
                 "--out", str(out)]) == 0
    # theorem2's grid has 127 nodes, the saved field 64: must refuse
    code = main(["compare", "--config", T2,
                 str(out / "super.csv"), str(out / "super.csv"),
                 "--out", str(out)])
    assert code == 1
    assert capsys.readouterr().err


# ------------------------------------------------------------ determinism


def test_identical_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["solve", "--config", T1, "--lambda", "0.5",
                     "--eps-schedule", SHORT_SCHEDULE, "--out", str(out)]) == 0
    assert filecmp.cmp(a / "u.csv", b / "u.csv", shallow=False)
    assert filecmp.cmp(a / "report.json", b / "report.json", shallow=False)


def test_disk_config_wins_over_bundled(tmp_path, capsys):
    # a local file with the same basename must shadow the bundled config
    from selab.acceptance import bundled_config_text

    text = bundled_config_text(T3).replace("domain.n = 64", "domain.n = 16")
    local = tmp_path / T3
    local.write_text(text)
    assert main(["eigen", "--config", str(local), "--out", str(tmp_path)]) == 0
    printed = float(re.search(r"lambda1=([^ ]+)",
                              capsys.readouterr().out).group(1))
    h = 1.0 / 17.0
    assert printed == pytest.approx(2.0 / h**2 * (1 - np.cos(np.pi * h)),
                                    rel=1e-12)


# ------------------------------------------------------------ verify


def test_verify_filter(capsys):
    assert main(["verify", "--only", "eigenpair"]) == 0
    out = capsys.readouterr().out
    assert "eigenpair" in out and "PASS" in out


def test_verify_empty_filter_exits_three(capsys):
    assert main(["verify", "--only", "zzz-no-such-check"]) == 3
    assert "no check matches" in capsys.readouterr().err
