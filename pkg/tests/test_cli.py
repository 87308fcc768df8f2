import csv
import json

import pytest

from fracbec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_ground_state(capsys, tmp_path):
    save = tmp_path / "q.frfld"
    code, d, _ = run(capsys, "ground-state", "--n", "1024", "--L", "64", "--no-cache", "--save", str(save))
    assert code == 0 and save.exists()
    assert d["a_star"] == pytest.approx(2.4694726, abs=1e-6)
    assert max(d["pohozaev_residuals"].values()) < 2e-3
    assert d["decay"]["verdict"]


def test_ground_state_methods_agree(capsys):
    a = [run(capsys, "ground-state", "--n", "1024", "--L", "64", "--no-cache", "--method", m)[1]["a_star"]
         for m in ("flow", "fixedpoint")]
    assert a[0] == pytest.approx(a[1], rel=1e-8)


def test_classify_below_thresholds(capsys):
    code, d, _ = run(capsys, "classify", "--a1", "0.5", "--a2", "0.5", "--beta", "0", "--skip-gamma")
    assert code == 0
    assert (d["verdict"], d["rule"]) == ("Exists", "Thm 1.1(i)")


def test_classify_supercritical(capsys):
    code, d, _ = run(capsys, "classify", "--a1", "1.2", "--a2", "0.5", "--beta", "0", "--skip-gamma")
    assert code == 0 and d["verdict"] == "NotExists"


def test_gamma_diagonal(capsys):
    code, d, _ = run(capsys, "gamma", "--a1", "0.5", "--a2", "0.5", "--beta", "0.2")
    assert code == 0 and d["within_bounds"]
    assert d["value"] == pytest.approx(1 / 0.7, rel=0.02)


def test_minimize_and_save(capsys, tmp_path):
    code, d, _ = run(capsys, "minimize", "--a1", "0.3", "--a2", "0.3", "--beta", "0.1",
                     "--n", "512", "--L", "16", "--save", str(tmp_path / "run"))
    assert code == 0 and d["converged"]
    assert (tmp_path / "run_u1.frfld").exists() and (tmp_path / "run_u2.frfld").exists()


def test_probe_psi_r_csv(capsys, tmp_path):
    path = tmp_path / "trace.csv"
    code, d, _ = run(capsys, "probe", "--kind", "psi-r", "--n", "1024", "--L", "1", "--csv", str(path))
    assert code == 0
    assert d["kinetic_slope"] == pytest.approx(d["expected_kinetic"], rel=0.02)
    rows = list(csv.reader(open(path, newline="")))
    assert rows[0] == ["series", "lambda_or_R", "energy_or_term"]
    assert len(rows) - 1 == len(d["trace"]) == 8


def test_probe_scaling(capsys):
    code, d, _ = run(capsys, "probe", "--kind", "scaling", "--beta", "0.8", "--n", "1024", "--L", "32",
                     "--points", "9")
    assert code == 0 and d["decreasing"] and d["linear_coeff"] < 0
    assert len(d["trace"]) == 9


def test_appendix_verify(capsys):
    code, d, _ = run(capsys, "appendix-verify", "--a", "1.0", "--beta", "0.5")
    assert code == 0
    assert d["rho1"] == pytest.approx(d["rho1_expected"], rel=1e-10)


def test_sweep_then_plot(capsys, tmp_path):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[grid]\nn = 512\nL = 16\n[sweep]\na1 = 0.5, 0.5, 1\na2 = 0.5, 0.5, 1\n"
                   "beta = 0.2, 0.6, 2\nworkers = 1\n")
    code, d, _ = run(capsys, "sweep", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert code == 0 and d["rows"] == 2 and d["inconsistent_rows"] == []
    code, d, _ = run(capsys, "plot", "--table", str(tmp_path / "out" / "sweep.csv"),
                     "--out", str(tmp_path / "plots"))
    assert code == 0 and any(f.endswith("crossing.csv") for f in d["files"])


def test_verify_fast(capsys):
    code, d, err = run(capsys, "verify", "--level", "fast", "--no-sandwich")
    assert code == 0 and d["passed"]
    assert err.count("PASS") == len(d["checks"])


@pytest.mark.parametrize("argv", [
    ["sweep", "--config", "/nonexistent/s.ini", "--out", "x"],
    ["classify", "--a1", "-1", "--a2", "0.5", "--beta", "0", "--skip-gamma"],
    ["classify", "--a1", "0.5", "--a2", "0.5", "--beta", "0", "--v1", "cubic"],
    ["ground-state", "--n", "1000", "--L", "8", "--no-cache"],
])
def test_errors_exit_2(capsys, argv):
    code, d, err = run(capsys, *argv)
    assert code == 2 and d is None and err.startswith("error: ")


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["minimize", "--a1", "0.5"])
    assert exc.value.code == 2
