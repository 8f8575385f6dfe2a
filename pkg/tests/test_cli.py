from __future__ import annotations

import json

import pytest

from qecregimes.cli import main
from qecregimes.datasets import exact_postselected_path
from qecregimes.exact import P_C
from qecregimes.io import read_table


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, out


def test_exact_contains_threshold(tmp_path):
    code, out = run(tmp_path, "exact", "--L", "8", "--L", "16", "--p", str(P_C))
    assert code == 0
    cols, rows, meta = read_table(out)
    assert cols == ["L", "p", "pfail"]
    assert all(r["pfail"] == 0.5 for r in rows)
    assert meta["config"]["L"] == [8, 16]
    assert "threads" not in meta["config"]


def test_exact_high_p(tmp_path):
    code, out = run(tmp_path, "exact", "--L", "64", "--p", "0.49")
    assert code == 0
    assert read_table(out)[1][0]["pfail"] == pytest.approx(0.75, abs=1e-4)


def test_empty_grid_writes_nothing(tmp_path):
    code, out = run(tmp_path, "exact", "--L", "8", "--p-grid", "0.3:0.1:0.1")
    assert code == 2
    assert not out.exists()


def test_usage_errors(tmp_path):
    assert main(["exact", "--p", "0.1"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["exact", "--L", "8", "--p", "0.0"]) == 3


def test_simulate_zero_noise(tmp_path):
    code, out = run(tmp_path, "simulate", "--geometry", "torus", "--L", "5", "--p", "0",
                    "--shots", "50")
    assert code == 0
    row = read_table(out)[1][0]
    assert row["pfail_hat"] == 0.0 and row["shots"] == 50


def test_simulate_thread_independent(tmp_path):
    args = ["simulate", "--L", "5", "--p", "0.1", "--shots", "600", "--seed", "4"]
    c1, a = run(tmp_path, *args, "--threads", "1", name="a.csv")
    c2, b = run(tmp_path, *args, "--threads", "2", name="b.csv")
    assert c1 == c2 == 0
    assert a.read_bytes() == b.read_bytes()


def test_gapdist_even_support(tmp_path):
    code, out = run(tmp_path, "gapdist", "--L", "5", "--p", "0.103", "--shots", "500")
    assert code == 0
    _, rows, meta = read_table(out)
    assert all(int(r["delta_e"]) % 2 == 0 for r in rows)
    assert sum(r["count"] for r in rows) == 500
    assert meta["timeouts"] == 0


def test_gapdist_rejects_torus():
    assert main(["gapdist", "--geometry", "torus", "--L", "5", "--p", "0.1"]) == 3


def test_fit_bundled_exact(tmp_path):
    code, out = run(tmp_path, "fit", "--model", "erf2", "--input", str(exact_postselected_path()),
                    name="fit.json")
    assert code == 0
    res = json.loads(out.read_text())
    fit = res["fits"][0]
    assert 0.9 <= fit["params"]["nu"] <= 1.1
    assert set(fit) >= {"params", "stderrs", "rss", "aic", "bic", "n", "k"}
    assert res["metadata"]["config"]["model"] == "erf_quadratic"


def test_fit_compare(tmp_path):
    code, out = run(tmp_path, "fit", "--model", "compare", "--input", str(exact_postselected_path()),
                    name="fit.json")
    res = json.loads(out.read_text())
    assert len(res["fits"]) == 4
    assert set(res["ranking"]) == {"aic", "bic"}
    assert code in (0, 5)


def test_fit_malformed_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("L,p,pfail\n8,0.1,0.2\n8,x,0.3\n")
    assert main(["fit", "--model", "erf2", "--input", str(bad)]) == 4
    assert "row 2" in capsys.readouterr().err


def test_fit_missing_input():
    assert main(["fit", "--model", "erf2", "--input", "/nonexistent/file.csv"]) == 4
    assert main(["fit", "--model", "quartic", "--input", "x"]) == 3


def test_fit_g_collapse_single_p_is_domain_error(tmp_path):
    gaps = tmp_path / "gaps.csv"
    gaps.write_text("L,p,delta_e,count\n" + "".join(
        f"{L},0.1,{v},{c}\n" for L in (5, 7, 9) for v, c in ((0, 10), (2, 20), (4, 5))))
    assert main(["fit", "--model", "g_collapse", "--input", str(gaps)]) == 3


def test_duality_report(tmp_path):
    code, out = run(tmp_path, "duality", "--L", "16", "--p-grid", "0.05:0.28:0.01")
    assert code == 0
    _, rows, meta = read_table(out)
    assert meta["max_abs_residual"] <= 1e-9
    assert len(rows) == 24


def test_pathcount_boundary(tmp_path):
    code, out = run(tmp_path, "pathcount", "--L", "16", "--p-grid", "0.01:0.1:0.01")
    assert code == 0
    rows = read_table(out)[1]
    assert all(r["boundary_p"] == pytest.approx(1 / 16) for r in rows)
    assert all(r["valid"] == (1.0 if r["p"] < 1 / 16 else 0.0) for r in rows)


def test_pathcount_enumerate_uses_wmax(tmp_path):
    code, out = run(tmp_path, "pathcount", "--model", "enumerate", "--geometry", "torus",
                    "--L", "3", "--wmax", "2")
    assert code == 0
    rows = read_table(out)[1]
    assert [r["coefficient"] for r in rows] == [0, 0, 18]
    assert rows[2]["nmin_formula"] == 18


def test_pathcount_enumerate_rejects_large_L(tmp_path):
    code, _ = run(tmp_path, "pathcount", "--model", "enumerate", "--L", "7")
    assert code == 3


def test_capillary_boundary(tmp_path):
    code, out = run(tmp_path, "capillary", "--L", "32", "--p-grid", "0.05:0.28:0.05")
    assert code == 0
    rows = read_table(out)[1]
    assert all(r["boundary_p"] == pytest.approx(P_C - 1 / 32) for r in rows)


def test_collapse_window(tmp_path):
    code, out = run(tmp_path, "collapse", "--L", "8", "--L", "16", "--L", "32",
                    "--p-grid", "0.27:0.32:0.0005")
    assert code == 0
    lo, hi = read_table(out)[2]["window"]
    assert lo < 0 < hi


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"L": [8], "p": 0.2}))
    code, out = run(tmp_path, "exact", "--config", str(cfg))
    assert code == 0
    assert read_table(out)[1][0]["L"] == 8
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["exact", "--config", str(cfg)]) == 4


def test_json_format(tmp_path):
    code, out = run(tmp_path, "exact", "--L", "4", "--p", "0.1", "--format", "json", name="o.json")
    assert code == 0
    obj = json.loads(out.read_text())
    assert obj["rows"][0]["L"] == 4


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("QECREGIMES_THREADS", "2")
    code, out = run(tmp_path, "simulate", "--L", "3", "--p", "0.1", "--shots", "100")
    assert code == 0
