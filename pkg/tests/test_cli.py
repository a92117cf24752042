import csv
import json
import math
import random
import subprocess
import sys

import pytest

from podbounds.cli import EXIT_NOT_SUMMABLE, EXIT_OK, EXIT_SPEC, EXIT_VERIFY, main


def write(tmp_path, doc, name="spec.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


FACT = {"kind": "factorial_power", "sigma": 1}
BASEL = {"gamma": FACT, "upsilon": {"kind": "poly_decay", "c": 1, "rho": 2}}


class TestSum:
    def test_basel_row(self, tmp_path, capsys):
        code, rep, _ = run(capsys, "sum", write(tmp_path, BASEL), "--m", "1", "--rtol", "1e-3")
        assert code == EXIT_OK
        (row,) = rep["rows"]
        assert math.isfinite(row["log_S_lo"]) and row["naive"] == "diverged"
        assert rep["environment"]["version"] and rep["spec_digest"]

    def test_zero_weights_give_gamma0(self, tmp_path, capsys):
        doc = {"gamma": {"kind": "explicit", "values": [2.0, 1.0]}, "upsilon": {"kind": "zero"}}
        code, rep, _ = run(capsys, "sum", write(tmp_path, doc), "--m", "1", "10", "1000")
        assert code == EXIT_OK
        assert [r["log_S_lo"] for r in rep["rows"]] == [pytest.approx(math.log(2.0))] * 3

    def test_not_summable_exit(self, tmp_path, capsys):
        doc = {**BASEL, "gamma": {"kind": "factorial_power", "sigma": 2}}
        code, rep, err = run(capsys, "sum", write(tmp_path, doc), "--m", "1")
        assert code == EXIT_NOT_SUMMABLE and rep is None
        assert "rho > sigma" in err

    def test_parse_error_names_field(self, tmp_path, capsys):
        doc = {**BASEL, "upsilon": {"kind": "poly_decay", "c": 1, "rho": 0.9}}
        code, _, err = run(capsys, "sum", write(tmp_path, doc), "--m", "1")
        assert code == EXIT_SPEC and "upsilon.rho" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run(capsys, "sum", str(tmp_path / "nope.json"), "--m", "1")
        assert code == EXIT_SPEC

    def test_bad_m(self, tmp_path, capsys):
        code, _, _ = run(capsys, "sum", write(tmp_path, BASEL), "--m", "-1")
        assert code == EXIT_SPEC

    def test_log_grid_sorted_and_csv(self, tmp_path, capsys):
        out = tmp_path / "rows.csv"
        doc = {"gamma": FACT, "upsilon": {"kind": "explicit", "values": [0.5, 0.25]}}
        code, rep, _ = run(capsys, "sum", write(tmp_path, doc), "--m-log", "100", "1", "3", "--csv", str(out))
        assert code == EXIT_OK
        ms = [r["m"] for r in rep["rows"]]
        assert ms == pytest.approx([1.0, 10.0, 100.0])
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["m"]) for r in rows] == pytest.approx(ms)
        assert {"m", "log_S_lo", "d", "L", "converged", "naive"} <= set(rows[0])

    def test_env_fallback(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("PODSUM_RTOL", "0.01")
        monkeypatch.setenv("PODSUM_M", "2 3")
        code, rep, _ = run(capsys, "sum", write(tmp_path, BASEL))
        assert code == EXIT_OK and rep["rtol"] == 0.01
        assert [r["m"] for r in rep["rows"]] == [2.0, 3.0]

    def test_workers_do_not_change_rows(self, tmp_path, capsys):
        path = write(tmp_path, BASEL)
        _, a, _ = run(capsys, "sum", path, "--m", "1", "2", "--rtol", "1e-2")
        _, b, _ = run(capsys, "sum", path, "--m", "1", "2", "--rtol", "1e-2", "--workers", "2")
        assert a["rows"] == b["rows"]

    def test_timing_only_on_request(self, tmp_path, capsys):
        path = write(tmp_path, BASEL)
        _, a, _ = run(capsys, "sum", path, "--m", "1", "--rtol", "1e-2")
        _, b, _ = run(capsys, "sum", path, "--m", "1", "--rtol", "1e-2", "--timing")
        assert "wall_time_s" not in a and b["wall_time_s"] >= 0


class TestBound:
    def test_single_weight(self, tmp_path, capsys):
        doc = {"gamma": FACT, "upsilon": {"kind": "explicit", "values": [0.3]}}
        code, rep, _ = run(capsys, "bound", write(tmp_path, doc), "--m", "2")
        assert code == EXIT_OK
        assert rep["rows"][0]["theorem1"] == pytest.approx(math.log(1 + math.e**2 * 2 * 0.3))

    def test_unbounded_at_small_L(self, tmp_path, capsys):
        code, rep, _ = run(capsys, "bound", write(tmp_path, BASEL), "--m", "4", "--L", "3")
        assert code == EXIT_OK
        assert rep["rows"][0]["theorem1"] == "unbounded-at-L"

    def test_random_sweep_no_dominance_failure(self, tmp_path, capsys):
        rng = random.Random(0)
        rows = 0
        for i in range(10):
            rho = rng.uniform(1.2, 4.0)
            sigma = rng.uniform(0.0, min(rho - 0.1, 2.0))
            doc = {
                "gamma": {"kind": "factorial_power", "sigma": sigma},
                "upsilon": {"kind": "poly_decay", "c": rng.uniform(0.1, 2.0), "rho": rho},
            }
            code, rep, _ = run(capsys, "bound", write(tmp_path, doc, f"s{i}.json"),
                               "--m-log", "0.1", "100", "10", "--d", "128", "--L", "48")
            assert code == EXIT_OK
            rows += len(rep["rows"])
            assert all(r["dominance_ok"] for r in rep["rows"])
        assert rows == 100

    def test_spod_rejected(self, tmp_path, capsys):
        doc = {"alpha": 1, "gamma": FACT, "upsilon": [{"kind": "zero"}]}
        code, _, err = run(capsys, "bound", write(tmp_path, doc), "--m", "1")
        assert code == EXIT_SPEC and "alpha" in err


class TestRate:
    def test_bracket_columns(self, capsys):
        code, rep, _ = run(capsys, "rate", "--rho", "2", "--sigma", "0", "--m", "10")
        assert code == EXIT_OK
        row = rep["rows"][0]
        assert row["lower_const"] == 2.0
        assert row["upper_const"] == pytest.approx(2 * math.sqrt(math.e))

    def test_theta_one(self, capsys):
        _, rep, _ = run(capsys, "rate", "--theta", "1", "--m", "1", "5", "25")
        assert [r["normalized_log"] for r in rep["rows"]] == [1.0, 1.0, 1.0]

    def test_spod_between_brackets(self, capsys):
        code, rep, _ = run(capsys, "rate", "--alpha", "2", "--rho", "2", "--sigma", "0",
                           "--c-values", "1", "1", "--m", "10", "1000", "--d", "100")
        assert code == EXIT_OK
        last = rep["rows"][-1]
        assert last["lower"] <= last["measured"] <= last["upper"]

    def test_not_summable(self, capsys):
        code, _, err = run(capsys, "rate", "--rho", "1.5", "--sigma", "2", "--m", "1")
        assert code == EXIT_NOT_SUMMABLE and "rho > sigma" in err


class TestVerify:
    def test_lemma2_pass(self, capsys):
        code, rep, err = run(capsys, "verify", "--suite", "lemma2", "--n", "1000")
        assert code == EXIT_OK and rep["passed"]
        assert "PASS" in err and "FAIL" not in err

    def test_mc_deterministic(self, capsys):
        _, a, _ = run(capsys, "verify", "--suite", "mc", "--seed", "5", "--mc-samples", "2000")
        _, b, _ = run(capsys, "verify", "--suite", "mc", "--seed", "5", "--mc-samples", "2000")
        assert a == b and a["passed"]

    def test_all_on_zero_weights(self, tmp_path, capsys):
        doc = {"gamma": FACT, "upsilon": {"kind": "zero"}}
        code, rep, _ = run(capsys, "verify", "--suite", "all", "--spec", write(tmp_path, doc), "--n", "50")
        assert code == EXIT_OK and rep["passed"]

    def test_failure_exit_code(self, tmp_path, capsys):
        # mixed decay rates have no reduced sequence, so the reduction suite fails
        doc = {"alpha": 2, "gamma": FACT, "upsilon": [
            {"kind": "poly_decay", "c": 1, "rho": 2}, {"kind": "poly_decay", "c": 1, "rho": 3}]}
        code, rep, _ = run(capsys, "verify", "--suite", "spod-reduction", "--spec", write(tmp_path, doc))
        assert code == EXIT_VERIFY and not rep["passed"]


class TestProcess:
    def test_module_entry_point_byte_identical(self):
        cmd = [sys.executable, "-m", "podbounds", "verify", "--suite", "lemma2", "--n", "200"]
        a = subprocess.run(cmd, capture_output=True, check=True).stdout
        b = subprocess.run(cmd, capture_output=True, check=True).stdout
        assert a == b and json.loads(a)["passed"]

    def test_no_nan_tokens(self, tmp_path):
        doc = {"gamma": FACT, "upsilon": {"kind": "explicit", "values": [0.0, 0.0]}}
        out = subprocess.run(
            [sys.executable, "-m", "podbounds", "bound", write(tmp_path, doc), "--m", "1", "--L", "2"],
            capture_output=True, check=True, text=True,
        ).stdout
        assert "NaN" not in out and "Infinity" not in out
