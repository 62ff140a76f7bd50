"""Command-line interface: verify suites, experiments, formats, exit codes."""

import csv
import json

import pytest

from hyperhaar import cli, coincidence


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, out


def run_json(argv, capsys):
    code, out = run(argv, capsys)
    return code, json.loads(out)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


class TestVerify:
    def test_default_suites_pass(self, capsys):
        code, payload = run_json(["verify", "--n", "3"], capsys)
        assert code == 0
        assert payload["ok"]
        assert payload["failures"] == []
        names = {s["name"] for s in payload["suites"]}
        assert {"product-rule-d3", "riesz-d2-identity", "gamma-identity",
                "inclusion-exclusion", "exponent-recursion"} <= names

    def test_injected_sign_error_names_tuple(self, capsys, monkeypatch):
        true_rule = coincidence.product_rule

        def flipped(rects):
            out = true_rule(rects)
            if out.kind == "haar":
                return coincidence.ProductResult("haar", sign=-out.sign,
                                                 rectangle=out.rectangle)
            return out

        monkeypatch.setattr(coincidence, "product_rule", flipped)
        code, payload = run_json(["verify", "--n", "2"], capsys)
        assert code == 1
        broken = [f for f in payload["failures"]
                  if f["suite"].startswith("product-rule")]
        assert broken
        assert broken[0]["details"]["failures"][0]["shapes"]

    def test_budget_exit_code(self, capsys):
        code, _ = run(["verify", "--n", "3", "--budget", "1"], capsys)
        assert code == 2

    def test_unknown_flag_exit_two(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["verify", "--frobnicate"])
        assert exc.value.code == 2


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


class TestExperiments:
    def test_riesz2d(self, capsys):
        code, payload = run_json(
            ["riesz2d", "--n", "3", "--trials", "2"], capsys)
        assert code == 0
        assert payload["ok"]
        assert payload["provenance"]["config"]["command"] == "riesz2d"

    def test_riesz3d_shape(self, capsys):
        code, payload = run_json(["riesz3d", "--n", "3", "--q", "2"], capsys)
        assert code == 0
        assert payload["ok"]
        assert {"params", "checks", "norms", "certificate"} <= set(payload)
        assert all(c["ok"] for c in payload["checks"])

    def test_riesz3d_deterministic(self, tmp_path, capsys):
        path = tmp_path / "report.json"
        argv = ["riesz3d", "--n", "3", "--q", "2", "--seed", "7",
                "--out", str(path)]
        assert cli.main(argv) == 0
        first = path.read_bytes()
        assert cli.main(argv) == 0
        assert path.read_bytes() == first

    def test_beck_gain_csv(self, tmp_path):
        out = tmp_path / "gain.csv"
        code = cli.main(["beck-gain", "--kind", "C2", "--n-range", "4..5",
                         "--p-list", "2", "--format", "csv",
                         "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# provenance:")
        rows = list(csv.DictReader(lines[1:]))
        assert {"kind", "n", "p", "norm", "fitted_exponent",
                "predicted_exponent"} == set(rows[0])
        assert len(rows) == 2

    def test_sharpness(self, capsys):
        code, payload = run_json(
            ["sharpness", "--n-range", "3..4", "--trials", "3"], capsys)
        assert code == 0
        assert payload["fitted_exponent"] < 2

    def test_lp_profile(self, capsys):
        code, payload = run_json(
            ["lp-profile", "--n", "3", "--p-list", "2,4"], capsys)
        assert code == 0
        assert [row["p"] for row in payload["rows"]] == [2, 4]
        assert all(row["b_p"] > 0 for row in payload["rows"])

    def test_discrepancy_scaling_table(self, capsys):
        code, payload = run_json(
            ["discrepancy", "--generator", "vdc", "--n-range", "2..32"],
            capsys)
        assert code == 0
        assert [r["n"] for r in payload["rows"]] == [2, 4, 8, 16, 32]

    def test_graphs_count(self, capsys):
        code, payload = run_json(["graphs", "--vertices", "3"], capsys)
        assert code == 0
        assert payload["count"] == 8

    def test_graphs_primes(self, capsys):
        code, payload = run_json(
            ["graphs", "--vertices", "2", "--primes"], capsys)
        assert code == 0
        assert payload["count"] == 2
        assert [row["prime"] for row in payload["rows"]] == [True, True]


# ---------------------------------------------------------------------------
# IO and formats
# ---------------------------------------------------------------------------


class TestOutput:
    def test_io_error_exit_three(self, tmp_path, capsys):
        missing = tmp_path / "no" / "such" / "dir" / "out.json"
        code = cli.main(["graphs", "--vertices", "2", "--out", str(missing)])
        assert code == 3

    def test_json_is_sorted_and_fraction_free(self, capsys):
        code, out = run(["riesz3d", "--n", "3", "--q", "2"], capsys)
        assert code == 0
        payload = json.loads(out)
        dumped = json.dumps(payload, sort_keys=True, indent=2)
        assert out.strip() == dumped.strip()

    def test_float_scalar_mode_flag(self, capsys):
        code, payload = run_json(
            ["riesz2d", "--n", "2", "--float", "--trials", "1"], capsys)
        assert code == 0
        assert payload["provenance"]["scalar_mode"] == "float"
