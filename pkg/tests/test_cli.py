import csv
import json
import math

import pytest

from quatapprox import cli
from quatapprox.errors import InternalInvariantError, ValidationError
from quatapprox.hurwitz import HurwitzInt
from quatapprox.io import fmt_cell, parse_config_text
from quatapprox.metrical import (
    ApproxFunction,
    PropertyCheck,
    RhoReport,
    coverage_sweep,
    critical_sum,
)
from quatapprox.resonant import count_resonant


def run(*argv):
    return cli.main(list(argv))


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfigParsing:
    def test_basic(self):
        cfg = parse_config_text("a = 1\n# comment\n\nb=power:v=3\n")
        assert cfg == {"a": "1", "b": "power:v=3"}

    def test_duplicate_key(self):
        with pytest.raises(ValidationError, match="duplicate"):
            parse_config_text("a = 1\na = 2\n")

    def test_missing_equals(self):
        with pytest.raises(ValidationError, match="line 1"):
            parse_config_text("just words\n")

    def test_empty_key(self):
        with pytest.raises(ValidationError):
            parse_config_text("= 3\n")


class TestFormatting:
    def test_seventeen_digits_round_trip(self):
        for x in (math.pi, 1 / 3, 2.0 ** -52, 1e300, 0.1 + 0.2):
            assert float(fmt_cell(x)) == x

    def test_special_cells(self):
        assert fmt_cell(None) == ""
        assert fmt_cell(True) == "true"
        assert fmt_cell(math.inf) == "inf"


class TestUsageErrors:
    def test_unknown_subcommand(self):
        assert run("bogus") == 1

    def test_no_subcommand(self):
        assert run() == 1

    def test_help_is_success(self):
        assert run("--help") == 0

    def test_missing_required_parameter(self, tmp_path, capsys):
        assert run("dirichlet", "--n", "10", "--out", str(tmp_path)) == 1
        assert "'xi'" in capsys.readouterr().err

    def test_bad_value_names_the_key(self, tmp_path, capsys):
        code = run("dirichlet", "--xi", "0.1,0.2", "--n", "10",
                   "--out", str(tmp_path))
        assert code == 1
        assert "'xi'" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("xi = 0.1,0.2,0.3,0.1\nn = 10\nturbo = yes\n")
        code = run("dirichlet", "--config", str(cfg), "--out", str(tmp_path))
        assert code == 1
        assert "turbo" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert run("dirichlet", "--config", str(tmp_path / "nope.cfg")) == 1


class TestPrecedence:
    def test_flag_beats_env_beats_config(self, tmp_path, monkeypatch):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("psi = power:v=2\nq_grid = 2\nsamples = 200\nseed = 1\n")
        base = ("coverage", "--config", str(cfg))

        out1 = tmp_path / "a"
        assert run(*base, "--out", str(out1)) == 0
        assert json.load(open(out1 / "manifest.json"))["seed"] == 1

        monkeypatch.setenv("QUATAPPROX_SEED", "2")
        out2 = tmp_path / "b"
        assert run(*base, "--out", str(out2)) == 0
        assert json.load(open(out2 / "manifest.json"))["seed"] == 2

        out3 = tmp_path / "c"
        assert run(*base, "--seed", "3", "--out", str(out3)) == 0
        assert json.load(open(out3 / "manifest.json"))["seed"] == 3

    def test_env_supplies_parameter(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QUATAPPROX_N", "20")
        code = run("simul-r4", "--alpha", "0.5,0.25,0.75,0.2",
                   "--out", str(tmp_path))
        assert code == 0
        row = read_csv(tmp_path / "simul_r4.csv")[0]
        assert row["q"] == "20" and row["error"] == "0"


class TestManifest:
    def test_contents(self, tmp_path):
        assert run("simul-r4", "--alpha", "0.5,0.5,0.5,0.5", "--n", "4",
                   "--seed", "9", "--out", str(tmp_path)) == 0
        man = json.load(open(tmp_path / "manifest.json"))
        assert man["subcommand"] == "simul-r4"
        assert man["seed"] == 9
        assert man["config"]["alpha"] == "0.5,0.5,0.5,0.5"
        assert set(man["versions"]) == {"quatapprox", "python", "numpy"}
        assert man["wall_time_s"] >= 0
        assert "simul_r4.csv" in man["written"]
        assert "timestamp" in man


class TestDeterminism:
    def test_rerun_is_byte_identical(self, tmp_path):
        args = ("coverage", "--psi", "power:v=2,scale=0.25", "--q-grid", "2,3",
                "--samples", "400", "--seed", "7")
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(*args, "--out", str(a)) == 0
        assert run(*args, "--out", str(b)) == 0
        assert (a / "coverage.csv").read_bytes() == (b / "coverage.csv").read_bytes()

    def test_seed_changes_monte_carlo(self, tmp_path):
        base = ("coverage", "--psi", "power:v=2,scale=0.25", "--q-grid", "2",
                "--samples", "400")
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(*base, "--seed", "1", "--out", str(a)) == 0
        assert run(*base, "--seed", "2", "--out", str(b)) == 0
        assert (a / "coverage.csv").read_bytes() != (b / "coverage.csv").read_bytes()


class TestCoverageCommand:
    def test_schema_and_values(self, tmp_path):
        assert run("coverage", "--psi", "power:v=2,scale=0.25", "--q-grid",
                   "3,2", "--samples", "500", "--seed", "4",
                   "--out", str(tmp_path)) == 0
        rows = read_csv(tmp_path / "coverage.csv")
        assert list(rows[0]) == [
            "v_or_psi_id", "N_min", "Q_max", "fraction", "stderr", "seed",
        ]
        want = coverage_sweep(
            ApproxFunction.power(2, scale=0.25), 1, [2, 3], samples=500, seed=4
        )
        assert [int(r["Q_max"]) for r in rows] == [2, 3]
        for row, rep in zip(rows, want):
            assert float(row["fraction"]) == rep.fraction
            assert float(row["stderr"]) == rep.stderr

    def test_plain_power_label_is_v(self, tmp_path):
        assert run("coverage", "--psi", "power:v=2", "--q-grid", "2",
                   "--samples", "200", "--out", str(tmp_path)) == 0
        assert read_csv(tmp_path / "coverage.csv")[0]["v_or_psi_id"] == "2"

    def test_json_format(self, tmp_path):
        assert run("coverage", "--psi", "power:v=2", "--q-grid", "2",
                   "--samples", "200", "--format", "json",
                   "--out", str(tmp_path)) == 0
        rows = json.load(open(tmp_path / "coverage.json"))
        assert rows[0]["fraction"] == 1.0
        assert rows[0]["Q_max"] == 2


class TestSumsCommand:
    def test_matches_library(self, tmp_path):
        assert run("sums", "--kind", "lebesgue", "--psi", "power:v=3",
                   "--m-max", "1000", "--out", str(tmp_path)) == 0
        rows = read_csv(tmp_path / "sums.csv")
        assert [int(r["M"]) for r in rows] == [10, 100, 1000]
        want = critical_sum("lebesgue", ApproxFunction.power(3), M_max=1000)
        for row, (M, S) in zip(rows, want.checkpoints):
            assert float(row["partial_sum"]) == S
        summary = json.load(open(tmp_path / "sums_summary.json"))
        assert summary["verdict"] == "converges"

    def test_ubiquity_kind_builds_schedule(self, tmp_path):
        assert run("sums", "--kind", "ubiquity", "--psi", "power:v=2",
                   "--f", "power:s=4", "--m-max", "4096",
                   "--out", str(tmp_path)) == 0
        rows = read_csv(tmp_path / "sums.csv")
        assert float(rows[0]["partial_sum"]) == 1 / 16

    def test_ubiquity_kind_needs_f(self, tmp_path):
        assert run("sums", "--kind", "ubiquity", "--psi", "power:v=2",
                   "--m-max", "4096", "--out", str(tmp_path)) == 1


class TestDimensionScanCommand:
    def test_transition_brackets_two(self, tmp_path):
        assert run("dimension-scan", "--v", "4", "--out", str(tmp_path)) == 0
        summary = json.load(open(tmp_path / "dimension_summary.json"))
        assert summary["s_star"] == pytest.approx(2.025)
        assert summary["s_analytic"] == 2.0
        rows = read_csv(tmp_path / "dimension_scan.csv")
        verdicts = {float(r["s"]): r["verdict"] for r in rows if r["N"] == "10"}
        assert verdicts[2.0] == "subcritical"
        assert verdicts[2.05] == "supercritical"


class TestArithmeticCommands:
    def test_arith_check_passes(self, tmp_path):
        assert run("arith-check", "--trials", "150", "--out", str(tmp_path)) == 0
        rows = read_csv(tmp_path / "arith_check.csv")
        assert len(rows) == 5
        assert all(r["failures"] == "0" for r in rows)

    def test_dirichlet_quality_bound(self, tmp_path):
        assert run("dirichlet", "--xi", "0.137,0.295,0.548,0.221", "--n", "10",
                   "--out", str(tmp_path)) == 0
        row = read_csv(tmp_path / "dirichlet.csv")[0]
        q = float(row["quality"])
        assert q == pytest.approx(
            float(row["err"]) * math.sqrt(float(row["norm_sq_q"]))
        )
        assert q * 10 < 2.0

    def test_approximants_sorted(self, tmp_path):
        assert run("approximants", "--xi", "1/3,0,0,0", "--q-max", "4",
                   "--out", str(tmp_path)) == 0
        rows = read_csv(tmp_path / "approximants.csv")
        norms = [int(r["norm_sq_q"]) for r in rows]
        assert norms == sorted(norms)
        assert all(
            float(r["err"]) * int(r["norm_sq_q"]) < 2.0 + 1e-9 for r in rows
        )

    def test_constants(self, tmp_path):
        assert run("constants", "--xi", "1/2,0,0,0", "--q-max", "3",
                   "--out", str(tmp_path)) == 0
        row = read_csv(tmp_path / "constants.csv")[0]
        assert float(row["c_Q"]) == 0.0  # rational target is hit exactly
        assert row["C_Q"] == "inf"

    def test_resonant_count_single(self, tmp_path):
        assert run("resonant-count", "--q", "2+1i+0j+0k",
                   "--out", str(tmp_path)) == 0
        row = read_csv(tmp_path / "resonant_count.csv")[0]
        assert int(row["count"]) == count_resonant(HurwitzInt(2, 1, 0, 0))
        assert int(row["predicted"]) == 25

    def test_resonant_count_range(self, tmp_path):
        assert run("resonant-count", "--lo", "2", "--hi", "4",
                   "--out", str(tmp_path)) == 0
        rows = read_csv(tmp_path / "resonant_count.csv")
        assert all(2 <= int(r["norm_sq"]) <= 4 for r in rows)
        summary = json.load(open(tmp_path / "resonant_summary.json"))
        assert summary["classes"] == len(rows)

    def test_resonant_count_needs_input(self, tmp_path, capsys):
        assert run("resonant-count", "--out", str(tmp_path)) == 1
        assert "lo" in capsys.readouterr().err


class TestMonteCarloCommands:
    def test_near_volume(self, tmp_path):
        assert run("near-volume", "--q", "2+0i+0j+0k", "--epsilon", "0.01",
                   "--samples", "20000", "--out", str(tmp_path)) == 0
        row = read_csv(tmp_path / "near_volume.csv")[0]
        measure = float(row["measure"])
        analytic = float(row["analytic_clipped"])
        stderr = float(row["stderr"])
        assert abs(measure - analytic) < 6 * stderr

    def test_ubiquity(self, tmp_path):
        assert run("ubiquity", "--n", "10", "--samples", "4000",
                   "--out", str(tmp_path)) == 0
        row = read_csv(tmp_path / "ubiquity.csv")[0]
        assert float(row["rho"]) == 2.0 / 100
        assert 0.0 <= float(row["fraction"]) <= 1.0

    def test_bad_construct(self, tmp_path):
        assert run("bad-construct", "--depth", "2", "--out", str(tmp_path)) == 0
        levels = read_csv(tmp_path / "bad_levels.csv")
        assert all(int(r["survivors"]) >= 1 for r in levels)
        report = json.load(open(tmp_path / "bad_construct.json"))
        assert report["certificate"] > 0


class TestEtaCommand:
    def test_harmonic_passes(self, tmp_path):
        assert run("eta", "--m-max", "100000", "--r-max", "15",
                   "--out", str(tmp_path)) == 0
        checks = json.load(open(tmp_path / "eta_checks.json"))
        assert checks["all_ok"]
        rows = read_csv(tmp_path / "eta.csv")
        assert rows[0]["start"] == "1" and rows[0]["eta"] == "1"
        assert rows[2]["eta"] == "1/3"

    def test_convergent_series_is_validation_error(self, tmp_path):
        # psi decays too fast for any block to fill up
        assert run("eta", "--psi", "power:v=3", "--m-max", "10000",
                   "--out", str(tmp_path)) == 1


class TestExitCodeMapping:
    def test_property_failure_exits_two(self, tmp_path, monkeypatch):
        def failing(schedule, R_max=19):
            check = PropertyCheck("dyadic decay of rho", False, "forced")
            return RhoReport(R_max=R_max, samples=[1], checks=[check])

        monkeypatch.setattr(cli, "rho_properties", failing)
        code = run("eta", "--m-max", "100000", "--out", str(tmp_path))
        assert code == 2

    def test_internal_invariant_exits_three(self, tmp_path, monkeypatch):
        def broken(*args, **kwargs):
            raise InternalInvariantError("forced")

        monkeypatch.setattr(cli, "ubiquity_check", broken)
        code = run("ubiquity", "--n", "10", "--samples", "100",
                   "--out", str(tmp_path))
        assert code == 3

    def test_unexpected_exception_exits_three(self, tmp_path, monkeypatch):
        monkeypatch.setattr(
            cli, "simultaneous_dirichlet",
            lambda *a, **k: (_ for _ in ()).throw(OSError("disk fell off")),
        )
        code = run("simul-r4", "--alpha", "0.1,0.2,0.3,0.4", "--n", "5",
                   "--out", str(tmp_path))
        assert code == 3
