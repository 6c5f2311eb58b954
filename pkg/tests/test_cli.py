import contextlib
import csv
import io
import json

import numpy as np
import pytest

from rank_disparity import core, data_io, inference, resampling
from rank_disparity.cli import main, parse_grid
from rank_disparity.core import IndexParams


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestGrid:
    def test_values_and_ranges(self):
        assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert parse_grid("1,3,inf") == [1.0, 3.0, float("inf")]

    @pytest.mark.parametrize("bad", ["", "x", "0:1", "0:1:0", "nan"])
    def test_invalid(self, bad, capsys):
        code, _, err = run(capsys, "compute", "--fixture", "pop1", "--alpha", bad)
        assert code == 2 and err


class TestCompute:
    def test_anchor_value(self, capsys, tmp_path):
        path = tmp_path / "pop1.csv"
        path.write_text(data_io.fixture_text("pop1"))
        code, out, _ = run(capsys, "compute", "--data", str(path), "--index", "ri", "--alpha", "2", "--nu", "1")
        assert code == 0
        (row,) = rows(out)
        assert float(row["value"]) == pytest.approx(0.257, abs=5e-4)
        assert row["dataset"] == "pop1"

    def test_ri_equals_ge_at_alpha_one(self, capsys):
        code, out, _ = run(capsys, "compute", "--fixture", "pop2", "--index", "ri,ge", "--alpha", "1", "--nu", "1,2.5")
        values = {(r["kind"], r["nu"]): float(r["value"]) for r in rows(out)}
        for nu in ("1", "2.5"):
            assert values[("RI", nu)] == pytest.approx(values[("GE", nu)], abs=1e-12)

    def test_achievement_at_alpha_inf_is_min_rate(self, capsys):
        code, out, _ = run(capsys, "compute", "--fixture", "pop1", "--index", "achievement", "--alpha", "inf")
        assert code == 0
        assert float(rows(out)[0]["value"]) == 5.0

    def test_single_json_object(self, capsys):
        code, out, _ = run(capsys, "compute", "--fixture", "pop1", "--alpha", "2", "--format", "json")
        obj = json.loads(out)
        assert isinstance(obj, dict)
        assert {"kind", "alpha", "nu", "reference", "value", "se", "ci_lo", "ci_hi", "method"} <= set(obj)

    def test_matches_library(self, capsys):
        code, out, _ = run(capsys, "compute", "--fixture", "pop3", "--index", "ri,atkinson,concentration_2p", "--alpha", "0.5,3", "--nu", "2")
        dist = data_io.load_fixture("pop3").dist
        got = {(r["kind"], float(r["alpha"])): float(r["value"]) for r in rows(out)}
        for alpha in (0.5, 3.0):
            p = IndexParams(alpha=alpha, nu=2.0)
            assert got[("RI", alpha)] == float(f"{core.renyi_index(dist, p).value:.10g}")
            assert got[("Atkinson", alpha)] == float(f"{core.atkinson_standardize(core.renyi_index(dist, p)).value:.10g}")
            assert got[("ConcentrationTwoParam", alpha)] == float(f"{core.concentration_two_param(dist, p).value:.10g}")

    def test_alpha_free_kinds_once_per_nu(self, capsys):
        _, out, _ = run(capsys, "compute", "--fixture", "pop1", "--index", "concentration", "--alpha", "0,1,2", "--nu", "2,3")
        assert len(rows(out)) == 2

    def test_infinite_value(self, capsys, tmp_path):
        path = tmp_path / "z.csv"
        path.write_text("group,order,share,mean\na,1,0.5,0\nb,2,0.5,3\n")
        code, out, _ = run(capsys, "compute", "--data", str(path), "--alpha", "2")
        assert code == 0
        assert rows(out)[0]["value"] == "inf" and rows(out)[0]["infinite"] == "true"

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "out.csv"
        code, out, _ = run(capsys, "compute", "--fixture", "pop1", "--output", str(target))
        assert code == 0 and out == ""
        assert rows(target.read_text())[0]["kind"] == "RI"


class TestExitCodes:
    def test_bad_flag(self, capsys):
        code, out, err = run(capsys, "compute", "--fixture", "pop1", "--bogus")
        assert code == 2 and out == "" and err

    @pytest.mark.parametrize("argv", [["--alpha", "-1"], ["--nu", "0.5"], ["--index", "theil"], ["--reference", "fixed_target"]])
    def test_validation(self, capsys, argv):
        code, out, err = run(capsys, "compute", "--fixture", "pop1", *argv)
        assert code == 2 and out == "" and err

    def test_missing_input(self, capsys):
        assert run(capsys, "compute")[0] == 2
        assert run(capsys, "compute", "--data", "/nonexistent.csv")[0] == 2
        assert run(capsys, "compute", "--fixture", "pop9")[0] == 2

    def test_parse_error(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("group,order,share,mean\na,1,0.5,2\nb,1,0.5,1\n")
        code, _, err = run(capsys, "compute", "--data", str(path))
        assert code == 2 and "row 3" in err

    def test_domain_error(self, capsys, tmp_path):
        path = tmp_path / "z.csv"
        path.write_text("group,order,share,mean\na,1,0.5,0\nb,2,0.5,3\n")
        code, out, err = run(capsys, "compute", "--data", str(path), "--alpha", "2", "--reference", "best_group_rate")
        assert code == 3 and out == "" and err

    def test_units_mismatch_for_achievement(self, capsys):
        code, _, err = run(capsys, "compute", "--fixture", "pop1", "--fixture", "seer_2010", "--index", "achievement")
        assert code == 2 and "units" in err
        assert run(capsys, "compute", "--fixture", "pop1", "--fixture", "seer_2010", "--index", "ri")[0] == 0

    def test_method_mismatch(self, capsys):
        code, _, err = run(capsys, "infer", "--fixture", "seer_2010", "--method", "bootstrap")
        assert code == 2 and "microdata" in err
        assert run(capsys, "infer", "--fixture", "pop1")[0] == 2

    def test_help(self, capsys):
        assert run(capsys, "--help")[0] == 0


@pytest.fixture(scope="module")
def series():
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        assert main(["sweep", "--fixture", "pop1", "--fixture", "pop2", "--fixture", "pop3", "--alpha", "0:8:0.5", "--nu", "1,2,3"]) == 0
    return rows(buf.getvalue())


class TestSweep:
    def test_grid_complete(self, series):
        assert len(series) == 3 * 3 * 3 * 17

    def test_concentration_zero_for_nu_one_at_alpha_zero(self, series):
        sel = [r for r in series if r["kind"] == "ConcentrationTwoParam" and r["nu"] == "1" and r["alpha"] == "0"]
        assert len(sel) == 3
        assert all(abs(float(r["value"])) < 1e-12 for r in sel)

    def test_classical_concentration_at_alpha_zero(self, series):
        for name in ("pop1", "pop2", "pop3"):
            (r,) = [r for r in series if r["kind"] == "ConcentrationTwoParam" and r["nu"] == "2" and r["alpha"] == "0" and r["dataset"] == name]
            classical = core.concentration_classical(data_io.load_fixture(name).dist).value
            assert abs(float(r["value"])) == pytest.approx(abs(classical), abs=1e-9)

    def test_ri_monotone_in_alpha(self, series):
        for name in ("pop1", "pop2", "pop3"):
            v = [float(r["value"]) for r in series if r["kind"] == "RI" and r["nu"] == "2" and r["dataset"] == name]
            assert np.all(np.diff(v) >= 0)


class TestInfer:
    def test_null_test_rejects(self, capsys):
        code, out, _ = run(capsys, "infer", "--fixture", "seer_2010", "--null-test", "--nu", "3", "--alpha", "2", "--B", "1000", "--seed", "7")
        assert code == 0
        assert float(rows(out)[0]["p_value"]) < 0.05

    def test_compare_years(self, capsys):
        code, out, _ = run(capsys, "infer", "--fixture", "seer_2006", "--fixture", "seer_2010", "--compare", "--nu", "1,3", "--alpha", "1,2,4")
        assert code == 0
        result = rows(out)
        assert len(result) == 6
        assert all(float(r["p_value"]) > 0.05 for r in result)

    def test_delta_method_matches_library(self, capsys):
        code, out, _ = run(capsys, "infer", "--fixture", "nhanes_2009_2010", "--alpha", "2", "--nu", "2")
        t = data_io.load_fixture("nhanes_2009_2010")
        est = inference.delta_method_variance(t.dist, t.std_errors**2, IndexParams(alpha=2.0, nu=2.0))
        assert float(rows(out)[0]["se"]) == float(f"{est.std_error:.10g}")

    @pytest.fixture
    def microdata(self, tmp_path):
        t = data_io.load_fixture("nhanes_2009_2010")
        path = tmp_path / "m.csv"
        data_io.write_microdata_csv(data_io.synthesize_microdata(t.dist, t.std_errors, seed=0), path)
        return path

    def test_constant_microdata(self, capsys, tmp_path, microdata):
        d = data_io.parse_microdata_csv(microdata)
        flat = inference.SurveyMicrodata(d.stratum, d.cluster, d.weight, np.zeros(len(d)) + 1, d.group, d.n_groups)
        path = tmp_path / "flat.csv"
        data_io.write_microdata_csv(flat, path)
        for method in ("linearization", "bootstrap"):
            code, out, _ = run(capsys, "infer", "--microdata", str(path), "--method", method, "--alpha", "2", "--nu", "2", "--B", "50")
            (r,) = rows(out)
            assert code == 0
            assert abs(float(r["se"])) < 1e-12
            assert float(r["ci_hi"]) - float(r["ci_lo"]) < 1e-12

    def test_bootstrap_matches_library_and_is_reproducible(self, capsys, tmp_path, microdata):
        argv = ["infer", "--microdata", str(microdata), "--method", "bootstrap", "--alpha", "2", "--nu", "2", "--B", "200", "--seed", "11"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(argv + ["--format", "json", "--output", str(a)]) == 0
        assert main(argv + ["--format", "json", "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        est, _ = resampling.rescaled_bootstrap(
            data_io.parse_microdata_csv(microdata), IndexParams(alpha=2.0, nu=2.0), resampling.BootstrapConfig(200, 11)
        )
        assert json.loads(a.read_text())["se"] == float(f"{est.std_error:.10g}")

    def test_seed_from_environment(self, capsys, monkeypatch, microdata):
        argv = ["infer", "--microdata", str(microdata), "--method", "bootstrap", "--B", "100"]
        monkeypatch.setenv("RANK_DISPARITY_SEED", "11")
        _, from_env, _ = run(capsys, *argv)
        _, explicit, _ = run(capsys, *argv, "--seed", "11")
        _, other, _ = run(capsys, *argv, "--seed", "12")
        assert from_env == explicit != other

    def test_compare_microdata(self, capsys, microdata):
        code, out, _ = run(capsys, "infer", "--microdata", str(microdata), "--microdata", str(microdata), "--compare")
        (r,) = rows(out)
        assert code == 0 and float(r["value"]) == 0.0


class TestSynthAndFixtures:
    def test_synth_deterministic(self, capsys):
        _, a, _ = run(capsys, "synth", "--fixture", "nhanes_2009_2010", "--seed", "3", "--strata", "4", "--obs", "20")
        _, b, _ = run(capsys, "synth", "--fixture", "nhanes_2009_2010", "--seed", "3", "--strata", "4", "--obs", "20")
        assert a == b
        assert len(a.splitlines()) == 1 + 4 * 2 * 20

    def test_synth_rejects_non_prevalence_margins(self, capsys):
        code, _, err = run(capsys, "synth", "--fixture", "seer_2010")
        assert code == 2 and "[0, 1]" in err

    def test_fixtures(self, capsys):
        code, out, _ = run(capsys, "fixtures")
        assert code == 0 and "seer_2010" in out.split()
        code, out, _ = run(capsys, "fixtures", "pop3")
        assert out == data_io.fixture_text("pop3")
        code, out, _ = run(capsys, "fixtures", "--verify")
        assert code == 0 and out.count("ok") == 11
