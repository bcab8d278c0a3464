"""
Tests for the speeduplab command line
"""

import io
import json
import math

import pytest

from speeduplab.cli import (
    EXIT_DATA,
    EXIT_EVALUATION,
    EXIT_OK,
    EXIT_USAGE,
    NOT_APPLICABLE,
    CurveSeries,
    format_curve,
    main,
    read_curve_csv,
)
from speeduplab.config import reset_settings
from speeduplab.errors import DataError
from speeduplab.fitting import synthesize_samples, write_measurements_csv
from speeduplab.model_library import load_bundled_model


@pytest.fixture(autouse=True)
def fresh_settings():
    reset_settings()
    yield
    reset_settings()


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def run_curve(*argv):
    code, text = run(*argv)
    assert code == EXIT_OK, text
    return read_curve_csv(io.StringIO(text))


def run_json(*argv):
    code, text = run(*argv)
    assert code == EXIT_OK, text
    return json.loads(text)


class TestSpeedupCommand:
    """Test cases for speedup curves"""

    def test_classical_fraction(self):
        """Test f = 0.8 approaches 5 at a million processors"""
        curve = run_curve("speedup", "--fraction", "0.8", "--p-max", "1e6")

        assert curve.label == "speedup"
        assert len(curve.points) == 50
        assert curve.points[-1][0] == 1e6
        assert curve.points[-1][1] == pytest.approx(5, abs=1e-2)

    def test_trapezoid_growth_ordering(self):
        """Test n = p^2 beats n = p log p beats n = p"""
        curves = [
            run_curve("speedup", "trapezoid", "--g", growth, "--p-min", "8", "--p-max", "1e4", "--points", "20")
            for growth in ["p^2", "p*log(p)", "p"]
        ]

        for quadratic, loglinear, linear in zip(*(curve.points for curve in curves)):
            assert quadratic[1] > loglinear[1] > linear[1]

    def test_matvec_approaches_two(self):
        """Test the matrix-vector speedup is within 5% of 2 for p >= 100"""
        curve = run_curve("speedup", "matvec", "--g", "p", "--p-min", "100", "--p-max", "1e6", "--points", "10")

        for _, speedup in curve.points:
            assert abs(speedup - 2) / 2 < 0.05

    def test_matvec_curves_agree_across_growths(self):
        """Test the n = p, p log p and p^2 matvec curves stay within 5% of 2 and of each other for p >= 100"""
        curves = [
            run_curve("speedup", "matvec", "--g", growth, "--p-min", "100", "--p-max", "1e6", "--points", "10")
            for growth in ["p", "p*log(p)", "p^2"]
        ]

        for row in zip(*(curve.points for curve in curves)):
            speedups = [speedup for _, speedup in row]
            assert all(abs(s - 2) / 2 < 0.05 for s in speedups)
            assert max(speedups) / min(speedups) < 1.05

    def test_deeply_nested_growth_is_a_usage_error(self):
        """Test a growth nested thousands of levels deep exits with 2 instead of crashing"""
        deep = "(" * 5000 + "p" + ")" * 5000

        code, _ = run("speedup", "trapezoid", "--g", deep)

        assert code == EXIT_USAGE

    def test_model_file(self, tmp_path):
        """Test a model given as a file path"""
        path = tmp_path / "linear.json"
        path.write_text(json.dumps({"name": "linear", "t_par": "n/p"}), encoding="utf-8")

        curve = run_curve("speedup", str(path), "--n", "100", "--p-max", "64", "--points", "6")

        assert curve.points[-1][1] == pytest.approx(64)

    def test_invalid_model_file(self, tmp_path):
        """Test a malformed model file exits with 3"""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"name": "bad", "t_par": "n/(p"}), encoding="utf-8")

        code, _ = run("speedup", str(path), "--n", "100")

        assert code == EXIT_EVALUATION

    def test_unknown_model(self):
        """Test an unknown model name exits with 3"""
        code, _ = run("speedup", "stencil", "--n", "100")

        assert code == EXIT_EVALUATION

    def test_bad_growth_expression(self):
        """Test a syntax error in --g is a usage error"""
        code, _ = run("speedup", "trapezoid", "--g", "p^^2")

        assert code == EXIT_USAGE

    def test_growth_and_dimension_exclusive(self):
        """Test --g and --n together are a usage error"""
        code, _ = run("speedup", "trapezoid", "--g", "p", "--n", "10")

        assert code == EXIT_USAGE

    def test_grid_must_start_above_one(self):
        """Test a grid starting at p = 1 is a usage error"""
        code, _ = run("speedup", "--fraction", "0.5", "--p-min", "1")

        assert code == EXIT_USAGE


class TestExponentCommand:
    """Test cases for exponent curves"""

    def test_fixed_dimension_runs_out_of_exponent(self):
        """Test n = 10: defined up to p = 128, not applicable from p = 256"""
        curve = run_curve("exponent", "trapezoid", "--n", "10", "--p-min", "16", "--p-max", "1024", "--points", "7")

        assert [value == NOT_APPLICABLE for _, value in curve.points] == [False] * 4 + [True] * 3
        assert curve.points[0][1] == pytest.approx(-1 + math.sqrt(1 - 2 * (10 / 16 + math.log(16)) / 10))

    def test_matvec_boundary_is_clamped(self):
        """Test ratios just above 1/2 map to F = -1"""
        curve = run_curve("exponent", "matvec", "--g", "p^2", "--p-min", "1e6", "--p-max", "1e8", "--points", "3")

        assert all(value == -1.0 for _, value in curve.points)


class TestClassifyCommand:
    """Test cases for the classification report"""

    @pytest.mark.parametrize("model, verdict", [
        ("trapezoid", "strong"),
        ("fft", "weak"),
        ("matvec", "amdahl_like"),
    ])
    def test_bundled_verdicts(self, model, verdict):
        """Test the verdict of every bundled model"""
        document = run_json("classify", model)

        assert document["model"] == model
        assert document["verdict"] == verdict

    def test_custom_family(self):
        """Test --family replaces the default growth family"""
        document = run_json("classify", "trapezoid", "--family", "p", "100*p")

        assert document["verdict"] == "weak"
        assert document["family"] == ["p", "100*p"]

    def test_deeply_nested_family_member(self):
        """Test a family member nested past the parser limit is a usage error"""
        code, _ = run("classify", "trapezoid", "--family", "p", "log(" * 300 + "p" + ")" * 300)

        assert code == EXIT_USAGE

    def test_output_is_deterministic(self):
        """Test two runs print the same document"""
        assert run("classify", "matvec") == run("classify", "matvec")


class TestSuperlinearCommand:
    """Test cases for superlinearity reports"""

    def test_thresholds(self):
        """Test the exact and approximate thresholds for p = 10"""
        document = run_json("superlinear", "--p", "10")

        assert document["threshold_approx"] == pytest.approx(-0.105)
        assert document["threshold_exact"] == pytest.approx(math.log(0.9))
        assert "report" not in document

    def test_report_for_measured_speedup(self):
        """Test a measured speedup of 20 on 10 processors is superlinear"""
        document = run_json("superlinear", "--p", "10", "--speedup", "20")

        assert document["report"]["exact_holds"] is True

    def test_fft_bound(self):
        """Test the FFT processor bound for C = 1, n = 100"""
        document = run_json("superlinear", "--C", "1", "--n", "100")

        assert document["p_bound"] == pytest.approx(100.4975, abs=1e-4)
        assert document["p_max_integer"] == 100

    @pytest.mark.parametrize("argv", [
        ["superlinear", "--p", "1"],
        ["superlinear"],
        ["superlinear", "--C", "1"],
        ["superlinear", "--p", "10", "--C", "1", "--n", "100"],
    ])
    def test_usage_errors(self, argv):
        """Test invalid argument combinations exit with 2"""
        code, _ = run(*argv)

        assert code == EXIT_USAGE


class TestFitCommand:
    """Test cases for fitting measurement files"""

    def test_fit_synthetic_trapezoid(self, tmp_path):
        """Test exact timings fit back the generating constants"""
        model = load_bundled_model("trapezoid").with_constants(a=2.0, b=3.0)
        path = write_measurements_csv(
            synthesize_samples(model, [1, 2, 4, 8, 16], [100, 200, 400]), tmp_path / "timings.csv"
        )

        document = run_json("fit", "trapezoid", str(path))

        assert document["fit"]["constants"]["a"] == pytest.approx(2.0, rel=1e-9)
        assert document["fit"]["constants"]["b"] == pytest.approx(3.0, rel=1e-9)
        assert "classification" not in document

    def test_fit_and_classify_noisy_matvec(self, tmp_path):
        """Test noisy matvec timings still classify as Amdahl-like"""
        model = load_bundled_model("matvec").with_constants(b=1.0)
        samples = synthesize_samples(model, [1, 2, 4, 8, 16], [10, 20, 40, 80, 160], noise=0.01, seed=7)
        path = write_measurements_csv(samples, tmp_path / "timings.csv")

        document = run_json("fit", "matvec", str(path), "--classify")

        assert document["classification"]["verdict"] == "amdahl_like"

    def test_bad_header(self, tmp_path):
        """Test a wrong CSV header exits with 4"""
        path = tmp_path / "timings.csv"
        path.write_text("processors,n,time\n1,10,1.0\n", encoding="utf-8")

        code, _ = run("fit", "trapezoid", str(path))

        assert code == EXIT_DATA

    def test_rank_deficient(self, tmp_path):
        """Test timings that cannot separate the constants exit with 4"""
        path = tmp_path / "timings.csv"
        path.write_text("p,n,time_seconds\n1,10,10.0\n1,20,20.0\n1,40,40.0\n", encoding="utf-8")

        code, _ = run("fit", "trapezoid", str(path))

        assert code == EXIT_DATA

    def test_unknown_template(self, tmp_path):
        """Test an unknown template name is a usage error"""
        code, _ = run("fit", "stencil", str(tmp_path / "timings.csv"))

        assert code == EXIT_USAGE


class TestFig4Command:
    """Test cases for the approximate threshold curve"""

    def test_two_points(self):
        """Test the threshold at p = 2 and p = 10"""
        curve = run_curve("fig4", "--p-min", "2", "--p-max", "10", "--points", "2")

        assert curve.label == "threshold"
        assert [value for _, value in curve.points] == pytest.approx([-0.625, -0.105])

    def test_default_grid(self):
        """Test the default grid runs from 2 to 1000 with increasing thresholds"""
        curve = run_curve("fig4")

        assert curve.points[0][0] == 2.0
        assert curve.points[-1][0] == 1000.0
        values = [value for _, value in curve.points]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_p_min_below_two(self):
        """Test the threshold curve needs p >= 2"""
        code, _ = run("fig4", "--p-min", "1")

        assert code == EXIT_USAGE


class TestCurveFormat:
    """Test cases for curve CSV parsing"""

    def test_round_trip(self):
        """Test a curve with a not-applicable point parses back"""
        series = CurveSeries("exponent", ((2.0, -0.5), (4.0, NOT_APPLICABLE)))

        assert read_curve_csv(io.StringIO(format_curve(series))) == series

    def test_decreasing_p_rejected(self):
        """Test a curve whose p column decreases is a data error"""
        with pytest.raises(DataError):
            read_curve_csv(io.StringIO("p,speedup\n4.0,2.0\n2.0,1.5\n"))


class TestGlobalOptions:
    """Test cases for options before the command"""

    def test_version_exits_cleanly(self, capsys):
        """Test --version prints the program name and exits with 0"""
        assert main(["--version"]) == EXIT_OK
        assert "speeduplab" in capsys.readouterr().out

    def test_unknown_log_level(self):
        """Test an unknown --log-level is a usage error"""
        code, _ = run("--log-level", "verbose", "fig4")

        assert code == EXIT_USAGE
