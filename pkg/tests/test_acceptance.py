"""Acceptance criteria 1 to 11, each at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line with the measured values;
the lines are repeated in the terminal summary. Running this file as a
script prints the same lines without pytest.
"""
import pytest

from riemipm import validation as V
from riemipm.cli import main

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover - script mode
    ACCEPTANCE_LINES = []


def report(result):
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    return result


@pytest.fixture(scope="module")
def runs():
    return V.run_rate_suite()


def test_c01_jacobian_consistency():
    r = report(V.criterion_1(seed=0, samples=20))
    assert r.measured["max_jacobian_rel_err"] <= 1e-5
    assert r.measured["seconds"] < 5.0
    assert r.passed


def test_c02_central_path_exactness():
    r = report(V.criterion_2())
    assert r.measured["max_abs_err"] <= 1e-12
    assert r.passed


def test_c03_trs_certificates():
    r = report(V.criterion_3(seed=0, count=100, hard=10, oracle_points=10_000))
    assert r.measured["max_certificate_residual"] <= 1e-8
    assert r.measured["max_objective_minus_sampled"] <= 1e-9
    assert r.measured["hard_cases"] >= 5
    assert r.measured["seconds"] < 10.0
    assert r.passed


def test_c04_newton_trs_equivalence():
    r = report(V.criterion_4(seed=0))
    assert r.measured["max_blockwise_diff"] <= 1e-8
    assert r.passed


def test_c05_rates(runs):
    r = report(V.criterion_5(runs))
    for rec in runs:
        assert rec.report.converged, rec.label
        assert len(rec.report.trace) <= 30
        assert rec.kkt <= 1e-10
        assert rec.seconds < 1.0
    assert r.measured["min_order"] >= 1.5
    assert r.measured["max_of_min_ratio"] < 0.1
    assert r.passed


def test_c06_zero_inner_tail(runs):
    r = report(V.criterion_6(runs))
    for rec in runs:
        assert V.tail_start([t.inner_iters for t in rec.report.trace]) <= 10
    assert r.passed


def test_c07_theta_law(runs):
    r = report(V.criterion_7(runs))
    assert r.measured["max_band"] <= 100
    assert r.passed


def test_c08_h_positive_definite(runs):
    r = report(V.criterion_8(runs))
    assert r.measured["min_lambda_min"] > 0
    assert r.passed


def test_c09_schedule():
    r = report(V.criterion_9())
    assert r.passed


def test_c10_regularity():
    r = report(V.criterion_10())
    assert r.passed


def test_c11_determinism(tmp_path, capsys):
    # two full `suite` invocations with the same seed
    for d in ("first", "second"):
        assert main(["suite", "--seed", "0", "--out-dir", str(tmp_path / d)]) == 0
    capsys.readouterr()
    names = sorted(p.name for p in (tmp_path / "first").glob("trace_*.csv"))
    identical = bool(names) and all(
        (tmp_path / "first" / n).read_bytes() == (tmp_path / "second" / n).read_bytes() for n in names
    )
    r = report(V.CriterionResult(11, "determinism", identical, {"traces_compared": len(names), "identical": identical}))
    assert r.passed


if __name__ == "__main__":  # pragma: no cover
    for res in V.run_all():
        print(res.line())
