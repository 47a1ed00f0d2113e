"""Top-level acceptance gate: every published behavior the library claims to
reproduce, checked at its stated tolerance.  One test (and one printed
verdict line) per criterion; the underlying suite runs once per session.
"""
import pytest

from scalarcf import acceptance


@pytest.fixture(scope="module")
def verdicts():
    results = {r.name: r for r in acceptance.run_all()}
    assert len(results) == 10
    return results


def _report(verdicts, name):
    res = verdicts[name]
    print(f"[{'PASS' if res.passed else 'FAIL'}] {name}: {res.detail}")
    assert res.passed, f"{name}: {res.detail}"


def test_criterion_01_initial_errors(verdicts):
    _report(verdicts, "initial-errors")


def test_criterion_02_basin_radius_values(verdicts):
    _report(verdicts, "basin-radius-values")


def test_criterion_03_misalignment_bound_sweep(verdicts):
    _report(verdicts, "misalignment-bound-sweep")


def test_criterion_04_orthonormal_reduction(verdicts):
    _report(verdicts, "orthonormal-reduction")


def test_criterion_05_innovation_closed_forms(verdicts):
    _report(verdicts, "innovation-closed-forms")


def test_criterion_06_lyapunov_monotonicity(verdicts):
    _report(verdicts, "lyapunov-monotonicity")


def test_criterion_07_stall_plateau_runtime(verdicts):
    _report(verdicts, "stall-plateau-runtime")


def test_criterion_08_basin_convergence(verdicts):
    _report(verdicts, "basin-convergence")


def test_criterion_09_step_halving_oracle(verdicts):
    _report(verdicts, "step-halving-oracle")


def test_criterion_10_pe_metric_floors(verdicts):
    _report(verdicts, "pe-metric-floors")
