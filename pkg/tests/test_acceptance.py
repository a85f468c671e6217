"""The acceptance gate: every numbered criterion runs as its own test and
prints one PASS/FAIL line with the measured detail. Shared expensive runs
live in a session-scoped context so the whole gate stays under the suite
time limits.
"""

import pytest

from afmdw.acceptance import CRITERIA, AcceptanceContext


@pytest.fixture(scope="module")
def ctx():
    return AcceptanceContext()


def _check(number, ctx):
    entry = next(c for c in CRITERIA if c[0] == number)
    _, name, fn = entry
    passed, detail = fn(ctx)
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {name} ({detail})")
    assert passed, f"criterion {number} ({name}): {detail}"


def test_criterion_01_residual_bound_full_suite(ctx):
    _check(1, ctx)


def test_criterion_02_shadow_identity_ulps(ctx):
    _check(2, ctx)


def test_criterion_03_decay_rate_slopes(ctx):
    _check(3, ctx)


def test_criterion_04_stationarity_of_final_iterates(ctx):
    _check(4, ctx)


def test_criterion_05_preconditioner_certificates(ctx):
    _check(5, ctx)


def test_criterion_06_growth_bound(ctx):
    _check(6, ctx)


def test_criterion_07_lyapunov_settling(ctx):
    _check(7, ctx)


def test_criterion_08_di_tracking_refinement(ctx):
    _check(8, ctx)


def test_criterion_09_ad_gradients_and_kink_hulls(ctx):
    _check(9, ctx)


def test_criterion_10_golden_worked_examples(ctx):
    _check(10, ctx)
