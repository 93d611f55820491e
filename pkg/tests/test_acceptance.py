"""Acceptance criteria 1-12, one seeded suite each; every test prints a PASS/FAIL line."""

import time

import pytest

from cpg.suites import run_suite

SEED = 0
TIME_LIMIT = 60.0

CRITERIA = [
    (1, "hilbert-closed-form"),
    (2, "metric-axioms"),
    (3, "projective-invariance"),
    (4, "asymptotic-cone"),
    (5, "foliation"),
    (6, "flow-contraction"),
    (7, "strict-convexity"),
    (8, "classification"),
    (9, "conic-faces"),
    (10, "limits"),
    (11, "osculating"),
    (12, "bounded-faces"),
]


@pytest.mark.parametrize("criterion, suite", CRITERIA, ids=[f"criterion_{c:02d}_{s}" for c, s in CRITERIA])
def test_criterion(criterion, suite, capsys):
    start = time.perf_counter()
    result = run_suite(suite, seed=SEED)
    elapsed = time.perf_counter() - start
    within = elapsed < TIME_LIMIT
    with capsys.disabled():
        print(f"\n{result.line()} [{elapsed:.1f}s]" + ("" if within else f" (over the {TIME_LIMIT:.0f}s limit)"))
    assert result.criterion == criterion
    assert result.passed, result.details
    assert within, f"suite took {elapsed:.1f}s"
