import math

import pytest

from appease.analytics import compare, mlfq_min, relative_error, report, rr_min, summarize


def test_relative_error():
    assert relative_error(110, 100) == pytest.approx(0.1)
    assert relative_error(3, 0) == 3
    assert math.isnan(relative_error(1, math.nan))


def test_exact_match():
    comparison = compare(40, rr_min(10, 2, 3), 'rr')
    assert comparison.errors == {'verbatim': 10, 'corrected': 0}
    assert comparison.matches('corrected')
    assert not comparison.matches('verbatim')
    assert comparison.relative_errors()['verbatim'] == pytest.approx(1 / 3)


def test_tolerance():
    assert compare(40.5, rr_min(10, 2, 3), 'rr', tolerance=1).matches()
    assert not compare(40.5, rr_min(10, 2, 3), 'rr').matches()


def test_policy_mismatch():
    with pytest.raises(ValueError):
        compare(40, rr_min(10, 2, 3), 'mlfq')
    assert compare(40, rr_min(10, 2, 3), 'RR').policy == 'rr'


def test_excluded():
    comparison = compare(0, rr_min(10, 1, 1), 'rr')
    assert comparison.excluded
    assert comparison.matches() is None
    assert comparison.row()['violations'].startswith("n=1")


def test_nan_never_matches():
    comparison = compare(7, mlfq_min(1, [3, 3], 3), 'mlfq')
    assert comparison.errors['simplified'] == 3
    broken = compare(7, mlfq_min(1, [3], 3), 'mlfq')
    assert broken.matches() is None


def test_summary_and_report():
    comparisons = [
        compare(40, rr_min(10, 2, 3), 'rr'),
        compare(41, rr_min(10, 2, 3), 'rr'),
        compare(0, rr_min(10, 1, 1), 'rr'),
        compare(6, mlfq_min(1, [3, 3], 3), 'mlfq'),
    ]
    assert summarize(comparisons, 'corrected') == (2, 1, 1)
    assert summarize(comparisons, 'verbatim') == (0, 3, 1)
    rows = report(comparisons)
    assert rows[0]['corrected_error'] == 0
    assert rows[3]['simplified_error'] == 2
    assert 'simplified_error' not in rows[0]
