import math

import pytest
from hypothesis import given, strategies as st

from appease.analytics import (
    cfs_typical,
    mlfq_min,
    mlfq_typical,
    rbpe_share,
    rbpe_slice,
    rbpe_typical,
    rr_min,
    rr_typical,
)


@pytest.mark.parametrize("q, z, n, verbatim, corrected", [
    (1, 1, 2, 1, 1),
    (10, 3, 5, 100, 120),
    (10, 2, 3, 30, 40),
])
def test_rr_min(q, z, n, verbatim, corrected):
    result = rr_min(q, z, n)
    assert result.verbatim_value == verbatim
    assert result.corrected_value == corrected
    assert result.valid


def test_rr_min_assumptions():
    assert not rr_min(10, 1, 1).valid
    with pytest.raises(ValueError):
        rr_min(10, 0, 3)
    with pytest.raises(ValueError):
        rr_min(0, 1, 3)


def test_rr_typical():
    result = rr_typical(1, 2, 3, 4, 4)
    assert result.verbatim_value == 21
    assert result.corrected_value == 27
    assert result.valid
    assert not rr_typical(1, 2, 0, 4, 4).valid
    assert not rr_typical(1, 0, 3, 4, 4).valid
    with pytest.raises(ValueError):
        rr_typical(1, -1, 3, 4, 4)


def test_mlfq_min():
    result = mlfq_min(1, [3, 3], 3)
    assert result.verbatim_value == 5
    assert result.corrected_value == 6
    assert result.value('simplified') == 4
    assert mlfq_min(2, [2, 2], 3).verbatim_value == 4
    assert mlfq_min(10, [2, 2], 3).corrected_value == 30


def test_mlfq_min_assumptions():
    result = mlfq_min(1, [3, 3], 2)
    assert not result.valid
    assert math.isnan(result.verbatim_value)
    assert not mlfq_min(1, [3], 3).valid
    assert not mlfq_min(1, [0, 3], 3).valid


def test_mlfq_typical():
    assert mlfq_typical(1, [3, 3], 3, 3, 3).verbatim_value == 15
    assert mlfq_typical(1, [2, 2], 1, 3, 1).verbatim_value == 4
    result = mlfq_typical(1, [2, 2], 1, 2, 1)
    assert result.violations[0].startswith("segment 2:")


def test_cfs_typical():
    result = cfs_typical(20_000, 5, 12_000, 12_000, 12_000)
    assert result.corrected_value == pytest.approx(96_000)
    assert result.verbatim_value == pytest.approx(4 * 6 - 36_000)
    assert result.value('best_case') == 0.0
    assert result.valid

    assert not cfs_typical(20_000, 5, 5_000, 12_000, 12_000).valid
    assert not cfs_typical(20_000, 1, 12_000, 12_000, 12_000).valid
    with pytest.raises(ValueError):
        cfs_typical(20_000, 5, 0, 12_000, 12_000)


def test_unknown_form():
    with pytest.raises(ValueError):
        rr_min(1, 1, 2).value('simplified')


def test_rbpe_share():
    assert rbpe_share(0, 4) == pytest.approx(0.25)
    assert rbpe_share(-1, 2) == pytest.approx(1.25 / 2.25)
    assert rbpe_share(-1, 2) == rbpe_share(1, 2)
    assert rbpe_slice(20_000, 2, -1) == pytest.approx(20_000 * 1.25 / 2.25)
    with pytest.raises(ValueError):
        rbpe_share(-1, 0)


@given(nice=st.integers(min_value=-20, max_value=0), n=st.integers(min_value=1, max_value=64))
def test_elevated_share_at_least_fair(nice, n):
    assert rbpe_share(nice, n) >= 1 / n - 1e-12


def test_rbpe_typical():
    single = rbpe_typical(20_000, 4, -6, 1, 1, 1)
    assert single.verbatim_value == 0
    assert single.corrected_value == 0

    result = rbpe_typical(20_000, 4, -2, 2, 2, 2)
    wait = 3 * 20_000 / (3 + 1.25 ** 2)
    share = 1.25 / (3 + 1.25)
    assert result.verbatim_value == pytest.approx(3 * wait - 3 * share)
    assert result.corrected_value == pytest.approx(3 * wait - 20_000 * 3 * share)
    assert result.value('fair_share_waiting') == pytest.approx(3 * 15_000)
    assert result.valid

    assert not rbpe_typical(20_000, 4, -1, 3, 1, 1).valid
    assert not rbpe_typical(20_000, 4, 0, 1, 1, 1).valid
