import pytest
from hypothesis import given, strategies as st

from appease.core.models import Process, ProcessState, SocketKind
from appease.schedulers import (
    DEFAULT_TABLE,
    FairShareRBPE,
    LoadEstimator,
    RbpeRow,
    rbpe_decay,
    rbpe_lookup,
    rbpe_on_request,
    table_from_config,
    update_load,
)
from appease.schedulers.load import FIXED_1, decay_factor
from appease.schedulers.rbpe import validate_table

MS = 1000

LOOKUPS = [
    (0, SocketKind.UNIX, 0, 0),
    (1600, SocketKind.NETWORK, 0, 0),
    (1601, SocketKind.UNIX, -1, 200 * MS),
    (1601, SocketKind.NETWORK, 0, 200 * MS),
    (5000, SocketKind.UNIX, -2, 300 * MS),
    (5001, SocketKind.NETWORK, -2, 400 * MS),
    (10_000, SocketKind.UNIX, -6, 500 * MS),
    (16_000, SocketKind.NETWORK, -4, 600 * MS),
    (16_001, SocketKind.UNIX, -15, 600 * MS),
    (24_576, SocketKind.NETWORK, -5, 600 * MS),
]


@pytest.mark.parametrize("avenrun, kind, nice, delay", LOOKUPS)
def test_lookup(avenrun, kind, nice, delay):
    assert rbpe_lookup(LoadEstimator(avenrun), kind) == (nice, delay)


def test_table_validation():
    with pytest.raises(ValueError):
        validate_table([])
    with pytest.raises(ValueError):
        validate_table([RbpeRow(None, -1, 0, 0), RbpeRow(100, 0, 0, 0)])
    with pytest.raises(ValueError):
        validate_table([RbpeRow(200, 0, 0, 0), RbpeRow(100, -1, 0, 0)])
    with pytest.raises(ValueError):
        RbpeRow(100, 0, -1, 0)
    rows = table_from_config([[1600, 0, 0, 0], [None, -3, -1, 100_000]])
    assert rows[-1] == RbpeRow(None, -3, -1, 100_000)


def test_load_average():
    assert decay_factor(0) == FIXED_1
    load = LoadEstimator()
    for _ in range(200):
        update_load(load, 4, 5_000_000)
    assert load.avenrun1 == 4 * FIXED_1
    assert load.load == 4.0
    for _ in range(400):
        update_load(load, 0, 5_000_000)
    assert load.avenrun1 == 0
    with pytest.raises(ValueError):
        LoadEstimator(-1)


def test_elevation_and_decay():
    process = Process(1, state=ProcessState.SLEEPING)
    eppl = {}
    load = LoadEstimator(10_000)
    entry = rbpe_on_request(eppl, process, SocketKind.UNIX, load, now=0)
    assert process.nice == -6
    assert entry.delay == 500 * MS

    # a weaker request keeps the stronger level
    rbpe_on_request(eppl, process, SocketKind.NETWORK, load, now=100 * MS)
    assert process.nice == -6

    processes = {1: process}
    assert rbpe_decay(eppl, 550 * MS, processes) == []
    assert rbpe_decay(eppl, 600 * MS, processes) == [(1, -5)]
    now = 600 * MS
    for _ in range(5):
        now += 500 * MS
        rbpe_decay(eppl, now, processes)
    assert process.nice == 0
    assert eppl == {}


def test_no_elevation_under_low_load():
    process = Process(1)
    assert rbpe_on_request({}, process, SocketKind.UNIX, LoadEstimator(1000), 0) is None
    assert process.nice == 0


def test_policy_load_sampling():
    policy = FairShareRBPE(20_000, warm_start=True)
    policy.on_tick(0, 12)
    assert policy.load.avenrun1 == 12 * FIXED_1
    assert policy.on_receive(Process(1), SocketKind.UNIX, 0).current_nice == -15

    cold = FairShareRBPE(20_000, load_sample_period=5_000_000)
    cold.on_tick(0, 12)
    assert cold.load.avenrun1 == 0
    cold.on_tick(5_000_000, 12)
    assert cold.load.avenrun1 > 0
    assert cold.describe()['table'][0] == [1600, 0, 0, 0]
    assert len(cold.table) == len(DEFAULT_TABLE)

    with pytest.raises(ValueError):
        FairShareRBPE(20_000, decay_sample_period=0)


def _decay_until_released(eppl, processes, delay, now=0, limit=40):
    levels = []
    while eppl and limit:
        now += delay
        levels.extend(nice for _, nice in rbpe_decay(eppl, now, processes))
        limit -= 1
    return levels


def test_elevation_keeps_stronger_own_level():
    process = Process(1, nice=-5)
    eppl = {}
    assert rbpe_on_request(eppl, process, SocketKind.UNIX, LoadEstimator(2000), now=0) is None
    assert process.nice == -5
    assert eppl == {}


def test_decay_returns_to_negative_base():
    process = Process(1, nice=-5)
    eppl = {}
    entry = rbpe_on_request(eppl, process, SocketKind.UNIX, LoadEstimator(10_000), now=0)
    assert (entry.base_nice, entry.current_nice) == (-5, -6)
    assert process.nice == -6
    assert _decay_until_released(eppl, {1: process}, 500 * MS) == [-5]
    assert process.nice == -5


def test_decay_returns_to_positive_base():
    process = Process(1, nice=10)
    eppl = {}
    rbpe_on_request(eppl, process, SocketKind.UNIX, LoadEstimator(2000), now=0)
    assert process.nice == -1
    # a refresh during the elevation does not move the base
    rbpe_on_request(eppl, process, SocketKind.UNIX, LoadEstimator(2000), now=100 * MS)
    assert eppl[1].base_nice == 10
    assert _decay_until_released(eppl, {1: process}, 200 * MS, now=100 * MS) == list(range(0, 11))
    assert process.nice == 10
    assert eppl == {}


@given(base=st.integers(min_value=-20, max_value=19),
       avenrun=st.integers(min_value=0, max_value=40 * FIXED_1),
       kind=st.sampled_from(SocketKind))
def test_elevation_always_ends_at_base(base, avenrun, kind):
    process = Process(1, nice=base)
    eppl = {}
    entry = rbpe_on_request(eppl, process, kind, LoadEstimator(avenrun), now=0)
    if entry is None:
        assert process.nice == base
        return
    elevated = entry.current_nice
    assert elevated < min(base, 0)
    # one level per delay, so the entry is gone after (base - elevated) delays
    levels = _decay_until_released(eppl, {1: process}, entry.delay, limit=base - elevated)
    assert levels == list(range(elevated + 1, base + 1))
    assert eppl == {}
    assert process.nice == base
