import pytest
from hypothesis import given, strategies as st

from appease.core.models import Process, ProcessState
from appease.errors import SchedulerStateError
from appease.schedulers import FairShare, cpu_share, nice_to_weight


def test_weights():
    assert nice_to_weight(0) == 1024
    assert nice_to_weight(-1) == 1280
    assert nice_to_weight(1) == 819
    with pytest.raises(ValueError):
        nice_to_weight(-21)


def test_cpu_share():
    queue = [Process(1, nice=-1), Process(2)]
    fraction, time_slice = cpu_share(queue[0], queue, 20_000)
    assert fraction == pytest.approx(1280 / 2304)
    assert time_slice == 1280 * 20_000 // 2304

    fraction, time_slice = cpu_share(queue[1], queue, 20_000, min_granularity=10_000)
    assert time_slice == 10_000

    with pytest.raises(SchedulerStateError):
        cpu_share(queue[0], [], 20_000)
    with pytest.raises(ValueError):
        cpu_share(Process(3), queue, 20_000)


@given(nice=st.integers(min_value=-20, max_value=-1), n=st.integers(min_value=2, max_value=20))
def test_elevated_share_exceeds_fair_share(nice, n):
    queue = [Process(1, nice=nice)] + [Process(pid) for pid in range(2, n + 1)]
    fraction, _ = cpu_share(queue[0], queue, 20_000)
    assert fraction > 1 / n


def test_pick_leftmost():
    fair = FairShare(20_000)
    processes = [Process(pid, state=ProcessState.READY) for pid in (1, 2, 3)]
    for process in processes:
        fair.on_create(process, 0)
    processes[0].vruntime = 5
    assert fair.ready_ids == [2, 3, 1]
    pid, time_slice = fair.pick_next(0)
    assert pid == 2
    assert time_slice == 20_000 // 3


def test_charge_weighted_vruntime():
    fair = FairShare(20_000)
    light = Process(1, state=ProcessState.READY)
    heavy = Process(2, state=ProcessState.READY, nice=-5)
    fair.on_create(light, 0)
    fair.on_create(heavy, 0)
    fair.take(2, 0)
    fair.on_slice_expired(heavy, 3052, 3052)
    assert heavy.vruntime == pytest.approx(3052 * 1024 / nice_to_weight(-5))


def test_sleeper_placement():
    fair = FairShare(20_000, sleeper_threshold=10_000)
    hog = Process(1, state=ProcessState.READY)
    fair.on_create(hog, 0)
    hog.vruntime = 50_000

    short = Process(2, state=ProcessState.SLEEPING, sleep_since=95_000)
    fair.on_wake(short, 100_000)
    assert short.vruntime == fair.min_vruntime - 1

    long = Process(3, state=ProcessState.SLEEPING, sleep_since=0)
    fair.on_wake(long, 100_000)
    assert long.vruntime == fair.min_vruntime

    running = Process(4, state=ProcessState.RUNNING, vruntime=fair.min_vruntime)
    assert fair.should_preempt(running, 0, short, 100_000)
    assert not fair.should_preempt(running, 0, long, 100_000)


def test_errors():
    with pytest.raises(ValueError):
        FairShare(0)
    fair = FairShare(10_000)
    with pytest.raises(SchedulerStateError):
        fair.pick_next(0)
    assert fair.describe()['min_granularity_us'] == 1250
