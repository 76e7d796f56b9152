import pytest

from appease.sim import BackgroundHog, PeriodicStream, parse_scenario
from appease.sim import builders
from appease.schedulers import POLICIES


@pytest.mark.parametrize("data", [
    builders.rr_min_scenario(10, 2, 3),
    builders.rr_typical_scenario(10, 1, 2, 3, 4, accounting='net_wait'),
    builders.mlfq_min_scenario(10, [3, 3], 3),
    builders.mlfq_typical_scenario(10, [2, 2, 2], 1, 3, 7),
    builders.cfs_typical_scenario(20_000, 5, 12_000, 12_000, 12_000),
    builders.rbpe_chain_scenario(20_000, 5, 2, 3, 2),
    builders.share_scenario(-1, 2, 20_000),
    builders.low_load_scenario('fairshare_rbpe'),
    builders.bulk_transfer_scenario('appeasement', 4, reads=3),
], ids=lambda data: data['id'])
def test_builders_validate(data, config):
    scenario = parse_scenario(data, config)
    assert scenario.id == data['id']


@pytest.mark.parametrize("kind", sorted(POLICIES))
def test_comparison_setups_for_every_policy(kind, config):
    for data in (builders.appeasement_chain_scenario(kind, 2, 5_000, 10_000, 5_000),
                 builders.deadline_stream_scenario(kind, 2, count=5),
                 builders.transaction_stream_scenario(kind, 2, count=5)):
        assert parse_scenario(data, config).policy.kind == kind


def test_mlfq_power_of_two():
    with pytest.raises(ValueError):
        builders.mlfq_min_scenario(10, [2, 2], 2)
    with pytest.raises(ValueError):
        builders.mlfq_min_scenario(10, [2], 3)


def test_mlfq_competitors(config):
    scenario = parse_scenario(builders.mlfq_min_scenario(10, [3, 2, 4], 7), config)
    hogs = [item for item in scenario.workload if isinstance(item, BackgroundHog)]
    assert [(h.count, h.level, h.demand_us) for h in hogs] == [(2, 0, 10), (1, 1, 20), (3, 2, 40)]
    assert scenario.horizon_us == 2 * 10 + 1 * 20 + 3 * 40 + 70 + 10


def test_rbpe_chain_load(config):
    data = builders.rbpe_chain_scenario(20_000, 4, 2, 2, 2)
    assert data['policy']['initial_avenrun'] == 4 * 2048
    assert data['policy']['min_granularity_us'] == 5_000
    assert 'initial_avenrun' not in builders.rbpe_chain_scenario(20_000, 4, 2, 2, 2, kind='fairshare')['policy']


def test_deadline_stream(config):
    scenario = parse_scenario(builders.deadline_stream_scenario('fairshare_rbpe', 3, count=10), config)
    stream, = scenario.streams
    assert isinstance(stream, PeriodicStream)
    assert (stream.period_us, stream.deadline_us, stream.count) == (40_000, 100_000, 10)
    assert scenario.policy.params == {'warm_start': True}
    assert scenario.hog_count == 3
