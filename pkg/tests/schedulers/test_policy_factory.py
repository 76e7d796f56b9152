import pytest

from appease.errors import ConfigurationError
from appease.schedulers import (
    DEFAULT_TABLE,
    Appeasement,
    FairShare,
    FairShareRBPE,
    MultilevelFeedbackQueue,
    RoundRobin,
    get_policy,
)
from appease.schedulers import create_policy


@pytest.mark.parametrize("name, cls", [
    ("rr", RoundRobin),
    ("MLFQ", MultilevelFeedbackQueue),
    ("fairshare", FairShare),
    ("fairshare-rbpe", FairShareRBPE),
    ("appeasement", Appeasement),
])
def test_get_policy(name, cls):
    assert get_policy(name) is cls


def test_unknown_policy():
    with pytest.raises(ConfigurationError):
        get_policy("lottery")
    with pytest.raises(ConfigurationError):
        get_policy(None)


def test_defaults_from_config(config):
    rr = create_policy("rr", config=config)
    assert rr.quantum == 10_000

    mlfq = create_policy("mlfq", {'levels': 3}, config)
    assert (mlfq.levels, mlfq.quantum) == (3, 10_000)

    fair = create_policy("fairshare", {'sch_lat_us': 40_000}, config)
    assert fair.sch_lat == 40_000
    assert fair.min_granularity == 5_000
    assert fair.sleeper_threshold == 40_000


def test_rbpe_from_config(config):
    policy = create_policy("fairshare_rbpe", {'warm_start': True}, config)
    assert policy.table == DEFAULT_TABLE
    assert policy.warm_start
    assert policy.tick_period == 10_000


def test_appeasement_fallback(config):
    policy = create_policy("appeasement", {'alpha': 0.1, 'fallback': {'sch_lat_us': 8_000}}, config)
    assert policy.alpha == 0.1
    assert policy.fallback.sch_lat == 8_000
    assert policy.bootstrap_u is None


def test_missing_setting(config):
    with pytest.raises(ConfigurationError):
        create_policy("rr", {'quantum_us': None}, config)
