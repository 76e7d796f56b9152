import pytest
from hypothesis import given, strategies as st

from appease.core.ledger import UnhappinessLedger
from appease.core.models import AccountingMode, Customer, ModelConfig, Request
from appease.errors import ConfigurationError, LedgerConsistencyError, SchedulerStateError


def test_waiting_accrues(opened_ledger):
    opened_ledger.advance(30)
    assert opened_ledger.value(1, 1) == 30
    assert opened_ledger.request_unhappiness(1) == 30
    assert opened_ledger.holder(1) == 1
    assert opened_ledger.requests_held_by(1) == {1}


def test_running_time_accounting(customers):
    for mode, expected in ((AccountingMode.WAIT_MINUS_RUN, -4), (AccountingMode.NET_WAIT, 0)):
        ledger = UnhappinessLedger(customers, ModelConfig(0.0, mode))
        ledger.open(Request(1, customer=1, target=1, arrival=0))
        ledger.stop_waiting(1, 1, 0)
        ledger.accrue(1, 1, 4, was_running=True)
        assert ledger.value(1, 1) == expected


def test_accrue_rejects_empty_interval(opened_ledger):
    with pytest.raises(ValueError):
        opened_ledger.accrue(1, 1, 0, was_running=False)


def test_split_and_merge(customers):
    ledger = UnhappinessLedger(customers, ModelConfig(0.25))
    ledger.open(Request(1, customer=1, target=1, arrival=0))
    ledger.advance(40)
    ledger.split_on_block(1, 1, 2)
    assert ledger.value(1, 1) == 10
    assert ledger.value(1, 2) == 30
    assert ledger.is_frozen(1, 1)
    assert ledger.holder(1) == 2
    assert ledger.call_stack(1) == (1, 2)
    assert ledger.requests_held_by(1) == set()

    # frozen entries do not accrue
    ledger.advance(50)
    assert ledger.value(1, 1) == 10
    assert ledger.value(1, 2) == 40

    ledger.merge_on_unblock(1, 1, 2)
    assert ledger.value(1, 1) == 50
    assert ledger.value(1, 2) == 0
    assert not ledger.requests[1].open_calls
    assert ledger.subgraph(1) == [1, 2]


def test_illegal_transitions(opened_ledger):
    with pytest.raises(SchedulerStateError):
        opened_ledger.split_on_block(1, 2, 3)
    with pytest.raises(SchedulerStateError):
        opened_ledger.merge_on_unblock(1, 1, 2)
    with pytest.raises(ValueError):
        opened_ledger.split_on_block(1, 1, 2, alpha=0.5)
    opened_ledger.split_on_block(1, 1, 2)
    with pytest.raises(SchedulerStateError):
        opened_ledger.split_on_block(1, 2, 1)
    with pytest.raises(SchedulerStateError):
        opened_ledger.settle_response(1, 10)
    with pytest.raises(SchedulerStateError):
        opened_ledger.open(Request(1, customer=1, target=1, arrival=0))


def test_settle(opened_ledger):
    opened_ledger.advance(12)
    assert opened_ledger.settle_response(1, 12) == 12
    assert opened_ledger.requests[1].latency == 12
    assert opened_ledger.open_requests() == []
    assert opened_ledger.value(1, 1) == 0
    with pytest.raises(SchedulerStateError):
        opened_ledger.settle_response(1, 13)
    with pytest.raises(LedgerConsistencyError):
        opened_ledger.settle_response(2, 13)


def test_time_cannot_go_back(opened_ledger):
    opened_ledger.advance(5)
    with pytest.raises(ValueError):
        opened_ledger.advance(4)


def test_missing_entries(opened_ledger):
    with pytest.raises(LedgerConsistencyError):
        opened_ledger.value(1, 9)
    with pytest.raises(LedgerConsistencyError):
        opened_ledger.raw_unhappiness(9)
    with pytest.raises(SchedulerStateError):
        opened_ledger.holder(9)


def test_weights(customers):
    ledger = UnhappinessLedger(customers)
    ledger.open(Request(1, customer=2, target=1, arrival=0, weight=1.5))
    ledger.open(Request(2, customer=1, target=2, arrival=0))
    ledger.advance(10)
    assert ledger.request_unhappiness(1) == pytest.approx(30)
    assert ledger.customer_unhappiness(2) == pytest.approx(30)
    assert ledger.customer_unhappiness(1) == pytest.approx(10)
    assert ledger.customer_unhappiness(3) == 0
    assert ledger.system_unhappiness() == pytest.approx(40)


def test_unknown_customer():
    ledger = UnhappinessLedger({})
    ledger.open(Request(1, customer=5, target=1, arrival=0))
    with pytest.raises(ConfigurationError):
        ledger.request_unhappiness(1)


def test_clamped_view(customers):
    ledger = UnhappinessLedger(customers)
    ledger.open(Request(1, customer=1, target=1, arrival=0))
    ledger.stop_waiting(1, 1, 0)
    ledger.accrue(1, 1, 7, was_running=True)
    assert ledger.raw_unhappiness(1) == -7
    assert ledger.raw_unhappiness(1, clamped=True) == 0


@given(
    waits=st.lists(st.integers(min_value=1, max_value=10_000), min_size=1, max_size=6),
    alpha=st.floats(min_value=0, max_value=0.49),
)
def test_split_merge_conserves_unhappiness(waits, alpha):
    ledger = UnhappinessLedger({1: Customer(1)}, ModelConfig(alpha))
    ledger.open(Request(1, customer=1, target=1, arrival=0))
    now = 0
    # nest one service call per waiting period, then unwind
    for depth, wait in enumerate(waits, start=2):
        now += wait
        ledger.advance(now)
        before = ledger.raw_unhappiness(1)
        ledger.split_on_block(1, depth - 1, depth)
        assert ledger.raw_unhappiness(1) == pytest.approx(before)
    for depth in range(len(waits) + 1, 1, -1):
        before = ledger.raw_unhappiness(1)
        ledger.merge_on_unblock(1, depth - 1, depth)
        assert ledger.raw_unhappiness(1) == pytest.approx(before)
    assert ledger.raw_unhappiness(1) == pytest.approx(sum(waits))


def test_is_unhappy(opened_ledger):
    # a fresh arrival competes before it has waited at all
    assert opened_ledger.is_unhappy(1)
    opened_ledger.stop_waiting(1, 1, 0)
    opened_ledger.accrue(1, 1, 3, was_running=True)
    assert not opened_ledger.is_unhappy(1)
    opened_ledger.accrue(1, 1, 3, was_running=False)
    assert opened_ledger.request_unhappiness(1) == 0
    assert not opened_ledger.is_unhappy(1)
    opened_ledger.accrue(1, 1, 1, was_running=False)
    assert opened_ledger.is_unhappy(1)


def test_bootstrap(ledger):
    ledger.grant_bootstrap(1, 10)
    ledger.grant_bootstrap(2, 0)
    assert ledger.bootstrapped() == {1: 10.0}
    assert ledger.bootstrap_u(2) == 0
    assert not ledger.consume_bootstrap(1, 4)
    assert ledger.bootstrap_u(1) == 6
    assert ledger.consume_bootstrap(1, 6)
    assert ledger.bootstrapped() == {}
    assert not ledger.consume_bootstrap(1, 1)
    # bootstrap unhappiness stays out of the system total
    assert ledger.system_unhappiness() == 0


@given(
    weight=st.floats(min_value=0.01, max_value=100),
    factor=st.floats(min_value=0.01, max_value=100),
    wait=st.integers(min_value=1, max_value=100_000),
    ran=st.integers(min_value=1, max_value=100_000),
)
def test_unhappiness_linear_in_customer_weight(weight, factor, wait, ran):
    values = []
    for w in (weight, weight * factor):
        ledger = UnhappinessLedger({1: Customer(1, weight=w)}, ModelConfig(0.0, AccountingMode.WAIT_MINUS_RUN))
        ledger.open(Request(1, customer=1, target=1, arrival=0))
        ledger.stop_waiting(1, 1, wait)
        ledger.accrue(1, 1, ran, was_running=True)
        values.append((ledger.request_unhappiness(1), ledger.customer_unhappiness(1)))
    (request, customer), (scaled_request, scaled_customer) = values
    assert request == pytest.approx(weight * (wait - ran))
    assert scaled_request == pytest.approx(factor * request, abs=1e-6)
    assert scaled_customer == pytest.approx(factor * customer, abs=1e-6)
