from pathlib import Path

import pytest

from appease.core.ledger import UnhappinessLedger
from appease.core.models import AccountingMode, Customer, ModelConfig, Request
from appease.utils import script_helper


@pytest.fixture
def testdata_path():
    return Path(__file__).parent / "testdata"


@pytest.fixture
def chain_path(testdata_path):
    return testdata_path / "chain.json"


@pytest.fixture(scope="session")
def config():
    return script_helper.load_config()


@pytest.fixture
def customers():
    return {1: Customer(1), 2: Customer(2, weight=2.0, remote=True)}


@pytest.fixture
def ledger(customers):
    return UnhappinessLedger(customers, ModelConfig(0.0, AccountingMode.WAIT_MINUS_RUN))


@pytest.fixture
def opened_ledger(ledger):
    """A ledger with request 1 of customer 1 arriving at process 1 at time 0."""
    ledger.open(Request(1, customer=1, target=1, arrival=0))
    return ledger
