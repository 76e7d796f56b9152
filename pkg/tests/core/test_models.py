import pytest

from appease.core.models import (
    AccountingMode,
    Customer,
    ModelConfig,
    Process,
    ProcessState,
    Request,
    ServiceCall,
    SocketKind,
)


def test_process_validation():
    with pytest.raises(ValueError):
        Process(0)
    with pytest.raises(ValueError):
        Process(1, nice=-21)
    with pytest.raises(ValueError):
        Process(1, nice=20)

    process = Process(3, name="db")
    assert process.state is ProcessState.SLEEPING
    assert str(process) == "db"
    assert str(Process(4)) == "P4"


def test_charge():
    process = Process(1)
    process.charge(10)
    process.charge(0)
    assert process.cpu_received == 10
    with pytest.raises(ValueError):
        process.charge(-1)


def test_runnable():
    assert Process(1, state=ProcessState.READY).runnable
    assert Process(1, state=ProcessState.RUNNING).runnable
    assert not Process(1, state=ProcessState.BLOCKED).runnable
    assert not Process(1).runnable


def test_customer_socket():
    assert Customer(1).socket is SocketKind.UNIX
    assert Customer(2, remote=True).socket is SocketKind.NETWORK
    with pytest.raises(ValueError):
        Customer(3, weight=0)


def test_request_lifecycle():
    request = Request(1, customer=1, target=1, arrival=100)
    assert not request.settled
    assert request.latency is None
    with pytest.raises(ValueError):
        request.respond(99)
    request.respond(250)
    assert request.settled
    assert request.latency == 150
    with pytest.raises(ValueError):
        Request(2, customer=1, target=1, arrival=0, weight=-1)


def test_service_call():
    with pytest.raises(ValueError):
        ServiceCall(1, 1, opened=0)
    call = ServiceCall(1, 2, opened=10)
    assert call.is_open
    with pytest.raises(ValueError):
        call.close(5)
    call.close(20)
    assert not call.is_open


@pytest.mark.parametrize("alpha", [-0.1, 0.5, 1.0])
def test_model_config_alpha_range(alpha):
    with pytest.raises(ValueError):
        ModelConfig(alpha)


def test_model_config_defaults():
    config = ModelConfig()
    assert config.alpha == 0.0
    assert config.accounting is AccountingMode.WAIT_MINUS_RUN
