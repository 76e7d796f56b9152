from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

# integer microseconds since scenario start
SimTime = int

MICROS_PER_SECOND = 1_000_000
MIN_NICE = -20
MAX_NICE = 19


class ProcessState(Enum):
    SLEEPING = 'sleeping'
    READY = 'ready'
    RUNNING = 'running'
    BLOCKED = 'blocked'


class SocketKind(Enum):
    UNIX = 'unix'
    NETWORK = 'net'


class AccountingMode(Enum):
    """
    How running time feeds back into a ledger entry.

    `NET_WAIT` only counts the time a request waits; running leaves the
    value untouched. `WAIT_MINUS_RUN` additionally subtracts running time.
    """
    NET_WAIT = 'net_wait'
    WAIT_MINUS_RUN = 'wait_minus_run'


@dataclass
class Process:
    """
    A schedulable entity on the single simulated CPU.

    :param id: positive process identifier
    :param state: current scheduling state
    :param nice: nice level in [-20, 19]
    :param cpu_received: total CPU time received so far
    :param vruntime: weighted run time, used by the fair-share policies
    :param mlfq_level: current queue of the multilevel feedback policy
    :param serving: the request the process is currently working on
    :param blocked_on: the servicer this process waits for while blocked
    :param hog: whether this is a never-blocking background process
    :param name: optional label used in traces and reports
    :param sleep_since: time at which the process last went to sleep
    """
    id: int
    state: ProcessState = ProcessState.SLEEPING
    nice: int = 0
    cpu_received: SimTime = 0
    vruntime: float = 0.0
    mlfq_level: int = 0
    serving: Optional[int] = None
    blocked_on: Optional[int] = None
    hog: bool = False
    name: Optional[str] = None
    sleep_since: SimTime = 0

    def __post_init__(self):
        if self.id <= 0:
            raise ValueError(f"process id must be positive, got {self.id}")
        if not MIN_NICE <= self.nice <= MAX_NICE:
            raise ValueError(f"nice {self.nice} outside [{MIN_NICE}, {MAX_NICE}]")

    def charge(self, dt: SimTime):
        if dt < 0:
            raise ValueError(f"cannot charge negative cpu time {dt}")
        self.cpu_received += dt

    @property
    def runnable(self) -> bool:
        return self.state in (ProcessState.READY, ProcessState.RUNNING)

    def __str__(self):
        return self.name or f"P{self.id}"


@dataclass(frozen=True)
class Customer:
    """
    An outside entity sending requests into the system.

    :param id: customer identifier
    :param weight: importance of this customer for the system
    :param remote: remote customers reach processes over network sockets,
            local ones over UNIX sockets
    """
    id: int
    weight: float = 1.0
    remote: bool = False

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError(f"customer weight must be positive, got {self.weight}")

    @property
    def socket(self) -> SocketKind:
        return SocketKind.NETWORK if self.remote else SocketKind.UNIX


@dataclass
class ServiceCall:
    requester: int
    servicer: int
    opened: SimTime
    closed: Optional[SimTime] = None

    def __post_init__(self):
        if self.requester == self.servicer:
            raise ValueError(f"process {self.requester} cannot call itself")

    @property
    def is_open(self) -> bool:
        return self.closed is None

    def close(self, now: SimTime):
        if now < self.opened:
            raise ValueError(f"service call closed at {now} before it opened at {self.opened}")
        self.closed = now


@dataclass
class Request:
    """
    A weighted request from a customer to its target process.

    :param id: request identifier
    :param customer: identifier of the requesting customer
    :param weight: importance of this request for the customer
    :param target: the process receiving the direct request
    :param arrival: arrival time
    :param response: time the response was sent, once settled
    :param chain: service calls made while serving this request
    :param stream: index of the periodic stream that generated the request
    :param deadline: absolute deadline, for stream requests
    """
    id: int
    customer: int
    target: int
    arrival: SimTime
    weight: float = 1.0
    response: Optional[SimTime] = None
    chain: List[ServiceCall] = field(default_factory=list)
    stream: Optional[int] = None
    deadline: Optional[SimTime] = None

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError(f"request weight must be positive, got {self.weight}")

    @property
    def settled(self) -> bool:
        return self.response is not None

    @property
    def open_calls(self) -> List[ServiceCall]:
        return [call for call in self.chain if call.is_open]

    def respond(self, now: SimTime):
        if now < self.arrival:
            raise ValueError(f"response at {now} precedes arrival at {self.arrival}")
        self.response = now

    @property
    def latency(self) -> Optional[SimTime]:
        return None if self.response is None else self.response - self.arrival


@dataclass(frozen=True)
class ModelConfig:
    alpha: float = 0.0
    accounting: AccountingMode = AccountingMode.WAIT_MINUS_RUN

    def __post_init__(self):
        if not 0 <= self.alpha < 0.5:
            raise ValueError(f"alpha out of range [0, 0.5): {self.alpha}")
