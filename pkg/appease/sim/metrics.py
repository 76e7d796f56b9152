import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from appease.core.models import MICROS_PER_SECOND, AccountingMode, Request, SimTime
from appease.sim.trace import Trace

METRICS_COLUMNS = (
    'scenario_id',
    'policy',
    'hogs',
    'requests_settled',
    'mean_latency_us',
    'p99_latency_us',
    'mean_realized_U',
    'deadline_misses',
    'achieved_rate_per_s',
)


@dataclass(frozen=True)
class RequestRecord:
    """
    Outcome of one request. For requests still open at the horizon,
    `response` is `None` and the unhappiness is the value at the horizon.
    """
    id: int
    customer: int
    target: int
    arrival: SimTime
    response: Optional[SimTime]
    realized_u: float
    realized_u_clamped: float
    stream: Optional[int] = None
    deadline: Optional[SimTime] = None

    @classmethod
    def of(cls, request: Request, realized: float, clamped: float) -> 'RequestRecord':
        return cls(request.id, request.customer, request.target, request.arrival, request.response,
                   realized, clamped, request.stream, request.deadline)

    @property
    def settled(self) -> bool:
        return self.response is not None

    @property
    def latency(self) -> Optional[SimTime]:
        return None if self.response is None else self.response - self.arrival

    def missed(self, horizon: SimTime) -> bool:
        if self.deadline is None:
            return False
        if self.response is None:
            return self.deadline < horizon
        return self.response > self.deadline


@dataclass
class Metrics:
    horizon: SimTime
    requests: List[RequestRecord]
    cpu: Dict[int, SimTime]
    idle: SimTime
    series: List[Tuple[SimTime, float]] = field(default_factory=list)
    hogs: int = 0

    @property
    def settled(self) -> List[RequestRecord]:
        return [r for r in self.requests if r.settled]

    @property
    def open(self) -> List[RequestRecord]:
        return [r for r in self.requests if not r.settled]

    def record(self, request_id: int) -> RequestRecord:
        for record in self.requests:
            if record.id == request_id:
                return record
        raise KeyError(f"no record of request {request_id}")

    def latencies(self) -> np.ndarray:
        return np.array([r.latency for r in self.settled], dtype=float)

    @property
    def mean_latency(self) -> float:
        latencies = self.latencies()
        return float(np.mean(latencies)) if latencies.size else math.nan

    @property
    def p99_latency(self) -> float:
        latencies = self.latencies()
        return float(np.percentile(latencies, 99)) if latencies.size else math.nan

    @property
    def mean_realized_u(self) -> float:
        values = [r.realized_u for r in self.settled]
        return float(np.mean(values)) if values else math.nan

    @property
    def deadline_misses(self) -> int:
        return sum(r.missed(self.horizon) for r in self.requests)

    @property
    def busy(self) -> SimTime:
        return sum(self.cpu.values())

    def conserved(self) -> bool:
        """Every microsecond of the horizon went to exactly one process or to idling."""
        return self.busy + self.idle == self.horizon

    def cpu_fraction(self, pid: int) -> float:
        return self.cpu.get(pid, 0) / self.horizon


@dataclass(frozen=True)
class DeadlineReport:
    arrived: int
    on_time: int
    misses: int
    rate_per_s: float


def deadline_metrics(metrics: Metrics, stream: int, period_us: SimTime) -> DeadlineReport:
    """
    Deadline misses of one periodic stream, and the rate of requests served
    on time over the time the stream was active (its arrivals times its
    period).

    :param metrics: the metrics of a run
    :param stream: index of the stream in the scenario workload
    :param period_us: the period of that stream
    """
    records = [r for r in metrics.requests if r.stream == stream]
    misses = sum(r.missed(metrics.horizon) for r in records)
    on_time = sum(1 for r in records if r.settled and not r.missed(metrics.horizon))
    elapsed = len(records) * period_us
    rate = on_time * MICROS_PER_SECOND / elapsed if elapsed else 0.0
    return DeadlineReport(len(records), on_time, misses, rate)


def audit_realized_unhappiness(trace: Trace, request: int,
                               accounting: AccountingMode = AccountingMode.WAIT_MINUS_RUN) -> float:
    """
    Recomputes the realized unhappiness of a settled request from the raw
    trace, independently of the ledger: the time the request spent pending
    without being worked on, minus the running time that was credited when
    a process was taken off the CPU mid-segment. Holds for alpha 0.
    """
    events = trace.for_request(request)
    arrive = next(e for e in events if e.event == 'arrive')
    settle = next((e for e in events if e.event == 'settle'), None)
    if settle is None:
        raise ValueError(f"request {request} was not settled in this trace")
    worked = sum(e.get('ran', 0) for e in events if e.event in ('preempt', 'block', 'unblock', 'settle'))
    credited = 0
    if accounting is AccountingMode.WAIT_MINUS_RUN:
        credited = sum(e.get('ran', 0) for e in events if e.event == 'preempt')
    return (settle.time - arrive.time) - worked - credited


def metrics_row(scenario_id: str, policy: str, metrics: Metrics, streams: Optional[Mapping[int, SimTime]] = None) \
        -> Dict[str, Any]:
    """
    One row of the metrics table, in `METRICS_COLUMNS` order.

    :param streams: period per stream index, for the achieved rate
    """
    rate = sum(deadline_metrics(metrics, index, period).rate_per_s for index, period in (streams or {}).items())
    return {
        'scenario_id': scenario_id,
        'policy': policy,
        'hogs': metrics.hogs,
        'requests_settled': len(metrics.settled),
        'mean_latency_us': metrics.mean_latency,
        'p99_latency_us': metrics.p99_latency,
        'mean_realized_U': metrics.mean_realized_u,
        'deadline_misses': metrics.deadline_misses,
        'achieved_rate_per_s': rate,
    }
