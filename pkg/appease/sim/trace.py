from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, List, Optional, Tuple

from appease.core.models import SimTime

EVENTS = ('arrive', 'wake', 'dispatch', 'preempt', 'block', 'unblock', 'settle', 'boost', 'decay', 'exit')


@dataclass(frozen=True)
class TraceEvent:
    """
    One record of the event trace, rendered as `time_us event pid req detail`
    where `req` is `-` when the event concerns no request and `detail` is a
    comma separated list of `key=value` pairs (`-` when empty).
    """
    time: SimTime
    event: str
    pid: int
    request: Optional[int] = None
    detail: Tuple[Tuple[str, Any], ...] = ()

    def __post_init__(self):
        if self.event not in EVENTS:
            raise ValueError(f"unknown trace event {self.event!r}")

    def get(self, key: str, default=None):
        for name, value in self.detail:
            if name == key:
                return value
        return default

    def format(self) -> str:
        request = '-' if self.request is None else str(self.request)
        detail = ','.join(f"{key}={_format_value(value)}" for key, value in self.detail) or '-'
        return f"{self.time} {self.event} {self.pid} {request} {detail}"

    @classmethod
    def parse(cls, line: str) -> 'TraceEvent':
        time, event, pid, request, detail = line.split()
        pairs = () if detail == '-' else tuple(_parse_pair(pair) for pair in detail.split(','))
        return cls(int(time), event, int(pid), None if request == '-' else int(request), pairs)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_pair(pair: str) -> Tuple[str, Any]:
    key, value = pair.split('=', 1)
    try:
        return key, int(value)
    except ValueError:
        try:
            return key, float(value)
        except ValueError:
            return key, value


@dataclass
class Trace:
    events: List[TraceEvent] = field(default_factory=list)

    def record(self, time: SimTime, event: str, pid: int, request: Optional[int] = None, **detail):
        if self.events and time < self.events[-1].time:
            raise ValueError(f"trace time going back from {self.events[-1].time} to {time}")
        self.events.append(TraceEvent(time, event, pid, request, tuple(detail.items())))

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def of(self, event: str) -> List[TraceEvent]:
        return [e for e in self.events if e.event == event]

    def for_request(self, request: int) -> List[TraceEvent]:
        return [e for e in self.events if e.request == request]

    def lines(self) -> Iterator[str]:
        return (e.format() for e in self.events)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> 'Trace':
        return cls([TraceEvent.parse(line) for line in lines if line.strip()])
