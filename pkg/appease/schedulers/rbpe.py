"""
Request-based priority elevation on top of the fair-share policy.

A process that receives a request (a non-zero socket read) gets a negative
nice level looked up from a load table, and is entered in the elevated
priority process list. A periodic sampler raises the nice level of every
listed process by one each time its delay has passed, until it is back at
the level it had before and leaves the list. Under low load the table
yields nice 0 and the policy behaves exactly like plain fair-share.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from appease.core.models import MICROS_PER_SECOND, Process, SimTime, SocketKind
from appease.schedulers.fairshare import FairShare
from appease.schedulers.load import FIXED_1, LoadEstimator, update_load

LOG = logging.getLogger(__name__)

MS = 1000


@dataclass(frozen=True)
class RbpeRow:
    """
    One row of the elevation table.

    :param load_threshold: the row applies while the load is at most this
            value (fixed point, 2048 = 1.0); `None` matches any load
    :param nice_unix: nice level for requests read from UNIX sockets
    :param nice_net: nice level for requests read from network sockets
    :param delay: time after which the elevation weakens by one level
    """
    load_threshold: Optional[int]
    nice_unix: int
    nice_net: int
    delay: SimTime

    def __post_init__(self):
        if not self.nice_unix <= self.nice_net <= 0:
            raise ValueError(f"expected nice_unix <= nice_net <= 0, got {self.nice_unix}, {self.nice_net}")
        if self.delay < 0:
            raise ValueError(f"delay cannot be negative, got {self.delay}")

    def nice_for(self, kind: SocketKind) -> int:
        return self.nice_unix if kind is SocketKind.UNIX else self.nice_net


DEFAULT_TABLE: Tuple[RbpeRow, ...] = (
    RbpeRow(1600, 0, 0, 0),
    RbpeRow(3000, -1, 0, 200 * MS),
    RbpeRow(5000, -2, -1, 300 * MS),
    RbpeRow(8000, -4, -2, 400 * MS),
    RbpeRow(12000, -6, -3, 500 * MS),
    RbpeRow(16000, -7, -4, 600 * MS),
    RbpeRow(None, -15, -5, 600 * MS),
)


def validate_table(rows: Sequence[RbpeRow]) -> Tuple[RbpeRow, ...]:
    rows = tuple(rows)
    if not rows:
        raise ValueError("elevation table is empty")
    thresholds = [row.load_threshold for row in rows]
    if None in thresholds[:-1]:
        raise ValueError("only the last elevation row may be unbounded")
    bounded = [t for t in thresholds if t is not None]
    if any(b <= a for a, b in zip(bounded, bounded[1:])):
        raise ValueError(f"elevation thresholds must increase strictly: {bounded}")
    return rows


def table_from_config(rows: Sequence[Sequence]) -> Tuple[RbpeRow, ...]:
    """Builds a table from `[threshold, nice_unix, nice_net, delay_us]` rows."""
    return validate_table(RbpeRow(threshold, int(unix), int(net), int(delay))
                          for threshold, unix, net, delay in rows)


def rbpe_lookup(load: LoadEstimator, kind: SocketKind,
                table: Sequence[RbpeRow] = DEFAULT_TABLE) -> Tuple[int, SimTime]:
    """
    :return: the `(nice, delay)` of the first row whose threshold is not
            below the current load; loads beyond every threshold use the
            last row
    """
    for row in table:
        if row.load_threshold is None or load.avenrun1 <= row.load_threshold:
            return row.nice_for(kind), row.delay
    last = table[-1]
    return last.nice_for(kind), last.delay


@dataclass
class EpplEntry:
    """
    An elevated process. `base_nice` is the level the process had before
    the elevation and returns to once the elevation has decayed.
    """
    process: int
    base_nice: int
    current_nice: int
    stamped: SimTime
    delay: SimTime


Eppl = Dict[int, EpplEntry]


def rbpe_on_request(eppl: Eppl, process: Process, kind: SocketKind, load: LoadEstimator, now: SimTime,
                    table: Sequence[RbpeRow] = DEFAULT_TABLE) -> Optional[EpplEntry]:
    """
    Elevates a process that just read a request. A second request during an
    active elevation refreshes the time stamp and keeps the strongest level.

    :return: the created or refreshed entry, or `None` when the table asks
            for no elevation at the current load or the process already
            runs at that level or better
    """
    nice, delay = rbpe_lookup(load, kind, table)
    entry = eppl.get(process.id)
    base = process.nice if entry is None else entry.base_nice
    if nice >= 0 or nice >= base:
        return None
    if entry is None:
        entry = EpplEntry(process.id, base, nice, now, delay)
        eppl[process.id] = entry
    else:
        entry.current_nice = min(entry.current_nice, nice)
        entry.stamped = now
        entry.delay = delay
    process.nice = entry.current_nice
    return entry


def rbpe_decay(eppl: Eppl, now: SimTime, processes: Mapping[int, Process]) -> List[Tuple[int, int]]:
    """
    Weakens every elevation whose delay has passed by one nice level. An
    entry that is back at its base level is dropped.

    :return: `(pid, new_nice)` for every process that changed
    """
    changes = []
    for pid in sorted(eppl):
        entry = eppl[pid]
        if now - entry.stamped < entry.delay:
            continue
        entry.current_nice = min(entry.current_nice + 1, entry.base_nice)
        entry.stamped = now
        processes[pid].nice = entry.current_nice
        changes.append((pid, entry.current_nice))
        if entry.current_nice == entry.base_nice:
            del eppl[pid]
    return changes


class FairShareRBPE(FairShare):
    kind = 'fairshare_rbpe'

    def __init__(self, sch_lat: SimTime, sleeper_threshold: Optional[SimTime] = None,
                 min_granularity: Optional[SimTime] = None, table: Sequence[RbpeRow] = DEFAULT_TABLE,
                 decay_sample_period: SimTime = 10 * MS, load_sample_period: SimTime = 5 * MICROS_PER_SECOND,
                 initial_avenrun: int = 0, warm_start: bool = False):
        super().__init__(sch_lat, sleeper_threshold, min_granularity)
        if decay_sample_period <= 0 or load_sample_period <= 0:
            raise ValueError("sample periods must be positive")
        self.table = validate_table(table)
        self.tick_period = decay_sample_period
        self.load_sample_period = load_sample_period
        self.warm_start = warm_start
        self.initial_avenrun = initial_avenrun
        self.load = LoadEstimator(initial_avenrun)
        self.eppl: Eppl = {}
        self._last_load_sample: Optional[SimTime] = None if warm_start else 0

    def sample_load(self, now: SimTime, runnable_count: int):
        if self._last_load_sample is None:
            self.load.avenrun1 = runnable_count * FIXED_1
            self._last_load_sample = now
            LOG.debug(f"load warm start at {now}: avenrun {self.load.avenrun1}")
        elif now - self._last_load_sample >= self.load_sample_period:
            update_load(self.load, runnable_count, now - self._last_load_sample)
            self._last_load_sample = now

    def on_tick(self, now: SimTime, runnable_count: int) -> List[Tuple[int, int]]:
        self.sample_load(now, runnable_count)
        return rbpe_decay(self.eppl, now, self.processes)

    def on_receive(self, process: Process, kind: SocketKind, now: SimTime) -> Optional[EpplEntry]:
        return rbpe_on_request(self.eppl, process, kind, self.load, now, self.table)

    def describe(self):
        return {
            **super().describe(),
            'decay_sample_period_us': self.tick_period,
            'load_sample_period_us': self.load_sample_period,
            'initial_avenrun': self.initial_avenrun,
            'warm_start': self.warm_start,
            'table': [[r.load_threshold, r.nice_unix, r.nice_net, r.delay] for r in self.table],
        }
