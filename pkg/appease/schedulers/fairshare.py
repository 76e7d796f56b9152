"""
Fair-share scheduling on weighted virtual run time.

The ready set is ordered by `(vruntime, pid)`; the leftmost process runs
next for a slice proportional to its weight. A process that slept shorter
than the sleeper threshold is placed left of every other process when it
wakes; a longer sleeper is only pulled up to the current minimum.
"""
from typing import Dict, List, Optional, Sequence, Tuple

from appease.core.models import MAX_NICE, MIN_NICE, Process, SimTime
from appease.errors import SchedulerStateError
from appease.schedulers.policy import SchedulerPolicy

NICE_0_WEIGHT = 1024
WEIGHT_STEP = 1.25

_WEIGHTS = {nice: round(NICE_0_WEIGHT * WEIGHT_STEP ** -nice) for nice in range(MIN_NICE, MAX_NICE + 1)}


def nice_to_weight(nice: int) -> int:
    """
    Scheduling weight of a nice level: 1024 at nice 0, and every step
    towards negative nice multiplies the weight by 1.25.

    :param nice: nice level in [-20, 19]
    :return: the rounded integer weight
    """
    try:
        return _WEIGHTS[nice]
    except KeyError:
        raise ValueError(f"nice {nice} outside [{MIN_NICE}, {MAX_NICE}]")


def cpu_share(process: Process, run_queue: Sequence[Process], sch_lat: SimTime,
              min_granularity: Optional[SimTime] = None) -> Tuple[float, SimTime]:
    """
    The fraction of the CPU a process receives among the processes of a
    run queue, and the slice it is granted per scheduling period.

    :param process: a member of `run_queue`
    :param run_queue: all runnable processes, `process` included
    :param sch_lat: the scheduling period divided among the run queue
    :param min_granularity: lower bound on the slice, if any
    :return: a `(fraction, slice)` tuple
    """
    if not run_queue:
        raise SchedulerStateError("cpu share of an empty run queue")
    if all(p.id != process.id for p in run_queue):
        raise ValueError(f"{process} is not in the run queue")
    total = sum(nice_to_weight(p.nice) for p in run_queue)
    weight = nice_to_weight(process.nice)
    time_slice = weight * sch_lat // total
    if min_granularity is not None:
        time_slice = max(time_slice, min_granularity)
    return weight / total, time_slice


class FairShare(SchedulerPolicy):
    kind = 'fairshare'

    def __init__(self, sch_lat: SimTime, sleeper_threshold: Optional[SimTime] = None,
                 min_granularity: Optional[SimTime] = None):
        super().__init__()
        if sch_lat <= 0:
            raise ValueError(f"sch_lat must be positive, got {sch_lat}")
        self.sch_lat = sch_lat
        self.sleeper_threshold = sch_lat if sleeper_threshold is None else sleeper_threshold
        self.min_granularity = sch_lat // 8 if min_granularity is None else min_granularity
        self.min_vruntime = 0.0
        self.running: Optional[Process] = None
        self._ready: Dict[int, Process] = {}

    @property
    def ready_ids(self) -> List[int]:
        return [p.id for p in sorted(self._ready.values(), key=self._key)]

    @staticmethod
    def _key(process: Process):
        return process.vruntime, process.id

    def run_queue(self) -> List[Process]:
        queue = list(self._ready.values())
        if self.running is not None:
            queue.append(self.running)
        return queue

    def _update_min_vruntime(self):
        candidates = [p.vruntime for p in self.run_queue()]
        if candidates:
            self.min_vruntime = max(self.min_vruntime, min(candidates))

    def slice_for(self, process: Process) -> SimTime:
        queue = self.run_queue()
        if all(p.id != process.id for p in queue):
            queue.append(process)
        return cpu_share(process, queue, self.sch_lat, self.min_granularity)[1]

    def _charge(self, process: Process, ran: SimTime):
        process.vruntime += ran * NICE_0_WEIGHT / nice_to_weight(process.nice)

    def current_vruntime(self, process: Process, ran: SimTime) -> float:
        return process.vruntime + ran * NICE_0_WEIGHT / nice_to_weight(process.nice)

    def take(self, pid: int, now: SimTime) -> Tuple[int, SimTime]:
        """Removes a specific ready process and starts running it."""
        process = self._ready.pop(pid)
        time_slice = self.slice_for(process)
        self.running = process
        return process.id, time_slice

    def pick_next(self, now: SimTime) -> Tuple[int, SimTime]:
        self._check_not_empty()
        self._update_min_vruntime()
        leftmost = min(self._ready.values(), key=self._key)
        return self.take(leftmost.id, now)

    def on_create(self, process: Process, now: SimTime):
        self._update_min_vruntime()
        process.vruntime = max(process.vruntime, self.min_vruntime)
        self._ready[process.id] = process

    def on_wake(self, process: Process, now: SimTime):
        self._check_wakeable(process)
        self._update_min_vruntime()
        if now - process.sleep_since < self.sleeper_threshold:
            process.vruntime = self.min_vruntime - 1
        else:
            process.vruntime = max(process.vruntime, self.min_vruntime)
        self._ready[process.id] = process

    def on_slice_expired(self, process: Process, ran: SimTime, now: SimTime):
        self._charge(process, ran)
        self.running = None
        self._ready[process.id] = process
        self._update_min_vruntime()

    def on_leave(self, process: Process, ran: SimTime, now: SimTime):
        self._charge(process, ran)
        self.running = None
        self._update_min_vruntime()

    def should_preempt(self, running: Process, ran: SimTime, woken: Process, now: SimTime) -> bool:
        return woken.vruntime < self.current_vruntime(running, ran)

    def describe(self):
        return {
            'kind': self.kind,
            'sch_lat_us': self.sch_lat,
            'sleeper_threshold_us': self.sleeper_threshold,
            'min_granularity_us': self.min_granularity,
        }
