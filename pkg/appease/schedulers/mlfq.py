from collections import deque
from typing import Deque, List, Tuple

from appease.core.models import Process, SimTime
from appease.schedulers.policy import SchedulerPolicy


class MultilevelFeedbackQueue(SchedulerPolicy):
    """
    `levels` FIFO queues; queue i grants `2**i * quantum` and has absolute
    priority over queue i + 1. A process that uses up its grant moves one
    queue down (saturating at the last one), a woken process starts over in
    queue 0, and an arrival in a better queue preempts the running process.
    """
    kind = 'mlfq'

    def __init__(self, levels: int, quantum: SimTime):
        super().__init__()
        if levels < 1:
            raise ValueError(f"need at least one queue, got {levels}")
        if quantum <= 0:
            raise ValueError(f"quantum must be positive, got {quantum}")
        self.levels = levels
        self.quantum = quantum
        self._queues: List[Deque[Process]] = [deque() for _ in range(levels)]

    def grant(self, level: int) -> SimTime:
        return (2 ** level) * self.quantum

    @property
    def ready_ids(self) -> List[int]:
        return [p.id for queue in self._queues for p in queue]

    def queue_lengths(self) -> List[int]:
        return [len(queue) for queue in self._queues]

    def _enqueue(self, process: Process, level: int):
        process.mlfq_level = max(0, min(level, self.levels - 1))
        self._queues[process.mlfq_level].append(process)

    def pick_next(self, now: SimTime) -> Tuple[int, SimTime]:
        self._check_not_empty()
        for level, queue in enumerate(self._queues):
            if queue:
                process = queue.popleft()
                process.mlfq_level = level
                return process.id, self.grant(level)

    def on_create(self, process: Process, now: SimTime):
        self._enqueue(process, process.mlfq_level)

    def on_wake(self, process: Process, now: SimTime):
        self._check_wakeable(process)
        self._enqueue(process, 0)

    def on_slice_expired(self, process: Process, ran: SimTime, now: SimTime):
        self._enqueue(process, process.mlfq_level + 1)

    def on_preempted(self, process: Process, ran: SimTime, now: SimTime):
        # keeps its level, loses its place in line
        self._enqueue(process, process.mlfq_level)

    def should_preempt(self, running: Process, ran: SimTime, woken: Process, now: SimTime) -> bool:
        return woken.mlfq_level < running.mlfq_level

    def describe(self):
        return {'kind': self.kind, 'levels': self.levels, 'quantum_us': self.quantum}
