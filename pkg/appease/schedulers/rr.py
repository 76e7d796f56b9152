from collections import deque
from typing import Deque, List, Tuple

from appease.core.models import Process, SimTime
from appease.schedulers.policy import SchedulerPolicy


class RoundRobin(SchedulerPolicy):
    """
    FIFO ready queue with a fixed quantum. Woken, new and expired processes
    all go to the tail.
    """
    kind = 'rr'

    def __init__(self, quantum: SimTime):
        super().__init__()
        if quantum <= 0:
            raise ValueError(f"quantum must be positive, got {quantum}")
        self.quantum = quantum
        self._queue: Deque[Process] = deque()

    @property
    def ready_ids(self) -> List[int]:
        return [p.id for p in self._queue]

    def pick_next(self, now: SimTime) -> Tuple[int, SimTime]:
        self._check_not_empty()
        return self._queue.popleft().id, self.quantum

    def on_create(self, process: Process, now: SimTime):
        self._queue.append(process)

    def on_wake(self, process: Process, now: SimTime):
        self._check_wakeable(process)
        self._queue.append(process)

    def on_slice_expired(self, process: Process, ran: SimTime, now: SimTime):
        self._queue.append(process)

    def describe(self):
        return {'kind': self.kind, 'quantum_us': self.quantum}
