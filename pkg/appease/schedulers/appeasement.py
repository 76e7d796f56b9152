"""
Unhappiness-greedy two-queue scheduling.

Ready processes that hold the active entry of an open request with
nonzero unhappiness, or that still have bootstrap unhappiness, are unhappy
and form the first queue; all
other ready processes form the second. The first queue has absolute
precedence: the scheduler computes the weighted unhappiness of every
pending request, takes the worst one and runs the unhappiest ready process
of its dependency subgraph. The second queue is served by a fair-share
fallback, which also keeps the virtual run time of every process current.
"""
import logging
from typing import List, Optional, Tuple

from appease.core.models import Process, SimTime
from appease.schedulers.fairshare import FairShare
from appease.schedulers.policy import SchedulerPolicy

LOG = logging.getLogger(__name__)


class Appeasement(SchedulerPolicy):
    kind = 'appeasement'

    def __init__(self, fallback: FairShare, alpha: Optional[float] = None, bootstrap_u: Optional[float] = None):
        super().__init__()
        if alpha is not None and not 0 <= alpha < 0.5:
            raise ValueError(f"alpha out of range [0, 0.5): {alpha}")
        self.fallback = fallback
        self.alpha = alpha
        self.bootstrap_u = bootstrap_u
        self._last_queue = 'q1'
        self._last_unhappy = 0

    def register(self, process: Process):
        super().register(process)
        self.fallback.register(process)

    @property
    def ready_ids(self) -> List[int]:
        return self.fallback.ready_ids

    def _ready(self) -> List[Process]:
        return [self.processes[pid] for pid in self.fallback.ready_ids]

    def _unhappy_requests(self, pid: int) -> List[int]:
        return sorted(r for r in self.ledger.requests_held_by(pid) if self.ledger.is_unhappy(r))

    def is_unhappy(self, process: Process, ran: SimTime = 0) -> bool:
        if self.ledger is None:
            return False
        return bool(self._unhappy_requests(process.id)) or self.ledger.bootstrap_u(process.id) - ran > 0

    def unhappy_ready(self) -> List[Process]:
        return [p for p in self._ready() if self.is_unhappy(p)]

    def appeasement_bootstrap(self, process: Process):
        """
        Gives a new process a synthetic unhappiness in the ledger so that it
        starts in the first queue; by default one fallback slice at the
        current run queue.
        """
        if self.ledger is None:
            return
        credit = self.bootstrap_u
        if credit is None:
            credit = self.fallback.slice_for(process)
        self.ledger.grant_bootstrap(process.id, credit)

    def _consume_bootstrap(self, process: Process, ran: SimTime):
        if self.ledger is not None and self.ledger.consume_bootstrap(process.id, ran):
            LOG.debug(f"{process} used up its bootstrap unhappiness")

    def _choose_unhappy(self, unhappy: List[Process]) -> int:
        ready = {p.id for p in unhappy}
        candidates: List[Tuple[float, int, int, int]] = []
        for request_id in sorted({r for p in unhappy for r in self._unhappy_requests(p.id)}):
            members = [pid for pid in self.ledger.call_stack(request_id)
                       if pid in ready and not self.ledger.is_frozen(request_id, pid)]
            if not members:
                continue
            best = min(members, key=lambda pid: (-self.ledger.value(request_id, pid), pid))
            candidates.append((-self.ledger.request_unhappiness(request_id), 0, request_id, best))
        for pid, credit in self.ledger.bootstrapped().items():
            if pid in ready:
                candidates.append((-credit, 1, pid, pid))
        return min(candidates)[3]

    def pick_next(self, now: SimTime) -> Tuple[int, SimTime]:
        self._check_not_empty()
        unhappy = self.unhappy_ready()
        self._last_unhappy = len(unhappy)
        if unhappy:
            self._last_queue = 'q0'
            return self.fallback.take(self._choose_unhappy(unhappy), now)
        self._last_queue = 'q1'
        return self.fallback.pick_next(now)

    def on_create(self, process: Process, now: SimTime):
        self.fallback.on_create(process, now)
        self.appeasement_bootstrap(process)

    def on_wake(self, process: Process, now: SimTime):
        self.fallback.on_wake(process, now)

    def on_slice_expired(self, process: Process, ran: SimTime, now: SimTime):
        self._consume_bootstrap(process, ran)
        self.fallback.on_slice_expired(process, ran, now)

    def on_preempted(self, process: Process, ran: SimTime, now: SimTime):
        self._consume_bootstrap(process, ran)
        self.fallback.on_preempted(process, ran, now)

    def on_leave(self, process: Process, ran: SimTime, now: SimTime):
        self._consume_bootstrap(process, ran)
        self.fallback.on_leave(process, ran, now)

    def should_preempt(self, running: Process, ran: SimTime, woken: Process, now: SimTime) -> bool:
        return self.is_unhappy(woken) and not self.is_unhappy(running, ran)

    def dispatch_detail(self):
        return {'queue': self._last_queue, 'unhappy': self._last_unhappy}

    def describe(self):
        return {
            'kind': self.kind,
            'alpha': self.alpha,
            'bootstrap_u_us': self.bootstrap_u,
            'fallback': self.fallback.describe(),
        }
