"""
Per-(request, process) unhappiness bookkeeping.

Waiting time is accrued lazily: an entry that is waiting remembers since
when, and its value is folded in whenever the entry changes state or is
read. Explicit `accrue` calls apply the accounting mode directly. New
processes can hold bootstrap unhappiness outside any request, which only
their own running time uses up.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Set, Tuple

from appease.core.models import AccountingMode, Customer, ModelConfig, Request, ServiceCall, SimTime
from appease.errors import ConfigurationError, LedgerConsistencyError, SchedulerStateError

LOG = logging.getLogger(__name__)


@dataclass
class LedgerEntry:
    u: float = 0.0
    frozen: bool = False
    waiting_since: Optional[SimTime] = None


class UnhappinessLedger:
    def __init__(self, customers: Mapping[int, Customer], config: ModelConfig = ModelConfig()):
        self.customers = dict(customers)
        self.config = config
        self.now: SimTime = 0
        self.requests: Dict[int, Request] = {}
        self._entries: Dict[int, Dict[int, LedgerEntry]] = {}
        self._stacks: Dict[int, List[int]] = {}
        self._held: Dict[int, Set[int]] = defaultdict(set)
        self._run_credited: Set[int] = set()
        self._bootstrap: Dict[int, float] = {}

    def advance(self, now: SimTime):
        if now < self.now:
            raise ValueError(f"ledger time cannot go back from {self.now} to {now}")
        self.now = now

    def open(self, request: Request, now: Optional[SimTime] = None):
        """
        Registers an arriving request. The target's entry starts at zero and
        accrues waiting time from `now` on.
        """
        if request.id in self.requests:
            raise SchedulerStateError(f"request {request.id} is already in the ledger")
        self.advance(request.arrival if now is None else now)
        self.requests[request.id] = request
        self._entries[request.id] = {request.target: LedgerEntry(waiting_since=self.now)}
        self._stacks[request.id] = [request.target]
        self._held[request.target].add(request.id)

    def entry(self, request_id: int, pid: int) -> LedgerEntry:
        try:
            return self._entries[request_id][pid]
        except KeyError:
            raise LedgerConsistencyError(f"no ledger entry for request {request_id} at process {pid}")

    def value(self, request_id: int, pid: int) -> float:
        entry = self.entry(request_id, pid)
        if entry.waiting_since is None:
            return entry.u
        return entry.u + (self.now - entry.waiting_since)

    def is_frozen(self, request_id: int, pid: int) -> bool:
        return self.entry(request_id, pid).frozen

    def holder(self, request_id: int) -> int:
        """The process holding the active entry of an open request."""
        try:
            return self._stacks[request_id][-1]
        except KeyError:
            raise SchedulerStateError(f"request {request_id} is not open")

    def call_stack(self, request_id: int) -> Tuple[int, ...]:
        return tuple(self._stacks.get(request_id, ()))

    def subgraph(self, request_id: int) -> List[int]:
        """Processes involved in serving a request, in order of involvement."""
        return list(self._entries.get(request_id, {}))

    def open_requests(self) -> List[int]:
        return sorted(self._stacks)

    def requests_held_by(self, pid: int) -> Set[int]:
        return set(self._held.get(pid, ()))

    def accrue(self, request_id: int, pid: int, dt: SimTime, was_running: bool):
        if dt <= 0:
            raise ValueError(f"accrual interval must be positive, got {dt}")
        entry = self.entry(request_id, pid)
        if entry.frozen:
            return
        if not was_running:
            entry.u += dt
        elif self.config.accounting is AccountingMode.WAIT_MINUS_RUN:
            entry.u -= dt
            self._run_credited.add(request_id)

    def _fold(self, request_id: int, pid: int):
        entry = self.entry(request_id, pid)
        if entry.waiting_since is not None and self.now > entry.waiting_since:
            self.accrue(request_id, pid, self.now - entry.waiting_since, was_running=False)
        if entry.waiting_since is not None:
            entry.waiting_since = self.now

    def start_waiting(self, request_id: int, pid: int, now: SimTime):
        self.advance(now)
        entry = self.entry(request_id, pid)
        if entry.frozen:
            raise SchedulerStateError(f"frozen entry of request {request_id} at {pid} cannot wait")
        if entry.waiting_since is None:
            entry.waiting_since = now

    def stop_waiting(self, request_id: int, pid: int, now: SimTime):
        self.advance(now)
        self._fold(request_id, pid)
        self.entry(request_id, pid).waiting_since = None

    def split_on_block(self, request_id: int, requester: int, servicer: int,
                       alpha: Optional[float] = None, now: Optional[SimTime] = None):
        """
        Hands the requester's unhappiness to a servicer when the requester
        blocks on it: `alpha * u` stays (frozen) with the requester and the
        remainder becomes the servicer's active entry.
        """
        alpha = self.config.alpha if alpha is None else alpha
        if not 0 <= alpha < 0.5:
            raise ValueError(f"alpha out of range [0, 0.5): {alpha}")
        if now is not None:
            self.advance(now)
        stack = self._stacks.get(request_id)
        if not stack or stack[-1] != requester:
            raise SchedulerStateError(f"process {requester} holds no active entry for request {request_id}")
        if servicer in stack:
            raise SchedulerStateError(f"process {servicer} already serves request {request_id}")

        self._fold(request_id, requester)
        source = self.entry(request_id, requester)
        u = source.u
        source.u = alpha * u
        source.frozen = True
        source.waiting_since = None

        self._entries[request_id][servicer] = LedgerEntry(u=(1 - alpha) * u, waiting_since=self.now)
        stack.append(servicer)
        self._held[requester].discard(request_id)
        self._held[servicer].add(request_id)
        self.requests[request_id].chain.append(ServiceCall(requester, servicer, opened=self.now))

    def merge_on_unblock(self, request_id: int, requester: int, servicer: int, now: Optional[SimTime] = None):
        """
        Passes the servicer's unhappiness back to the requester when the
        service is delivered; the servicer's entry is reset to zero.
        """
        if now is not None:
            self.advance(now)
        stack = self._stacks.get(request_id, [])
        entries = self._entries.get(request_id, {})
        if servicer not in entries or stack[-2:] != [requester, servicer] or not entries[requester].frozen:
            raise SchedulerStateError(f"process {requester} is not blocked on {servicer} for request {request_id}")
        target = entries[servicer]
        source = entries[requester]

        self._fold(request_id, servicer)
        source.u += target.u
        source.frozen = False
        source.waiting_since = self.now
        target.u = 0.0
        target.waiting_since = None
        stack.pop()
        self._held[servicer].discard(request_id)
        self._held[requester].add(request_id)

        for call in reversed(self.requests[request_id].chain):
            if call.is_open and call.requester == requester and call.servicer == servicer:
                call.close(self.now)
                break

    def settle_response(self, request_id: int, now: SimTime) -> float:
        """
        Records the response to a request and returns its realized (weighted)
        unhappiness; all of its entries are zero afterwards.
        """
        request = self.requests.get(request_id)
        if request is None:
            raise LedgerConsistencyError(f"unknown request {request_id}")
        if request.settled:
            raise SchedulerStateError(f"request {request_id} was already settled at {request.response}")
        if request.open_calls:
            raise SchedulerStateError(f"request {request_id} still waits on {len(request.open_calls)} service call(s)")

        self.advance(now)
        realized = self.request_unhappiness(request_id)
        request.respond(now)
        for pid, entry in self._entries[request_id].items():
            entry.u = 0.0
            entry.frozen = False
            entry.waiting_since = None
            self._held[pid].discard(request_id)
        del self._stacks[request_id]
        self._run_credited.discard(request_id)
        LOG.debug(f"request {request_id} settled at {now} with unhappiness {realized}")
        return realized

    def _customer(self, customer_id: int) -> Customer:
        try:
            return self.customers[customer_id]
        except KeyError:
            raise ConfigurationError(f"unknown customer {customer_id}")

    def raw_unhappiness(self, request_id: int, clamped: bool = False) -> float:
        """Sum of the entries of a request, without customer or request weights."""
        if request_id not in self._entries:
            raise LedgerConsistencyError(f"unknown request {request_id}")
        values = (self.value(request_id, pid) for pid in self._entries[request_id])
        if clamped:
            values = (max(v, 0.0) for v in values)
        return sum(values)

    def request_unhappiness(self, request_id: int, clamped: bool = False) -> float:
        if request_id not in self.requests:
            raise LedgerConsistencyError(f"unknown request {request_id}")
        request = self.requests[request_id]
        customer = self._customer(request.customer)
        return customer.weight * request.weight * self.raw_unhappiness(request_id, clamped)

    def is_unhappy(self, request_id: int) -> bool:
        """
        Whether an open request competes for the first scheduling queue: its
        weighted unhappiness is positive, or still zero without any running
        time credited against it, as at the instant it arrives.
        """
        u = self.request_unhappiness(request_id)
        return u > 0 or (u == 0 and request_id not in self._run_credited)

    def grant_bootstrap(self, pid: int, u: float):
        """
        Gives a new process synthetic unhappiness that only its own running
        time uses up.
        """
        if u > 0:
            self._bootstrap[pid] = float(u)

    def bootstrap_u(self, pid: int) -> float:
        return self._bootstrap.get(pid, 0.0)

    def bootstrapped(self) -> Dict[int, float]:
        return dict(self._bootstrap)

    def consume_bootstrap(self, pid: int, ran: SimTime) -> bool:
        """:return: whether the process used up its bootstrap unhappiness"""
        if pid not in self._bootstrap:
            return False
        self._bootstrap[pid] -= ran
        if self._bootstrap[pid] > 0:
            return False
        del self._bootstrap[pid]
        return True

    def customer_unhappiness(self, customer_id: int) -> float:
        own = [self.requests[r] for r in self._stacks if self.requests[r].customer == customer_id]
        if not own:
            return 0.0
        customer = self._customer(customer_id)
        return customer.weight * sum(r.weight * self.raw_unhappiness(r.id) for r in own)

    def system_unhappiness(self) -> float:
        customers = sorted({self.requests[r].customer for r in self._stacks})
        return sum(self.customer_unhappiness(c) for c in customers)
