"""
Deterministic discrete-event simulation of one CPU.

Events are ordered by `(time, priority, sequence)`: the end of a CPU grant
or segment comes first, then arrivals, deliveries and process creations in
the order they were scheduled, then policy timers and sampling. The CPU is
only handed out after every event of an instant has been processed, and
time jumps straight to the next event while the CPU is idle.
"""
import heapq
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Deque, Dict, List, Mapping, Optional, Tuple

import confidence
import numpy as np

from appease.core.models import Process, ProcessState, Request, SimTime, SocketKind
from appease.core.ledger import UnhappinessLedger
from appease.errors import SchedulerStateError
from appease.schedulers.policy import SchedulerPolicy
from appease.sim.chain import ChainCursor, Segment
from appease.sim.metrics import Metrics, RequestRecord
from appease.sim.scenario import BackgroundHog, PeriodicStream, RequestArrival, Scenario
from appease.sim.trace import Trace

LOG = logging.getLogger(__name__)

CPU = 0
EXTERNAL = 1
TIMER = 2
SAMPLE = 3


@dataclass(order=True)
class _Event:
    time: SimTime
    priority: int
    seq: int
    action: Callable = field(compare=False)
    args: Tuple = field(compare=False, default=())


@dataclass(frozen=True)
class _Arrival:
    customer: int
    target: int
    chain: Tuple[Segment, ...]
    weight: float
    stream: Optional[int] = None
    deadline: Optional[SimTime] = None


@dataclass
class SimulationResult:
    scenario: Scenario
    policy: Mapping[str, Any]
    trace: Trace
    metrics: Metrics


class Engine:
    def __init__(self, scenario: Scenario, policy: Optional[SchedulerPolicy] = None,
                 config: Optional[confidence.Configuration] = None):
        self.scenario = scenario
        self.policy = policy if policy is not None else scenario.policy.create(config)
        self.customers = {c.id: c for c in scenario.customers}
        self.ledger = UnhappinessLedger(self.customers, scenario.model)
        self.policy.bind(self.ledger)
        self.alpha = self.policy.alpha if self.policy.alpha is not None else scenario.model.alpha
        self.trace = Trace()
        self.now: SimTime = 0

        self.processes: Dict[int, Process] = {}
        self.inbox: Dict[int, Deque[int]] = {}
        for spec in scenario.processes:
            self._add_process(Process(spec.pid, nice=spec.nice, name=spec.name))
        self._next_pid = max(self.processes, default=0) + 1
        self._hog_demand: Dict[int, Optional[SimTime]] = {}

        self.requests: Dict[int, Request] = {}
        self._cursors: Dict[int, ChainCursor] = {}
        self._remaining: Dict[int, SimTime] = {}
        self._records: List[RequestRecord] = []
        self._series: List[Tuple[SimTime, float]] = []

        self.running: Optional[Process] = None
        self._slice_start: SimTime = 0
        self._grant_end: SimTime = 0
        self._work_start: SimTime = 0
        self._token = 0
        self._idle: SimTime = 0
        self._idle_since: Optional[SimTime] = 0

        self._queue: List[_Event] = []
        self._seq = 0

    def _add_process(self, process: Process):
        self.processes[process.id] = process
        self.inbox[process.id] = deque()
        self.policy.register(process)

    def _push(self, time: SimTime, priority: int, action: Callable, *args):
        heapq.heappush(self._queue, _Event(time, priority, self._seq, action, args))
        self._seq += 1

    def _schedule_workload(self):
        rng = np.random.default_rng(self.scenario.seed)
        for index, item in enumerate(self.scenario.workload):
            if isinstance(item, BackgroundHog):
                self._push(item.start_us, EXTERNAL, self._on_spawn, item)
            elif isinstance(item, RequestArrival):
                self._push(item.at_us, EXTERNAL, self._on_arrival,
                           _Arrival(item.customer, item.target, item.chain, item.weight))
            elif isinstance(item, PeriodicStream):
                jitter = rng.integers(0, item.jitter_us, size=item.count, endpoint=True) \
                    if item.jitter_us else np.zeros(item.count, dtype=int)
                for nominal, offset in zip(item.nominal_arrivals(), jitter):
                    at = nominal + int(offset)
                    deadline = None if item.deadline_us is None else at + item.deadline_us
                    self._push(at, EXTERNAL, self._on_arrival,
                               _Arrival(item.customer, item.target, item.chain, item.weight, index, deadline))
        if self.policy.tick_period:
            self._push(0, TIMER, self._on_tick)
        if self.scenario.series_period_us:
            self._push(0, SAMPLE, self._on_sample)

    def run(self) -> SimulationResult:
        horizon = self.scenario.horizon_us
        LOG.info(f"running {self.scenario.id} under {self.policy} until {horizon}us")
        self._schedule_workload()
        while self._queue and self._queue[0].time <= horizon:
            self.now = self._queue[0].time
            self.ledger.advance(self.now)
            while self._queue and self._queue[0].time == self.now:
                event = heapq.heappop(self._queue)
                event.action(*event.args)
            if self.now < horizon:
                self._dispatch()
        self._finish(horizon)
        metrics = Metrics(
            horizon=horizon,
            requests=sorted(self._records, key=lambda r: r.id),
            cpu={pid: p.cpu_received for pid, p in sorted(self.processes.items())},
            idle=self._idle,
            series=self._series,
            hogs=self.scenario.hog_count,
        )
        LOG.info(f"{self.scenario.id}: {len(self.trace)} events, {len(metrics.settled)} settled, "
                 f"{len(metrics.open)} open at the horizon")
        return SimulationResult(self.scenario, self.policy.describe(), self.trace, metrics)

    def _finish(self, horizon: SimTime):
        self.now = horizon
        self.ledger.advance(horizon)
        if self.running is not None:
            self.running.charge(horizon - self._slice_start)
            self.running = None
        elif self._idle_since is not None:
            self._idle += horizon - self._idle_since
        self._idle_since = None
        for request_id in self.ledger.open_requests():
            request = self.requests[request_id]
            self._records.append(RequestRecord.of(request, self.ledger.request_unhappiness(request_id),
                                                  self.ledger.request_unhappiness(request_id, clamped=True)))

    # CPU handling

    def _dispatch(self):
        if self.running is not None or not self.policy.has_ready:
            return
        pid, grant = self.policy.pick_next(self.now)
        if grant <= 0:
            raise SchedulerStateError(f"{self.policy} granted a non-positive slice {grant}")
        process = self.processes[pid]
        if process.state is not ProcessState.READY:
            raise SchedulerStateError(f"{self.policy} picked {process} in state {process.state.value}")
        if self._idle_since is not None:
            self._idle += self.now - self._idle_since
            self._idle_since = None
        process.state = ProcessState.RUNNING
        self.running = process
        self._slice_start = self.now
        self._grant_end = self.now + grant
        self._start_work(process, {'slice': grant, **self.policy.dispatch_detail()})

    def _start_work(self, process: Process, detail: Mapping[str, Any]):
        request = self.inbox[process.id][0] if self.inbox[process.id] else None
        process.serving = request
        if request is not None:
            self.ledger.stop_waiting(request, process.id, self.now)
            work = self._remaining[request]
        else:
            work = self._hog_demand.get(process.id)
        self._work_start = self.now
        self.trace.record(self.now, 'dispatch', process.id, request, **detail)
        end = self._grant_end if work is None else min(self._grant_end, self.now + work)
        self._token += 1
        self._push(end, CPU, self._on_cpu, self._token)

    def _release(self, process: Process, state: ProcessState) -> SimTime:
        """Takes the running process off the CPU; returns its time on the CPU."""
        ran = self.now - self._slice_start
        process.charge(ran)
        process.state = state
        self.running = None
        self._idle_since = self.now
        self._token += 1
        return ran

    def _consume(self, process: Process) -> SimTime:
        """Books the work done since the process started its current piece of work."""
        done = self.now - self._work_start
        if process.serving is not None:
            self._remaining[process.serving] -= done
        elif self._hog_demand.get(process.id) is not None:
            self._hog_demand[process.id] -= done
        return done

    def _credit(self, process: Process, done: SimTime):
        # running time counts against a request only when the process is
        # taken off the CPU with work left on its segment
        request = process.serving
        if request is None or done <= 0:
            return
        self.ledger.start_waiting(request, process.id, self.now)
        self.ledger.accrue(request, process.id, done, was_running=True)

    def _on_cpu(self, token: int):
        if token != self._token or self.running is None:
            return
        process = self.running
        done = self._consume(process)
        if process.hog:
            if self._hog_demand.get(process.id) == 0:
                self.trace.record(self.now, 'exit', process.id, ran=done)
                ran = self._release(process, ProcessState.SLEEPING)
                process.sleep_since = self.now
                self.policy.on_leave(process, ran, self.now)
            else:
                self._expire(process, done)
        elif self._remaining[process.serving] == 0:
            self._complete_segment(process, done)
        else:
            self._expire(process, done)

    def _expire(self, process: Process, done: SimTime):
        self.trace.record(self.now, 'preempt', process.id, process.serving, reason='expired', ran=done)
        self._credit(process, done)
        ran = self._release(process, ProcessState.READY)
        self.policy.on_slice_expired(process, ran, self.now)

    def _complete_segment(self, process: Process, done: SimTime):
        request = process.serving
        cursor = self._cursors[request]
        step = cursor.advance()
        if step.kind == 'call':
            self.ledger.split_on_block(request, process.id, step.servicer, alpha=self.alpha, now=self.now)
            self._remaining[request] = cursor.current.cpu_us
            self.trace.record(self.now, 'block', process.id, request, on=step.servicer, ran=done)
            LOG.debug(f"{self.now}: {process} blocks on {step.servicer} for request {request}")
            process.blocked_on = step.servicer
            process.sleep_since = self.now
            ran = self._release(process, ProcessState.BLOCKED)
            self.policy.on_leave(process, ran, self.now)
            self._push(self.now, EXTERNAL, self._on_delivery, step.servicer, request, SocketKind.UNIX, False)
            return

        if step.kind == 'return':
            self.ledger.merge_on_unblock(request, step.requester, process.id, now=self.now)
            self._remaining[request] = cursor.current.cpu_us
            self.trace.record(self.now, 'unblock', step.requester, request, **{'from': process.id, 'ran': done})
            self._push(self.now, EXTERNAL, self._on_delivery, step.requester, request, SocketKind.UNIX, True)
        else:
            self._settle(process, request, done)

        self.inbox[process.id].popleft()
        process.serving = None
        self._continue_or_leave(process)

    def _settle(self, process: Process, request_id: int, done: SimTime):
        clamped = self.ledger.request_unhappiness(request_id, clamped=True)
        realized = self.ledger.settle_response(request_id, self.now)
        request = self.requests[request_id]
        self._records.append(RequestRecord.of(request, realized, clamped))
        del self._cursors[request_id]
        del self._remaining[request_id]
        self.trace.record(self.now, 'settle', process.id, request_id, latency=request.latency, u=realized, ran=done)
        LOG.debug(f"{self.now}: request {request_id} settled after {request.latency}us, unhappiness {realized}")

    def _continue_or_leave(self, process: Process):
        if self.inbox[process.id]:
            if self.now < self._grant_end:
                # keeps the rest of its grant for the next queued request
                self._start_work(process, {'slice': self._grant_end - self.now, 'cont': 1})
                return
            self.trace.record(self.now, 'preempt', process.id, reason='expired', ran=0)
            ran = self._release(process, ProcessState.READY)
            self.policy.on_slice_expired(process, ran, self.now)
        else:
            ran = self._release(process, ProcessState.SLEEPING)
            process.sleep_since = self.now
            self.policy.on_leave(process, ran, self.now)

    # external events

    def _wake(self, process: Process, request: Optional[int], **detail):
        self.trace.record(self.now, 'wake', process.id, request, **detail)
        self.policy.on_wake(process, self.now)
        process.state = ProcessState.READY
        self._check_preempt(process)

    def _check_preempt(self, woken: Process):
        running = self.running
        if running is None:
            return
        if not self.policy.should_preempt(running, self.now - self._slice_start, woken, self.now):
            return
        done = self._consume(running)
        self.trace.record(self.now, 'preempt', running.id, running.serving, reason='wakeup', ran=done, by=woken.id)
        self._credit(running, done)
        ran = self._release(running, ProcessState.READY)
        self.policy.on_preempted(running, ran, self.now)

    def _on_spawn(self, item: BackgroundHog):
        for _ in range(item.count):
            process = Process(self._next_pid, state=ProcessState.READY, nice=item.nice, mlfq_level=item.level,
                              hog=True, name=f"hog{self._next_pid}")
            self._next_pid += 1
            self._add_process(process)
            self._hog_demand[process.id] = item.demand_us
            self.trace.record(self.now, 'wake', process.id, new=1)
            self.policy.on_create(process, self.now)
            self._check_preempt(process)

    def _on_arrival(self, arrival: _Arrival):
        request = Request(len(self.requests) + 1, arrival.customer, arrival.target, self.now, arrival.weight,
                          stream=arrival.stream, deadline=arrival.deadline)
        self.requests[request.id] = request
        self.ledger.open(request, self.now)
        self._cursors[request.id] = ChainCursor(arrival.target, arrival.chain)
        self._remaining[request.id] = arrival.chain[0].cpu_us
        self.trace.record(self.now, 'arrive', arrival.target, request.id, customer=arrival.customer)
        self._on_delivery(arrival.target, request.id, self.customers[arrival.customer].socket, False)

    def _on_delivery(self, pid: int, request: int, socket: SocketKind, reply: bool):
        """
        A socket read at `pid`: a direct request, a service call, or the
        reply to a service call the process is blocked on.
        """
        process = self.processes[pid]
        boost = self.policy.on_receive(process, socket, self.now)
        if boost is not None:
            self.trace.record(self.now, 'boost', pid, request, nice=boost.current_nice, delay=boost.delay)
        if reply:
            process.blocked_on = None
            self._wake(process, request)
            return
        self.inbox[pid].append(request)
        if process.state is ProcessState.SLEEPING:
            self._wake(process, request)

    # timers

    def _runnable_count(self) -> int:
        return sum(1 for p in self.processes.values() if p.runnable)

    def _on_tick(self):
        for pid, nice in self.policy.on_tick(self.now, self._runnable_count()):
            self.trace.record(self.now, 'decay', pid, nice=nice)
        following = self.now + self.policy.tick_period
        if following <= self.scenario.horizon_us:
            self._push(following, TIMER, self._on_tick)

    def _on_sample(self):
        self._series.append((self.now, self.ledger.system_unhappiness()))
        following = self.now + self.scenario.series_period_us
        if following <= self.scenario.horizon_us:
            self._push(following, SAMPLE, self._on_sample)


def run(scenario: Scenario, config: Optional[confidence.Configuration] = None) -> SimulationResult:
    return Engine(scenario, config=config).run()
