from abc import ABC, abstractmethod
from typing import Any, Dict, List, Mapping, Optional, Tuple

from appease.core.models import Process, ProcessState, SimTime, SocketKind
from appease.errors import SchedulerStateError


class SchedulerPolicy(ABC):
    """
    Abstract base class for the scheduling disciplines driven by the event
    engine. A policy owns the ready set; the engine owns the processes and
    tells the policy about every transition:

        - `on_create` when a process becomes runnable for the first time
        - `on_wake` when a sleeping or blocked process becomes runnable
        - `on_slice_expired` when the running process used up its grant
        - `on_preempted` when the running process is forced off the CPU
        - `on_leave` when the running process blocks, sleeps or exits

    `pick_next` removes the process to run from the ready set and returns
    its identifier together with the granted slice. Policies that need to
    act on their own clock (load sampling, priority decay) expose a
    `tick_period`; the engine then calls `on_tick` at that period. Every
    delivered request or service message is reported through `on_receive`.
    """
    kind: str = ''
    tick_period: Optional[SimTime] = None
    alpha: Optional[float] = None

    def __init__(self):
        self.processes: Dict[int, Process] = {}
        self.ledger = None

    def register(self, process: Process):
        self.processes[process.id] = process

    def bind(self, ledger):
        self.ledger = ledger

    @property
    @abstractmethod
    def ready_ids(self) -> List[int]:
        raise NotImplementedError

    @property
    def has_ready(self) -> bool:
        return bool(self.ready_ids)

    @abstractmethod
    def pick_next(self, now: SimTime) -> Tuple[int, SimTime]:
        """
        Chooses the next process to run.

        :param now: current simulated time
        :return: the chosen process identifier and the granted slice
        """
        raise NotImplementedError

    @abstractmethod
    def on_create(self, process: Process, now: SimTime):
        raise NotImplementedError

    @abstractmethod
    def on_wake(self, process: Process, now: SimTime):
        raise NotImplementedError

    @abstractmethod
    def on_slice_expired(self, process: Process, ran: SimTime, now: SimTime):
        raise NotImplementedError

    def on_preempted(self, process: Process, ran: SimTime, now: SimTime):
        self.on_slice_expired(process, ran, now)

    def on_leave(self, process: Process, ran: SimTime, now: SimTime):
        pass

    def should_preempt(self, running: Process, ran: SimTime, woken: Process, now: SimTime) -> bool:
        return False

    def on_tick(self, now: SimTime, runnable_count: int) -> List[Tuple[int, int]]:
        """
        Periodic hook; returns `(pid, new_nice)` for every priority change.
        """
        return []

    def on_receive(self, process: Process, kind: SocketKind, now: SimTime) -> Optional[Any]:
        return None

    def dispatch_detail(self) -> Mapping[str, Any]:
        """Extra fields describing the last `pick_next` decision."""
        return {}

    def describe(self) -> Mapping[str, Any]:
        return {'kind': self.kind}

    @staticmethod
    def _check_wakeable(process: Process):
        if process.state not in (ProcessState.SLEEPING, ProcessState.BLOCKED):
            raise SchedulerStateError(f"cannot wake {process} in state {process.state.value}")

    def _check_not_empty(self):
        if not self.has_ready:
            raise SchedulerStateError(f"{self} asked to pick from an empty ready set")

    def __str__(self):
        return self.__class__.__name__
