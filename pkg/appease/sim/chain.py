"""
Execution order of a request's service chain.

A chain is a list of CPU segments on processes. The first segment runs on
the target. A segment on a process that is not yet involved is a service
call from the current holder; a segment on the holder's caller is the
reply to that call. The last segment runs on the target again and ends
with the response.
"""
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

from appease.core.models import SimTime


@dataclass(frozen=True)
class Segment:
    process: int
    cpu_us: SimTime

    def __post_init__(self):
        if self.cpu_us <= 0:
            raise ValueError(f"segment cpu demand must be positive, got {self.cpu_us}")


class Step(NamedTuple):
    """
    A transition between two segments.

    `kind` is `call` (requester blocks on servicer), `return` (servicer
    replies to requester) or `respond` (the target answers the customer, in
    which case `servicer` is `None`).
    """
    kind: str
    requester: int
    servicer: int = None


class ChainCursor:
    def __init__(self, target: int, segments: Sequence[Segment]):
        if not segments:
            raise ValueError("a chain needs at least one segment")
        self.segments = tuple(segments)
        self.index = 0
        self.stack: List[int] = [target]

    @property
    def current(self) -> Segment:
        return self.segments[self.index]

    @property
    def holder(self) -> int:
        return self.stack[-1]

    @property
    def finished(self) -> bool:
        return self.index >= len(self.segments)

    def advance(self) -> Step:
        """Moves past the current segment and reports the transition."""
        if self.finished:
            raise ValueError("chain already finished")
        self.index += 1
        if self.finished:
            if len(self.stack) != 1:
                raise ValueError(f"chain ends with open service calls: {self.stack}")
            return Step('respond', self.stack[0])

        following = self.segments[self.index].process
        if following == self.holder:
            raise ValueError(f"consecutive segments on process {following}")
        if len(self.stack) >= 2 and following == self.stack[-2]:
            servicer = self.stack.pop()
            return Step('return', following, servicer)
        if following in self.stack:
            raise ValueError(f"process {following} can only reply to its immediate caller")
        requester = self.holder
        self.stack.append(following)
        return Step('call', requester, following)


def chain_calls(target: int, segments: Sequence[Segment]) -> List[Tuple[int, int]]:
    """
    Checks the shape of a chain without running it.

    :return: the `(requester, servicer)` pairs of every service call
    :raises ValueError: when the chain does not start and end on `target`,
            or does not nest its calls properly
    """
    if not segments:
        raise ValueError("a chain needs at least one segment")
    if segments[0].process != target:
        raise ValueError(f"chain starts on process {segments[0].process}, not on target {target}")
    if segments[-1].process != target:
        raise ValueError(f"chain ends on process {segments[-1].process}, not on target {target}")
    cursor = ChainCursor(target, segments)
    calls = []
    while not cursor.finished:
        step = cursor.advance()
        if step.kind == 'call':
            calls.append((step.requester, step.servicer))
    return calls
