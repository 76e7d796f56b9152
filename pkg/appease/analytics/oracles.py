"""
Closed-form unhappiness of a single request under round-robin, multilevel
feedback queue, fair-share and fair-share with priority elevation.

Every oracle reports two values: the formula exactly as printed, and a
corrected form derived from pure waiting time. The printed forms contain
unit slips (a missing factor of the slice length, a doubly subtracted
execution time, an off-by-one-quantum simplification); both values are
kept so comparisons quantify those slips rather than hide them. Inputs
that violate a formula's assumptions are flagged, never raised, so that a
comparison can exclude them.
"""
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Tuple

WEIGHT_STEP = 1.25


@dataclass(frozen=True)
class OracleResult:
    formula: str
    verbatim_value: float
    corrected_value: float
    assumptions: Tuple[str, ...]
    variants: Mapping[str, float] = field(default_factory=dict)
    violations: Tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def value(self, form: str) -> float:
        if form == 'verbatim':
            return self.verbatim_value
        if form == 'corrected':
            return self.corrected_value
        try:
            return self.variants[form]
        except KeyError:
            raise ValueError(f"{self.formula} has no form {form!r}")


_RR_ASSUMPTIONS = (
    'alpha=0',
    'n-1 competitors always ready and using full quanta',
    'verbatim form matches wait_minus_run accounting',
    'corrected form matches net_wait accounting',
)


def _check_positive(name: str, value):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


def rr_min(q: float, z: int, n: int) -> OracleResult:
    """
    Unhappiness of a direct request needing `z` quanta of `q` among `n`
    processes under round-robin.
    """
    _check_positive('q', q)
    if z < 1:
        raise ValueError(f"z must be at least 1, got {z}")
    violations = () if n >= 2 else (f"n={n} < 2: no competitors",)
    return OracleResult(
        'rr_min',
        verbatim_value=q * (z * (n - 2) + 1),
        corrected_value=z * q * (n - 1),
        assumptions=_RR_ASSUMPTIONS,
        violations=violations,
    )


def rr_typical(q: float, z1: int, z2: int, z3: int, n: int) -> OracleResult:
    """Round-robin unhappiness of a request served as target, servicer, target."""
    _check_positive('q', q)
    if min(z1, z2, z3) < 0:
        raise ValueError(f"quantum counts cannot be negative: {(z1, z2, z3)}")
    violations = []
    if n < 2:
        violations.append(f"n={n} < 2: no competitors")
    if z1 < 1:
        violations.append("z1 < 1: the target does no work before blocking")
    if z2 == 0 or z3 == 0:
        violations.append("service or reply segment empty: compare against rr_min instead")
    total = z1 + z2 + z3
    return OracleResult(
        'rr_typical',
        verbatim_value=q * (total * (n - 2) + 3),
        corrected_value=total * q * (n - 1),
        assumptions=_RR_ASSUMPTIONS,
        violations=tuple(violations),
    )


def _mlfq_terms(q: float, a: Sequence[int], z: int):
    """
    :return: `(top level, verbatim, corrected, simplified, violations)` for
            one segment of `z` quanta
    """
    violations = []
    x = math.log2(z + 1) - 1 if z >= 1 else -1
    if x < 0 or x != int(x):
        violations.append(f"z={z}: z + 1 is not a power of two, no whole number of queues")
        return None, math.nan, math.nan, math.nan, violations
    x = int(x)
    if len(a) < x + 1:
        violations.append(f"process counts given for {len(a)} queues, need {x + 1}")
        return x, math.nan, math.nan, math.nan, violations
    if any(count < 1 for count in a[:x + 1]):
        violations.append(f"queue counts must include the request's own process: {list(a[:x + 1])}")
    waiting = sum(2 ** i * (a[i] - 1) for i in range(x + 1))
    credited = sum(2 ** i for i in range(x))
    return x, q * (waiting - credited), q * waiting, q * (waiting - 2 ** x), violations


_MLFQ_ASSUMPTIONS = (
    'alpha=0',
    'a[i] counts the processes in queue i including the request\'s own',
    'every competitor uses its full grant',
    'verbatim form matches wait_minus_run accounting',
    'corrected form matches net_wait accounting',
)


def mlfq_min(q: float, a: Sequence[int], z: int) -> OracleResult:
    """
    Unhappiness of a direct request needing `z` quanta under the multilevel
    feedback queue with `a[i]` processes in queue `i`. The `simplified`
    variant is the closed form whose last term is `2**x` rather than
    `2**x - 1`, which puts it one quantum below the unsimplified sum.
    """
    _check_positive('q', q)
    x, verbatim, corrected, simplified, violations = _mlfq_terms(q, a, z)
    return OracleResult(
        'mlfq_min',
        verbatim_value=verbatim,
        corrected_value=corrected,
        assumptions=_MLFQ_ASSUMPTIONS + (f"top queue x={x}",),
        variants={'simplified': simplified},
        violations=tuple(violations),
    )


def mlfq_typical(q: float, a: Sequence[int], z1: int, z2: int, z3: int) -> OracleResult:
    """Sum of three segment terms, each segment starting over in queue 0."""
    _check_positive('q', q)
    parts = [_mlfq_terms(q, a, z) for z in (z1, z2, z3)]
    violations = tuple(f"segment {k + 1}: {v}" for k, part in enumerate(parts) for v in part[4])
    return OracleResult(
        'mlfq_typical',
        verbatim_value=sum(part[1] for part in parts),
        corrected_value=sum(part[2] for part in parts),
        assumptions=_MLFQ_ASSUMPTIONS + ('each segment meets a fresh set of competitors',),
        variants={'simplified': sum(part[3] for part in parts)},
        violations=violations,
    )


def cfs_typical(sch_lat: float, n: int, tau1: float, tau2: float, tau3: float) -> OracleResult:
    """
    Fair-share unhappiness of the three-part request among `n` nice-0
    processes, with slice `q = sch_lat / n`. The first slice of every
    segment runs at once (the woken process is placed leftmost), every
    further slice waits one round of `n - 1` slices.
    """
    _check_positive('sch_lat', sch_lat)
    if min(tau1, tau2, tau3) <= 0:
        raise ValueError(f"segment demands must be positive: {(tau1, tau2, tau3)}")
    violations = []
    if n < 2:
        violations.append(f"n={n} < 2: no competitors")
        n = max(n, 1)
    q = sch_lat / n
    for k, tau_k in enumerate((tau1, tau2, tau3), start=1):
        if not math.isclose(tau_k / q, round(tau_k / q)):
            violations.append(f"tau{k}={tau_k} is not a multiple of the slice {q}")
    tau = tau1 + tau2 + tau3
    rounds = tau / q - 3
    return OracleResult(
        'cfs_typical',
        verbatim_value=(n - 1) * rounds - tau,
        corrected_value=rounds * (n - 1) * q,
        assumptions=('alpha=0', 'all processes at nice 0', 'woken processes count as short sleepers',
                     f"slice q=sch_lat/n={q}", 'corrected form matches net_wait accounting'),
        variants={'best_case': 0.0},
        violations=tuple(violations),
    )


def rbpe_share(nice: int, n: int) -> float:
    """
    CPU fraction of one process elevated by `nice` levels among `n - 1`
    processes at nice 0.
    """
    if n < 1:
        raise ValueError(f"run queue needs at least one process, got {n}")
    boost = WEIGHT_STEP ** abs(nice)
    return boost / (n - 1 + boost)


def rbpe_slice(sch_lat: float, n: int, nice: int) -> float:
    return rbpe_share(nice, n) * sch_lat


def rbpe_typical(sch_lat: float, n: int, nice: int, z1: int, z2: int, z3: int) -> OracleResult:
    """
    Unhappiness of the three-part request when every process serving it is
    elevated by `nice` levels on each request and loses one level per slice.
    `nice` may be given as a level count or as the negative nice value.
    """
    _check_positive('sch_lat', sch_lat)
    level = abs(nice)
    violations = []
    if not 0 < level <= 15:
        violations.append(f"elevation {level} outside 1..15")
    if n < 2:
        violations.append(f"n={n} < 2: no competitors")
    for k, z in enumerate((z1, z2, z3), start=1):
        if z < 1:
            violations.append(f"z{k}={z} < 1")
        if z > level + 1:
            violations.append(f"z{k}={z} exceeds elevation + 1 = {level + 1}")

    def waiting(z):
        return sum((n - 1) * sch_lat / (n - 1 + WEIGHT_STEP ** (level - i)) for i in range(z - 1))

    def share(z):
        return sum(WEIGHT_STEP ** (level - i) / (n - 1 + WEIGHT_STEP ** (level - i)) for i in range(1, z))

    waits = sum(waiting(z) for z in (z1, z2, z3))
    tau = sum(share(z) for z in (z1, z2, z3))
    return OracleResult(
        'rbpe_typical',
        verbatim_value=waits - tau,
        corrected_value=waits - sch_lat * tau,
        assumptions=('alpha=0', 'decay delay at most one slice', f"n={n} processes including the request's",
                     'competitors at nice 0'),
        variants={'fair_share_waiting': sum((n - 1) * sch_lat / n * (z - 1) for z in (z1, z2, z3))},
        violations=tuple(violations),
    )
