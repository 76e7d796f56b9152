"""
Programmatic scenarios: the controlled setups the closed-form unhappiness
formulas assume, and desk-scale analogs of interactive workloads competing
with background load. Every builder returns plain scenario data, in the same
shape as a scenario file, to be validated by `parse_scenario`.
"""
import math
from typing import Any, Dict, List, Optional, Sequence

from appease.core.models import MICROS_PER_SECOND, SimTime

MS = 1000

TARGET = 1
SERVICER = 2


def scenario_data(scenario_id: str, policy: Dict[str, Any], workload: List[Dict[str, Any]], horizon_us: SimTime,
                  processes: Sequence[Dict[str, Any]] = ({'pid': TARGET, 'name': 'target'},),
                  customers: Sequence[Dict[str, Any]] = ({'id': 1},),
                  accounting: str = 'wait_minus_run', alpha: float = 0.0, seed: int = 0) -> Dict[str, Any]:
    return {
        'id': scenario_id,
        'policy': dict(policy),
        'model': {'alpha': alpha, 'accounting': accounting},
        'processes': [dict(p) for p in processes],
        'customers': [dict(c) for c in customers],
        'workload': workload,
        'horizon_us': horizon_us,
        'seed': seed,
    }


def _request(at_us: SimTime, chain: Sequence[Sequence[int]], customer: int = 1) -> Dict[str, Any]:
    return {
        'type': 'request',
        'at_us': at_us,
        'customer': customer,
        'target': chain[0][0],
        'chain': [{'process': pid, 'cpu_us': cpu} for pid, cpu in chain],
    }


def _hogs(count: int, start_us: SimTime = 0, **extra) -> Dict[str, Any]:
    return {'type': 'hogs', 'start_us': start_us, 'count': count, **extra}


def _three_segments(first: SimTime, second: SimTime, third: SimTime):
    return [(TARGET, first), (SERVICER, second), (TARGET, third)]


_PAIR = ({'pid': TARGET, 'name': 'target'}, {'pid': SERVICER, 'name': 'servicer'})


def rr_min_scenario(q: SimTime, z: int, n: int, accounting: str = 'wait_minus_run') -> Dict[str, Any]:
    """
    A direct request needing `z` quanta at a process that shares the CPU
    with `n - 1` hogs under round-robin.
    """
    return scenario_data(
        f"rr-min-q{q}-z{z}-n{n}",
        {'kind': 'rr', 'quantum_us': q},
        [_hogs(n - 1), _request(0, [(TARGET, z * q)])],
        horizon_us=(z * n + 1) * q,
        accounting=accounting,
    )


def rr_typical_scenario(q: SimTime, z1: int, z2: int, z3: int, n: int,
                        accounting: str = 'wait_minus_run') -> Dict[str, Any]:
    """
    A request served in three parts (target, servicer, target), needing
    `z1`, `z2` and `z3` quanta, while `n - 1` hogs keep the CPU busy.
    """
    return scenario_data(
        f"rr-typical-q{q}-z{z1}.{z2}.{z3}-n{n}",
        {'kind': 'rr', 'quantum_us': q},
        [_hogs(n - 1), _request(0, _three_segments(z1 * q, z2 * q, z3 * q))],
        horizon_us=((z1 + z2 + z3) * n + 1) * q,
        processes=_PAIR,
        accounting=accounting,
    )


def _mlfq_top_level(z: int) -> int:
    x = math.log2(z + 1) - 1
    if x < 0 or x != int(x):
        raise ValueError(f"z + 1 must be a power of two, got z={z}")
    return int(x)


def _mlfq_segment_hogs(q: SimTime, a: Sequence[int], x: int, start_us: SimTime) -> List[Dict[str, Any]]:
    # one grant each, so every hog is gone by the time the segment completes
    return [_hogs(a[i] - 1, start_us, level=i, demand_us=2 ** i * q) for i in range(x + 1) if a[i] > 1]


def _mlfq_segment_length(q: SimTime, a: Sequence[int], z: int) -> SimTime:
    x = _mlfq_top_level(z)
    return sum((a[i] - 1) * 2 ** i * q for i in range(x + 1)) + z * q


def mlfq_min_scenario(q: SimTime, a: Sequence[int], z: int, accounting: str = 'wait_minus_run') -> Dict[str, Any]:
    """
    A direct request needing `z` quanta under the multilevel feedback queue,
    with `a[i] - 1` competing processes in queue `i` besides the request's
    own process when it gets there.
    """
    x = _mlfq_top_level(z)
    if len(a) < x + 1:
        raise ValueError(f"need a process count for queues 0..{x}, got {list(a)}")
    return scenario_data(
        f"mlfq-min-q{q}-a{'.'.join(map(str, a))}-z{z}",
        {'kind': 'mlfq', 'quantum_us': q, 'levels': max(len(a), x + 1)},
        [*_mlfq_segment_hogs(q, a, x, 0), _request(0, [(TARGET, z * q)])],
        horizon_us=_mlfq_segment_length(q, a, z) + q,
        accounting=accounting,
    )


def mlfq_typical_scenario(q: SimTime, a: Sequence[int], z1: int, z2: int, z3: int,
                          accounting: str = 'wait_minus_run') -> Dict[str, Any]:
    """
    The three-part request under the multilevel feedback queue. Each part
    starts over in queue 0 and meets a fresh set of competitors.
    """
    workload = []
    start = 0
    for z in (z1, z2, z3):
        x = _mlfq_top_level(z)
        if len(a) < x + 1:
            raise ValueError(f"need a process count for queues 0..{x}, got {list(a)}")
        workload.extend(_mlfq_segment_hogs(q, a, x, start))
        start += _mlfq_segment_length(q, a, z)
    workload.append(_request(0, _three_segments(z1 * q, z2 * q, z3 * q)))
    return scenario_data(
        f"mlfq-typical-q{q}-a{'.'.join(map(str, a))}-z{z1}.{z2}.{z3}",
        {'kind': 'mlfq', 'quantum_us': q, 'levels': max(len(a), 1 + max(map(_mlfq_top_level, (z1, z2, z3))))},
        workload,
        horizon_us=start + q,
        processes=_PAIR,
        accounting=accounting,
    )


def cfs_typical_scenario(sch_lat: SimTime, n: int, tau1: SimTime, tau2: SimTime, tau3: SimTime,
                         kind: str = 'fairshare', accounting: str = 'net_wait',
                         **policy) -> Dict[str, Any]:
    """
    The three-part request under fair-share scheduling with `n - 1` hogs.
    Every wakeup counts as a short sleep, and slices are exactly
    `sch_lat / n`, so the request's processes wait whole rounds.
    """
    tau = tau1 + tau2 + tau3
    horizon = tau * n + 2 * sch_lat
    return scenario_data(
        f"{kind}-typical-l{sch_lat}-n{n}-t{tau1}.{tau2}.{tau3}",
        {'kind': kind, 'sch_lat_us': sch_lat, 'sleeper_threshold_us': horizon,
         'min_granularity_us': sch_lat // n, **policy},
        [_hogs(n - 1), _request(0, _three_segments(tau1, tau2, tau3))],
        horizon_us=horizon,
        processes=_PAIR,
        accounting=accounting,
    )


def rbpe_chain_scenario(sch_lat: SimTime, n: int, z1: int, z2: int, z3: int,
                        kind: str = 'fairshare_rbpe', accounting: str = 'net_wait') -> Dict[str, Any]:
    """
    The three-part request in slices of `sch_lat / n`, with the load
    estimate held at `n` runnable processes so that requests are elevated
    according to the table.
    """
    q = sch_lat // n
    policy = {'initial_avenrun': n * 2048} if kind == 'fairshare_rbpe' else {}
    return cfs_typical_scenario(sch_lat, n, z1 * q, z2 * q, z3 * q, kind=kind, accounting=accounting, **policy)


def share_scenario(nice: int, n: int, sch_lat: SimTime, periods: int = 1000, kind: str = 'fairshare') \
        -> Dict[str, Any]:
    """
    One CPU-bound process at a fixed `nice` (the first hog, pid 1) among
    `n - 1` CPU-bound processes at nice 0.
    """
    return scenario_data(
        f"share-{kind}-nice{nice}-n{n}",
        {'kind': kind, 'sch_lat_us': sch_lat},
        [_hogs(1, nice=nice), _hogs(n - 1)],
        horizon_us=periods * sch_lat,
        processes=(),
        customers=(),
    )


def appeasement_chain_scenario(kind: str, hogs: int, tau1: SimTime, tau2: SimTime, tau3: SimTime,
                               sch_lat: SimTime = 24 * MS, quantum: SimTime = 10 * MS,
                               accounting: str = 'net_wait') -> Dict[str, Any]:
    """
    The three-part request arriving after the background hogs have used up
    their start-up credit, for comparing all policies on the same setup.
    """
    arrival = sch_lat * (hogs + 1)
    params = {
        'rr': {'quantum_us': quantum},
        'mlfq': {'quantum_us': quantum, 'levels': 8},
        'fairshare': {'sch_lat_us': sch_lat},
        'fairshare_rbpe': {'sch_lat_us': sch_lat},
        'appeasement': {'fallback': {'sch_lat_us': sch_lat}},
    }[kind]
    tau = tau1 + tau2 + tau3
    return scenario_data(
        f"chain-{kind}-h{hogs}",
        {'kind': kind, **params},
        [_hogs(hogs), _request(arrival, _three_segments(tau1, tau2, tau3))],
        horizon_us=arrival + tau * (hogs + 2) + 8 * max(sch_lat, quantum) * (hogs + 1),
        processes=_PAIR,
        accounting=accounting,
    )


def _warm(kind: str) -> Dict[str, Any]:
    return {'warm_start': True} if kind == 'fairshare_rbpe' else {}


def deadline_stream_scenario(kind: str, hogs: int, count: int = 3750, period: SimTime = 40 * MS,
                             deadline: SimTime = 100 * MS, demand: SimTime = 12 * MS,
                             start: SimTime = MICROS_PER_SECOND, jitter: SimTime = 0, seed: int = 0) \
        -> Dict[str, Any]:
    """
    A local player that must handle one frame per `period` within
    `deadline`, while `hogs` background processes compete for the CPU.
    """
    return scenario_data(
        f"deadline-{kind}-h{hogs}",
        {'kind': kind, **_warm(kind)},
        [_hogs(hogs),
         {'type': 'stream', 'start_us': start, 'period_us': period, 'count': count, 'jitter_us': jitter,
          'deadline_us': deadline, 'customer': 1, 'target': TARGET,
          'chain': [{'process': TARGET, 'cpu_us': demand}]}],
        horizon_us=start + count * period + deadline,
        processes=({'pid': TARGET, 'name': 'player'},),
        seed=seed,
    )


def transaction_stream_scenario(kind: str, hogs: int, count: int = 600, period: SimTime = 50 * MS,
                                start: SimTime = MICROS_PER_SECOND, seed: int = 0) -> Dict[str, Any]:
    """
    Remote clients sending a transaction every `period` to a database
    process that needs a helper process for the middle part of the work.
    """
    chain = [(TARGET, 2 * MS), (SERVICER, 6 * MS), (TARGET, 2 * MS)]
    return scenario_data(
        f"transaction-{kind}-h{hogs}",
        {'kind': kind, **_warm(kind)},
        [_hogs(hogs),
         {'type': 'stream', 'start_us': start, 'period_us': period, 'count': count, 'customer': 1,
          'target': TARGET, 'chain': [{'process': pid, 'cpu_us': cpu} for pid, cpu in chain]}],
        horizon_us=start + count * period + 20 * MICROS_PER_SECOND,
        processes=({'pid': TARGET, 'name': 'database'}, {'pid': SERVICER, 'name': 'helper'}),
        customers=({'id': 1, 'remote': True},),
        seed=seed,
    )


def bulk_transfer_scenario(kind: str, hogs: int, reads: int = 20, server_cpu: SimTime = 4 * MS,
                           reader_cpu: SimTime = 8 * MS, start: SimTime = MICROS_PER_SECOND,
                           seed: int = 0) -> Dict[str, Any]:
    """
    A remote client downloading a directory: one long request whose server
    process asks a file reader for every chunk. Every segment is longer than
    the minimum slice, so under a dozen hogs each one is cut at least once
    and the transfer queues behind them.
    """
    chain = [(TARGET, server_cpu)]
    for _ in range(reads):
        chain.extend([(SERVICER, reader_cpu), (TARGET, server_cpu)])
    return scenario_data(
        f"bulk-{kind}-h{hogs}",
        {'kind': kind, **_warm(kind)},
        [_hogs(hogs), _request(start, chain)],
        horizon_us=start + 10 * MICROS_PER_SECOND,
        processes=({'pid': TARGET, 'name': 'server'}, {'pid': SERVICER, 'name': 'reader'}),
        customers=({'id': 1, 'remote': True},),
        seed=seed,
    )


def low_load_scenario(kind: str, hogs: int = 1, sch_lat: SimTime = 20 * MS,
                      horizon: Optional[SimTime] = None) -> Dict[str, Any]:
    """
    A few requests and at most one hog, over less than one load sampling
    period, so the load estimate stays at zero.
    """
    workload = [_hogs(hogs)]
    for k in range(5):
        workload.append(_request(k * 150 * MS, _three_segments(3 * MS, 7 * MS, 2 * MS)))
    return scenario_data(
        f"lowload-{kind}-h{hogs}",
        {'kind': kind, 'sch_lat_us': sch_lat},
        workload,
        horizon_us=horizon or 4 * MICROS_PER_SECOND,
        processes=_PAIR,
    )
