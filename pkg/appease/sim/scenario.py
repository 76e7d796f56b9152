"""
Declarative scenario files: parsing, validation and the scenario types the
engine runs.

A scenario is a JSON object with the keys `policy`, `model`, `processes`,
`customers`, `workload`, `horizon_us` and `seed` (plus the optional `id`
and `series_period_us`). Validation collects every problem it finds as a
`Diagnostic` before giving up, so a single pass over a file reports all of
them.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import confidence

from appease.core.models import MAX_NICE, MIN_NICE, AccountingMode, Customer, ModelConfig, SimTime
from appease.errors import ConfigurationError, Diagnostic, ScenarioValidationError
from appease.schedulers import POLICIES, create_policy
from appease.sim.chain import Segment, chain_calls
from appease.utils import script_helper

LOG = logging.getLogger(__name__)

WORK_ITEM_TYPES = ('hogs', 'request', 'stream')


@dataclass(frozen=True)
class ProcessSpec:
    pid: int
    name: Optional[str] = None
    nice: int = 0


@dataclass(frozen=True)
class RequestArrival:
    at_us: SimTime
    customer: int
    target: int
    chain: Tuple[Segment, ...]
    weight: float = 1.0


@dataclass(frozen=True)
class BackgroundHog:
    """
    `count` CPU-bound processes created at `start_us`. A hog never blocks;
    with a finite `demand_us` it goes to sleep for good once it has received
    that much CPU time.
    """
    start_us: SimTime
    count: int
    nice: int = 0
    level: int = 0
    demand_us: Optional[SimTime] = None


@dataclass(frozen=True)
class PeriodicStream:
    start_us: SimTime
    period_us: SimTime
    count: int
    customer: int
    target: int
    chain: Tuple[Segment, ...]
    weight: float = 1.0
    deadline_us: Optional[SimTime] = None
    jitter_us: SimTime = 0

    def nominal_arrivals(self) -> List[SimTime]:
        return [self.start_us + k * self.period_us for k in range(self.count)]


WorkItem = Union[RequestArrival, BackgroundHog, PeriodicStream]


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def create(self, config: Optional[confidence.Configuration] = None):
        return create_policy(self.kind, self.params, config)


@dataclass(frozen=True)
class Scenario:
    id: str
    policy: PolicySpec
    model: ModelConfig
    processes: Tuple[ProcessSpec, ...]
    customers: Tuple[Customer, ...]
    workload: Tuple[WorkItem, ...]
    horizon_us: SimTime
    seed: int = 0
    series_period_us: Optional[SimTime] = None

    @property
    def hog_count(self) -> int:
        return sum(item.count for item in self.workload if isinstance(item, BackgroundHog))

    @property
    def streams(self) -> List[PeriodicStream]:
        return [item for item in self.workload if isinstance(item, PeriodicStream)]

    def to_dict(self) -> Dict[str, Any]:
        def item_dict(item):
            kind = {RequestArrival: 'request', BackgroundHog: 'hogs', PeriodicStream: 'stream'}[type(item)]
            return {'type': kind, **dataclasses.asdict(item)}

        return {
            'id': self.id,
            'policy': {'kind': self.policy.kind, **self.policy.params},
            'model': {'alpha': self.model.alpha, 'accounting': self.model.accounting.value},
            'processes': [dataclasses.asdict(p) for p in self.processes],
            'customers': [dataclasses.asdict(c) for c in self.customers],
            'workload': [item_dict(item) for item in self.workload],
            'horizon_us': self.horizon_us,
            'seed': self.seed,
            'series_period_us': self.series_period_us,
        }

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]

    def with_seed(self, seed: int) -> Scenario:
        return dataclasses.replace(self, seed=seed)

    def with_policy(self, kind: str, **params) -> Scenario:
        return dataclasses.replace(self, policy=PolicySpec(kind.replace('-', '_'), params))

    def with_hogs(self, count: int) -> Scenario:
        """
        The same scenario with `count` background hogs: the first hog item
        gets the new count, or a hog item starting at zero is put in front.
        """
        if count < 0:
            raise ValueError(f"hog count cannot be negative, got {count}")
        workload = list(self.workload)
        for i, item in enumerate(workload):
            if isinstance(item, BackgroundHog):
                workload[i] = dataclasses.replace(item, count=count)
                break
        else:
            workload.insert(0, BackgroundHog(0, count))
        return dataclasses.replace(self, workload=tuple(workload))


class _Checker:
    """Collects diagnostics while reading raw scenario values."""

    def __init__(self):
        self.diagnostics: List[Diagnostic] = []

    def add(self, code: str, path: str, message: str):
        self.diagnostics.append(Diagnostic(code, path, message))

    def mapping(self, value, path: str) -> Optional[Mapping]:
        if not isinstance(value, Mapping):
            self.add('E102', path, f"expected an object, got {type(value).__name__}")
            return None
        return value

    def sequence(self, value, path: str) -> Optional[Sequence]:
        if not isinstance(value, list):
            self.add('E102', path, f"expected a list, got {type(value).__name__}")
            return None
        return value

    def require(self, data: Mapping, key: str, path: str):
        if key not in data or data[key] is None:
            self.add('E101', _join(path, key), "missing required field")
            return None
        return data[key]

    def integer(self, value, path: str, minimum: Optional[int] = None, maximum: Optional[int] = None):
        if isinstance(value, bool) or not isinstance(value, int):
            self.add('E102', path, f"expected an integer, got {value!r}")
            return None
        if minimum is not None and value < minimum or maximum is not None and value > maximum:
            bounds = f"[{'-inf' if minimum is None else minimum}, {'inf' if maximum is None else maximum}]"
            self.add('E102', path, f"value {value} outside {bounds}")
            return None
        return value

    def positive(self, value, path: str):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
            self.add('E102', path, f"expected a positive number, got {value!r}")
            return None
        return value

    def boolean(self, value, path: str):
        if not isinstance(value, bool):
            self.add('E102', path, f"expected true or false, got {value!r}")
            return None
        return value


def _join(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else key


def _check_alpha(checker: _Checker, value, path: str) -> Optional[float]:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        checker.add('E102', path, f"expected a number, got {value!r}")
        return None
    if not 0 <= value < 0.5:
        checker.add('E104', path, f"alpha out of range [0, 0.5): {value}")
        return None
    return float(value)


def _parse_policy(checker: _Checker, raw, config) -> Optional[PolicySpec]:
    raw = checker.mapping(raw, 'policy')
    if raw is None:
        return None
    kind = checker.require(raw, 'kind', 'policy')
    if kind is None:
        return None
    normalized = str(kind).replace('-', '_').lower()
    if normalized not in POLICIES:
        checker.add('E103', 'policy.kind', f"unknown policy kind {kind!r}, expected one of {sorted(POLICIES)}")
        return None
    params = {key: value for key, value in raw.items() if key != 'kind'}
    if 'alpha' in params and params['alpha'] is not None:
        if _check_alpha(checker, params['alpha'], 'policy.alpha') is None:
            return None
    try:
        create_policy(normalized, params, config)
    except (ValueError, TypeError, ConfigurationError) as e:
        checker.add('E102', 'policy', f"invalid policy parameters: {e}")
        return None
    return PolicySpec(normalized, params)


def _parse_model(checker: _Checker, raw, config) -> Optional[ModelConfig]:
    raw = {} if raw is None else checker.mapping(raw, 'model')
    if raw is None:
        return None
    alpha = raw.get('alpha', config.get('model.alpha', default=0.0))
    accounting = raw.get('accounting', config.get('model.accounting', default='wait_minus_run'))
    alpha = _check_alpha(checker, alpha, 'model.alpha')
    try:
        accounting = AccountingMode(accounting)
    except ValueError:
        checker.add('E102', 'model.accounting',
                    f"unknown accounting {accounting!r}, expected one of {[m.value for m in AccountingMode]}")
        return None
    if alpha is None:
        return None
    return ModelConfig(alpha, accounting)


def _parse_processes(checker: _Checker, raw) -> List[ProcessSpec]:
    processes = []
    seen = set()
    for i, item in enumerate(checker.sequence(raw, 'processes') or []):
        path = _join('processes', i)
        item = checker.mapping(item, path)
        if item is None:
            continue
        pid = checker.require(item, 'pid', path)
        pid = None if pid is None else checker.integer(pid, _join(path, 'pid'), minimum=1)
        nice = checker.integer(item.get('nice', 0), _join(path, 'nice'), MIN_NICE, MAX_NICE)
        name = item.get('name')
        if pid is None or nice is None:
            continue
        if pid in seen:
            checker.add('E108', _join(path, 'pid'), f"duplicate process id {pid}")
            continue
        seen.add(pid)
        processes.append(ProcessSpec(pid, None if name is None else str(name), nice))
    return processes


def _parse_customers(checker: _Checker, raw) -> List[Customer]:
    customers = []
    seen = set()
    for i, item in enumerate(checker.sequence(raw, 'customers') or []):
        path = _join('customers', i)
        item = checker.mapping(item, path)
        if item is None:
            continue
        cid = checker.require(item, 'id', path)
        cid = None if cid is None else checker.integer(cid, _join(path, 'id'))
        weight = checker.positive(item.get('weight', 1.0), _join(path, 'weight'))
        remote = checker.boolean(item.get('remote', False), _join(path, 'remote'))
        if cid is None or weight is None or remote is None:
            continue
        if cid in seen:
            checker.add('E108', _join(path, 'id'), f"duplicate customer id {cid}")
            continue
        seen.add(cid)
        customers.append(Customer(cid, float(weight), remote))
    return customers


def _parse_chain(checker: _Checker, item: Mapping, path: str, pids, calls: List[Tuple[int, int]]):
    raw = checker.require(item, 'chain', path)
    raw = None if raw is None else checker.sequence(raw, _join(path, 'chain'))
    if raw is None:
        return None, None
    segments = []
    ok = True
    for i, segment in enumerate(raw):
        spath = _join(_join(path, 'chain'), i)
        segment = checker.mapping(segment, spath)
        if segment is None:
            ok = False
            continue
        process = checker.require(segment, 'process', spath)
        cpu = checker.require(segment, 'cpu_us', spath)
        cpu = None if cpu is None else checker.integer(cpu, _join(spath, 'cpu_us'), minimum=1)
        if process is not None and process not in pids:
            checker.add('E105', _join(spath, 'process'), f"unresolved process reference {process}")
            process = None
        if process is None or cpu is None:
            ok = False
            continue
        segments.append(Segment(process, cpu))

    target = item.get('target')
    if target is None and segments:
        target = segments[0].process
    elif target is not None and target not in pids:
        checker.add('E105', _join(path, 'target'), f"unresolved process reference {target}")
        return None, None
    if not ok:
        return None, None
    try:
        calls.extend(chain_calls(target, segments))
    except ValueError as e:
        checker.add('E107', _join(path, 'chain'), f"invalid chain: {e}")
        return None, None
    return target, tuple(segments)


def _parse_customer_ref(checker: _Checker, item: Mapping, path: str, cids) -> Optional[int]:
    customer = checker.require(item, 'customer', path)
    if customer is not None and customer not in cids:
        checker.add('E106', _join(path, 'customer'), f"unresolved customer reference {customer}")
        return None
    return customer


def _parse_workload(checker: _Checker, raw, pids, cids) -> Tuple[List[WorkItem], List[Tuple[int, int]]]:
    workload = []
    calls: List[Tuple[int, int]] = []
    for i, item in enumerate(checker.sequence(raw, 'workload') or []):
        path = _join('workload', i)
        item = checker.mapping(item, path)
        if item is None:
            continue
        kind = checker.require(item, 'type', path)
        if kind is None:
            continue
        if kind not in WORK_ITEM_TYPES:
            checker.add('E102', _join(path, 'type'),
                        f"unknown work item type {kind!r}, expected one of {WORK_ITEM_TYPES}")
            continue

        if kind == 'hogs':
            start = checker.integer(item.get('start_us', 0), _join(path, 'start_us'), minimum=0)
            count = checker.require(item, 'count', path)
            count = None if count is None else checker.integer(count, _join(path, 'count'), minimum=0)
            nice = checker.integer(item.get('nice', 0), _join(path, 'nice'), MIN_NICE, MAX_NICE)
            level = checker.integer(item.get('level', 0), _join(path, 'level'), minimum=0)
            demand = item.get('demand_us')
            if demand is not None:
                demand = checker.integer(demand, _join(path, 'demand_us'), minimum=1)
                if demand is None:
                    continue
            if None in (start, count, nice, level):
                continue
            workload.append(BackgroundHog(start, count, nice, level, demand))
            continue

        customer = _parse_customer_ref(checker, item, path, cids)
        weight = checker.positive(item.get('weight', 1.0), _join(path, 'weight'))
        target, chain = _parse_chain(checker, item, path, pids, calls)
        if kind == 'request':
            at = checker.require(item, 'at_us', path)
            at = None if at is None else checker.integer(at, _join(path, 'at_us'), minimum=0)
            if None in (customer, weight, chain, at):
                continue
            workload.append(RequestArrival(at, customer, target, chain, float(weight)))
        else:
            start = checker.integer(item.get('start_us', 0), _join(path, 'start_us'), minimum=0)
            period = checker.require(item, 'period_us', path)
            period = None if period is None else checker.integer(period, _join(path, 'period_us'), minimum=1)
            count = checker.require(item, 'count', path)
            count = None if count is None else checker.integer(count, _join(path, 'count'), minimum=0)
            jitter = checker.integer(item.get('jitter_us', 0), _join(path, 'jitter_us'), minimum=0)
            deadline = item.get('deadline_us')
            if deadline is not None:
                deadline = checker.integer(deadline, _join(path, 'deadline_us'), minimum=1)
                if deadline is None:
                    continue
            if None in (customer, weight, chain, start, period, count, jitter):
                continue
            workload.append(PeriodicStream(start, period, count, customer, target, chain, float(weight),
                                           deadline, jitter))
    return workload, calls


def _check_acyclic(checker: _Checker, calls: Sequence[Tuple[int, int]]):
    graph: Dict[int, set] = {}
    for requester, servicer in calls:
        graph.setdefault(requester, set()).add(servicer)
    try:
        tuple(TopologicalSorter(graph).static_order())
    except CycleError as e:
        cycle = " -> ".join(str(pid) for pid in e.args[1])
        checker.add('E109', 'workload', f"cyclic service dependency: {cycle}")


def parse_scenario(data: Any, config: Optional[confidence.Configuration] = None,
                   default_id: str = 'scenario') -> Scenario:
    """
    Validates raw scenario data and builds a `Scenario`. Policy and model
    parameters missing from the data are taken from `config`.

    :raises ScenarioValidationError: with every diagnostic found
    """
    if config is None:
        config = script_helper.load_config()
    checker = _Checker()
    data = checker.mapping(data, '')
    if data is None:
        raise ScenarioValidationError(checker.diagnostics)

    raw_policy = checker.require(data, 'policy', '')
    policy = None if raw_policy is None else _parse_policy(checker, raw_policy, config)
    model = _parse_model(checker, data.get('model'), config)
    processes = _parse_processes(checker, data.get('processes', []))
    customers = _parse_customers(checker, data.get('customers', []))
    workload, calls = _parse_workload(checker, data.get('workload', []),
                                      {p.pid for p in processes}, {c.id for c in customers})
    _check_acyclic(checker, calls)

    horizon = checker.require(data, 'horizon_us', '')
    horizon = None if horizon is None else checker.integer(horizon, 'horizon_us', minimum=1)
    seed = checker.integer(data.get('seed', 0), 'seed')
    series_period = data.get('series_period_us', config.get('engine.series_period_us', default=None))
    if series_period is not None:
        series_period = checker.integer(series_period, 'series_period_us', minimum=1)

    if checker.diagnostics:
        raise ScenarioValidationError(checker.diagnostics)
    return Scenario(
        id=str(data.get('id') or default_id),
        policy=policy,
        model=model,
        processes=tuple(processes),
        customers=tuple(customers),
        workload=tuple(workload),
        horizon_us=horizon,
        seed=seed,
        series_period_us=series_period,
    )


def load_scenario(path: Union[str, Path], config: Optional[confidence.Configuration] = None) -> Scenario:
    """
    Reads and validates a scenario file.

    :raises OSError: when the file cannot be read
    :raises ScenarioValidationError: on parse or validation errors
    """
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioValidationError([Diagnostic('E100', '', e.msg, e.lineno, e.colno)])
    scenario = parse_scenario(data, config, default_id=path.stem)
    LOG.info(f"loaded scenario {scenario.id} from {path} ({scenario.policy.kind}, digest {scenario.digest()})")
    return scenario


def validate_file(path: Union[str, Path], config: Optional[confidence.Configuration] = None) -> List[Diagnostic]:
    """
    :return: the diagnostics of a scenario file, empty when it is valid
    """
    try:
        load_scenario(path, config)
    except ScenarioValidationError as e:
        LOG.info(f"{path}: {len(e.diagnostics)} diagnostic(s)")
        return e.diagnostics
    return []
