"""
Running scenario files: single runs with repetitions, and sweeps over the
number of background hogs and over policies. Every run writes its own
metrics, JSON and trace files; repetitions and sweeps add tables of
averaged metrics.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from appease.sim.engine import SimulationResult, run
from appease.sim.metrics import METRICS_COLUMNS, metrics_row
from appease.sim.scenario import PeriodicStream, Scenario, load_scenario
from appease.utils import savefile, script_helper

LOG = logging.getLogger(__name__)

FORMATS = ('csv', 'json', 'trace')
SUMMARY_COLUMNS = ('metric', 'mean', 'min', 'max')
AVERAGED_COLUMNS = METRICS_COLUMNS[3:]
FAIRSHARE_KEYS = ('sch_lat_us', 'sleeper_threshold_us', 'min_granularity_us')
SWEEP_HOGS = tuple(range(13))


@dataclass(frozen=True)
class RunConfig:
    """
    :param scenario: path of the scenario file
    :param out: output directory
    :param formats: which of `csv`, `json` and `trace` to write
    :param parallel_runs: number of simulations executed concurrently
    :param seed: replaces the scenario's seed when given
    :param reps: number of repetitions, repetition `r` runs with seed + r
    :param config_path: comma separated configuration files layered over
            the defaults
    """
    scenario: Path
    out: Path
    formats: Tuple[str, ...] = FORMATS
    parallel_runs: int = 1
    seed: Optional[int] = None
    reps: int = 1
    config_path: Optional[str] = None

    def __post_init__(self):
        unknown = set(self.formats) - set(FORMATS)
        if unknown:
            raise ValueError(f"unknown output formats {sorted(unknown)}, expected a subset of {FORMATS}")
        if self.parallel_runs < 1:
            raise ValueError(f"parallel_runs must be at least 1, got {self.parallel_runs}")
        if self.reps < 1:
            raise ValueError(f"reps must be at least 1, got {self.reps}")


def stream_periods(scenario: Scenario) -> Dict[int, int]:
    return {index: item.period_us for index, item in enumerate(scenario.workload)
            if isinstance(item, PeriodicStream)}


def switch_policy(scenario: Scenario, kind: str) -> Scenario:
    """
    The scenario under another policy. Fair-share parameters carry over
    between the fair-share family and the appeasement fallback, other
    parameters are dropped by the policy that does not know them.
    """
    kind = kind.replace('-', '_').lower()
    params = dict(scenario.policy.params)
    if scenario.policy.kind == 'appeasement':
        params = {**(params.pop('fallback', None) or {}), **params}
    if kind == 'appeasement':
        params['fallback'] = {key: params[key] for key in FAIRSHARE_KEYS if key in params}
    return scenario.with_policy(kind, **params)


def _simulate(job: Tuple[Scenario, Optional[str]]) -> SimulationResult:
    scenario, config_path = job
    return run(scenario, script_helper.load_config(config_path))


def simulate_all(scenarios: Sequence[Scenario], parallel_runs: int = 1, config_path: Optional[str] = None,
                 desc: str = 'simulating') -> List[SimulationResult]:
    """
    Runs independent scenarios, at most `parallel_runs` at a time. Results
    come back in the order of `scenarios`.
    """
    jobs = [(scenario, config_path) for scenario in scenarios]
    if parallel_runs == 1 or len(jobs) < 2:
        return [_simulate(job) for job in tqdm(jobs, desc)]
    with ProcessPoolExecutor(max_workers=parallel_runs) as executor:
        return list(tqdm(executor.map(_simulate, jobs), desc, total=len(jobs)))


def result_row(result: SimulationResult) -> Dict[str, Any]:
    scenario = result.scenario
    return metrics_row(scenario.id, scenario.policy.kind, result.metrics, stream_periods(scenario))


def write_result(result: SimulationResult, out: Path, formats: Iterable[str], stem: Optional[str] = None) \
        -> List[Path]:
    """
    Writes the artifacts of one run, by default named after the scenario,
    the policy and the seed.
    """
    scenario = result.scenario
    stem = stem or f"{scenario.id}-{scenario.policy.kind}-seed{scenario.seed}"
    header = savefile.provenance(scenario.digest(), scenario.seed, scenario.policy.kind)
    row = result_row(result)
    written = []
    if 'csv' in formats:
        written.append(savefile.write_metrics(out / f"{stem}.csv", [row], header))
    if 'json' in formats:
        metrics = result.metrics
        written.append(savefile.write_json(out / f"{stem}.json", {
            **header,
            'scenario': scenario.to_dict(),
            'policy_settings': result.policy,
            'metrics': row,
            'cpu_us': metrics.cpu,
            'idle_us': metrics.idle,
            'requests': [{
                'id': r.id,
                'customer': r.customer,
                'target': r.target,
                'arrival_us': r.arrival,
                'response_us': r.response,
                'realized_U': r.realized_u,
                'realized_U_clamped': r.realized_u_clamped,
                'deadline_us': r.deadline,
                'missed': r.missed(metrics.horizon),
            } for r in metrics.requests],
            'series': [list(point) for point in metrics.series],
        }))
    if 'trace' in formats:
        written.append(savefile.write_trace(out / f"{stem}.trace", result.trace, header))
    return written


def _mean(values: Sequence[float]) -> float:
    values = [v for v in values if not math.isnan(v)]
    return float(np.mean(values)) if values else math.nan


def summarize_reps(rows: Sequence[Mapping[str, Any]]) -> List[Dict[str, Any]]:
    """
    Mean, minimum and maximum over repetitions of every metric.
    """
    summary = []
    for column in AVERAGED_COLUMNS:
        values = [float(row[column]) for row in rows if not math.isnan(float(row[column]))]
        summary.append({
            'metric': column,
            'mean': float(np.mean(values)) if values else math.nan,
            'min': float(np.min(values)) if values else math.nan,
            'max': float(np.max(values)) if values else math.nan,
        })
    return summary


def average_rows(rows: Sequence[Mapping[str, Any]]) -> Dict[str, Any]:
    """One metrics row whose numeric columns are the repetition averages."""
    first = rows[0]
    averaged = {column: first[column] for column in METRICS_COLUMNS[:3]}
    for column in AVERAGED_COLUMNS:
        averaged[column] = _mean([float(row[column]) for row in rows])
    return averaged


def repetitions(scenario: Scenario, reps: int) -> List[Scenario]:
    return [scenario.with_seed(scenario.seed + r) for r in range(reps)]


def _load(run_config: RunConfig) -> Scenario:
    scenario = load_scenario(run_config.scenario, script_helper.load_config(run_config.config_path))
    if run_config.seed is not None:
        scenario = scenario.with_seed(run_config.seed)
    return scenario


def run_experiment(run_config: RunConfig) -> List[Path]:
    """
    Runs a scenario file `reps` times and writes the artifacts of every
    repetition. With more than one repetition a summary table with the
    mean, minimum and maximum of every metric is written as well.

    :raises ScenarioValidationError: when the scenario file is invalid
    :raises OSError: when the file cannot be read or the output not written
    :return: the paths written
    """
    scenario = _load(run_config)
    scenarios = repetitions(scenario, run_config.reps)
    results = simulate_all(scenarios, run_config.parallel_runs, run_config.config_path, f"running {scenario.id}")
    written = []
    for result in results:
        written.extend(write_result(result, run_config.out, run_config.formats))
    if run_config.reps > 1:
        header = {**savefile.provenance(scenario.digest(), scenario.seed, scenario.policy.kind),
                  'reps': run_config.reps}
        summary = summarize_reps([result_row(result) for result in results])
        written.append(savefile.write_table(run_config.out / f"{scenario.id}-{scenario.policy.kind}-summary.csv",
                                            summary, SUMMARY_COLUMNS, header))
    LOG.info(f"{scenario.id}: {len(results)} run(s), {len(written)} file(s) written to {run_config.out}")
    return written


def pivot(rows: Sequence[Mapping[str, Any]], metric: str) -> Tuple[List[str], List[Dict[str, Any]]]:
    """
    A plot-ready table with one row per hog count and one `metric` column
    per policy.
    """
    policies = list(dict.fromkeys(row['policy'] for row in rows))
    columns = ['hogs'] + [f"{policy}_{metric}" for policy in policies]
    table: Dict[int, Dict[str, Any]] = {}
    for row in rows:
        table.setdefault(row['hogs'], {'hogs': row['hogs']})[f"{row['policy']}_{metric}"] = row[metric]
    return columns, [table[hogs] for hogs in sorted(table)]


def sweep(run_config: RunConfig, hogs: Sequence[int] = SWEEP_HOGS, policies: Sequence[str] = ()) -> List[Path]:
    """
    Runs the scenario for every hog count and policy (the scenario's own
    policy when none are given), averaging `reps` repetitions per point,
    and writes the combined table keyed by hog count plus a pivot of
    deadline misses and mean latency per policy.
    """
    base = _load(run_config)
    policies = list(policies) or [base.policy.kind]
    points = [switch_policy(base, kind).with_hogs(count) for kind in policies for count in hogs]
    scenarios = [scenario for point in points for scenario in repetitions(point, run_config.reps)]
    results = simulate_all(scenarios, run_config.parallel_runs, run_config.config_path, f"sweeping {base.id}")

    rows = []
    written = []
    for index, point in enumerate(points):
        point_results = results[index * run_config.reps:(index + 1) * run_config.reps]
        for result in point_results:
            stem = f"{base.id}-{point.policy.kind}-h{point.hog_count}-seed{result.scenario.seed}"
            written.extend(write_result(result, run_config.out, set(run_config.formats) - {'csv'}, stem))
        rows.append(average_rows([result_row(result) for result in point_results]))

    header = {**savefile.provenance(base.digest(), base.seed, ','.join(policies)), 'reps': run_config.reps}
    written.append(savefile.write_metrics(run_config.out / f"{base.id}-sweep.csv", rows, header))
    for metric in ('deadline_misses', 'mean_latency_us'):
        columns, table = pivot(rows, metric)
        written.append(savefile.write_table(run_config.out / f"{base.id}-sweep-{metric}.csv", table, columns, header))
    LOG.info(f"{base.id}: swept {len(hogs)} hog count(s) over {policies}, {len(scenarios)} run(s)")
    return written
