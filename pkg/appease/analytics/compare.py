import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from appease.analytics.oracles import OracleResult

LOG = logging.getLogger(__name__)

FORMULA_POLICIES = {
    'rr_min': 'rr',
    'rr_typical': 'rr',
    'mlfq_min': 'mlfq',
    'mlfq_typical': 'mlfq',
    'cfs_typical': 'fairshare',
    'rbpe_typical': 'fairshare_rbpe',
}

# integer time for the quantum disciplines, one microsecond of rounding
# slack where fair-share slices do not divide evenly
TOLERANCES = {
    'rr': 0.,
    'mlfq': 0.,
    'fairshare': 1.,
    'fairshare_rbpe': 1.,
}


def relative_error(measured: float, expected: float) -> float:
    """
    `|measured - expected| / |expected|`, or the absolute difference when
    the expected value is zero.
    """
    if math.isnan(expected) or math.isnan(measured):
        return math.nan
    difference = abs(measured - expected)
    return difference / abs(expected) if expected else difference


@dataclass(frozen=True)
class Comparison:
    """
    A measured unhappiness scored against every form of one oracle.
    Signed errors are `measured - value`.
    """
    formula: str
    policy: str
    measured: float
    oracle: OracleResult
    tolerance: float
    errors: Mapping[str, float] = field(default_factory=dict)

    @property
    def excluded(self) -> bool:
        return not self.oracle.valid

    def relative_errors(self) -> Dict[str, float]:
        return {form: relative_error(self.measured, self.oracle.value(form)) for form in self.errors}

    def matches(self, form: str = 'corrected') -> Optional[bool]:
        """
        :return: whether the measurement is within tolerance of the given
                form, or `None` when the oracle's assumptions do not hold
        """
        if self.excluded:
            return None
        error = self.errors[form]
        return not math.isnan(error) and abs(error) <= self.tolerance

    def row(self) -> Dict[str, Any]:
        relative = self.relative_errors()
        row = {
            'formula': self.formula,
            'policy': self.policy,
            'measured': self.measured,
            'verbatim': self.oracle.verbatim_value,
            'corrected': self.oracle.corrected_value,
            'verbatim_error': self.errors['verbatim'],
            'corrected_error': self.errors['corrected'],
            'verbatim_relative_error': relative['verbatim'],
            'corrected_relative_error': relative['corrected'],
            'excluded': self.excluded,
            'violations': "; ".join(self.oracle.violations),
        }
        for name, value in self.oracle.variants.items():
            row[f"{name}_error"] = self.errors[name]
        return row


def compare(measured: float, oracle: OracleResult, policy: str, tolerance: Optional[float] = None) -> Comparison:
    """
    Scores the realized unhappiness of a simulated request against an oracle.

    :param measured: realized unhappiness taken from the run
    :param oracle: the oracle evaluated for the scenario's parameters
    :param policy: policy kind the run was made with
    :param tolerance: absolute tolerance in microseconds, defaults to the
            tolerance of the policy
    :raises ValueError: when the oracle does not describe the policy
    """
    policy = policy.replace('-', '_').lower()
    expected_policy = FORMULA_POLICIES.get(oracle.formula)
    if expected_policy is None:
        raise ValueError(f"no policy is known for formula {oracle.formula}")
    if policy != expected_policy:
        raise ValueError(f"formula {oracle.formula} describes {expected_policy}, cannot score a {policy} run")
    if tolerance is None:
        tolerance = TOLERANCES[policy]

    forms = ('verbatim', 'corrected', *oracle.variants)
    errors = {form: measured - oracle.value(form) for form in forms}
    comparison = Comparison(oracle.formula, policy, measured, oracle, tolerance, errors)
    if comparison.excluded:
        LOG.info(f"{oracle.formula}: excluded ({'; '.join(oracle.violations)})")
    else:
        LOG.debug(f"{oracle.formula}: measured {measured}, verbatim error {errors['verbatim']}, "
                  f"corrected error {errors['corrected']}")
    return comparison


def summarize(comparisons: Iterable[Comparison], form: str) -> Tuple[int, int, int]:
    """
    :return: `(passed, failed, excluded)` counts for one form
    """
    passed = failed = excluded = 0
    for comparison in comparisons:
        outcome = comparison.matches(form)
        if outcome is None:
            excluded += 1
        elif outcome:
            passed += 1
        else:
            failed += 1
    return passed, failed, excluded


def report(comparisons: Iterable[Comparison]) -> List[Dict[str, Any]]:
    return [comparison.row() for comparison in comparisons]
