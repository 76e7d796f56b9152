import math
from dataclasses import dataclass

from appease.core.models import MICROS_PER_SECOND, SimTime

FSHIFT = 11
FIXED_1 = 1 << FSHIFT
LOAD_TIME_CONSTANT = 60 * MICROS_PER_SECOND


def decay_factor(dt: SimTime) -> int:
    """Fixed-point `exp(-dt / 60s)`."""
    return round(FIXED_1 * math.exp(-dt / LOAD_TIME_CONSTANT))


@dataclass
class LoadEstimator:
    """
    Exponentially averaged 1-minute run-queue length in fixed point, where
    `FIXED_1` (2048) stands for a load of 1.0.
    """
    avenrun1: int = 0

    def __post_init__(self):
        if self.avenrun1 < 0:
            raise ValueError(f"load cannot be negative, got {self.avenrun1}")

    @property
    def load(self) -> float:
        return self.avenrun1 / FIXED_1


def update_load(estimator: LoadEstimator, runnable_count: int, dt: SimTime) -> LoadEstimator:
    """
    Moves the average towards `runnable_count` as if the run queue had held
    that many processes for `dt`. Rising values are rounded up, falling
    values down, so a constant run queue is a fixed point and an empty one
    decays all the way to zero.
    """
    if dt <= 0:
        raise ValueError(f"load update interval must be positive, got {dt}")
    if runnable_count < 0:
        raise ValueError(f"runnable count cannot be negative, got {runnable_count}")
    exp = decay_factor(dt)
    active = runnable_count * FIXED_1
    load = estimator.avenrun1 * exp + active * (FIXED_1 - exp)
    if active >= estimator.avenrun1:
        load += FIXED_1 - 1
    estimator.avenrun1 = load >> FSHIFT
    return estimator
