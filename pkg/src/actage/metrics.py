"""Closed-form performance metrics, parameterized by availability.

These formulas take the compute-availability probabilities as inputs so
any steady-state engine (exact, memoryless, product-form, or empirical)
can drive the same expressions. An impossible execution chain (any factor
zero) yields an unbounded age, represented by float infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["MetricsReport", "task_aoa", "coma", "aoi_baseline"]

UNBOUNDED = math.inf


@dataclass(frozen=True)
class MetricsReport:
    """Per-class ages and system cost with the inputs that produced them."""

    engine: str
    uplink: tuple[float, float]        # packet decode probability per class
    availability: tuple[float, float]  # compute-fit probability per class
    aoa: tuple[float, float]           # time-average actuation age, slots
    coma: float                        # average miss penalty per slot
    aoi: float                         # classless delivery-age baseline, slots


def task_aoa(
    gen_prob: float,
    admit_prob: float,
    uplink_prob: float,
    avail_prob: float,
    service_slots: float,
    downlink_delay: float,
) -> float:
    """Time-average actuation age of one class.

    Executions thin the generation process by the admission gate, uplink
    success, and compute availability; the resulting renewal mean is the
    reciprocal of the product, plus the constant service and downlink
    delays. Returns infinity when the class can never execute.
    """
    rate = gen_prob * admit_prob * uplink_prob * avail_prob
    if rate <= 0.0:
        return UNBOUNDED
    return 1.0 / rate + service_slots + downlink_delay


def coma(task1_terms, task2_terms) -> float:
    """Average penalty rate of missed actuations.

    Each terms tuple is (penalty, gen_prob, admit_prob, uplink_prob,
    avail_prob). A generated packet is missed unless it clears the gate,
    the uplink, and the capacity check.
    """
    total = 0.0
    for weight, gen, admit, uplink, avail in (task1_terms, task2_terms):
        total += weight * gen * (1.0 - admit * uplink * avail)
    return total


def aoi_baseline(
    gen1: float, admit1: float, uplink1: float,
    gen2: float, admit2: float, uplink2: float,
) -> float:
    """Classless delivery age: mean gap between received updates of any class."""
    rate = gen1 * admit1 * uplink1 + gen2 * admit2 * uplink2
    if rate <= 0.0:
        return UNBOUNDED
    return 1.0 / rate
