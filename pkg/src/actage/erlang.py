"""Product-form loss approximation of the compute pool.

The continuous-time multi-service loss system admits a product-form
stationary distribution that depends on the service distribution only
through its mean, which makes it a cheap closed-form surrogate for the
discrete-time chains under light traffic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .channel import effective_arrivals
from .config import SystemConfig
from .geochain import service_rates, states_geo
from .statespace import SteadyState, availability

__all__ = [
    "ErlangLoad",
    "offered_loads",
    "erlang_steady_state",
    "solve_erlang",
    "availability_prob_erlang",
]


@dataclass(frozen=True)
class ErlangLoad:
    """Offered load per class: arrival probability over service rate."""

    rho1: float
    rho2: float


def offered_loads(
    config: SystemConfig, pu_override: tuple[float, float] | None = None
) -> ErlangLoad:
    a1, a2 = effective_arrivals(config, pu_override)
    mu1, mu2 = service_rates(config)
    return ErlangLoad(a1 / mu1, a2 / mu2)


def erlang_steady_state(load: ErlangLoad, capacity: int, task2_units: int) -> SteadyState:
    """Normalized product form rho1^n1/n1! * rho2^n2/n2! over feasible pairs.

    Weights are normalized in log space so large capacities cannot
    overflow the factorials.
    """
    occ = np.array(states_geo(capacity, task2_units), dtype=np.int64)
    n1 = occ[:, 0].astype(float)
    n2 = occ[:, 1].astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        log1 = np.where(n1 > 0, n1 * np.log(load.rho1), 0.0)
        log2 = np.where(n2 > 0, n2 * np.log(load.rho2), 0.0)
    logw = log1 + log2 - gammaln(n1 + 1.0) - gammaln(n2 + 1.0)
    logw = np.where(np.isnan(logw), -np.inf, logw)
    w = np.exp(logw - logw.max())
    probs = w / w.sum()
    return SteadyState(
        probs=probs,
        occupancy=occ,
        capacity=capacity,
        task2_units=task2_units,
        engine="erlang",
        labels=tuple(map(tuple, occ.tolist())),
    )


def solve_erlang(
    config: SystemConfig, pu_override: tuple[float, float] | None = None
) -> SteadyState:
    return erlang_steady_state(
        offered_loads(config, pu_override),
        config.compute.capacity,
        config.task2.units_required,
    )


def availability_prob_erlang(steady: SteadyState, units_needed: int) -> float:
    """Probability an arrival of the given unit demand is not blocked."""
    return availability(steady, units_needed)
