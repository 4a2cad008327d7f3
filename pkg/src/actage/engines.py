"""Engine dispatch: one name resolves a steady-state solver and a report.

Engines:
  det        exact pipeline-state chain (deterministic service)
  geo-mg     memoryless-service chain, matrix-geometric recursion
  geo-direct memoryless-service chain, dense balance solve
  erlang     product-form approximation
"""

from __future__ import annotations

from . import detchain, erlang, geochain, metrics
from .channel import uplink_success_prob
from .config import SystemConfig
from .statespace import SteadyState, availability

ENGINES = ("det", "geo-mg", "geo-direct", "erlang")

__all__ = ["ENGINES", "steady_state", "availability_pair", "compute_report"]


def steady_state(
    config: SystemConfig,
    engine: str,
    pu_override: tuple[float, float] | None = None,
    max_states: int = detchain.DEFAULT_STATE_CAP,
) -> SteadyState:
    if engine == "det":
        return detchain.solve_steady_state(config, pu_override, max_states=max_states)
    if engine == "geo-mg":
        return geochain.solve_matrix_geometric(config, pu_override)
    if engine == "geo-direct":
        return geochain.solve_direct(config, pu_override)
    if engine == "erlang":
        return erlang.solve_erlang(config, pu_override)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def availability_pair(
    config: SystemConfig,
    engine: str,
    pu_override: tuple[float, float] | None = None,
    max_states: int = detchain.DEFAULT_STATE_CAP,
) -> tuple[float, float]:
    steady = steady_state(config, engine, pu_override, max_states=max_states)
    return (
        availability(steady, config.task1.units_required),
        availability(steady, config.task2.units_required),
    )


def compute_report(
    config: SystemConfig,
    engine: str,
    pu_override: tuple[float, float] | None = None,
    max_states: int = detchain.DEFAULT_STATE_CAP,
) -> metrics.MetricsReport:
    """Analytical ages and miss cost with availability from the given engine."""
    if pu_override is None:
        pu = (
            uplink_success_prob(config.channel, config.task1.tx_power),
            uplink_success_prob(config.channel, config.task2.tx_power),
        )
    else:
        pu = pu_override
    avail = availability_pair(config, engine, pu_override, max_states=max_states)
    t1, t2 = config.task1, config.task2
    aoa = (
        metrics.task_aoa(t1.gen_prob, t1.admit_prob, pu[0], avail[0],
                         t1.service_slots, t1.downlink_delay),
        metrics.task_aoa(t2.gen_prob, t2.admit_prob, pu[1], avail[1],
                         t2.service_slots, t2.downlink_delay),
    )
    cost = metrics.coma(
        (t1.penalty, t1.gen_prob, t1.admit_prob, pu[0], avail[0]),
        (t2.penalty, t2.gen_prob, t2.admit_prob, pu[1], avail[1]),
    )
    aoi = metrics.aoi_baseline(
        t1.gen_prob, t1.admit_prob, pu[0], t2.gen_prob, t2.admit_prob, pu[1]
    )
    return metrics.MetricsReport(
        engine=engine, uplink=pu, availability=avail, aoa=aoa, coma=cost, aoi=aoi
    )
