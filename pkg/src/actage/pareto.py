"""Grid search for the miss-cost / regular-age trade-off.

Evaluates every decision point (two transmit powers, two admission gates)
on a grid, flags the energy constraint, and extracts the non-dominated set
of (miss cost, class-1 age) pairs. A uniform baseline (equal powers and
gates for both classes) is evaluated on the matching diagonal grid; its
best feasible miss cost is the reference the differentiated front is
compared against.

The memoryless-chain and product-form engines evaluate the whole grid in
vectorized batches; the exact pipeline engine is supported point-by-point
and is only practical on small grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import geochain
from .channel import uplink_success_prob
from .config import SystemConfig, energy_drawn
from .engines import compute_report
from .geochain import mg_steady_batch, states_geo

__all__ = [
    "DecisionPoint",
    "GridSpec",
    "SearchResult",
    "default_grid",
    "evaluate_point",
    "search",
    "dominates",
    "front_indices_bruteforce",
]


@dataclass(frozen=True)
class DecisionPoint:
    """One evaluated allocation with its objectives and feasibility flag."""

    tx_power1: float
    tx_power2: float
    admit1: float
    admit2: float
    feasible: bool
    coma: float
    aoa1: float
    engine: str

    @property
    def decision(self) -> tuple[float, float, float, float]:
        return (self.tx_power1, self.tx_power2, self.admit1, self.admit2)


@dataclass(frozen=True)
class GridSpec:
    power_levels: tuple[float, ...]   # shared by both classes
    eta_levels: tuple[float, ...]

    @property
    def n_points(self) -> int:
        return (len(self.power_levels) * len(self.eta_levels)) ** 2


def default_grid(
    n_power: int = 20,
    n_eta: int = 20,
    power_min: float = 1e-3,
    power_max: float = 1.0,
) -> GridSpec:
    """Log-spaced powers, linear admission gates on (0, 1]."""
    powers = np.geomspace(power_min, power_max, n_power)
    etas = np.linspace(1.0 / n_eta, 1.0, n_eta)
    return GridSpec(tuple(powers.tolist()), tuple(etas.tolist()))


def dominates(coma_a: float, aoa_a: float, coma_b: float, aoa_b: float) -> bool:
    """True when point a is at least as good in both objectives, better in one."""
    return (coma_a <= coma_b and aoa_a <= aoa_b) and (coma_a < coma_b or aoa_a < aoa_b)


def front_indices_bruteforce(coma: np.ndarray, aoa: np.ndarray) -> list[int]:
    """Quadratic non-dominance check, the oracle for the sort-and-scan path.

    Among points tied in both objectives only the first index survives,
    matching the deterministic tie rule of the fast path.
    """
    n = len(coma)
    keep = []
    for i in range(n):
        dominated = False
        for j in range(n):
            if j == i:
                continue
            if dominates(coma[j], aoa[j], coma[i], aoa[i]):
                dominated = True
                break
            if coma[j] == coma[i] and aoa[j] == aoa[i] and j < i:
                dominated = True
                break
        if not dominated:
            keep.append(i)
    return keep


def evaluate_point(
    config: SystemConfig,
    tx_power1: float,
    tx_power2: float,
    admit1: float,
    admit2: float,
    engine: str = "geo-mg",
) -> DecisionPoint:
    """Evaluate one allocation by composing the full analytical pipeline."""
    if not (0.0 < admit1 <= 1.0 and 0.0 < admit2 <= 1.0):
        raise ValueError("admission gates must lie in (0, 1]")
    if tx_power1 <= 0.0 or tx_power2 <= 0.0:
        raise ValueError("transmit powers must be > 0")
    candidate = replace(
        config,
        task1=replace(config.task1, tx_power=tx_power1, admit_prob=admit1),
        task2=replace(config.task2, tx_power=tx_power2, admit_prob=admit2),
    )
    report = compute_report(candidate, engine)
    feasible = (
        config.energy_rate is None
        or energy_drawn(candidate) <= config.energy_rate
    )
    return DecisionPoint(
        tx_power1=tx_power1,
        tx_power2=tx_power2,
        admit1=admit1,
        admit2=admit2,
        feasible=feasible,
        coma=report.coma,
        aoa1=report.aoa[0],
        engine=engine,
    )


@dataclass(frozen=True, eq=False)
class SearchResult:
    engine: str
    grid: GridSpec
    columns: dict                      # name -> np.ndarray over all grid points
    front: tuple[DecisionPoint, ...]   # ascending aoa1, strictly descending coma
    baseline: DecisionPoint | None     # best feasible uniform allocation

    @property
    def n_feasible(self) -> int:
        return int(self.columns["feasible"].sum())


def _engine_availability(engine, a1, a2, mu1, mu2, capacity, units2, chunk=8192):
    """Availability pair for a batch of arrival-probability pairs."""
    occ = np.array(states_geo(capacity, units2), dtype=np.int64)
    used = occ[:, 0] + units2 * occ[:, 1]
    fits1 = (used + 1 <= capacity).astype(float)
    fits2 = (used + units2 <= capacity).astype(float)
    av1 = np.empty(len(a1))
    av2 = np.empty(len(a1))
    for lo in range(0, len(a1), chunk):
        hi = min(lo + chunk, len(a1))
        if engine == "geo-mg":
            s = mg_steady_batch(a1[lo:hi], a2[lo:hi], mu1, mu2, capacity, units2)
        elif engine == "erlang":
            s = _erlang_batch(a1[lo:hi] / mu1, a2[lo:hi] / mu2, occ)
        else:
            raise ValueError(f"no batched availability for engine {engine!r}")
        av1[lo:hi] = s @ fits1
        av2[lo:hi] = s @ fits2
    return av1, av2


def _erlang_batch(rho1, rho2, occ):
    from scipy.special import gammaln

    n1 = occ[:, 0].astype(float)
    n2 = occ[:, 1].astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        l1 = np.where(n1[None, :] > 0, n1[None, :] * np.log(rho1[:, None]), 0.0)
        l2 = np.where(n2[None, :] > 0, n2[None, :] * np.log(rho2[:, None]), 0.0)
    logw = l1 + l2 - gammaln(n1 + 1.0)[None, :] - gammaln(n2 + 1.0)[None, :]
    logw = np.where(np.isnan(logw), -np.inf, logw)
    w = np.exp(logw - logw.max(axis=1, keepdims=True))
    return w / w.sum(axis=1, keepdims=True)


def search(
    config: SystemConfig,
    grid: GridSpec | None = None,
    engine: str = "geo-mg",
    chunk: int = 8192,
) -> SearchResult:
    """Evaluate the full grid and extract the non-dominated front.

    All points (feasible or not) are retained in the per-point columns;
    the front is drawn from feasible points with a finite class-1 age.
    An empty feasible set yields an empty front, not an error.
    """
    if grid is None:
        grid = default_grid()
    powers = np.asarray(grid.power_levels, dtype=float)
    etas = np.asarray(grid.eta_levels, dtype=float)
    if len(powers) == 0 or len(etas) == 0:
        raise ValueError("grid must contain at least one power and one eta level")

    t1, t2 = config.task1, config.task2
    g1, g2 = t1.gen_prob, t2.gen_prob
    budget = math.inf if config.energy_rate is None else config.energy_rate

    if engine in ("geo-mg", "erlang"):
        pu_levels = np.array(
            [uplink_success_prob(config.channel, p) for p in powers]
        )
        ip1, ip2, ie1, ie2 = (
            idx.ravel()
            for idx in np.meshgrid(
                np.arange(len(powers)),
                np.arange(len(powers)),
                np.arange(len(etas)),
                np.arange(len(etas)),
                indexing="ij",
            )
        )
        p1v, p2v = powers[ip1], powers[ip2]
        e1v, e2v = etas[ie1], etas[ie2]
        x1 = e1v * pu_levels[ip1]      # gate * uplink per class
        x2 = e2v * pu_levels[ip2]
        mu1, mu2 = geochain.service_rates(config)
        av1, av2 = _engine_availability(
            engine, g1 * x1, g2 * x2, mu1, mu2,
            config.compute.capacity, config.task2.units_required, chunk=chunk,
        )
        with np.errstate(divide="ignore"):
            aoa1 = np.where(
                g1 * x1 * av1 > 0.0,
                1.0 / (g1 * x1 * av1) + t1.service_slots + t1.downlink_delay,
                np.inf,
            )
        coma = t1.penalty * g1 * (1.0 - x1 * av1) + t2.penalty * g2 * (1.0 - x2 * av2)
        feasible = g1 * e1v * p1v + g2 * e2v * p2v <= budget
    else:
        n = grid.n_points
        p1v = np.empty(n)
        p2v = np.empty(n)
        e1v = np.empty(n)
        e2v = np.empty(n)
        coma = np.empty(n)
        aoa1 = np.empty(n)
        feasible = np.empty(n, dtype=bool)
        k = 0
        for p1 in powers:
            for p2 in powers:
                for a1 in etas:
                    for a2 in etas:
                        point = evaluate_point(config, p1, p2, a1, a2, engine)
                        p1v[k], p2v[k], e1v[k], e2v[k] = p1, p2, a1, a2
                        coma[k], aoa1[k] = point.coma, point.aoa1
                        feasible[k] = point.feasible
                        k += 1

    columns = {
        "tx_power1": p1v,
        "tx_power2": p2v,
        "admit1": e1v,
        "admit2": e2v,
        "feasible": feasible,
        "coma": coma,
        "aoa1": aoa1,
    }
    front = _extract_front(columns, engine)
    baseline = _baseline_best(config, powers, etas, engine)
    return SearchResult(engine=engine, grid=grid, columns=columns,
                        front=front, baseline=baseline)


def _extract_front(columns, engine) -> tuple[DecisionPoint, ...]:
    eligible = columns["feasible"] & np.isfinite(columns["aoa1"])
    idx = np.flatnonzero(eligible)
    if len(idx) == 0:
        return ()
    order = np.lexsort(
        (
            columns["admit2"][idx],
            columns["admit1"][idx],
            columns["tx_power2"][idx],
            columns["tx_power1"][idx],
            columns["coma"][idx],
            columns["aoa1"][idx],
        )
    )
    kept = []
    best = math.inf
    for k in idx[order]:
        c = columns["coma"][k]
        if c < best:
            kept.append(k)
            best = c
    return tuple(
        DecisionPoint(
            tx_power1=float(columns["tx_power1"][k]),
            tx_power2=float(columns["tx_power2"][k]),
            admit1=float(columns["admit1"][k]),
            admit2=float(columns["admit2"][k]),
            feasible=True,
            coma=float(columns["coma"][k]),
            aoa1=float(columns["aoa1"][k]),
            engine=engine,
        )
        for k in kept
    )


def _baseline_best(config, powers, etas, engine) -> DecisionPoint | None:
    """Best feasible miss cost when both classes share one power and one gate."""
    t1, t2 = config.task1, config.task2
    g1, g2 = t1.gen_prob, t2.gen_prob
    budget = math.inf if config.energy_rate is None else config.energy_rate
    ip, ie = (idx.ravel() for idx in np.meshgrid(
        np.arange(len(powers)), np.arange(len(etas)), indexing="ij"))
    pv, ev = powers[ip], etas[ie]
    feasible = (g1 + g2) * ev * pv <= budget
    if engine in ("geo-mg", "erlang"):
        pu_levels = np.array([uplink_success_prob(config.channel, p) for p in powers])
        x = ev * pu_levels[ip]
        mu1, mu2 = geochain.service_rates(config)
        av1, av2 = _engine_availability(
            engine, g1 * x, g2 * x, mu1, mu2,
            config.compute.capacity, config.task2.units_required,
        )
        coma = t1.penalty * g1 * (1.0 - x * av1) + t2.penalty * g2 * (1.0 - x * av2)
        with np.errstate(divide="ignore"):
            aoa1 = np.where(
                g1 * x * av1 > 0.0,
                1.0 / (g1 * x * av1) + t1.service_slots + t1.downlink_delay,
                np.inf,
            )
    else:
        coma = np.empty(len(pv))
        aoa1 = np.empty(len(pv))
        for k in range(len(pv)):
            point = evaluate_point(config, pv[k], pv[k], ev[k], ev[k], engine)
            coma[k], aoa1[k] = point.coma, point.aoa1
    best = None
    for k in np.flatnonzero(feasible):
        key = (coma[k], pv[k], ev[k])
        if best is None or key < best:
            best = key
            best_k = k
    if best is None:
        return None
    return DecisionPoint(
        tx_power1=float(pv[best_k]),
        tx_power2=float(pv[best_k]),
        admit1=float(ev[best_k]),
        admit2=float(ev[best_k]),
        feasible=True,
        coma=float(coma[best_k]),
        aoa1=float(aoa1[best_k]),
        engine=engine,
    )
