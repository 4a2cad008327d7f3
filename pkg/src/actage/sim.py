"""Slot-level Monte Carlo simulation of the full pipeline.

Generation, admission gate, fading uplink, finite compute pool, and
actuation ages are simulated slot by slot. All randomness is pregenerated
with one seeded generator split into four substreams (generation /
admission / fading / service), so toggling the fading-draw mode or the
service model never perturbs the other streams, and the compiled and
pure-Python kernels consume identical draws, so results are bit-identical
across kernels and across runs with the same seed.

Slot convention: ages are sampled at the start of each slot before any
event; a task admitted at slot t with duration K departs (and its command
is considered executed) at slot t + K; the fractional downlink delay is
added to the final time-average age rather than tracked per slot. Service
durations are sampled at admission; for the memoryless mode this is the
geometric horizon of the per-slot completion coin, which is statistically
identical and keeps the slot loop constant-time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernel_py
from .channel import fading_threshold, uplink_success_prob
from .config import SystemConfig, validate
from .errors import NumericalError, ValidationError

try:
    from . import _kernel  # compiled slot loop

    _HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _kernel = None
    _HAVE_COMPILED = False

DEFAULT_KERNEL = "cython" if _HAVE_COMPILED else "python"
SERVICE_MODES = ("deterministic", "geometric")
DEPARTURE_SEMANTICS = ("pre", "post")
FADING_MODES = ("bernoulli", "draw")
SLOT_CONVENTION = (
    "ages@slot-start;exec@departure-slot;downlink-added-post-hoc"
)

__all__ = [
    "SimResult",
    "TaskCounts",
    "run",
    "available_kernels",
    "DEFAULT_KERNEL",
    "SLOT_CONVENTION",
]


def available_kernels() -> tuple[str, ...]:
    return ("cython", "python") if _HAVE_COMPILED else ("python",)


@dataclass(frozen=True)
class TaskCounts:
    """Lifecycle tally of one class over the whole run."""

    generated: int
    gate_rejected: int
    uplink_lost: int
    compute_blocked: int
    admitted: int
    executed: int
    in_flight: int

    @property
    def conserved(self) -> bool:
        return self.generated == (
            self.gate_rejected
            + self.uplink_lost
            + self.compute_blocked
            + self.executed
            + self.in_flight
        )


@dataclass(frozen=True)
class SimResult:
    """Empirical metrics with batch-means standard errors.

    Point estimates cover the post-warmup horizon; counts cover the whole
    run so the conservation identity holds exactly.
    """

    aoa: tuple[float, float]
    aoa_se: tuple[float, float]
    coma: float
    coma_se: float
    blocking: tuple[float, float]
    blocking_se: tuple[float, float]
    aoi: float
    aoi_se: float
    uplink_rate: tuple[float, float]
    counts: tuple[TaskCounts, TaskCounts]
    received: int
    interexec: tuple[tuple[int, int, int], tuple[int, int, int]]  # (n, sum, sumsq)
    seed: int
    slots: int
    warmup: int
    n_batches: int
    service_mode: str
    departure_semantics: str
    fading_mode: str
    kernel: str
    slot_convention: str = SLOT_CONVENTION

    def conservation_ok(self) -> bool:
        return all(c.conserved for c in self.counts)


def _geometric_durations(u: np.ndarray, mu: float) -> np.ndarray:
    """Inverse-transform geometric horizons on {1, 2, ...} with mean 1/mu."""
    if mu >= 1.0:
        return np.ones(len(u), dtype=np.int64)
    k = np.ceil(np.log1p(-u) / math.log1p(-mu))
    return np.maximum(1, k).astype(np.int64)


def _batch_se(values: np.ndarray) -> float:
    vals = values[np.isfinite(values)]
    if len(vals) < 2:
        return math.nan
    return float(np.std(vals, ddof=1) / math.sqrt(len(vals)))


def run(
    config: SystemConfig,
    service_mode: str = "deterministic",
    departure_semantics: str = "pre",
    fading_mode: str = "bernoulli",
    slots: int | None = None,
    seed: int | None = None,
    kernel: str | None = None,
    pu_override: tuple[float, float] | None = None,
    n_batches: int = 20,
    warmup: int | None = None,
) -> SimResult:
    """Simulate the system and return time-averaged metrics.

    service_mode selects fixed-length or memoryless execution; the
    departure semantics decide whether an arrival's capacity check sees
    tasks that complete in the same slot ("pre", the default, matches the
    analytical chains) or not ("post"). fading_mode "draw" samples the
    actual fading power per slot instead of a success coin.
    """
    report = validate(config)
    if not report.ok:
        raise ValidationError(report.violations)
    if service_mode not in SERVICE_MODES:
        raise ValueError(f"service_mode must be one of {SERVICE_MODES}")
    if departure_semantics not in DEPARTURE_SEMANTICS:
        raise ValueError(f"departure_semantics must be one of {DEPARTURE_SEMANTICS}")
    if fading_mode not in FADING_MODES:
        raise ValueError(f"fading_mode must be one of {FADING_MODES}")
    if fading_mode == "draw" and pu_override is not None:
        raise ValueError("pu_override requires the bernoulli fading mode")
    kernel = kernel or DEFAULT_KERNEL
    if kernel == "cython" and not _HAVE_COMPILED:
        raise ValueError("compiled kernel is not available in this install")
    if kernel not in ("cython", "python"):
        raise ValueError(f"kernel must be 'cython' or 'python', got {kernel!r}")

    t1, t2 = config.task1, config.task2
    n_slots = int(config.sim_slots if slots is None else slots)
    if n_slots < 1:
        raise ValueError("slots must be >= 1")
    seed_val = int(config.rng_seed if seed is None else seed)
    if warmup is None:
        warmup = min(10_000, n_slots // 10)
    if warmup >= n_slots:
        raise ValueError("warmup must be smaller than the horizon")
    if n_batches < 1:
        raise ValueError("n_batches must be >= 1")
    n_batches = min(n_batches, n_slots - warmup)
    batch_len = max(1, (n_slots - warmup) // n_batches)

    streams = [
        np.random.Generator(np.random.PCG64(child))
        for child in np.random.SeedSequence(seed_val).spawn(4)
    ]
    s_gen, s_adm, s_link, s_svc = streams
    gen_u = s_gen.random(n_slots)
    adm_u = s_adm.random(n_slots)
    if fading_mode == "draw":
        m = config.channel.shape
        link_u = s_link.standard_gamma(m, n_slots) / m
        thr1 = fading_threshold(config.channel, t1.tx_power)
        thr2 = fading_threshold(config.channel, t2.tx_power)
        draw_flag = 1
    else:
        link_u = s_link.random(n_slots)
        if pu_override is None:
            thr1 = uplink_success_prob(config.channel, t1.tx_power)
            thr2 = uplink_success_prob(config.channel, t2.tx_power)
        else:
            thr1, thr2 = pu_override
        draw_flag = 0
    svc_u = s_svc.random(n_slots)
    if service_mode == "deterministic":
        dur1 = np.full(n_slots, t1.service_slots, dtype=np.int64)
        dur2 = np.full(n_slots, t2.service_slots, dtype=np.int64)
    else:
        dur1 = _geometric_durations(svc_u, 1.0 / t1.service_slots)
        dur2 = _geometric_durations(svc_u, 1.0 / t2.service_slots)

    batch_acc = np.zeros((n_batches, 16), dtype=np.int64)
    totals = np.zeros(13, dtype=np.int64)
    xstats = np.zeros(6, dtype=np.int64)
    run_fn = _kernel.run_slots if kernel == "cython" else _kernel_py.run_slots
    code = run_fn(
        n_slots, warmup, batch_len, n_batches,
        gen_u, adm_u, link_u, dur1, dur2,
        t1.gen_prob, t1.gen_prob + t2.gen_prob,
        t1.admit_prob, t2.admit_prob,
        thr1, thr2, draw_flag,
        t1.units_required, t2.units_required, config.compute.capacity,
        1 if departure_semantics == "pre" else 0,
        batch_acc, totals, xstats,
    )
    if code != 0:
        raise NumericalError("slot kernel reported a capacity accounting fault")

    return _assemble(
        config, batch_acc, totals, xstats,
        seed_val, n_slots, warmup, batch_len, n_batches,
        service_mode, departure_semantics, fading_mode, kernel,
    )


def _assemble(
    config, batch_acc, totals, xstats,
    seed_val, n_slots, warmup, batch_len, n_batches,
    service_mode, departure_semantics, fading_mode, kernel,
):
    t1, t2 = config.task1, config.task2
    usable = n_slots - warmup
    slots_per_batch = np.full(n_batches, batch_len, dtype=np.int64)
    slots_per_batch[-1] = usable - batch_len * (n_batches - 1)

    acc = batch_acc.astype(float)
    per_slot = slots_per_batch.astype(float)

    aoa1_b = acc[:, 0] / per_slot + t1.downlink_delay
    aoa2_b = acc[:, 1] / per_slot + t2.downlink_delay
    aoi_b = acc[:, 2] / per_slot
    # a class that never executes has no steady-state age to report
    aoa = (
        float(batch_acc[:, 0].sum() / usable + t1.downlink_delay)
        if totals[10] > 0 else math.inf,
        float(batch_acc[:, 1].sum() / usable + t2.downlink_delay)
        if totals[11] > 0 else math.inf,
    )
    aoi = float(batch_acc[:, 2].sum() / usable) if totals[12] > 0 else math.inf

    miss1_b = acc[:, 5] + acc[:, 7] + acc[:, 9]
    miss2_b = acc[:, 6] + acc[:, 8] + acc[:, 10]
    coma_b = (t1.penalty * miss1_b + t2.penalty * miss2_b) / per_slot
    coma = float((t1.penalty * miss1_b.sum() + t2.penalty * miss2_b.sum()) / usable)

    with np.errstate(invalid="ignore", divide="ignore"):
        att1_b = acc[:, 9] + acc[:, 11]
        att2_b = acc[:, 10] + acc[:, 12]
        blk1_b = np.where(att1_b > 0, acc[:, 9] / att1_b, np.nan)
        blk2_b = np.where(att2_b > 0, acc[:, 10] / att2_b, np.nan)
    att1, att2 = float(att1_b.sum()), float(att2_b.sum())
    blocking = (
        float(acc[:, 9].sum() / att1) if att1 > 0 else math.nan,
        float(acc[:, 10].sum() / att2) if att2 > 0 else math.nan,
    )

    up_att1 = acc[:, 3].sum() - acc[:, 5].sum()
    up_att2 = acc[:, 4].sum() - acc[:, 6].sum()
    uplink_rate = (
        float(1.0 - acc[:, 7].sum() / up_att1) if up_att1 > 0 else math.nan,
        float(1.0 - acc[:, 8].sum() / up_att2) if up_att2 > 0 else math.nan,
    )

    def task_counts(i):
        adm = int(totals[8 + i])
        exe = int(totals[10 + i])
        return TaskCounts(
            generated=int(totals[0 + i]),
            gate_rejected=int(totals[2 + i]),
            uplink_lost=int(totals[4 + i]),
            compute_blocked=int(totals[6 + i]),
            admitted=adm,
            executed=exe,
            in_flight=adm - exe,
        )

    return SimResult(
        aoa=aoa,
        aoa_se=(
            _batch_se(aoa1_b) if math.isfinite(aoa[0]) else math.nan,
            _batch_se(aoa2_b) if math.isfinite(aoa[1]) else math.nan,
        ),
        coma=coma,
        coma_se=_batch_se(coma_b),
        blocking=blocking,
        blocking_se=(_batch_se(blk1_b), _batch_se(blk2_b)),
        aoi=aoi,
        aoi_se=_batch_se(aoi_b),
        uplink_rate=uplink_rate,
        counts=(task_counts(0), task_counts(1)),
        received=int(totals[12]),
        interexec=(
            (int(xstats[0]), int(xstats[1]), int(xstats[2])),
            (int(xstats[3]), int(xstats[4]), int(xstats[5])),
        ),
        seed=seed_val,
        slots=n_slots,
        warmup=warmup,
        n_batches=n_batches,
        service_mode=service_mode,
        departure_semantics=departure_semantics,
        fading_mode=fading_mode,
        kernel=kernel,
    )
