"""Command-line front end: batch experiments emitting plot-ready CSV.

Commands: solve (analytical metrics), simulate (one Monte Carlo run),
compare (blocking of every model across a load sweep), sweep (metrics
versus the class-1 admission gate), pareto (grid search and front
extraction). Every command is deterministic given its config, seed, and
flags: CSV outputs are byte-stable across runs.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import __version__, detchain, engines, pareto, sim
from .channel import effective_arrivals
from .config import (SystemConfig, apply_overrides, default_config, dumps,
                     load, validate)
from .errors import (ConfigError, EmptyResultError, NumericalError,
                     ResourceLimitError, ValidationError)
from .statespace import availability

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4
EXIT_RESOURCE = 5
EXIT_EMPTY = 6

# experiment defaults applied when no --config is given
_COMPARE_BASE = {
    "compute.capacity": "12",
    "task1.service_slots": "5",
    "task2.service_slots": "10",
    "task1.admit_prob": "1.0",
    "task2.admit_prob": "1.0",
}
_SWEEP_BASE = {"task2.admit_prob": "0.8"}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class _Output:
    """CSV sink: '-' means stdout, anything else a file path."""

    def __init__(self, path: str):
        self.path = path

    def __enter__(self):
        if self.path == "-":
            self._fh = sys.stdout
            self._close = False
        else:
            self._fh = open(self.path, "w", encoding="utf-8", newline="")
            self._close = True
        return self

    def __exit__(self, *exc):
        if self._close:
            self._fh.close()
        return False

    def comment(self, text: str):
        self._fh.write(f"# {text}\n")

    def row(self, values):
        self._fh.write(",".join(_fmt(v) for v in values) + "\n")


def _config_sha(config: SystemConfig) -> str:
    return hashlib.sha256(dumps(config).encode()).hexdigest()[:12]


def _stamp(out: _Output, command: str, config: SystemConfig, seed) -> None:
    out.comment(
        f"actage v{__version__} command={command} "
        f"config_sha={_config_sha(config)} seed={_fmt(seed)}"
    )


def _load_config(args, base_overrides=None) -> SystemConfig:
    if args.config is not None:
        config = load(args.config)
    else:
        config = default_config()
        if base_overrides:
            config = apply_overrides(config, base_overrides)
    if args.set:
        pairs = {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError("expected KEY=VALUE", key=item)
            key, _, value = item.partition("=")
            pairs[key.strip()] = value.strip()
        config = apply_overrides(config, pairs)
    report = validate(config)
    if not report.ok:
        raise ValidationError(report.violations)
    return config


def _derive_seed(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence((base_seed, index)).generate_state(1, np.uint64)[0])


def _sim_job(job):
    config, kwargs = job
    return sim.run(config, **kwargs)


def _run_sims(jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [_sim_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sim_job, jobs))


# --- commands -------------------------------------------------------------

def cmd_solve(args) -> int:
    config = _load_config(args)
    report = engines.compute_report(
        config, args.engine, max_states=args.state_cap
    )
    if args.engine == "det":
        # reachable count can fall short of the combinatorial one: only one
        # task is admitted per slot, so some pipeline alignments never occur
        a1, a2 = effective_arrivals(config)
        space = detchain.enumerate_states(
            a1, a2, config.task1.service_slots, config.task2.service_slots,
            config.compute.capacity, config.task2.units_required,
            max_states=args.state_cap)
        print(f"state_count_reachable = {len(space)}")
        print(f"state_count_formula = "
              f"{detchain.count_states(config.task1.service_slots, config.task2.service_slots, config.compute.capacity, config.task2.units_required)}")
    lines = [
        ("engine", report.engine),
        ("uplink_prob_task1", report.uplink[0]),
        ("uplink_prob_task2", report.uplink[1]),
        ("availability_task1", report.availability[0]),
        ("availability_task2", report.availability[1]),
        ("aoa_task1", report.aoa[0]),
        ("aoa_task2", report.aoa[1]),
        ("coma", report.coma),
        ("aoi", report.aoi),
    ]
    for name, value in lines:
        print(f"{name} = {_fmt(value)}")
    if args.out is not None:
        with _Output(args.out) as out:
            _stamp(out, "solve", config, config.rng_seed)
            out.row(name for name, _ in lines)
            out.row(value for _, value in lines)
    return EXIT_OK


_SIM_COLUMNS = (
    "service_mode", "departure_semantics", "fading_mode", "kernel", "seed",
    "slots", "warmup", "n_batches", "slot_convention",
    "aoa1", "aoa1_se", "aoa2", "aoa2_se", "coma", "coma_se",
    "blocking1", "blocking1_se", "blocking2", "blocking2_se",
    "aoi", "aoi_se", "uplink_rate1", "uplink_rate2",
    "generated1", "gate_rejected1", "uplink_lost1", "compute_blocked1",
    "admitted1", "executed1", "in_flight1",
    "generated2", "gate_rejected2", "uplink_lost2", "compute_blocked2",
    "admitted2", "executed2", "in_flight2",
    "received",
)


def _sim_row(res: sim.SimResult):
    c1, c2 = res.counts
    return (
        res.service_mode, res.departure_semantics, res.fading_mode, res.kernel,
        res.seed, res.slots, res.warmup, res.n_batches, res.slot_convention,
        res.aoa[0], res.aoa_se[0], res.aoa[1], res.aoa_se[1],
        res.coma, res.coma_se,
        res.blocking[0], res.blocking_se[0], res.blocking[1], res.blocking_se[1],
        res.aoi, res.aoi_se, res.uplink_rate[0], res.uplink_rate[1],
        c1.generated, c1.gate_rejected, c1.uplink_lost, c1.compute_blocked,
        c1.admitted, c1.executed, c1.in_flight,
        c2.generated, c2.gate_rejected, c2.uplink_lost, c2.compute_blocked,
        c2.admitted, c2.executed, c2.in_flight,
        res.received,
    )


def cmd_simulate(args) -> int:
    config = _load_config(args)
    result = sim.run(
        config,
        service_mode=args.service_mode,
        departure_semantics=args.semantics,
        fading_mode=args.fading,
        slots=args.slots,
        seed=args.seed,
        kernel=args.kernel,
    )
    if not result.conservation_ok():
        raise NumericalError("conservation ledger failed")
    with _Output(args.out) as out:
        _stamp(out, "simulate", config, result.seed)
        out.row(_SIM_COLUMNS)
        out.row(_sim_row(result))
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _load_config(args, base_overrides=_COMPARE_BASE)
    seed = config.rng_seed if args.seed is None else args.seed
    slots = config.sim_slots if args.slots is None else args.slots
    g2_values = np.linspace(args.g2_min, args.g2_max, args.points)
    pu_override = (1.0, 1.0) if args.ideal_uplink else None

    configs = []
    for g2 in g2_values:
        g1 = args.ratio * g2
        if g1 + g2 > 1.0:
            raise ValidationError(
                [f"load sweep point g2={g2} with ratio {args.ratio} exceeds g1+g2<=1"]
            )
        configs.append(replace(
            config,
            task1=replace(config.task1, gen_prob=float(g1)),
            task2=replace(config.task2, gen_prob=float(g2)),
        ))

    arrivals = [effective_arrivals(c, pu_override) for c in configs]
    shared_space = None
    if all(a1 > 0 and a2 > 0 and a1 + a2 < 1 for a1, a2 in arrivals):
        shared_space = detchain.enumerate_states(
            arrivals[0][0], arrivals[0][1],
            config.task1.service_slots, config.task2.service_slots,
            config.compute.capacity, config.task2.units_required,
            max_states=args.state_cap,
        )

    jobs = []
    for k, c in enumerate(configs):
        common = dict(slots=slots, pu_override=pu_override)
        jobs.append((c, dict(common, service_mode="deterministic",
                             seed=_derive_seed(seed, 2 * k))))
        jobs.append((c, dict(common, service_mode="geometric",
                             seed=_derive_seed(seed, 2 * k + 1))))
    sims = _run_sims(jobs, args.workers)

    with _Output(args.out) as out:
        _stamp(out, "compare", config, seed)
        out.row(("g2", "g1", "task", "model", "blocking", "stderr", "det_le_geo"))
        for k, c in enumerate(configs):
            det = detchain.solve_steady_state(
                c, pu_override, max_states=args.state_cap, space=shared_space)
            geo = engines.steady_state(c, "geo-mg", pu_override)
            erl = engines.steady_state(c, "erlang", pu_override)
            sim_det, sim_geo = sims[2 * k], sims[2 * k + 1]
            for task, units in ((1, c.task1.units_required),
                                (2, c.task2.units_required)):
                b_det = 1.0 - availability(det, units)
                b_geo = 1.0 - availability(geo, units)
                b_erl = 1.0 - availability(erl, units)
                rows = (
                    ("det", b_det, None, None),
                    ("geo-mg", b_geo, None, b_det <= b_geo + 1e-12),
                    ("erlang", b_erl, None, None),
                    ("sim-det", sim_det.blocking[task - 1],
                     sim_det.blocking_se[task - 1], None),
                    ("sim-geo", sim_geo.blocking[task - 1],
                     sim_geo.blocking_se[task - 1], None),
                )
                for model, blocking, se, flag in rows:
                    out.row((c.task2.gen_prob, c.task1.gen_prob, task, model,
                             blocking, se, flag))
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.param != "eta1":
        raise ConfigError(f"unsupported sweep parameter {args.param!r}")
    if not (0.0 < args.start <= 1.0 and 0.0 < args.stop <= 1.0):
        raise ValidationError(["sweep range must lie within (0, 1]"])
    config = _load_config(args, base_overrides=_SWEEP_BASE)
    seed = config.rng_seed if args.seed is None else args.seed
    slots = config.sim_slots if args.slots is None else args.slots
    values = np.linspace(args.start, args.stop, args.points)

    configs = [
        replace(config, task1=replace(config.task1, admit_prob=float(v)))
        for v in values
    ]
    jobs = []
    for k, c in enumerate(configs):
        jobs.append((c, dict(slots=slots, service_mode="deterministic",
                             seed=_derive_seed(seed, 2 * k))))
        jobs.append((c, dict(slots=slots, service_mode="geometric",
                             seed=_derive_seed(seed, 2 * k + 1))))
    sims = _run_sims(jobs, args.workers)

    analytic_engines = [e for e in args.engines.split(",") if e]
    with _Output(args.out) as out:
        _stamp(out, "sweep", config, seed)
        out.row(("eta1", "model", "aoa1", "aoa2", "coma", "aoi",
                 "aoa1_se", "aoa2_se", "coma_se", "aoi_se"))
        for k, c in enumerate(configs):
            for engine in analytic_engines:
                rep = engines.compute_report(c, engine, max_states=args.state_cap)
                out.row((c.task1.admit_prob, engine, rep.aoa[0], rep.aoa[1],
                         rep.coma, rep.aoi, None, None, None, None))
            for res in (sims[2 * k], sims[2 * k + 1]):
                out.row((c.task1.admit_prob, f"sim-{res.service_mode[:3]}",
                         res.aoa[0], res.aoa[1], res.coma, res.aoi,
                         res.aoa_se[0], res.aoa_se[1], res.coma_se, res.aoi_se))
    return EXIT_OK


def cmd_pareto(args) -> int:
    config = _load_config(args)
    grid = pareto.default_grid(
        n_power=args.grid_powers,
        n_eta=args.grid_eta,
        power_min=args.power_min,
        power_max=args.power_max,
    )
    result = pareto.search(config, grid, engine=args.engine)

    if args.out_points is not None:
        cols = result.columns
        with _Output(args.out_points) as out:
            _stamp(out, "pareto-points", config, config.rng_seed)
            out.row(("tx_power1", "tx_power2", "admit1", "admit2",
                     "feasible", "coma", "aoa1"))
            for k in range(len(cols["coma"])):
                out.row((cols["tx_power1"][k], cols["tx_power2"][k],
                         cols["admit1"][k], cols["admit2"][k],
                         bool(cols["feasible"][k]), cols["coma"][k],
                         cols["aoa1"][k]))
    if args.out_front is not None:
        with _Output(args.out_front) as out:
            _stamp(out, "pareto-front", config, config.rng_seed)
            out.row(("kind", "tx_power1", "tx_power2", "admit1", "admit2",
                     "feasible", "coma", "aoa1"))
            for p in result.front:
                out.row(("front", p.tx_power1, p.tx_power2, p.admit1,
                         p.admit2, p.feasible, p.coma, p.aoa1))
            if result.baseline is not None:
                b = result.baseline
                out.row(("baseline", b.tx_power1, b.tx_power2, b.admit1,
                         b.admit2, b.feasible, b.coma, b.aoa1))

    if not result.front:
        raise EmptyResultError("no feasible point with finite class-1 age")
    base_coma = None if result.baseline is None else result.baseline.coma
    best_coma = min(p.coma for p in result.front)
    gap = None if base_coma is None else base_coma - best_coma
    print(f"front_size = {len(result.front)}", file=sys.stderr)
    print(f"baseline_min_coma = {_fmt(base_coma)}", file=sys.stderr)
    print(f"front_min_coma = {_fmt(best_coma)}", file=sys.stderr)
    print(f"dominance_gap = {_fmt(gap)}", file=sys.stderr)
    return EXIT_OK


# --- argument parsing ------------------------------------------------------

def _add_common(p, engine=False):
    p.add_argument("--config", help="config file (defaults baked in when omitted)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--state-cap", type=int, default=detchain.DEFAULT_STATE_CAP,
                   help="abort the exact engine beyond this many states")
    if engine:
        p.add_argument("--engine", choices=engines.ENGINES, default="geo-mg")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actage",
        description="Two-class compute-pool actuation-age toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("solve", help="analytical metrics for one config")
    _add_common(p, engine=True)
    p.add_argument("--out", default=None, help="optional CSV ('-' for stdout)")
    p.set_defaults(func=cmd_solve)

    p = subs.add_parser("simulate", help="one Monte Carlo run")
    _add_common(p)
    p.add_argument("--service-mode", choices=sim.SERVICE_MODES,
                   default="deterministic")
    p.add_argument("--semantics", choices=sim.DEPARTURE_SEMANTICS, default="pre",
                   help="admission sees pre- or post-departure occupancy")
    p.add_argument("--fading", choices=sim.FADING_MODES, default="bernoulli")
    p.add_argument("--slots", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--kernel", choices=("cython", "python"), default=None)
    p.add_argument("--out", default="-", help="CSV output ('-' for stdout)")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser(
        "compare",
        help="blocking probability of every model across a load sweep",
        description="Defaults reproduce the model-comparison experiment: "
                    "capacity 12, service 5/10 slots, open gates, ideal "
                    "uplink, class-1 load locked to ratio * class-2 load.",
    )
    _add_common(p)
    p.add_argument("--ratio", type=float, default=4.0,
                   help="g1/g2 generation-probability ratio")
    p.add_argument("--g2-min", type=float, default=0.005)
    p.add_argument("--g2-max", type=float, default=0.095)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--ideal-uplink", action=argparse.BooleanOptionalAction,
                   default=True, help="force decode probability 1 per class")
    p.add_argument("--slots", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_compare)

    p = subs.add_parser(
        "sweep",
        help="metrics versus the class-1 admission gate",
        description="Defaults reproduce the gate sweep experiment "
                    "(class-2 gate 0.8).",
    )
    _add_common(p)
    p.add_argument("--param", default="eta1")
    p.add_argument("--start", type=float, default=0.1)
    p.add_argument("--stop", type=float, default=1.0)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--engines", default="det,geo-mg,erlang",
                   help="comma-separated analytic engines")
    p.add_argument("--slots", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("pareto", help="grid search of the allocation trade-off")
    _add_common(p, engine=True)
    p.add_argument("--grid-powers", type=int, default=20)
    p.add_argument("--grid-eta", type=int, default=20)
    p.add_argument("--power-min", type=float, default=1e-3)
    p.add_argument("--power-max", type=float, default=1.0)
    p.add_argument("--out-points", default=None,
                   help="CSV of every evaluated point")
    p.add_argument("--out-front", default=None,
                   help="CSV of the front plus the uniform baseline")
    p.set_defaults(func=cmd_pareto)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"actage: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"actage: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceLimitError as exc:
        print(f"actage: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except EmptyResultError as exc:
        print(f"actage: empty result: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except NumericalError as exc:
        print(f"actage: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
