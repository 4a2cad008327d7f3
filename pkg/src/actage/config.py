"""System parameters: types, defaults, validation, and file round-trip.

Every symbol used by the analytical solvers and the simulator lives here.
All quantities are stored in linear units; dB-suffixed config keys are
converted on load. Config objects are frozen and safe to share across
worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ConfigError, UnknownKeyError, ValidationError

__all__ = [
    "TaskClassParams",
    "ChannelParams",
    "ComputeParams",
    "SystemConfig",
    "ValidationReport",
    "default_config",
    "validate",
    "load",
    "loads",
    "save",
    "dumps",
    "apply_overrides",
]


@dataclass(frozen=True)
class TaskClassParams:
    """Per-class traffic, radio, and compute parameters."""

    gen_prob: float          # probability a packet of this class is generated per slot
    admit_prob: float        # admission-control gate probability
    tx_power: float          # sensor transmit power, watts
    units_required: int      # compute units held while the task executes
    service_slots: int       # deterministic service time, slots
    downlink_delay: float    # actuation-link delay, slots (may be fractional)
    penalty: float           # cost weight of a missed actuation


@dataclass(frozen=True)
class ChannelParams:
    """Uplink fading and path-loss parameters (all linear units)."""

    shape: float             # fading shape parameter, >= 0.5
    pathloss_exp: float
    distance: float          # meters
    noise_power: float       # watts
    snr_threshold: float     # decoding threshold, linear ratio


@dataclass(frozen=True)
class ComputeParams:
    capacity: int            # total parallel compute units in the pool


@dataclass(frozen=True)
class SystemConfig:
    task1: TaskClassParams
    task2: TaskClassParams
    channel: ChannelParams
    compute: ComputeParams
    energy_rate: float | None  # long-run power budget, watts; None disables the check
    sim_slots: int
    rng_seed: int


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate(). Violations are hard errors; flags are not."""

    violations: tuple[str, ...]
    energy_feasible: bool | None   # None when no energy budget is set
    starved_tasks: tuple[int, ...]  # classes whose unit demand exceeds capacity

    @property
    def ok(self) -> bool:
        return not self.violations


def default_config() -> SystemConfig:
    """Baseline operating point used whenever a key is not overridden."""
    return SystemConfig(
        task1=TaskClassParams(
            gen_prob=0.4,
            admit_prob=1.0,
            tx_power=0.05,
            units_required=1,
            service_slots=10,
            downlink_delay=0.1,
            penalty=1.0,
        ),
        task2=TaskClassParams(
            gen_prob=0.1,
            admit_prob=1.0,
            tx_power=0.2,
            units_required=4,
            service_slots=10,
            downlink_delay=0.1,
            penalty=10.0,
        ),
        channel=ChannelParams(
            shape=1.0,
            pathloss_exp=3.0,
            distance=50.0,
            noise_power=1e-8,          # -80 dB
            snr_threshold=10 ** 0.5,   # 5 dB
        ),
        compute=ComputeParams(capacity=8),
        energy_rate=0.18,
        sim_slots=10 ** 6,
        rng_seed=1,
    )


def validate(config: SystemConfig) -> ValidationReport:
    """Check every hard invariant and report soft feasibility flags.

    Returns a report rather than raising: energy infeasibility and
    starvation (a class that can never fit in the pool) are reportable
    states, not errors.
    """
    v: list[str] = []
    for name, t in (("task1", config.task1), ("task2", config.task2)):
        if not 0.0 <= t.gen_prob <= 1.0:
            v.append(f"{name}.gen_prob must be in [0, 1], got {t.gen_prob}")
        if not 0.0 < t.admit_prob <= 1.0:
            v.append(f"{name}.admit_prob must be in (0, 1], got {t.admit_prob}")
        if not t.tx_power > 0.0:
            v.append(f"{name}.tx_power must be > 0, got {t.tx_power}")
        if t.units_required < 1:
            v.append(f"{name}.units_required must be >= 1, got {t.units_required}")
        if t.service_slots < 1:
            v.append(f"{name}.service_slots must be >= 1, got {t.service_slots}")
        if t.downlink_delay < 0.0:
            v.append(f"{name}.downlink_delay must be >= 0, got {t.downlink_delay}")
        if t.penalty < 0.0:
            v.append(f"{name}.penalty must be >= 0, got {t.penalty}")

    c = config.channel
    if c.shape < 0.5:
        v.append(f"channel.shape must be >= 0.5, got {c.shape}")
    for field in ("shape", "pathloss_exp", "distance", "noise_power", "snr_threshold"):
        if not getattr(c, field) > 0.0:
            v.append(f"channel.{field} must be > 0, got {getattr(c, field)}")

    if config.compute.capacity < 1:
        v.append(f"compute.capacity must be >= 1, got {config.compute.capacity}")
    if config.task1.gen_prob + config.task2.gen_prob > 1.0 + 1e-15:
        v.append(
            "task1.gen_prob + task2.gen_prob must be <= 1, got "
            f"{config.task1.gen_prob + config.task2.gen_prob}"
        )
    if config.sim_slots < 1:
        v.append(f"sim_slots must be >= 1, got {config.sim_slots}")
    if config.energy_rate is not None and config.energy_rate < 0.0:
        v.append(f"energy_rate must be >= 0, got {config.energy_rate}")

    starved = tuple(
        i
        for i, t in ((1, config.task1), (2, config.task2))
        if t.units_required > config.compute.capacity
    )

    energy_feasible: bool | None = None
    if config.energy_rate is not None:
        energy_feasible = energy_drawn(config) <= config.energy_rate

    return ValidationReport(tuple(v), energy_feasible, starved)


# --- key=value file format ----------------------------------------------
#
# One `key = value` pair per line, `#` comments, blank lines ignored.
# Dotted keys address sections (task1.gen_prob, channel.shape, ...).
# Shorthand aliases: `gen_prob_1` == `task1.gen_prob`, bare `capacity` ==
# `compute.capacity`. dB-suffixed channel keys are converted to linear.

def _db(raw: str) -> float:
    return 10.0 ** (float(raw) / 10.0)


def _optional_float(s: str) -> float | None:
    if s.lower() in ("none", "off"):
        return None
    return float(s)


_TASK_FIELDS = {
    "gen_prob": float,
    "admit_prob": float,
    "tx_power": float,
    "units_required": int,
    "service_slots": int,
    "downlink_delay": float,
    "penalty": float,
}

# key -> (section, field, converter); section None means top level
_KEYS: dict[str, tuple[str | None, str, object]] = {}
for _f, _conv in _TASK_FIELDS.items():
    for _i in (1, 2):
        _KEYS[f"task{_i}.{_f}"] = (f"task{_i}", _f, _conv)
        _KEYS[f"{_f}_{_i}"] = (f"task{_i}", _f, _conv)
for _f in ("shape", "pathloss_exp", "distance", "noise_power", "snr_threshold"):
    _KEYS[f"channel.{_f}"] = ("channel", _f, float)
_KEYS["channel.noise_power_db"] = ("channel", "noise_power", _db)
_KEYS["channel.snr_threshold_db"] = ("channel", "snr_threshold", _db)
_KEYS["compute.capacity"] = ("compute", "capacity", int)
_KEYS["capacity"] = ("compute", "capacity", int)
_KEYS["energy_rate"] = (None, "energy_rate", _optional_float)
_KEYS["sim_slots"] = (None, "sim_slots", int)
_KEYS["rng_seed"] = (None, "rng_seed", int)


def apply_overrides(config: SystemConfig, pairs: dict[str, str]) -> SystemConfig:
    """Apply `key -> raw string value` overrides on top of a config."""
    sections: dict[str, dict] = {"task1": {}, "task2": {}, "channel": {}, "compute": {}}
    top: dict[str, object] = {}
    for key, raw in pairs.items():
        try:
            section, field, conv = _KEYS[key]
        except KeyError:
            raise UnknownKeyError(f"unknown key (known keys: see docs)", key=key) from None
        try:
            value = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value {raw!r} ({exc})", key=key) from None
        if section is None:
            top[field] = value
        else:
            sections[section][field] = value

    new = config
    if sections["task1"]:
        new = replace(new, task1=replace(new.task1, **sections["task1"]))
    if sections["task2"]:
        new = replace(new, task2=replace(new.task2, **sections["task2"]))
    if sections["channel"]:
        new = replace(new, channel=replace(new.channel, **sections["channel"]))
    if sections["compute"]:
        new = replace(new, compute=replace(new.compute, **sections["compute"]))
    if top:
        new = replace(new, **top)
    return new


def loads(text: str, path: str | None = None) -> SystemConfig:
    """Parse config text; unspecified keys keep their default values."""
    pairs: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", path=path, line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError("expected 'key = value'", path=path, line=lineno)
        if key in pairs:
            raise ConfigError("duplicate key", path=path, line=lineno, key=key)
        pairs[key] = value
        lines[key] = lineno

    try:
        config = apply_overrides(default_config(), pairs)
    except ConfigError as exc:
        if exc.key is not None and exc.key in lines:
            raise type(exc)(
                str(exc).split(": ", 1)[-1], path=path, line=lines[exc.key], key=exc.key
            ) from None
        raise

    report = validate(config)
    if not report.ok:
        raise ValidationError(report.violations)
    return config


def load(path) -> SystemConfig:
    """Load and validate a config file. Defaults apply to omitted keys."""
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read(), path=str(path))


def dumps(config: SystemConfig) -> str:
    """Serialize in the same key=value format accepted by loads()."""
    out = []
    for name, t in (("task1", config.task1), ("task2", config.task2)):
        for field in _TASK_FIELDS:
            out.append(f"{name}.{field} = {getattr(t, field)!r}")
    for field in ("shape", "pathloss_exp", "distance", "noise_power", "snr_threshold"):
        out.append(f"channel.{field} = {getattr(config.channel, field)!r}")
    out.append(f"compute.capacity = {config.compute.capacity!r}")
    rate = "none" if config.energy_rate is None else repr(config.energy_rate)
    out.append(f"energy_rate = {rate}")
    out.append(f"sim_slots = {config.sim_slots!r}")
    out.append(f"rng_seed = {config.rng_seed!r}")
    return "\n".join(out) + "\n"


def save(config: SystemConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(config))


def energy_drawn(config: SystemConfig) -> float:
    """Long-run average transmit power under the admission gates."""
    return (
        config.task1.gen_prob * config.task1.admit_prob * config.task1.tx_power
        + config.task2.gen_prob * config.task2.admit_prob * config.task2.tx_power
    )
