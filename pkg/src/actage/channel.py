"""Uplink outage analysis for a fading channel with path loss.

The squared fading envelope is gamma distributed with shape m and unit
mean, so the probability that the received SNR clears the decoding
threshold reduces to a regularized upper incomplete gamma function of the
dimensionless threshold psi.
"""

from __future__ import annotations

from dataclasses import dataclass

from scipy.special import gammaincc

from .config import ChannelParams, SystemConfig

__all__ = ["UplinkResult", "fading_threshold", "uplink_success_prob", "uplink",
           "effective_arrivals"]


@dataclass(frozen=True)
class UplinkResult:
    psi: float           # fading power the channel must exceed to decode
    success_prob: float


def fading_threshold(channel: ChannelParams, tx_power: float) -> float:
    """Normalized fading threshold: snr_threshold * noise * d^alpha / power."""
    if tx_power <= 0.0:
        raise ValueError(f"tx_power must be > 0, got {tx_power}")
    return (
        channel.snr_threshold
        * channel.noise_power
        * channel.distance ** channel.pathloss_exp
        / tx_power
    )


def uplink_success_prob(channel: ChannelParams, tx_power: float) -> float:
    """P(decode) = Q(m, m * psi), the ratio of upper to complete gamma integrals.

    For m = 1 (Rayleigh fading) this is exp(-psi).
    """
    psi = fading_threshold(channel, tx_power)
    m = channel.shape
    return float(gammaincc(m, m * psi))


def uplink(channel: ChannelParams, tx_power: float) -> UplinkResult:
    psi = fading_threshold(channel, tx_power)
    m = channel.shape
    return UplinkResult(psi=psi, success_prob=float(gammaincc(m, m * psi)))


def effective_arrivals(
    config: SystemConfig, pu_override: tuple[float, float] | None = None
) -> tuple[float, float]:
    """Per-slot probability that a class-i task reaches the compute pool.

    Generation, the admission gate, and uplink decoding are independent
    Bernoulli thinnings, so their product is the arrival probability seen
    by the queueing models. `pu_override` substitutes the uplink success
    probabilities (e.g. (1.0, 1.0) for an ideal uplink).
    """
    if pu_override is None:
        pu1 = uplink_success_prob(config.channel, config.task1.tx_power)
        pu2 = uplink_success_prob(config.channel, config.task2.tx_power)
    else:
        pu1, pu2 = pu_override
    a1 = config.task1.gen_prob * config.task1.admit_prob * pu1
    a2 = config.task2.gen_prob * config.task2.admit_prob * pu2
    return a1, a2
