"""Closed-form time codec for a leaky integrate-and-fire encoder.

A constant input voltage charges an RC membrane from rest toward U_in.
The membrane crosses the threshold u_th after

    t_s = -tau * ln(1 - u_th / U_in)          (U_in > u_th)

so the crossing time is a monotone code for the voltage. Inputs at or
below threshold never cross; that outcome is a regular value here, not
an error. This module holds the encoder configuration, the exact
encode/decode pair, the fitted linear (affine) decoder used by the
spiking Fourier transform, and the timing summary that characterises a
configuration (slowest/fastest spike and their ratio).

All times are seconds, all voltages volt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EncoderConfig",
    "LinearDecoderParams",
    "SpikeTime",
    "NO_SPIKE",
    "TimingSummary",
    "encode_time",
    "decode_ideal",
    "encode_linear",
    "decode_linear",
    "timing_summary",
]

# Relative slack for float comparisons in config validation.
_REL_EPS = 1e-9


@dataclass(frozen=True)
class SpikeTime:
    """Outcome of encoding one voltage: a crossing time, or no crossing.

    ``time`` is math.inf when the neuron never fires. Use ``fired`` to
    branch; arithmetic on a non-fired time is almost always a bug.
    """

    time: float
    fired: bool = True

    @classmethod
    def none(cls) -> "SpikeTime":
        return cls(time=math.inf, fired=False)


NO_SPIKE = SpikeTime.none()


@dataclass(frozen=True)
class EncoderConfig:
    """Static parameters of one encoder channel.

    tau           membrane time constant
    u_th          firing threshold, > 0
    u_min, u_max  working input range, u_th < u_min < u_max
    sample_period window length T_S (one voltage is encoded per window)
    reader_period readout resolution T_N; T_S must be an integer
                  multiple of T_N
    u_rest        reset/rest potential (kept for completeness; the
                  codec assumes charging starts from it)
    """

    tau: float
    u_th: float
    u_min: float
    u_max: float
    sample_period: float
    reader_period: float
    u_rest: float = 0.0

    def __post_init__(self) -> None:
        if not (self.tau > 0):
            raise ValueError("tau must be positive")
        if not (0 < self.u_th < self.u_min < self.u_max):
            raise ValueError("need 0 < u_th < u_min < u_max")
        if not (0 < self.reader_period <= self.sample_period):
            raise ValueError("need 0 < reader_period <= sample_period")
        ratio = self.sample_period / self.reader_period
        n = round(ratio)
        if n < 1 or abs(ratio - n) > _REL_EPS * n:
            raise ValueError(
                "sample_period must be an integer multiple of reader_period"
            )
        # The slowest spike (at u_min) has to land inside one window,
        # otherwise the working range cannot be read back at all.
        t_slow = -self.tau * math.log1p(-self.u_th / self.u_min)
        if t_slow > self.sample_period * (1 + _REL_EPS):
            raise ValueError(
                "slowest spike exceeds sample_period: "
                f"encode_time(u_min) = {t_slow:.6g} s > T_S = {self.sample_period:.6g} s"
            )

    @property
    def resolution(self) -> int:
        """Number of reader bins per window, N = T_S / T_N."""
        return round(self.sample_period / self.reader_period)


@dataclass(frozen=True)
class LinearDecoderParams:
    """Affine map between spike times and decoded values.

    Encoding direction: y in [y_min, y_max] maps linearly onto
    [t_lin_min, t_lin_max] with the largest y getting the earliest
    time (big inputs fire first, matching the physical encoder).
    """

    t_lin_min: float
    t_lin_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.t_lin_max > self.t_lin_min):
            raise ValueError("need t_lin_max > t_lin_min")
        if not (self.y_max > self.y_min):
            raise ValueError("need y_max > y_min")

    @property
    def slope(self) -> float:
        """Seconds of spike-time span per volt of value span."""
        return (self.t_lin_max - self.t_lin_min) / (self.y_max - self.y_min)


class TimingSummary:
    """Derived timing figures of a configuration.

    t_min   fastest spike, encode_time(u_max)
    t_max   slowest spike, encode_time(u_min)
    t_wait  dead time before the fastest spike can occur (= t_min)
    t_spk   usable span of spike times, t_max - t_min
    mu      t_spk / t_wait, a tau-free figure of merit: how much of the
            window carries information relative to the forced wait
    """

    __slots__ = ("t_min", "t_max", "t_wait", "t_spk", "mu")

    def __init__(self, t_min: float, t_max: float) -> None:
        self.t_min = t_min
        self.t_max = t_max
        self.t_wait = t_min
        self.t_spk = t_max - t_min
        self.mu = self.t_spk / self.t_wait

    def __repr__(self) -> str:
        return (
            f"TimingSummary(t_min={self.t_min:.6g}, t_max={self.t_max:.6g}, "
            f"mu={self.mu:.4g})"
        )


def encode_time(u_in: float, cfg: EncoderConfig) -> SpikeTime:
    """Exact threshold-crossing time for a constant input voltage.

    Returns NO_SPIKE for u_in <= u_th (the membrane saturates below
    threshold). Negative or zero inputs are likewise no-spike.
    """
    if u_in <= cfg.u_th:
        return NO_SPIKE
    # log1p keeps precision when u_th/u_in is tiny.
    return SpikeTime(-cfg.tau * math.log1p(-cfg.u_th / u_in))


def decode_ideal(t_s: float, cfg: EncoderConfig) -> float:
    """Invert encode_time: the voltage whose crossing time is t_s.

    Exact inverse of the closed form, so decode_ideal(encode_time(u))
    recovers u to float precision. t_s must be positive and finite.
    """
    if not (t_s > 0) or math.isinf(t_s):
        raise ValueError("t_s must be a positive finite time")
    return cfg.u_th / -math.expm1(-t_s / cfg.tau)


def encode_linear(y, p: LinearDecoderParams):
    """Map values onto spike times with the affine code.

    Accepts scalars or arrays. Values are not clipped; out-of-range y
    extrapolates, which is intentional (the fitted decoder is applied
    to whatever the circuit produced).
    """
    y = np.asarray(y, dtype=float)
    t = p.t_lin_min + p.slope * (p.y_max - y)
    return float(t) if t.ndim == 0 else t


def decode_linear(t, p: LinearDecoderParams):
    """Inverse of encode_linear: spike times back to values."""
    t = np.asarray(t, dtype=float)
    y = p.y_max - (t - p.t_lin_min) / p.slope
    return float(y) if y.ndim == 0 else y


def timing_summary(cfg: EncoderConfig) -> TimingSummary:
    """Timing envelope of the working range.

    The largest voltage fires first, so t_min comes from u_max and
    t_max from u_min. mu = t_spk / t_wait depends only on the three
    voltages (tau cancels) and grows with u_th: a higher threshold
    spreads the code over more of the window.
    """
    t_min = encode_time(cfg.u_max, cfg).time
    t_max = encode_time(cfg.u_min, cfg).time
    return TimingSummary(t_min, t_max)
