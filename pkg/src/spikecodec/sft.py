"""Spiking Fourier transform over linearly phase-coded spike frames.

A frame of K windows carries K spike times, each a linear code for one
sample value. Two integrate-without-leak neurons per output bin (one
weighted +w, one -w, with w a row of DFT cosines or negative sines)
charge during the frame: a spike arriving at time t contributes
w * (T_charge - t), so earlier spikes (larger values) contribute more.
Because the code is affine in the value, each membrane ends up affine
in the DFT coefficient of the decoded samples, and the constant part
is carried by the weight-row sum, which vanishes for every bin except
DC. A readout phase then drives each neuron with a constant current
against a threshold, so its output spike time is again a linear code,
now for the membrane value.

sft_frame runs the mechanism and returns the spectrum calibrated to
plain DFT units of the decoded sample values: subtract the row-sum
term, halve the +/- pair difference, divide by the code slope. That
makes it directly comparable to an FFT of ideally sampled values.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional

import numpy as np

from .codec import EncoderConfig, LinearDecoderParams
from .simulate import SpikeTrain

__all__ = [
    "SftConfig",
    "Spectrum",
    "dft_weights",
    "sft_frame",
    "sft_stream",
    "write_spectrum",
]


@dataclass(frozen=True)
class SftConfig:
    """Geometry of the transform.

    frame_size          K, windows per frame and output bins
    decoder             affine time code the frame was produced with
    charge_phase_steps  length of the charge phase, in ticks
    readout_phase_steps length of the readout phase, in ticks
    tick                seconds per step (the reader period upstream)
    sample_period       window length T_S, used only to label bins
                        with physical frequencies k / (K * T_S)
    """

    frame_size: int
    decoder: LinearDecoderParams
    charge_phase_steps: int
    readout_phase_steps: int
    tick: float
    sample_period: float

    def __post_init__(self) -> None:
        if self.frame_size < 2:
            raise ValueError("frame_size must be at least 2")
        if self.charge_phase_steps < 1 or self.readout_phase_steps < 1:
            raise ValueError("phase lengths must be at least one step")
        if not (self.tick > 0 and self.sample_period > 0):
            raise ValueError("tick and sample_period must be positive")

    @classmethod
    def for_encoder(
        cls,
        enc: EncoderConfig,
        decoder: LinearDecoderParams,
        frame_size: int = 128,
        charge_phase_steps: Optional[int] = None,
        readout_phase_steps: Optional[int] = None,
    ) -> "SftConfig":
        """Derive phase geometry from an encoder: one charge phase per
        window, readout as long as the charge phase by default."""
        charge = enc.resolution if charge_phase_steps is None else charge_phase_steps
        read = charge if readout_phase_steps is None else readout_phase_steps
        return cls(
            frame_size=frame_size,
            decoder=decoder,
            charge_phase_steps=charge,
            readout_phase_steps=read,
            tick=enc.reader_period,
            sample_period=enc.sample_period,
        )

    @property
    def charge_duration(self) -> float:
        return self.charge_phase_steps * self.tick

    @property
    def readout_duration(self) -> float:
        return self.readout_phase_steps * self.tick


@dataclass(frozen=True)
class Spectrum:
    """K complex coefficients in DFT units of the decoded values."""

    coefficients: np.ndarray
    sample_period: float

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=complex)
        object.__setattr__(self, "coefficients", c)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("coefficients must be a 1-d array, length >= 2")

    def __len__(self) -> int:
        return int(self.coefficients.size)

    @property
    def bin_frequencies(self) -> np.ndarray:
        k = np.arange(len(self))
        return k / (len(self) * self.sample_period)

    def magnitude(self) -> np.ndarray:
        return np.abs(self.coefficients)


@lru_cache(maxsize=8)
def _weights_cached(k: int):
    n = np.arange(k)
    ang = 2.0 * np.pi * np.outer(n, n) / k
    return np.cos(ang), -np.sin(ang)


def dft_weights(frame_size: int):
    """Weight matrices (cosine, negative sine), each K x K.

    Row k against a sample vector gives the real resp. imaginary part
    of DFT coefficient k. Entries lie in [-1, 1]; row 0 of the cosine
    matrix is all ones and row sums of every other row vanish.
    """
    if frame_size < 2:
        raise ValueError("frame_size must be at least 2")
    cos_w, sin_w = _weights_cached(int(frame_size))
    return cos_w.copy(), sin_w.copy()


def _membranes(times: np.ndarray, cfg: SftConfig) -> np.ndarray:
    """Charge-phase membrane values, complex per bin, for +w neurons."""
    t_charge = cfg.charge_duration
    dur = np.clip(t_charge - times, 0.0, None)
    cos_w, sin_w = _weights_cached(cfg.frame_size)
    return cos_w @ dur + 1j * (sin_w @ dur)


def _readout_pair(v: np.ndarray, theta: float, i_read: float) -> np.ndarray:
    """Run one membrane bank through the +/- readout pair.

    Each neuron fires when the constant drive closes the gap to the
    threshold, t = (theta -+ v) / i_read, and the time is decoded back
    to a membrane value. Differencing the pair cancels the common mode
    and doubles the signal.
    """
    t_pos = (theta - v) / i_read
    t_neg = (theta + v) / i_read
    return (theta - i_read * t_pos) - (theta - i_read * t_neg)


def sft_frame(times, cfg: SftConfig) -> Spectrum:
    """Transform one frame of spike times into a calibrated spectrum.

    times holds K in-window spike times, seconds from each window's
    start; silent windows must already be substituted (sft_stream uses
    the decoder's latest code time, i.e. the smallest value).
    """
    times = np.asarray(times, dtype=float)
    if times.shape != (cfg.frame_size,):
        raise ValueError(f"expected {cfg.frame_size} spike times, got {times.shape}")
    if not np.all(np.isfinite(times)) or np.any(times < 0):
        raise ValueError("spike times must be finite and non-negative")

    v = _membranes(times, cfg)

    # Readout threshold bounds any reachable membrane magnitude, so
    # both neurons of every pair fire within the readout phase.
    t_charge = cfg.charge_duration
    theta = cfg.frame_size * t_charge
    i_read = 2.0 * theta / cfg.readout_duration
    v_pair = _readout_pair(v.real, theta, i_read) + 1j * _readout_pair(
        v.imag, theta, i_read
    )

    # Calibrate to DFT units of the decoded values. With the affine
    # code t = a - slope*y the membrane is
    #   v_k = (T_charge - a) * rowsum_k + slope * (W y)_k
    # so strip the row-sum term (nonzero only near DC) and rescale.
    p = cfg.decoder
    a = p.t_lin_min + p.slope * p.y_max
    cos_w, sin_w = _weights_cached(cfg.frame_size)
    rowsum = cos_w.sum(axis=1) + 1j * sin_w.sum(axis=1)
    coeff = (0.5 * v_pair - (t_charge - a) * rowsum) / p.slope
    return Spectrum(coefficients=coeff, sample_period=cfg.sample_period)


def sft_stream(train: SpikeTrain, cfg: SftConfig, hop: Optional[int] = None) -> List[Spectrum]:
    """Slice a spike train into frames and transform each.

    hop defaults to frame_size (back-to-back frames). Windows without
    a spike enter as the decoder's largest code time, clipped to the
    charge phase. The train must cover at least one frame.
    """
    k = cfg.frame_size
    if hop is None:
        hop = k
    if hop < 1:
        raise ValueError("hop must be at least 1")
    if len(train) < k:
        raise ValueError(f"train has {len(train)} windows, need at least {k}")
    silent_time = min(cfg.decoder.t_lin_max, cfg.charge_duration)
    t = train.bins * train.config.reader_period
    times = np.where(train.fired, t, silent_time)
    out = []
    for start in range(0, len(train) - k + 1, hop):
        out.append(sft_frame(times[start : start + k], cfg))
    return out


def write_spectrum(spec: Spectrum, path: str) -> None:
    """CSV dump: bin, physical frequency, re, im, magnitude."""
    tmp = f"{path}.tmp.{os.getpid()}"
    freqs = spec.bin_frequencies
    mags = spec.magnitude()
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin", "freq_hz", "re", "im", "mag"])
        for k, c in enumerate(spec.coefficients):
            w.writerow([k, repr(float(freqs[k])), repr(float(c.real)),
                        repr(float(c.imag)), repr(float(mags[k]))])
    os.replace(tmp, path)
