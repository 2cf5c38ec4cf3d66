"""Event-accurate simulation of the sample-and-encode circuit.

One window of length T_S holds the input voltage sampled at the window
start, charges the membrane from rest, and registers the threshold
crossing on a reader that ticks every T_N. The registered value is the
bin index k = ceil(t_s / T_N), k in 1..N. After firing, the neuron is
held refractory until the window ends, so each window yields at most
one spike. A crossing that would land after the window (or no crossing
at all) registers as no spike, stored as bin 0.

Crossing times come from the closed form of the codec rather than from
stepping the ODE; an integration oracle in the test-suite pins the two
against each other. Additive membrane noise is modelled as an
equivalent threshold drop, which preserves the closed form.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, asdict
from typing import Callable, Optional

import numpy as np

from .codec import EncoderConfig

__all__ = [
    "ThermalNoiseModel",
    "AnalogSignal",
    "SpikeTrain",
    "simulate_window",
    "encode_signal",
    "membrane_trace",
    "write_spike_train",
    "read_spike_train",
]

# A crossing within this relative distance of a reader tick counts as
# hitting the tick. Guards ceil() against float dust in t_s / T_N.
_TICK_SNAP = 1e-9

NOISE_MODES = ("constant", "per-window")


@dataclass(frozen=True)
class ThermalNoiseModel:
    """Additive membrane offset, expressed as a threshold drop delta_u.

    mode "constant" applies the full delta_u in every window;
    "per-window" draws a fresh offset uniformly from [0, delta_u] per
    window, seeded per (rng_seed, window_index) so runs are
    reproducible and windows are independent of evaluation order.
    """

    delta_u: float
    mode: str = "constant"
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.delta_u < 0:
            raise ValueError("delta_u must be >= 0")
        if self.mode not in NOISE_MODES:
            raise ValueError(f"mode must be one of {NOISE_MODES}")

    def offset(self, window_index: int) -> float:
        if self.mode == "constant":
            return self.delta_u
        rng = np.random.default_rng([self.rng_seed, window_index])
        return float(rng.uniform(0.0, self.delta_u))


@dataclass(frozen=True)
class AnalogSignal:
    """A finite-duration voltage signal u(t).

    func must accept float arrays (vectorised). Generators for the
    stock waveforms live in signals.py.
    """

    func: Callable[[np.ndarray], np.ndarray]
    duration: float

    def __post_init__(self) -> None:
        if not (self.duration > 0):
            raise ValueError("duration must be positive")

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class SpikeTrain:
    """Reader output for a run: one bin index per window.

    bins[m] is in 1..cfg.resolution, or 0 for no spike in window m.
    The config (and noise seed, when noise was applied) travels with
    the data so a train is decodable on its own.
    """

    bins: np.ndarray
    config: EncoderConfig
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        b = np.asarray(self.bins, dtype=np.int64)
        object.__setattr__(self, "bins", b)
        if b.ndim != 1:
            raise ValueError("bins must be one-dimensional")
        n = self.config.resolution
        if b.size and (b.min() < 0 or b.max() > n):
            raise ValueError(f"bin indices must lie in 0..{n}")

    def __len__(self) -> int:
        return int(self.bins.size)

    @property
    def fired(self) -> np.ndarray:
        return self.bins > 0

    def spike_times(self) -> np.ndarray:
        """Registered times k*T_N within each window; NaN where silent."""
        t = self.bins * self.config.reader_period
        return np.where(self.fired, t, np.nan)


def _crossing_times(u_held, threshold, tau):
    """Vectorised closed-form crossing times; inf where no crossing."""
    u = np.asarray(u_held, dtype=float)
    out = np.full(u.shape, np.inf)
    m = u > threshold
    if np.any(m):
        out[m] = -tau * np.log1p(-threshold / u[m])
    return out


def _register(t_s, cfg: EncoderConfig):
    """Reader bins for crossing times: snap-to-tick, ceil, window clip."""
    t = np.asarray(t_s, dtype=float)
    crossed = np.isfinite(t)
    ticks = np.where(crossed, t, 0.0) / cfg.reader_period
    near = np.rint(ticks)
    exact = np.abs(ticks - near) <= _TICK_SNAP * np.maximum(near, 1.0)
    k = np.where(exact, near, np.ceil(ticks))
    bins = np.where(crossed & (k <= cfg.resolution) & (k >= 1), k, 0)
    return bins.astype(np.int64)


def simulate_window(
    u_in: float,
    cfg: EncoderConfig,
    noise: Optional[ThermalNoiseModel] = None,
    window_index: int = 0,
) -> Optional[int]:
    """Simulate one window: held voltage in, reader bin out.

    Returns the bin index (1..N) or None when the window stays silent.
    window_index only matters for per-window noise, where it selects
    the window's random draw.
    """
    delta = 0.0
    if noise is not None:
        if noise.delta_u >= cfg.u_th:
            raise ValueError("delta_u must stay below u_th")
        delta = noise.offset(window_index)
    t = _crossing_times([u_in], cfg.u_th - delta, cfg.tau)
    k = int(_register(t, cfg)[0])
    return k if k > 0 else None


def encode_signal(
    sig: AnalogSignal,
    cfg: EncoderConfig,
    noise: Optional[ThermalNoiseModel] = None,
) -> SpikeTrain:
    """Encode a signal window by window into a SpikeTrain.

    The signal is sampled and held at each window start m*T_S; windows
    are independent, so the whole run reduces to one vectorised pass.
    The signal must cover at least one full window.
    """
    m_windows = int(math.floor(sig.duration / cfg.sample_period + _TICK_SNAP))
    if m_windows < 1:
        raise ValueError("signal shorter than one sample window")
    starts = np.arange(m_windows) * cfg.sample_period
    u_held = np.asarray(sig(starts), dtype=float)

    if noise is None:
        delta = 0.0
        seed = None
    else:
        if noise.delta_u >= cfg.u_th:
            raise ValueError("delta_u must stay below u_th")
        seed = noise.rng_seed
        if noise.mode == "constant":
            delta = noise.delta_u
        else:
            delta = np.array([noise.offset(m) for m in range(m_windows)])

    t = _crossing_times(u_held, cfg.u_th - delta, cfg.tau)
    return SpikeTrain(bins=_register(t, cfg), config=cfg, seed=seed)


def membrane_trace(u_in: float, cfg: EncoderConfig, dt: float):
    """Analytic membrane trajectory over one window, for plotting.

    Returns (times, voltages) on a grid of step dt covering [0, T_S].
    The trace follows the charging curve up to the threshold crossing
    and sits at u_rest for the rest of the window (refractory hold).
    No noise; this is a diagnostic view of the ideal cell.
    """
    if not (0 < dt <= cfg.reader_period):
        raise ValueError("dt must be positive and at most reader_period")
    n = int(round(cfg.sample_period / dt))
    t = np.linspace(0.0, n * dt, n + 1)
    u = u_in * -np.expm1(-t / cfg.tau)
    t_cross = _crossing_times([u_in], cfg.u_th, cfg.tau)[0]
    u[t > t_cross] = cfg.u_rest
    return t, u


# ---------------------------------------------------------------------------
# persistence

def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_spike_train(train: SpikeTrain, csv_path: str, json_path: Optional[str] = None) -> None:
    """Write a train as CSV (window,bin; bin empty for silence) plus a
    JSON sidecar holding the config and seed."""
    if json_path is None:
        json_path = os.path.splitext(csv_path)[0] + ".json"
    lines = ["window,bin"]
    for m, k in enumerate(train.bins):
        lines.append(f"{m},{k}" if k > 0 else f"{m},")
    _atomic_write(csv_path, "\n".join(lines) + "\n")
    meta = {
        "encoder": asdict(train.config),
        "seed": train.seed,
        "windows": len(train),
    }
    _atomic_write(json_path, json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_spike_train(csv_path: str, json_path: Optional[str] = None) -> SpikeTrain:
    if json_path is None:
        json_path = os.path.splitext(csv_path)[0] + ".json"
    with open(json_path) as fh:
        meta = json.load(fh)
    cfg = EncoderConfig(**meta["encoder"])
    bins = []
    with open(csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            cell = row["bin"].strip()
            bins.append(int(cell) if cell else 0)
    return SpikeTrain(bins=np.array(bins, dtype=np.int64), config=cfg, seed=meta.get("seed"))
