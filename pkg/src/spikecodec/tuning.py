"""Fitting the linear decoder to the nonlinear time code.

The exact code t = f(y) is logarithmic, so reading it back with an
affine decoder leaves a shape error. The fit stretches the endpoint
time span by factors (1 + k1), (1 + k2) and searches (k1, k2) to
minimise

    loss = alpha * eps_lin - mu

where eps_lin integrates |y - decode_linear(f(y))| over the working
range (trapezoid quadrature) and mu rewards configurations that spend
more of the window on the informative part of the code. mu does not
depend on (k1, k2); it keeps reported losses comparable across
encoder configurations.

The search is a small self-contained differential evolution
(rand/1/bin, greedy selection) so results are reproducible from a
seed alone and there is no optimizer dependency.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, asdict
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .codec import (
    EncoderConfig,
    LinearDecoderParams,
    decode_linear,
    timing_summary,
)

__all__ = [
    "TunerConfig",
    "DEResult",
    "differential_evolution",
    "linear_error",
    "loss",
    "TuningResult",
    "fit_linear_decoder",
    "fit_with_threshold_search",
    "write_tuning",
    "read_decoder",
]


@dataclass(frozen=True)
class TunerConfig:
    """Loss weight, search bounds and evolution hyperparameters."""

    alpha: float = 1.0
    k1_bounds: Tuple[float, float] = (-1.0, 2.0)
    k2_bounds: Tuple[float, float] = (-1.0, 2.0)
    population: int = 30
    mutation: float = 0.8
    crossover: float = 0.9
    generations: int = 300
    rng_seed: int = 0
    grid_points: int = 1024

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        for name, (lo, hi) in (("k1_bounds", self.k1_bounds), ("k2_bounds", self.k2_bounds)):
            if lo < -1:
                raise ValueError(f"{name}: stretch factors below -1 invert the code")
            if not (math.isfinite(hi) and hi > lo):
                raise ValueError(f"{name}: need finite upper > lower")
        if self.population < 4:
            raise ValueError("population must be at least 4")
        if not (0 < self.mutation < 2):
            raise ValueError("mutation must be in (0, 2)")
        if not (0 < self.crossover <= 1):
            raise ValueError("crossover must be in (0, 1]")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")


@dataclass(frozen=True)
class DEResult:
    """Best point, its objective value, and best-so-far per generation."""

    x: np.ndarray
    fun: float
    history: np.ndarray


def _safe(objective: Callable, x: np.ndarray) -> float:
    val = float(objective(x))
    return val if math.isfinite(val) else math.inf


def differential_evolution(
    objective: Callable[[np.ndarray], float],
    bounds: Sequence[Tuple[float, float]],
    population: int = 30,
    mutation: float = 0.8,
    crossover: float = 0.9,
    generations: int = 300,
    rng_seed: int = 0,
    init: Optional[Sequence[float]] = None,
) -> DEResult:
    """Minimise a box-bounded objective with DE/rand/1/bin.

    Mutants are clipped back into the box, non-finite objective values
    count as +inf, and a trial replaces its target when it is no worse
    (greedy selection). init, when given, is clipped into the box and
    seeds the first population member, which guarantees the result is
    at least as good as that starting point.
    """
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    if lo.ndim != 1 or lo.size == 0 or not np.all(np.isfinite(lo) & np.isfinite(hi)):
        raise ValueError("bounds must be finite (lo, hi) pairs")
    if np.any(hi < lo):
        raise ValueError("each bound needs hi >= lo")
    dim = lo.size

    rng = np.random.default_rng(rng_seed)
    pop = lo + rng.random((population, dim)) * (hi - lo)
    if init is not None:
        pop[0] = np.clip(np.asarray(init, dtype=float), lo, hi)
    fit = np.array([_safe(objective, x) for x in pop])

    history = [float(fit.min())]
    for _ in range(generations):
        for i in range(population):
            idx = rng.choice(population - 1, size=3, replace=False)
            idx[idx >= i] += 1  # three distinct partners, none equal to i
            a, b, c = pop[idx]
            mutant = np.clip(a + mutation * (b - c), lo, hi)
            cross = rng.random(dim) < crossover
            cross[rng.integers(dim)] = True
            trial = np.where(cross, mutant, pop[i])
            f_trial = _safe(objective, trial)
            if f_trial <= fit[i]:
                pop[i] = trial
                fit[i] = f_trial
        history.append(float(fit.min()))

    best = int(np.argmin(fit))
    return DEResult(x=pop[best].copy(), fun=float(fit[best]), history=np.array(history))


def linear_error(cfg: EncoderConfig, p: LinearDecoderParams, grid_points: int = 1024) -> float:
    """Integrated absolute decode error of the affine read-back.

    Encodes a dense grid over [u_min, u_max] with the exact code and
    integrates |y - decode_linear(f(y))| dy by the trapezoid rule.
    tau cancels: both f and the fitted time span scale with it.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    y = np.linspace(cfg.u_min, cfg.u_max, grid_points)
    t = -cfg.tau * np.log1p(-cfg.u_th / y)
    return float(np.trapezoid(np.abs(y - decode_linear(t, p)), y))


def loss(cfg: EncoderConfig, p: LinearDecoderParams, alpha: float = 1.0, grid_points: int = 1024) -> float:
    """Tuner objective for one candidate decoder."""
    return alpha * linear_error(cfg, p, grid_points) - timing_summary(cfg).mu


@dataclass(frozen=True)
class TuningResult:
    """Fitted decoder plus the figures the fit was judged by."""

    params: LinearDecoderParams
    k1: float
    k2: float
    eps_lin: float
    mu: float
    loss: float
    seed: int


def _params_from_k(k: np.ndarray, cfg: EncoderConfig) -> Optional[LinearDecoderParams]:
    ts = timing_summary(cfg)
    t_lo = ts.t_min * (1.0 + k[0])
    t_hi = ts.t_max * (1.0 + k[1])
    if not t_hi > t_lo:
        return None
    return LinearDecoderParams(t_lin_min=t_lo, t_lin_max=t_hi, y_min=cfg.u_min, y_max=cfg.u_max)


def fit_linear_decoder(cfg: EncoderConfig, tuner: Optional[TunerConfig] = None) -> TuningResult:
    """Search (k1, k2) for the decoder minimising the tuner loss.

    (0, 0), the plain endpoint interpolation, seeds the population, so
    the fit never comes back worse than no stretching at all.
    Degenerate candidates (collapsed or inverted time span) score +inf
    and die out.
    """
    if tuner is None:
        tuner = TunerConfig()
    ts = timing_summary(cfg)

    def objective(k: np.ndarray) -> float:
        p = _params_from_k(k, cfg)
        if p is None:
            return math.inf
        return tuner.alpha * linear_error(cfg, p, tuner.grid_points) - ts.mu

    res = differential_evolution(
        objective,
        bounds=(tuner.k1_bounds, tuner.k2_bounds),
        population=tuner.population,
        mutation=tuner.mutation,
        crossover=tuner.crossover,
        generations=tuner.generations,
        rng_seed=tuner.rng_seed,
        init=(0.0, 0.0),
    )
    k1, k2 = float(res.x[0]), float(res.x[1])
    params = _params_from_k(res.x, cfg)
    assert params is not None  # the seeded point keeps the best finite
    eps = linear_error(cfg, params, tuner.grid_points)
    return TuningResult(
        params=params,
        k1=k1,
        k2=k2,
        eps_lin=eps,
        mu=ts.mu,
        loss=float(res.fun),
        seed=tuner.rng_seed,
    )


def fit_with_threshold_search(
    cfg: EncoderConfig,
    thresholds: Sequence[float],
    tuner: Optional[TunerConfig] = None,
) -> Tuple[float, TuningResult]:
    """Two-stage variant: grid-search u_th, fit (k1, k2) at each.

    Returns the threshold and fit with the lowest loss. Every
    candidate threshold must yield a valid configuration (the slowest
    spike still has to fit the window).
    """
    if not thresholds:
        raise ValueError("need at least one threshold candidate")
    best: Optional[Tuple[float, TuningResult]] = None
    for u_th in thresholds:
        candidate = EncoderConfig(
            tau=cfg.tau,
            u_th=u_th,
            u_min=cfg.u_min,
            u_max=cfg.u_max,
            sample_period=cfg.sample_period,
            reader_period=cfg.reader_period,
            u_rest=cfg.u_rest,
        )
        result = fit_linear_decoder(candidate, tuner)
        if best is None or result.loss < best[1].loss:
            best = (u_th, result)
    return best


def write_tuning(result: TuningResult, cfg: EncoderConfig, path: str) -> None:
    """Persist a fit as JSON, config snapshot included."""
    doc = {
        "k1": result.k1,
        "k2": result.k2,
        "t_lin_min": result.params.t_lin_min,
        "t_lin_max": result.params.t_lin_max,
        "y_min": result.params.y_min,
        "y_max": result.params.y_max,
        "eps_lin": result.eps_lin,
        "mu": result.mu,
        "loss": result.loss,
        "seed": result.seed,
        "encoder": asdict(cfg),
    }
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def read_decoder(path: str) -> LinearDecoderParams:
    """Load just the decoder parameters back from a tuning file."""
    with open(path) as fh:
        doc = json.load(fh)
    return LinearDecoderParams(
        t_lin_min=doc["t_lin_min"],
        t_lin_max=doc["t_lin_max"],
        y_min=doc["y_min"],
        y_max=doc["y_max"],
    )
