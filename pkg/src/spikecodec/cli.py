"""Command-line experiments for the spike codec.

Subcommands cover the full pipeline: encode a signal to a spike train,
decode a train back to voltages, sweep constant inputs against the
error model, fit the linear decoder, and run the spiking Fourier
transform against its ideal-converter reference, single-point or as a
frequency sweep.

Configuration is one JSON file with optional sections "encoder",
"noise", "tuner", "sft" and "signal"; anything missing falls back to
built-in defaults. --seed overrides the seeds found in the config.
All outputs are CSV/JSON written atomically, and a rerun with the
same config and seed reproduces them byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Optional

import numpy as np

from .codec import (
    EncoderConfig,
    LinearDecoderParams,
    decode_ideal,
    decode_linear,
    timing_summary,
)
from .errors import empirical_errors, write_error_report
from .sft import SftConfig, Spectrum, sft_stream, write_spectrum
from .signals import SineSpec, constant, ideal_adc_fft, sine
from .simulate import (
    ThermalNoiseModel,
    encode_signal,
    read_spike_train,
    simulate_window,
    write_spike_train,
)
from .tuning import TunerConfig, fit_linear_decoder, read_decoder, write_tuning

DEFAULT_ENCODER = {
    "tau": 3e-3,
    "u_th": 0.1,
    "u_min": 1.0,
    "u_max": 5.0,
    "sample_period": 1.0 / 3000.0,
    "resolution": 100,
}

# Constant sweeps run the threshold grid up to 0.9 V, where the
# slowest spike takes several milliseconds; they get a wider window.
DEFAULT_SWEEP_ENCODER = {
    "tau": 3e-3,
    "u_th": 0.1,
    "u_min": 1.0,
    "u_max": 5.0,
    "reader_period": 1.48e-6,
    "resolution": 5000,
}

DEFAULT_SIGNAL = {"type": "sine", "amplitude": 2.0, "frequency": 500.0, "offset": 3.0}
DEFAULT_SFT = {"frame_size": 128}


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _build_encoder(section: dict, defaults: dict = DEFAULT_ENCODER) -> EncoderConfig:
    d = {**defaults, **section}
    if "reader_period" not in d:
        d["reader_period"] = d["sample_period"] / d["resolution"]
    if "sample_period" not in d:
        d["sample_period"] = d["reader_period"] * d["resolution"]
    d.pop("resolution", None)
    return EncoderConfig(**d)


def _build_noise(section: Optional[dict], seed: Optional[int]) -> Optional[ThermalNoiseModel]:
    if not section or section.get("delta_u", 0.0) == 0.0:
        return None
    kw = dict(section)
    if seed is not None:
        kw["rng_seed"] = seed
    return ThermalNoiseModel(**kw)


def _build_tuner(section: Optional[dict], seed: Optional[int]) -> TunerConfig:
    kw = dict(section or {})
    for key in ("k1_bounds", "k2_bounds"):
        if key in kw:
            kw[key] = tuple(kw[key])
    if seed is not None:
        kw["rng_seed"] = seed
    return TunerConfig(**kw)


def _build_signal(section: dict, enc: EncoderConfig, default_windows: int):
    d = {**DEFAULT_SIGNAL, **section}
    if "duration" in d:
        duration = float(d["duration"])
    else:
        duration = d.get("windows", default_windows) * enc.sample_period
    if d["type"] == "sine":
        spec = SineSpec(amplitude=d["amplitude"], frequency=d["frequency"], offset=d["offset"])
        return sine(spec, duration)
    if d["type"] == "constant":
        return constant(d["level"], duration)
    raise ValueError(f"unknown signal type {d['type']!r}")


def _resolve_decoder(cfg: dict, enc: EncoderConfig, seed: Optional[int]) -> LinearDecoderParams:
    """Decoder from the sft section: inline params, a tuning file, or
    a fresh (seeded, hence reproducible) fit."""
    spec = (cfg.get("sft") or {}).get("decoder")
    if isinstance(spec, str):
        return read_decoder(spec)
    if isinstance(spec, dict):
        return LinearDecoderParams(**spec)
    return fit_linear_decoder(enc, _build_tuner(cfg.get("tuner"), seed)).params


def _spectrum_rmse(measured: Spectrum, reference: Spectrum):
    diff_mag = measured.magnitude() - reference.magnitude()
    rmse_mag = float(np.sqrt(np.mean(diff_mag**2)))
    rmse_cplx = float(np.sqrt(np.mean(np.abs(measured.coefficients - reference.coefficients) ** 2)))
    return rmse_mag, rmse_cplx


def _write_json(doc: dict, path: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# subcommands

def cmd_encode(args) -> int:
    cfg = _load_config(args.config)
    enc = _build_encoder(cfg.get("encoder", {}))
    noise = _build_noise(cfg.get("noise"), args.seed)
    sig = _build_signal(cfg.get("signal", {}), enc, default_windows=128)
    train = encode_signal(sig, enc, noise)
    write_spike_train(train, args.out)
    fired = int(train.fired.sum())
    print(f"encoded {len(train)} windows ({fired} spikes) -> {args.out}")
    return 0


def cmd_decode(args) -> int:
    train = read_spike_train(args.train)
    enc = train.config
    decoder = read_decoder(args.tuning) if args.tuning else None
    if args.mode == "linear" and decoder is None:
        raise ValueError("linear mode needs --tuning with fitted decoder parameters")
    rows = ["window,u_hat"]
    for m, k in enumerate(train.bins):
        if k == 0:
            rows.append(f"{m},")
            continue
        t = k * enc.reader_period
        if args.mode == "ideal":
            u = decode_ideal(t, enc)
        else:
            u = decode_linear(t, decoder)
        rows.append(f"{m},{u!r}")
    tmp = f"{args.out}.tmp.{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write("\n".join(rows) + "\n")
    os.replace(tmp, args.out)
    print(f"decoded {len(train)} windows ({args.mode}) -> {args.out}")
    return 0


def cmd_sweep_constant(args) -> int:
    cfg = _load_config(args.config)
    enc_base = _build_encoder(cfg.get("encoder", {}), defaults=DEFAULT_SWEEP_ENCODER)
    noise = _build_noise(cfg.get("noise"), args.seed)
    thresholds = [float(v) for v in args.thresholds.split(",")]
    os.makedirs(args.out_dir, exist_ok=True)
    for u_th in thresholds:
        enc = replace(enc_base, u_th=u_th)
        u = np.linspace(enc.u_min, enc.u_max, args.points)
        t_true = -enc.tau * np.log1p(-enc.u_th / u)
        bins = np.empty(args.points, dtype=np.int64)
        for i, ui in enumerate(u):
            k = simulate_window(float(ui), enc, noise, window_index=i)
            if k is None:
                raise ValueError(f"window stayed silent at u_in={ui:.4g} V")
            bins[i] = k
        t_meas = bins * enc.reader_period
        report = empirical_errors(u, t_true, t_meas, enc)
        ts = timing_summary(enc)
        stem = os.path.join(args.out_dir, f"sweep_uth_{u_th:g}")
        write_error_report(
            report,
            f"{stem}.csv",
            f"{stem}.json",
            meta={
                "u_th": u_th,
                "t_min": ts.t_min,
                "t_max": ts.t_max,
                "mu": ts.mu,
                "seed": None if noise is None else noise.rng_seed,
            },
        )
        print(f"u_th={u_th:g}: rmse={report.rmse:.6g} V, t_max={ts.t_max:.6g} s -> {stem}.csv")
    return 0


def cmd_tune(args) -> int:
    cfg = _load_config(args.config)
    enc = _build_encoder(cfg.get("encoder", {}))
    tuner = _build_tuner(cfg.get("tuner"), args.seed)
    result = fit_linear_decoder(enc, tuner)
    write_tuning(result, enc, args.out)
    print(
        f"k1={result.k1:.6g} k2={result.k2:.6g} eps_lin={result.eps_lin:.6g} "
        f"mu={result.mu:.6g} -> {args.out}"
    )
    return 0


def _sft_point(enc: EncoderConfig, decoder: LinearDecoderParams, sft_cfg: dict,
               noise, amplitude: float, offset: float, frequency: float):
    """One frequency point: encode, transform, reference, rmse."""
    frame = sft_cfg.get("frame_size", DEFAULT_SFT["frame_size"])
    scfg = SftConfig.for_encoder(
        enc,
        decoder,
        frame_size=frame,
        charge_phase_steps=sft_cfg.get("charge_phase_steps"),
        readout_phase_steps=sft_cfg.get("readout_phase_steps"),
    )
    sig = sine(SineSpec(amplitude=amplitude, frequency=frequency, offset=offset), frame * enc.sample_period)
    train = encode_signal(sig, enc, noise)
    measured = sft_stream(train, scfg, hop=frame)[0]
    reference = ideal_adc_fft(sig, enc.sample_period, frame)
    rmse_mag, rmse_cplx = _spectrum_rmse(measured, reference)
    return measured, reference, rmse_mag, rmse_cplx


def cmd_sft(args) -> int:
    cfg = _load_config(args.config)
    enc = _build_encoder(cfg.get("encoder", {}))
    noise = _build_noise(cfg.get("noise"), args.seed)
    decoder = _resolve_decoder(cfg, enc, args.seed)
    sig_cfg = {**DEFAULT_SIGNAL, **cfg.get("signal", {})}
    measured, reference, rmse_mag, rmse_cplx = _sft_point(
        enc, decoder, cfg.get("sft", {}), noise,
        sig_cfg["amplitude"], sig_cfg["offset"], sig_cfg["frequency"],
    )
    write_spectrum(measured, f"{args.out_prefix}_spectrum.csv")
    write_spectrum(reference, f"{args.out_prefix}_ideal.csv")
    _write_json(
        {
            "frequency_hz": sig_cfg["frequency"],
            "rmse_mag": rmse_mag,
            "rmse_complex": rmse_cplx,
            "frame_size": len(measured),
            "decoder": {
                "t_lin_min": decoder.t_lin_min,
                "t_lin_max": decoder.t_lin_max,
                "y_min": decoder.y_min,
                "y_max": decoder.y_max,
            },
        },
        f"{args.out_prefix}.json",
    )
    print(f"nu={sig_cfg['frequency']:g} Hz: rmse_mag={rmse_mag:.6g} -> {args.out_prefix}_spectrum.csv")
    return 0


def cmd_sft_sweep(args) -> int:
    cfg = _load_config(args.config)
    enc = _build_encoder(cfg.get("encoder", {}))
    noise = _build_noise(cfg.get("noise"), args.seed)
    decoder = _resolve_decoder(cfg, enc, args.seed)
    sig_cfg = {**DEFAULT_SIGNAL, **cfg.get("signal", {})}
    freqs = [float(v) for v in args.freqs.split(",")]
    os.makedirs(args.out_dir, exist_ok=True)

    def run_point(nu: float):
        measured, reference, rmse_mag, rmse_cplx = _sft_point(
            enc, decoder, cfg.get("sft", {}), noise,
            sig_cfg["amplitude"], sig_cfg["offset"], nu,
        )
        write_spectrum(measured, os.path.join(args.out_dir, f"spectrum_{nu:g}hz.csv"))
        return nu, rmse_mag, rmse_cplx

    with ThreadPoolExecutor(max_workers=min(8, len(freqs))) as pool:
        results = list(pool.map(run_point, freqs))

    results.sort(key=lambda r: r[0])
    tmp = os.path.join(args.out_dir, f"summary.csv.tmp.{os.getpid()}")
    with open(tmp, "w", newline="") as fh:
        fh.write("freq_hz,rmse_mag,rmse_complex\n")
        for nu, rmse_mag, rmse_cplx in results:
            fh.write(f"{nu!r},{rmse_mag!r},{rmse_cplx!r}\n")
    os.replace(tmp, os.path.join(args.out_dir, "summary.csv"))
    for nu, rmse_mag, _ in results:
        print(f"nu={nu:g} Hz: rmse_mag={rmse_mag:.6g}")
    print(f"summary -> {os.path.join(args.out_dir, 'summary.csv')}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spikecodec", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, help="override RNG seeds from the config")

    sp = sub.add_parser("encode", help="encode a signal into a spike train")
    common(sp)
    sp.add_argument("--out", required=True, help="output CSV (JSON sidecar alongside)")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("decode", help="decode a spike train back to voltages")
    sp.add_argument("--train", required=True, help="spike-train CSV from encode")
    sp.add_argument("--mode", choices=["ideal", "linear"], default="ideal")
    sp.add_argument("--tuning", help="tuning JSON (required for linear mode)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("sweep-constant", help="error sweep over constant inputs per threshold")
    common(sp)
    sp.add_argument("--thresholds", default="0.1,0.5,0.75,0.9", help="comma-separated u_th list")
    sp.add_argument("--points", type=int, default=256)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_sweep_constant)

    sp = sub.add_parser("tune", help="fit the linear decoder")
    common(sp)
    sp.add_argument("--out", required=True, help="tuning JSON output")
    sp.set_defaults(func=cmd_tune)

    sp = sub.add_parser("sft", help="spiking transform at one frequency vs ideal converter")
    common(sp)
    sp.add_argument("--out-prefix", required=True)
    sp.set_defaults(func=cmd_sft)

    sp = sub.add_parser("sft-sweep", help="spiking transform across a frequency sweep")
    common(sp)
    sp.add_argument("--freqs", default="25,50,75,100,250,500,750,1000")
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_sft_sweep)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
