import numpy as np
import pytest

from spikecodec import EncoderConfig


@pytest.fixture
def cfg3k() -> EncoderConfig:
    """The reference channel: tau 3 ms, 100 mV threshold, 1-5 V range,
    3 kHz sampling with 100 reader bins per window."""
    return EncoderConfig(
        tau=3e-3,
        u_th=0.1,
        u_min=1.0,
        u_max=5.0,
        sample_period=1.0 / 3000.0,
        reader_period=1.0 / 300000.0,
    )


def naive_dft(y):
    """O(K^2) reference DFT, written out as cosine/sine sums so it
    shares nothing with np.fft or the transform under test."""
    y = np.asarray(y, dtype=float)
    k_n = np.outer(np.arange(y.size), np.arange(y.size))
    ang = 2.0 * np.pi * k_n / y.size
    return (np.cos(ang) @ y) - 1j * (np.sin(ang) @ y)
