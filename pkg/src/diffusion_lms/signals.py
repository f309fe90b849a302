"""Measurement-stream generation and sample-file ingestion.

Streams follow the linear model d_k(i) = u_{k,i} . w_o + v_k(i): every node k
observes a scalar measurement d through its own regressor row u and additive
noise v. Two source kinds are provided: white Gaussian regressors (fresh
independent vectors per node and instant) and a tapped delay line over a
shared scalar sample sequence (speech-style input).
"""

from __future__ import annotations

import io
import os
import wave
from dataclasses import dataclass
from typing import Iterator

import numpy as np

__all__ = [
    "SampleFileError",
    "SampleFrame",
    "FrameStream",
    "LoadedSamples",
    "default_lowpass_system",
    "noise_variance_for_snr",
    "gaussian_source",
    "delay_line_source",
    "load_samples",
    "wav_bytes",
    "write_wav",
    "synthetic_speech",
]

# 16-bit PCM fixed-point convention: sample 16384 maps to 0.5
_PCM_SCALE = 32768.0


class SampleFileError(ValueError):
    """Raised when a sample file is malformed or in an unsupported format."""


@dataclass(frozen=True)
class SampleFrame:
    """One time instant: regressor rows ``u`` (N x M), measurements ``d`` (N,)
    and the additive noise draws ``noise`` (N,) that produced them."""

    u: np.ndarray
    d: np.ndarray
    noise: np.ndarray


@dataclass(frozen=True)
class FrameStream:
    """Materialized measurement stream over a fixed horizon.

    Attributes:
        u: regressors, shape (T, N, M).
        d: measurements, shape (T, N), with d = u @ w_o + noise.
        noise: the noise draws, shape (T, N).
        noise_variance: resolved per-node noise variance, shape (N,).
    """

    u: np.ndarray
    d: np.ndarray
    noise: np.ndarray
    noise_variance: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.u, self.d, self.noise, self.noise_variance):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.u.shape[0]

    @property
    def node_count(self) -> int:
        return self.u.shape[1]

    @property
    def taps(self) -> int:
        return self.u.shape[2]

    def frames(self) -> Iterator[SampleFrame]:
        """Yield one SampleFrame per instant, in time order."""
        for i in range(len(self)):
            yield SampleFrame(u=self.u[i], d=self.d[i], noise=self.noise[i])


def default_lowpass_system(m: int) -> np.ndarray:
    """Length-m moving-average taps, 1/m each.

    A lowpass FIR with unit DC gain and monotonically decaying magnitude
    response on (0, pi). Serves as the default unknown system.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return np.full(m, 1.0 / m)


def noise_variance_for_snr(signal_power: float, snr_db: float) -> float:
    """Noise variance that realizes ``snr_db`` against ``signal_power``.

    For white regressors the per-node signal power is
    sigma_u^2 * ||w_o||^2, so the returned value is that power divided by
    10^(snr_db / 10).
    """
    if signal_power <= 0.0:
        raise ValueError(f"signal_power must be positive, got {signal_power}")
    return signal_power / 10.0 ** (snr_db / 10.0)


def _resolve_noise_variance(
    signal_power: np.ndarray,
    snr_db: float,
    noise_variance: float | np.ndarray | None,
    n: int,
) -> np.ndarray:
    """Per-node noise variances, either explicit or SNR-calibrated.

    Nodes with zero signal power cannot realize any finite SNR; they fall
    back to unit noise variance so the stream stays well defined (the
    measurements there are pure noise).
    """
    if noise_variance is not None:
        var = np.broadcast_to(np.asarray(noise_variance, dtype=float), (n,)).copy()
        if (var < 0.0).any() or not np.isfinite(var).all():
            raise ValueError("noise_variance entries must be finite and >= 0")
        return var
    var = np.empty(n)
    for k in range(n):
        p = float(signal_power[k])
        var[k] = 1.0 if p <= 0.0 else noise_variance_for_snr(p, snr_db)
    return var


def _check_variances(variances: np.ndarray) -> np.ndarray:
    variances = np.asarray(variances, dtype=float)
    if variances.ndim != 1:
        raise ValueError("per-node variances must be a 1-D array")
    if (variances <= 0.0).any() or not np.isfinite(variances).all():
        raise ValueError("per-node variances must be finite and strictly positive")
    return variances


def gaussian_source(
    variances: np.ndarray,
    w_o: np.ndarray,
    seed: int,
    horizon: int,
    snr_db: float = 0.0,
    noise_variance: float | np.ndarray | None = None,
) -> FrameStream:
    """White-Gaussian stream: independent regressors in time and space.

    Node k's regressor at each instant is a fresh length-M Gaussian vector
    with covariance variances[k] * I. Noise is independent Gaussian with
    per-node variance calibrated from ``snr_db`` (signal power
    variances[k] * ||w_o||^2), or fixed by ``noise_variance`` when given
    (0 yields a noiseless stream). Deterministic for a fixed seed: all
    regressors are drawn first, then all noise.
    """
    variances = _check_variances(variances)
    w_o = np.asarray(w_o, dtype=float)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    n = variances.shape[0]
    m = w_o.shape[0]
    signal_power = variances * float(w_o @ w_o)
    sigma_v_sq = _resolve_noise_variance(signal_power, snr_db, noise_variance, n)

    rng = np.random.default_rng(seed)
    u = rng.standard_normal((horizon, n, m)) * np.sqrt(variances)[None, :, None]
    noise = rng.standard_normal((horizon, n)) * np.sqrt(sigma_v_sq)[None, :]
    d = u @ w_o + noise
    return FrameStream(u=u, d=d, noise=noise, noise_variance=sigma_v_sq)


def delay_line_source(
    samples: np.ndarray,
    variances: np.ndarray,
    w_o: np.ndarray,
    seed: int,
    snr_db: float = 0.0,
    noise_variance: float | np.ndarray | None = None,
    scale_exponent: float = 2.0,
) -> FrameStream:
    """Tapped-delay-line stream over a shared scalar sample sequence.

    Node k's regressor at instant i is [s(i), s(i-1), ..., s(i-M+1)] scaled
    by sqrt(variances[k]) ** scale_exponent; pre-history samples are zero.
    The default exponent 2 multiplies the shared input by the per-node
    variance itself. Noise variance is calibrated per node from the
    empirical power of the noiseless response u . w_o over the whole
    sequence (see :func:`_resolve_noise_variance` for silent inputs), or
    fixed by ``noise_variance``. One stream instant per input sample.
    """
    variances = _check_variances(variances)
    w_o = np.asarray(w_o, dtype=float)
    samples = np.asarray(samples, dtype=float)
    m = w_o.shape[0]
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("sample sequence must be a nonempty 1-D array")
    if samples.size < m:
        raise ValueError(f"sample sequence shorter than the filter ({samples.size} < {m})")
    n = variances.shape[0]
    horizon = samples.size

    padded = np.concatenate([np.zeros(m - 1), samples])
    windows = np.lib.stride_tricks.sliding_window_view(padded, m)[:horizon]
    base = windows[:, ::-1]  # row i = [s(i), s(i-1), ..., s(i-M+1)]
    scale = np.sqrt(variances) ** scale_exponent
    u = base[:, None, :] * scale[None, :, None]

    clean = u @ w_o
    signal_power = (clean * clean).mean(axis=0)
    sigma_v_sq = _resolve_noise_variance(signal_power, snr_db, noise_variance, n)

    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((horizon, n)) * np.sqrt(sigma_v_sq)[None, :]
    d = clean + noise
    return FrameStream(u=np.ascontiguousarray(u), d=d, noise=noise, noise_variance=sigma_v_sq)


@dataclass(frozen=True)
class LoadedSamples:
    """A mono sample sequence plus the WAV sample rate when one was present."""

    data: np.ndarray
    sample_rate: int | None


def _load_wav(path: str | os.PathLike) -> LoadedSamples:
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getnchannels() != 1:
                raise SampleFileError(f"{path}: multi-channel WAV is not supported")
            if wf.getcomptype() != "NONE":
                raise SampleFileError(f"{path}: only uncompressed PCM WAV is supported")
            if wf.getsampwidth() != 2:
                raise SampleFileError(f"{path}: only 16-bit PCM WAV is supported")
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise SampleFileError(f"{path}: malformed WAV file ({exc})") from exc
    data = np.frombuffer(raw, dtype="<i2").astype(float) / _PCM_SCALE
    return LoadedSamples(data=data, sample_rate=rate)


def _load_text(path: str | os.PathLike) -> LoadedSamples:
    values: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                values.append(float(stripped))
            except ValueError as exc:
                raise SampleFileError(f"{path}:{lineno}: not a decimal sample: {stripped!r}") from exc
    return LoadedSamples(data=np.array(values, dtype=float), sample_rate=None)


def load_samples(path: str | os.PathLike) -> LoadedSamples:
    """Load a mono sample sequence from a 16-bit PCM WAV or a text file.

    WAV samples are normalized by 32768 into [-1, 1). Text files hold one
    decimal sample per line; lines starting with "#" are ignored. The WAV
    sample rate is preserved for output purposes only.
    """
    with open(path, "rb") as fh:
        head = fh.read(12)
    if len(head) >= 12 and head[:4] == b"RIFF" and head[8:12] == b"WAVE":
        return _load_wav(path)
    return _load_text(path)


def wav_bytes(data: np.ndarray, sample_rate: int) -> bytes:
    """Encode a mono 16-bit PCM WAV, clipping samples into [-1, 1)."""
    scaled = np.clip(np.round(np.asarray(data, dtype=float) * _PCM_SCALE), -32768, 32767)
    pcm = scaled.astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(int(sample_rate))
        wf.writeframes(pcm.tobytes())
    return buf.getvalue()


def write_wav(path: str | os.PathLike, data: np.ndarray, sample_rate: int) -> None:
    """Write a mono 16-bit PCM WAV file (see :func:`wav_bytes`)."""
    with open(path, "wb") as fh:
        fh.write(wav_bytes(data, sample_rate))


def synthetic_speech(length: int, seed: int | np.random.SeedSequence) -> np.ndarray:
    """Seeded nonstationary test signal: amplitude-modulated tone bursts
    over a quiet AR(1) background.

    Stands in for recorded speech at desk scale: alternating voiced bursts
    (raised-cosine enveloped sinusoids of random frequency, amplitude and
    phase) separated by low-level correlated noise. Peak amplitude stays
    near 1, matching the normalization of loaded WAV input.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    s = np.zeros(length)

    eps = rng.standard_normal(length) * 0.05
    ar = np.zeros(length)
    for i in range(1, length):
        ar[i] = 0.9 * ar[i - 1] + eps[i]
    s += ar

    i = 0
    while i < length:
        i += int(rng.integers(40, 120))
        burst = int(rng.integers(120, 300))
        if i + 8 >= length:
            break
        burst = min(burst, length - i)
        freq = rng.uniform(0.02, 0.15)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amp = rng.uniform(0.5, 1.0)
        t = np.arange(burst)
        envelope = np.sin(np.pi * t / burst) ** 2
        s[i : i + burst] += amp * envelope * np.sin(2.0 * np.pi * freq * t + phase)
        i += burst
    return s
