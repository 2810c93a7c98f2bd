"""Seeded data generators for the experiment tasks.

All generators are pure functions of (config, rng); experiment code derives
independent child streams from one master seed with `seed_streams`, so runs
replay bit-exactly.

Masked spectra: draw k_gen complex coefficients uniform in [-a, a] per
component (zero frequency real), apply a Gaussian mask
exp(-(k - center)^2 / (2 width^2)), conjugate-symmetrize onto n points, and
inverse transform (forward convention: unnormalized sum; inverse carries
1/n).  The amplitude a is calibrated so the mean signal two-norm is ~1.
"""

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError


def seed_streams(seed: int, n: int) -> list[np.random.Generator]:
    """The documented seed-split: child k is SeedSequence(seed).spawn()[k]."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass(frozen=True)
class SignalDistribution:
    n: int
    k_gen: int
    g_center: float = 0.0
    g_width: float = np.inf  # inf disables the mask (mixture set)
    amplitude: float = 1.0

    def __post_init__(self):
        if self.k_gen > self.n // 2:
            raise ValidationError(
                f"k_gen {self.k_gen} exceeds n/2 = {self.n // 2}"
            )
        if not self.amplitude > 0:
            raise ValidationError("amplitude must be positive")

    def mask(self) -> np.ndarray:
        k = np.arange(self.k_gen)
        if not np.isfinite(self.g_width):
            return np.ones(self.k_gen)
        return np.exp(-((k - self.g_center) ** 2) / (2.0 * self.g_width**2))


def gen_masked_signal(dist: SignalDistribution, rng: np.random.Generator, batch: int = 1):
    """Returns (freq_coeffs [batch, k_gen] complex, signal [batch, n] real)."""
    a = dist.amplitude
    re = rng.uniform(-a, a, size=(batch, dist.k_gen))
    im = rng.uniform(-a, a, size=(batch, dist.k_gen))
    im[:, 0] = 0.0  # zero frequency is real
    coeffs = (re + 1j * im) * dist.mask()
    spectrum = np.zeros((batch, dist.n), dtype=np.complex128)
    spectrum[:, : dist.k_gen] = coeffs
    # conjugate symmetry X[n-k] = conj(X[k]); Nyquist untouched (k_gen <= n/2)
    spectrum[:, dist.n - dist.k_gen + 1 :] += np.conj(coeffs[:, 1:][:, ::-1])
    signal = np.fft.ifft(spectrum, axis=1).real
    return coeffs, signal


def calibrate_amplitude(
    dist: SignalDistribution,
    rng: np.random.Generator,
    target_norm: float = 1.0,
    samples: int = 4096,
) -> float:
    """Amplitude making the Monte-Carlo mean two-norm equal target_norm.

    Signal norm is linear in the amplitude, so one batch at a=1 suffices.
    """
    if samples < 1000:
        raise ValidationError("calibration needs at least 1000 samples")
    probe = replace(dist, amplitude=1.0)
    _, sig = gen_masked_signal(probe, rng, batch=samples)
    mean_norm = np.linalg.norm(sig, axis=1).mean()
    if mean_norm <= 0:
        raise ValidationError("degenerate distribution: all-zero mask")
    return target_norm / mean_norm


def calibrated(dist: SignalDistribution, seed: int = 20_000_101) -> SignalDistribution:
    """The distribution with its amplitude calibrated on a fixed probe seed."""
    a = calibrate_amplitude(dist, np.random.default_rng(np.random.SeedSequence(seed)))
    return replace(dist, amplitude=a)


def gaussian_kernel(sigma: float, n: int) -> np.ndarray:
    """Discrete Gaussian, truncated at +-4 sigma, renormalized, length n,
    centered at index 0 for circular convolution."""
    half = int(np.ceil(4 * sigma))
    offs = np.arange(-half, half + 1)
    vals = np.exp(-(offs**2) / (2.0 * sigma**2))
    vals /= vals.sum()
    kern = np.zeros(n)
    kern[offs % n] += vals
    return kern


def corrupt(signal: np.ndarray, mode: str, rng: np.random.Generator,
            noise_sigma: float = 0.002, blur_sigma: float = 3.0) -> np.ndarray:
    """Additive white noise, or circular Gaussian blur.

    blur_sigma is the standard deviation of the attenuation Gaussian in
    integer-frequency units; the convolution kernel is the discrete spatial
    Gaussian of std n/(2*pi*blur_sigma) grid points (about 6.8 at n=128,
    sigma=3), which reproduces the reported mean corruption of ~0.165 on
    unit-norm low-frequency signals.  A literal 3-grid-point kernel would
    corrupt by only ~0.04.
    """
    signal = np.atleast_2d(signal)
    if mode == "noise":
        return signal + rng.normal(0.0, noise_sigma, size=signal.shape)
    if mode == "blur":
        n = signal.shape[1]
        spatial_sigma = n / (2.0 * np.pi * blur_sigma)
        kern = gaussian_kernel(spatial_sigma, n)
        return np.fft.ifft(
            np.fft.fft(signal, axis=1) * np.fft.fft(kern), axis=1
        ).real
    raise ValidationError(f"unknown corruption mode {mode!r}")


# ---------------------------------------------------------------------------
# Dataset dump format: one JSON metadata line, then raw float64 records.


def save_dataset(path, arrays: dict, meta: dict) -> None:
    meta = dict(meta)
    meta["arrays"] = [
        {"name": k, "shape": list(v.shape)} for k, v in arrays.items()
    ]
    meta.setdefault("dtype", "<f8")
    with open(path, "wb") as fh:
        fh.write(json.dumps(meta, sort_keys=True).encode() + b"\n")
        for v in arrays.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_dataset(path, expect: dict | None = None):
    """Returns (arrays, meta); verifies any expected metadata entries."""
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    meta = json.loads(raw[:nl])
    if expect:
        for key, val in expect.items():
            if meta.get(key) != val:
                raise ValidationError(
                    f"{path}: metadata {key!r} is {meta.get(key)!r}, expected {val!r}"
                )
    arrays = {}
    pos = nl + 1
    for entry in meta["arrays"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape))
        arrays[entry["name"]] = np.frombuffer(
            raw, dtype="<f8", count=n, offset=pos
        ).reshape(shape).copy()
        pos += 8 * n
    return arrays, meta
