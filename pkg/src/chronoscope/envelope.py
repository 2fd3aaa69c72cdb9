"""Sampled complex envelopes on uniform time grids.

Conventions used throughout the package:

* time in ps, angular frequency detuning in rad/ps, GDD in ps^2;
* the optical field is ``A(t) exp(-i w0 t)``, so the spectrum is
  ``A~(W) = int A(t) exp(+i W t) dt`` and a positive ``W`` is a higher
  optical frequency;
* the envelope is written in the group-delayed frame, i.e. arrival times are
  relative to the carrier group delay and no absolute clock is defined.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import AliasingRisk, PhaseUnwrapFailure, WindowTooSmall, ZeroEnergy

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_j = t_center + (j - n/2) dt`` for ``j = 0 .. n-1``."""

    n_points: int
    dt: float
    t_center: float = 0.0

    def __post_init__(self):
        n = int(self.n_points)
        if n < 2 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 2, got {self.n_points}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def t(self) -> np.ndarray:
        return self.t_center + (np.arange(self.n_points) - self.n_points // 2) * self.dt

    @property
    def window(self) -> float:
        return self.n_points * self.dt

    @property
    def d_omega(self) -> float:
        return 2.0 * math.pi / (self.n_points * self.dt)

    @property
    def omega(self) -> np.ndarray:
        """Ascending conjugate frequency axis spanning [-pi/dt, pi/dt)."""
        return np.fft.fftshift(self.omega_fft)

    @property
    def omega_fft(self) -> np.ndarray:
        """Frequency axis in numpy FFT storage order."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, self.dt)

    @property
    def nyquist(self) -> float:
        return math.pi / self.dt


@dataclass(frozen=True)
class SampledEnvelope:
    grid: TimeGrid
    samples: np.ndarray
    carrier_offset: float = 0.0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex)
        if samples.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {samples.shape}"
            )
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    @property
    def energy(self) -> float:
        # trapezoid rule on the periodic FFT grid, i.e. a plain sum
        return float(self.intensity.sum() * self.grid.dt)

    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(omega, A~(omega))`` on the ascending frequency axis."""
        g = self.grid
        raw = g.n_points * g.dt * np.fft.ifft(self.samples)
        raw = raw * np.exp(1j * g.omega_fft * g.t[0])
        return g.omega, np.fft.fftshift(raw)

    def spectral_energy(self) -> float:
        _, spec = self.spectrum()
        return float((np.abs(spec) ** 2).sum() * self.grid.d_omega / (2.0 * math.pi))

    def with_samples(self, samples: np.ndarray) -> SampledEnvelope:
        return SampledEnvelope(self.grid, samples, self.carrier_offset)


def from_spectrum(grid: TimeGrid, spectrum: np.ndarray, carrier_offset: float = 0.0) -> SampledEnvelope:
    """Inverse of :meth:`SampledEnvelope.spectrum` (ascending frequency order)."""
    raw = np.fft.ifftshift(np.asarray(spectrum, dtype=complex))
    raw = raw * np.exp(-1j * grid.omega_fft * grid.t[0])
    return SampledEnvelope(grid, np.fft.fft(raw) / (grid.n_points * grid.dt), carrier_offset)


def from_function(func: Callable[[np.ndarray], np.ndarray], grid: TimeGrid) -> SampledEnvelope:
    return SampledEnvelope(grid, func(grid.t))


@dataclass(frozen=True)
class GaussianPulseSpec:
    """Gaussian ``E0 exp(-(t-t0)^2 / 4 sigma_t^2) exp(i c2 (t-t0)^2 / 2)``.

    ``sigma_t`` is the intensity standard deviation.
    """

    sigma_t: float
    t0: float = 0.0
    amplitude: float = 1.0
    chirp_c2: float = 0.0

    def __post_init__(self):
        if not self.sigma_t > 0:
            raise ValueError("sigma_t must be positive")

    @property
    def fwhm(self) -> float:
        return FWHM_PER_SIGMA * self.sigma_t

    @property
    def delta_omega_tl(self) -> float:
        """Spectral intensity std of the transform-limited pulse."""
        return 1.0 / (2.0 * self.sigma_t)

    @property
    def spectral_fwhm_tl(self) -> float:
        return 4.0 * math.log(2.0) / self.fwhm

    def __call__(self, t: np.ndarray) -> np.ndarray:
        x = np.asarray(t, dtype=float) - self.t0
        return self.amplitude * np.exp(-(x**2) / (4.0 * self.sigma_t**2) + 0.5j * self.chirp_c2 * x**2)


def make_gaussian(spec: GaussianPulseSpec, grid: TimeGrid) -> SampledEnvelope:
    t = grid.t
    margin = 8.0 * spec.sigma_t
    if spec.t0 - margin < t[0] or spec.t0 + margin > t[-1]:
        raise WindowTooSmall(
            f"grid [{t[0]:.6g}, {t[-1]:.6g}] ps does not hold t0 +/- 8 sigma_t "
            f"= [{spec.t0 - margin:.6g}, {spec.t0 + margin:.6g}] ps"
        )
    needed = 4.0 * (spec.delta_omega_tl + abs(spec.chirp_c2) * 4.0 * spec.sigma_t)
    if grid.nyquist < needed:
        raise AliasingRisk(
            f"Nyquist frequency {grid.nyquist:.6g} rad/ps below required {needed:.6g} rad/ps"
        )
    return SampledEnvelope(grid, spec(t))


@dataclass(frozen=True)
class Moments:
    t_mean: float
    delta_t: float
    fwhm_t: float
    omega_mean: float
    delta_omega: float
    fwhm_omega: float
    energy: float
    skewness_t: float = field(default=0.0)


def _weighted_stats(x: np.ndarray, w: np.ndarray) -> tuple[float, float, float]:
    total = w.sum()
    mean = float((x * w).sum() / total)
    d = x - mean
    var = float((d**2 * w).sum() / total)
    third = float((d**3 * w).sum() / total)
    std = math.sqrt(max(var, 0.0))
    skew = third / std**3 if std > 0 else 0.0
    return mean, std, skew


def fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """Width between the outermost half-maximum crossings, linearly interpolated."""
    y = np.asarray(y, dtype=float)
    half = 0.5 * y.max()
    above = np.nonzero(y >= half)[0]
    i0, i1 = above[0], above[-1]
    if i0 > 0:
        left = x[i0 - 1] + (half - y[i0 - 1]) / (y[i0] - y[i0 - 1]) * (x[i0] - x[i0 - 1])
    else:
        left = x[0]
    if i1 < len(y) - 1:
        right = x[i1] + (y[i1] - half) / (y[i1] - y[i1 + 1]) * (x[i1 + 1] - x[i1])
    else:
        right = x[-1]
    return float(right - left)


def measure_moments(env: SampledEnvelope) -> Moments:
    intensity = env.intensity
    if not intensity.any():
        raise ZeroEnergy("envelope carries no energy")
    t = env.t
    t_mean, delta_t, skew = _weighted_stats(t, intensity)
    omega, spec = env.spectrum()
    spectral = np.abs(spec) ** 2
    w_mean, delta_w, _ = _weighted_stats(omega, spectral)
    return Moments(
        t_mean=t_mean,
        delta_t=delta_t,
        fwhm_t=fwhm(t, intensity),
        omega_mean=w_mean,
        delta_omega=delta_w,
        fwhm_omega=fwhm(omega, spectral),
        energy=env.energy,
        skewness_t=skew,
    )


CHIRP_FIT_THRESHOLD = 1e-4


def residual_chirp(env: SampledEnvelope, threshold: float = CHIRP_FIT_THRESHOLD) -> float:
    """Quadratic phase coefficient ``c2`` in ``phi ~ phi0 + phi1 t + c2 t^2 / 2``.

    Intensity-weighted least squares over samples with intensity above
    ``threshold`` times the peak.
    """
    intensity = env.intensity
    peak = intensity.max()
    if peak <= 0:
        raise ZeroEnergy("envelope carries no energy")
    idx = np.nonzero(intensity >= threshold * peak)[0]
    if idx.size < 3:
        raise PhaseUnwrapFailure("fewer than three significant samples for the phase fit")
    phase = np.angle(env.samples[idx])
    steps = np.diff(phase)
    wrapped = (steps + np.pi) % (2.0 * np.pi) - np.pi
    contiguous = np.diff(idx) == 1
    if np.any(np.abs(wrapped[contiguous]) > 0.9 * np.pi):
        raise PhaseUnwrapFailure("phase step near pi between adjacent samples; grid too coarse for this chirp")
    phase = np.concatenate([[phase[0]], phase[0] + np.cumsum(wrapped)])
    t = env.t[idx]
    w = intensity[idx]
    tc = float((t * w).sum() / w.sum())
    coeffs = np.polyfit(t - tc, phase, 2, w=np.sqrt(w))
    return float(2.0 * coeffs[0])


def phase_aligned_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """Relative L2 distance minimised over one global phase of ``expected``."""
    actual = np.asarray(actual, dtype=complex)
    expected = np.asarray(expected, dtype=complex)
    overlap = np.vdot(expected, actual)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(actual - phase * expected) / np.linalg.norm(expected))


def resample(env: SampledEnvelope, grid: TimeGrid) -> SampledEnvelope:
    """Cubic-spline resampling onto ``grid``; zero outside the source window."""
    t_src = env.t
    t_new = grid.t
    re = CubicSpline(t_src, env.samples.real)(t_new)
    im = CubicSpline(t_src, env.samples.imag)(t_new)
    out = re + 1j * im
    out[(t_new < t_src[0]) | (t_new > t_src[-1])] = 0.0
    return SampledEnvelope(grid, out, env.carrier_offset)


def write_envelope_csv(env: SampledEnvelope, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_ps", "re", "im", "intensity"])
        for t, a in zip(env.t, env.samples):
            writer.writerow([f"{t:.12g}", f"{a.real:.12g}", f"{a.imag:.12g}", f"{abs(a) ** 2:.12g}"])


def write_spectrum_csv(env: SampledEnvelope, path: str | Path) -> None:
    omega, spec = env.spectrum()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["omega_rad_per_ps", "re", "im", "spectral_density"])
        for w, a in zip(omega, spec):
            writer.writerow([f"{w:.12g}", f"{a.real:.12g}", f"{a.imag:.12g}", f"{abs(a) ** 2:.12g}"])
