"""Collinear degenerate type-II SPDC in a uniaxial crystal.

Wavevectors are in rad/mm, group slopes ``k' = dk/dOmega`` in ps/mm, detunings in
rad/ps. The ordinary photon is the first JSA argument, the extraordinary photon
the second.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import bisect

from .errors import ChronoscopeError, GridTooNarrow, NoPhaseMatching, OutOfRangeWavelength, ZeroEnergy

C_MM_PER_PS = 0.299792458
C_NM_PER_PS = 299792.458

# Gaussian exp(-x^2 / 2 s^2) with the same half-maximum width as sinc(x)
SIGMA_SINC = 1.61

FD_STEP = 0.01


def angular_frequency(wavelength_nm: float | np.ndarray) -> float | np.ndarray:
    return 2.0 * math.pi * C_NM_PER_PS / np.asarray(wavelength_nm, dtype=float)


def wavelength_nm(omega: float | np.ndarray) -> float | np.ndarray:
    return 2.0 * math.pi * C_NM_PER_PS / np.asarray(omega, dtype=float)


@dataclass(frozen=True)
class Sellmeier:
    """``n^2 = A + B / (l^2 - C) + D l^2 / (l^2 - E)`` with ``l`` in micrometres."""

    A: float
    B: float
    C: float
    D: float
    E: float

    def index(self, wavelength_nm):
        l2 = (np.asarray(wavelength_nm, dtype=float) / 1000.0) ** 2
        return np.sqrt(self.A + self.B / (l2 - self.C) + self.D * l2 / (l2 - self.E))


@dataclass(frozen=True)
class UniaxialCrystal:
    name: str
    ordinary: Sellmeier
    extraordinary: Sellmeier
    valid_range: tuple[float, float]
    provenance: str = ""


@lru_cache(maxsize=None)
def _crystal_table(path: str | None) -> dict:
    if path is None:
        text = resources.files("chronoscope").joinpath("data/crystals.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return json.loads(text)


def load_crystal(name: str = "KDP", path: str | Path | None = None) -> UniaxialCrystal:
    table = _crystal_table(None if path is None else str(path))
    if name not in table:
        raise KeyError(f"crystal {name!r} not in data file; have {sorted(table)}")
    entry = table[name]
    return UniaxialCrystal(
        name=name,
        ordinary=Sellmeier(**entry["ordinary"]),
        extraordinary=Sellmeier(**entry["extraordinary"]),
        valid_range=tuple(entry["valid_range_nm"]),
        provenance=entry.get("provenance", ""),
    )


def refractive_index(crystal: UniaxialCrystal, polarization: str, wavelength: float | np.ndarray, theta: float = 90.0):
    """Index for ``o`` or ``e`` polarization; ``theta`` (degrees) is the angle to the optic axis."""
    lam = np.asarray(wavelength, dtype=float)
    lo, hi = crystal.valid_range
    if np.any(lam < lo) or np.any(lam > hi):
        raise OutOfRangeWavelength(f"wavelength outside {crystal.name} data range [{lo}, {hi}] nm")
    n_o = crystal.ordinary.index(lam)
    if polarization == "o":
        return n_o
    if polarization != "e":
        raise ValueError(f"polarization must be 'o' or 'e', got {polarization!r}")
    if not 0.0 <= theta <= 90.0:
        raise ValueError("theta must lie in [0, 90] degrees")
    n_e = crystal.extraordinary.index(lam)
    th = math.radians(theta)
    return 1.0 / np.sqrt(math.cos(th) ** 2 / n_o**2 + math.sin(th) ** 2 / n_e**2)


def wavenumber(crystal: UniaxialCrystal, polarization: str, omega, theta: float = 90.0):
    """``k = n(omega) omega / c`` in rad/mm for absolute angular frequency ``omega`` (rad/ps)."""
    omega = np.asarray(omega, dtype=float)
    return refractive_index(crystal, polarization, wavelength_nm(omega), theta) * omega / C_MM_PER_PS


def _group_slope(k, omega: float, step: float = FD_STEP) -> float:
    coarse = (k(omega + step) - k(omega - step)) / (2.0 * step)
    fine = (k(omega + step / 2) - k(omega - step / 2)) / step
    if abs(coarse - fine) > 1e-6 * abs(fine):
        raise ChronoscopeError(f"group slope not converged: {coarse!r} vs {fine!r}")
    return float(coarse)


@dataclass(frozen=True)
class PhaseMatching:
    crystal: UniaxialCrystal
    lambda_p: float
    length_mm: float
    theta_p: float
    k_p0: float
    k_o0: float
    k_e0: float
    k_p1: float
    k_o1: float
    k_e1: float

    @property
    def omega_pump(self) -> float:
        return float(angular_frequency(self.lambda_p))

    @property
    def omega_signal(self) -> float:
        return self.omega_pump / 2.0

    @property
    def tau_e(self) -> float:
        return (self.k_p1 - self.k_e1) * self.length_mm / 2.0

    @property
    def gvm_mismatch(self) -> float:
        return abs(self.k_p1 - self.k_o1) / self.k_p1

    @property
    def mismatch(self) -> float:
        return self.k_p0 - self.k_o0 - self.k_e0

    def k_pump(self, detuning):
        return wavenumber(self.crystal, "e", self.omega_pump + np.asarray(detuning), self.theta_p)

    def k_ordinary(self, detuning):
        return wavenumber(self.crystal, "o", self.omega_signal + np.asarray(detuning))

    def k_extraordinary(self, detuning):
        return wavenumber(self.crystal, "e", self.omega_signal + np.asarray(detuning), self.theta_p)

    def report(self) -> dict:
        return {
            "crystal": self.crystal.name,
            "lambda_p_nm": self.lambda_p,
            "length_mm": self.length_mm,
            "theta_p_deg": self.theta_p,
            "tau_e_ps": self.tau_e,
            "k_p1_ps_per_mm": self.k_p1,
            "k_o1_ps_per_mm": self.k_o1,
            "k_e1_ps_per_mm": self.k_e1,
            "gvm_mismatch": self.gvm_mismatch,
            "mismatch_rad_per_mm": self.mismatch,
        }


def phase_matching_solve(crystal: UniaxialCrystal, lambda_p: float, length_mm: float) -> PhaseMatching:
    """Solve ``k_p(theta) = k_o + k_e(theta)`` at degeneracy, e-pump / o + e signals."""
    w_p = float(angular_frequency(lambda_p))
    w_s = w_p / 2.0

    def mismatch(theta):
        return float(
            wavenumber(crystal, "e", w_p, theta) - wavenumber(crystal, "o", w_s) - wavenumber(crystal, "e", w_s, theta)
        )

    lo, hi = 1e-6, 90.0
    if mismatch(lo) * mismatch(hi) > 0:
        raise NoPhaseMatching(f"no type-II phase matching for {crystal.name} pumped at {lambda_p} nm")
    theta = bisect(mismatch, lo, hi, xtol=1e-14, rtol=1e-10, maxiter=200)
    pm = PhaseMatching(crystal, lambda_p, length_mm, theta, 0, 0, 0, 0, 0, 0)
    return PhaseMatching(
        crystal,
        lambda_p,
        length_mm,
        theta,
        k_p0=float(pm.k_pump(0.0)),
        k_o0=float(pm.k_ordinary(0.0)),
        k_e0=float(pm.k_extraordinary(0.0)),
        k_p1=_group_slope(pm.k_pump, 0.0),
        k_o1=_group_slope(pm.k_ordinary, 0.0),
        k_e1=_group_slope(pm.k_extraordinary, 0.0),
    )


def pump_sigma_from_duration(tau_p_ps: float) -> float:
    """``Omega_p`` of a transform-limited Gaussian pump of intensity FWHM ``tau_p``."""
    return math.sqrt(2.0 * math.log(2.0)) / tau_p_ps


def pump_bandwidth_nm(omega_p: float, lambda_p: float) -> float:
    """Intensity-FWHM wavelength width of the pump, for reporting only."""
    fwhm_omega = 2.0 * math.sqrt(2.0 * math.log(2.0)) * omega_p
    return lambda_p**2 * fwhm_omega / (2.0 * math.pi * C_NM_PER_PS)


@dataclass(frozen=True)
class SpdcConfig:
    crystal: UniaxialCrystal = field(default_factory=load_crystal)
    lambda_p: float = 415.0
    length_mm: float = 5.0
    pump_sigma: float = 19.0
    n_omega: int = 512
    n_omega_prime: int = 512
    half_span_omega: float | None = None
    half_span_omega_prime: float | None = None
    sidelobe_filter: bool = True
    filter_width: float | None = None
    filter_order: int = 6


@dataclass(frozen=True)
class JointSpectralAmplitude:
    """``values[i, j] = J(omega[i], omega_prime[j])``, normalized to unit probability."""

    omega: np.ndarray
    omega_prime: np.ndarray
    values: np.ndarray
    kind: str
    tau_e: float = 0.0
    pump_sigma: float = 0.0
    sigma_s: float = SIGMA_SINC
    matching: PhaseMatching | None = None
    phase_o: np.ndarray | None = None
    phase_e: np.ndarray | None = None

    @property
    def norm(self) -> float:
        return float(trapezoid(trapezoid(np.abs(self.values) ** 2, self.omega_prime, axis=1), self.omega))

    @property
    def K(self) -> float:
        m = photon_marginals(self)
        return m.K

    def output_values(self) -> np.ndarray:
        """JSA at the crystal exit with linear group delays removed.

        Only the curvature part of the in-crystal propagation phase survives; the
        linear part is a pure delay handled by the HOM delay bookkeeping.
        """
        out = self.values
        if self.phase_o is not None:
            out = out * np.exp(1j * self.phase_o)[:, None]
        if self.phase_e is not None:
            out = out * np.exp(1j * self.phase_e)[None, :]
        return out


def make_jsa(omega, omega_prime, values, kind: str = "custom", **kwargs) -> JointSpectralAmplitude:
    omega = np.asarray(omega, dtype=float)
    omega_prime = np.asarray(omega_prime, dtype=float)
    values = np.asarray(values, dtype=complex)
    norm = trapezoid(trapezoid(np.abs(values) ** 2, omega_prime, axis=1), omega)
    if not norm > 0:
        raise ZeroEnergy("JSA has zero norm")
    return JointSpectralAmplitude(omega, omega_prime, values / math.sqrt(norm), kind, **kwargs)


def jsa(config: SpdcConfig, kind: str = "exact") -> JointSpectralAmplitude:
    pm = phase_matching_solve(config.crystal, config.lambda_p, config.length_mm)
    tau_e = pm.tau_e
    omega_p = config.pump_sigma
    min_span_o = 4.0 * omega_p
    min_span_e = 4.0 * SIGMA_SINC / tau_e
    span_o = config.half_span_omega if config.half_span_omega is not None else 5.0 * omega_p
    span_e = config.half_span_omega_prime if config.half_span_omega_prime is not None else 4.5 * SIGMA_SINC / tau_e
    if span_o < min_span_o or span_e < min_span_e:
        raise GridTooNarrow(
            f"grid half-spans ({span_o:.4g}, {span_e:.4g}) rad/ps below required "
            f"({min_span_o:.4g}, {min_span_e:.4g}) rad/ps"
        )
    w = np.linspace(-span_o, span_o, config.n_omega)
    wp = np.linspace(-span_e, span_e, config.n_omega_prime)
    W, WP = np.meshgrid(w, wp, indexing="ij")
    L = config.length_mm
    if kind == "gaussian_approx":
        values = np.exp(-(W**2) / (4.0 * omega_p**2)) * np.exp(
            -(tau_e**2) * WP**2 / (2.0 * SIGMA_SINC**2) + 1j * tau_e * WP
        )
        return make_jsa(w, wp, values, kind, tau_e=tau_e, pump_sigma=omega_p, matching=pm)
    if kind != "exact":
        raise ValueError(f"kind must be 'exact' or 'gaussian_approx', got {kind!r}")
    k_o = pm.k_ordinary(w)
    k_e = pm.k_extraordinary(wp)
    delta = pm.k_pump(W + WP) - k_o[:, None] - k_e[None, :]
    x = delta * L / 2.0
    values = np.exp(-((W + WP) ** 2) / (4.0 * omega_p**2)) * np.sinc(x / math.pi) * np.exp(1j * x)
    if config.sidelobe_filter:
        width = config.filter_width if config.filter_width is not None else math.pi / tau_e
        values = values * np.exp(-np.abs(WP / width) ** config.filter_order)
    phase_o = (k_o - pm.k_o0 - pm.k_o1 * w) * L
    phase_e = (k_e - pm.k_e0 - pm.k_e1 * wp) * L
    return make_jsa(w, wp, values, kind, tau_e=tau_e, pump_sigma=omega_p, matching=pm, phase_o=phase_o, phase_e=phase_e)


@dataclass(frozen=True)
class Marginals:
    omega: np.ndarray
    spectrum_o: np.ndarray
    omega_prime: np.ndarray
    spectrum_e: np.ndarray
    sigma_o: float
    sigma_e: float
    delta_t_o: float
    delta_t_e: float

    @property
    def K(self) -> float:
        return self.sigma_o / self.sigma_e

    @property
    def fwhm_t_o(self) -> float:
        return 2.0 * math.sqrt(2.0 * math.log(2.0)) * self.delta_t_o

    @property
    def fwhm_t_e(self) -> float:
        return 2.0 * math.sqrt(2.0 * math.log(2.0)) * self.delta_t_e


def _std(x: np.ndarray, density: np.ndarray) -> float:
    total = trapezoid(density, x)
    if not total > 0:
        raise ZeroEnergy("marginal spectrum vanishes")
    mean = trapezoid(x * density, x) / total
    return float(math.sqrt(trapezoid((x - mean) ** 2 * density, x) / total))


def temporal_widths(j: JointSpectralAmplitude) -> tuple[float, float]:
    """Intensity std of each photon's time profile at the crystal exit.

    Uses the Fourier identity ``t -> -i d/dOmega`` on the JSA, so ``<t^2>`` is
    ``int |dJ/dOmega|^2`` and no time grid is needed.
    """
    values = j.output_values()
    widths = []
    for axis, x in ((0, j.omega), (1, j.omega_prime)):
        deriv = np.gradient(values, x, axis=axis)
        density = np.abs(values) ** 2
        norm = trapezoid(trapezoid(density, j.omega_prime, axis=1), j.omega)

        def integrate(f):
            return trapezoid(trapezoid(f, j.omega_prime, axis=1), j.omega)

        mean = integrate((np.conj(values) * (-1j) * deriv).real) / norm
        second = integrate(np.abs(deriv) ** 2) / norm
        widths.append(math.sqrt(max(second - mean**2, 0.0)))
    return widths[0], widths[1]


def photon_marginals(j: JointSpectralAmplitude) -> Marginals:
    density = np.abs(j.values) ** 2
    s_o = trapezoid(density, j.omega_prime, axis=1)
    s_e = trapezoid(density, j.omega, axis=0)
    sigma_o = _std(j.omega, s_o)
    sigma_e = _std(j.omega_prime, s_e)
    if j.kind == "gaussian_approx":
        dt_o = 1.0 / (2.0 * j.pump_sigma)
        dt_e = j.tau_e / (math.sqrt(2.0) * j.sigma_s)
    else:
        dt_o, dt_e = temporal_widths(j)
    return Marginals(j.omega, s_o, j.omega_prime, s_e, sigma_o, sigma_e, dt_o, dt_e)


def write_jsa_csv(j: JointSpectralAmplitude, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["omega_rad_per_ps", "omega_prime_rad_per_ps", "re", "im", "abs2"])
        for i, w in enumerate(j.omega):
            row = j.values[i]
            for wp, v in zip(j.omega_prime, row):
                writer.writerow([f"{w:.12g}", f"{wp:.12g}", f"{v.real:.12g}", f"{v.imag:.12g}", f"{abs(v) ** 2:.12g}"])


def write_marginals_csv(m: Marginals, path: str | Path) -> None:
    """Both marginals in one file, tagged by photon (``o`` rows first)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["photon", "omega_rad_per_ps", "spectral_density"])
        for tag, axis, s in (("o", m.omega, m.spectrum_o), ("e", m.omega_prime, m.spectrum_e)):
            for w, v in zip(axis, s):
                writer.writerow([tag, f"{w:.12g}", f"{v:.12g}"])
