"""Hong-Ou-Mandel interference after a time telescope on one arm.

``p_int`` is the conditional probability that both photons leave the beam
splitter through the same port; the normalized coincidence rate is
``1 - p_int`` and the visibility is the largest ``p_int`` over delay.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import minimize_scalar

from .errors import ChronoscopeError, GridTooCoarse, NonHermitianResult
from .spdc import JointSpectralAmplitude

log = logging.getLogger(__name__)

DEGENERATE_RTOL = 1e-9
P_INT_SLACK = 1e-6


def _check_m(m: float) -> None:
    if m == 0 or not math.isfinite(m):
        raise ChronoscopeError("magnification must be finite and nonzero")


def _clamp(p: np.ndarray) -> np.ndarray:
    bad = (p < -P_INT_SLACK) | (p > 1.0 + P_INT_SLACK)
    if np.any(bad):
        log.warning("p_int outside [0, 1] (min %.3g, max %.3g): quadrature error", p.min(), p.max())
    return np.clip(p, 0.0, 1.0)


def _scalar_or_array(delay, values: np.ndarray):
    return float(values[0]) if np.ndim(delay) == 0 else values


# ---------------------------------------------------------------- SPDC


def p_int_spdc_analytic(K: float, M: float, omega_p: float, delay=0.0):
    """Separable Gaussian JSA: ``2K|M| / (K^2 + M^2) * exp(-2 Omega_p^2 dtau^2 / (K^2 + M^2))``."""
    _check_m(M)
    if not K > 0 or not omega_p > 0:
        raise ChronoscopeError("K and omega_p must be positive")
    s = K**2 + M**2
    d = np.asarray(delay, dtype=float)
    p = 2.0 * K * abs(M) / s * np.exp(-2.0 * omega_p**2 * d**2 / s)
    return float(p) if np.ndim(delay) == 0 else p


def spdc_visibility(K: float, M: float) -> float:
    _check_m(M)
    return 2.0 * K * abs(M) / (K**2 + M**2)


def formula_delay(j: JointSpectralAmplitude, M: float) -> float:
    """Extraordinary-arm delay ``t_d = [(2M - 1) k_p' - k_e'] L / 2``."""
    pm = j.matching
    if pm is None:
        return 0.0
    return ((2.0 * M - 1.0) * pm.k_p1 - pm.k_e1) * pm.length_mm / 2.0


def _weight_interval(x: np.ndarray, density: np.ndarray, tail: float = 0.5e-4) -> tuple[float, float]:
    cdf = np.cumsum(density)
    cdf = cdf / cdf[-1]
    return float(x[np.searchsorted(cdf, tail)]), float(x[min(np.searchsorted(cdf, 1.0 - tail), len(x) - 1)])


class _SpdcOverlap:
    """Precomputed ``J_out(M W, W') J_out*(M W', W)`` on a square quadrature grid."""

    def __init__(self, j: JointSpectralAmplitude, M: float):
        _check_m(M)
        self.M = M
        self.norm = j.norm
        w_o, w_e = j.omega, j.omega_prime
        lo_o, hi_o = sorted((w_o[0] / M, w_o[-1] / M))
        lo, hi = max(lo_o, w_e[0]), min(hi_o, w_e[-1])
        if not hi > lo:
            raise GridTooCoarse("scaled ordinary axis and extraordinary axis do not overlap")
        density = np.abs(j.values) ** 2
        # the weight-carrying part of each marginal must be resolved by the stored grid
        for axis, x in ((1, w_o), (0, w_e)):
            a, b = _weight_interval(x, density.sum(axis=axis))
            if np.count_nonzero((x >= a) & (x <= b)) < 8:
                raise GridTooCoarse("JSA marginal covered by fewer than 8 grid samples")
        h = min(w_e[1] - w_e[0], (w_o[1] - w_o[0]) / abs(M))
        n = int(math.ceil((hi - lo) / h)) + 1
        u = np.linspace(lo, hi, n)
        interp = RegularGridInterpolator((w_o, w_e), j.output_values(), method="linear", bounds_error=False, fill_value=0.0)
        U1, U2 = np.meshgrid(M * u, u, indexing="ij")
        a = interp(np.stack([U1.ravel(), U2.ravel()], axis=-1)).reshape(n, n)
        self.u = u
        self.weights = np.full(n, u[1] - u[0])
        self.weights[[0, -1]] *= 0.5
        self.kernel = a * a.T.conj()
        pm = j.matching
        if pm is None:
            self.linear_delay = 0.0
        else:
            # the separable approximation assumes k_o' = k_p'; keep its bookkeeping consistent
            k_o1 = pm.k_p1 if j.kind == "gaussian_approx" else pm.k_o1
            self.linear_delay = (M * k_o1 - pm.k_e1) * pm.length_mm

    def __call__(self, t_eff: np.ndarray) -> np.ndarray:
        t_eff = np.atleast_1d(np.asarray(t_eff, dtype=float))
        v = self.weights[None, :] * np.exp(1j * t_eff[:, None] * self.u[None, :])
        total = np.einsum("ki,ij,kj->k", v, self.kernel, v.conj())
        p = abs(self.M) * total / self.norm
        if np.any(np.abs(p.imag) > 1e-6):
            raise NonHermitianResult(f"imaginary part {np.abs(p.imag).max():.3g} in p_int")
        return p.real


def p_int_spdc(j: JointSpectralAmplitude, M: float, delay=0.0, t_d_mode: str = "formula"):
    """Interference probability by 2D quadrature over a sampled JSA.

    ``t_d_mode='formula'`` uses the delay that is optimal for linear crystal
    dispersion; ``'optimize'`` maximizes ``p_int`` at zero delay over ``t_d``.
    """
    overlap = _SpdcOverlap(j, M)
    delay_arr = np.atleast_1d(np.asarray(delay, dtype=float))
    if t_d_mode == "formula":
        t_d = formula_delay(j, M)
    elif t_d_mode == "optimize":
        t_d = optimal_delay(j, M, overlap)
    else:
        raise ValueError(f"t_d_mode must be 'formula' or 'optimize', got {t_d_mode!r}")
    p = overlap(delay_arr - t_d + overlap.linear_delay)
    return _scalar_or_array(delay, _clamp(p))


def optimal_delay(j: JointSpectralAmplitude, M: float, overlap: _SpdcOverlap | None = None) -> float:
    """Extraordinary-arm delay maximizing ``p_int`` at zero relative delay."""
    overlap = overlap or _SpdcOverlap(j, M)
    t_form = formula_delay(j, M)
    centre = t_form - overlap.linear_delay
    reach = 10.0 * math.pi / (overlap.u[-1] - overlap.u[0]) * len(overlap.u) ** 0.5
    grid = centre + np.linspace(-reach, reach, 201)
    coarse = overlap(grid)
    k = int(np.argmax(coarse))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda s: -overlap(s)[0], bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
    return overlap.linear_delay - float(res.x) + 0.0


# ---------------------------------------------------------------- single emitters


@dataclass(frozen=True)
class EmitterMode:
    """Spontaneous-emission mode ``sqrt(mu / tau) exp(-t / 2 tau) theta(t)``."""

    tau: float
    mu: float = 1.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ChronoscopeError("lifetime must be positive")
        if not 0 < self.mu <= 1:
            raise ChronoscopeError("brightness must lie in (0, 1]")

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, math.sqrt(self.mu / self.tau) * np.exp(-np.maximum(t, 0.0) / (2.0 * self.tau)), 0.0)


def _degenerate(a: float, tau2: float) -> bool:
    return abs(a - tau2) <= DEGENERATE_RTOL * tau2


def _p_int_emitter_analytic(tau1: float, tau2: float, M: float, d: np.ndarray) -> np.ndarray:
    if M > 0:
        v = 4.0 * M * tau1 * tau2 / (M * tau1 + tau2) ** 2
        return np.where(d >= 0, v * np.exp(-np.maximum(d, 0) / tau2), v * np.exp(np.minimum(d, 0) / (M * tau1)))
    a = abs(M) * tau1
    dp = np.maximum(d, 0.0)
    if _degenerate(a, tau2):
        p = (dp / tau2) ** 2 * np.exp(-dp / tau2)
    else:
        p = 4.0 * a * tau2 / (a - tau2) ** 2 * (np.exp(-dp / (2.0 * a)) - np.exp(-dp / (2.0 * tau2))) ** 2
    return np.where(d > 0, p, 0.0)


def _overlap_numeric(s1: EmitterMode, s2: EmitterMode, M: float, d: float, dt_max: float) -> float:
    a = abs(M) * s1.tau
    if M > 0:
        lo = max(0.0, -d)
        hi = lo + 40.0 * max(a, s2.tau)
    else:
        if d <= 0:
            return 0.0
        lo, hi = -d, 0.0
    n = max(int(math.ceil((hi - lo) / dt_max)), 64)
    n += 1 - n % 2
    t = np.linspace(lo, hi, n)
    # endpoints sit on the Heaviside edges; evaluate just inside the support
    eps = 1e-12 * max(a, s2.tau)
    t_eval = np.clip(t, lo + eps, hi - eps) if M < 0 else np.maximum(t, lo + eps)
    integrand = s1.psi(t_eval / M) * s2.psi(t_eval + d) / math.sqrt(abs(M))
    return float(simpson(integrand, x=t))


def p_int_emitter(
    source1: EmitterMode,
    source2: EmitterMode,
    M: float,
    delay=0.0,
    mode: str = "analytic",
    dt_max: float | None = None,
):
    """Interference of a telescope-scaled first photon with a delayed second photon."""
    _check_m(M)
    d = np.atleast_1d(np.asarray(delay, dtype=float))
    if mode == "analytic":
        p = _p_int_emitter_analytic(source1.tau, source2.tau, M, d)
    elif mode == "numeric":
        limit = min(abs(M) * source1.tau, source2.tau) / 50.0
        if dt_max is None:
            dt_max = limit
        elif dt_max > limit:
            raise GridTooCoarse(f"step {dt_max:.4g} ps exceeds min(|M| tau1, tau2)/50 = {limit:.4g} ps")
        c = np.array([_overlap_numeric(source1, source2, M, x, dt_max) for x in d])
        p = c**2 / (source1.mu * source2.mu)
    else:
        raise ValueError(f"mode must be 'analytic' or 'numeric', got {mode!r}")
    return _scalar_or_array(delay, _clamp(p))


def emitter_visibility(tau1: float, tau2: float, M: float) -> tuple[float, float]:
    """Return ``(V, delay of the maximum)`` for the emitter pair."""
    _check_m(M)
    if M > 0:
        return 4.0 * M * tau1 * tau2 / (M * tau1 + tau2) ** 2, 0.0
    a = abs(M) * tau1
    if _degenerate(a, tau2):
        return 4.0 * math.exp(-2.0), 2.0 * tau2
    d_min = 2.0 * a * tau2 / (a - tau2) * math.log(a / tau2)
    v = 4.0 * (tau2 / a) ** ((a + tau2) / (a - tau2))
    return v, d_min


# ---------------------------------------------------------------- sources, scans, curves


@dataclass(frozen=True)
class SpdcSource:
    """Separable Gaussian pair described by its duration ratio and pump width."""

    K: float
    omega_p: float


@dataclass(frozen=True)
class EmitterPair:
    tau1: float
    tau2: float
    mu1: float = 1.0
    mu2: float = 1.0

    @property
    def modes(self) -> tuple[EmitterMode, EmitterMode]:
        return EmitterMode(self.tau1, self.mu1), EmitterMode(self.tau2, self.mu2)


Source = Union[SpdcSource, EmitterPair, JointSpectralAmplitude]


@dataclass(frozen=True)
class ScanPoint:
    M: float
    visibility: float
    argmax_delay: float


def visibility_scan(source: SpdcSource | EmitterPair, M_values: Sequence[float]) -> list[ScanPoint]:
    values = list(M_values)
    if not values:
        raise ChronoscopeError("empty magnification scan")
    points = []
    for M in values:
        _check_m(M)
        if isinstance(source, SpdcSource):
            points.append(ScanPoint(M, spdc_visibility(source.K, M), 0.0))
        elif isinstance(source, EmitterPair):
            v, d = emitter_visibility(source.tau1, source.tau2, M)
            points.append(ScanPoint(M, v, d))
        else:
            raise TypeError(f"unsupported source {type(source).__name__}")
    return points


@dataclass(frozen=True)
class HomCurve:
    delays: np.ndarray
    p_int: np.ndarray
    visibility: float
    metadata: dict = field(default_factory=dict)

    @property
    def normalized_rate(self) -> np.ndarray:
        return 1.0 - self.p_int


def coincidence_curve(source: Source, M: float, delays, mode: str = "analytic", t_d_mode: str = "formula") -> HomCurve:
    d = np.asarray(delays, dtype=float)
    meta: dict = {"M": M}
    if isinstance(source, JointSpectralAmplitude):
        p = p_int_spdc(source, M, d, t_d_mode=t_d_mode)
        meta.update(source="spdc_jsa", kind=source.kind, t_d_ps=formula_delay(source, M))
    elif isinstance(source, SpdcSource):
        if mode != "analytic":
            raise ChronoscopeError("numeric SPDC curves need a sampled JSA as the source")
        p = p_int_spdc_analytic(source.K, M, source.omega_p, d)
        meta.update(source="spdc", K=source.K, omega_p=source.omega_p)
    elif isinstance(source, EmitterPair):
        m1, m2 = source.modes
        p = p_int_emitter(m1, m2, M, d, mode=mode)
        _, d_opt = emitter_visibility(source.tau1, source.tau2, M)
        meta.update(source="emitters", tau1=source.tau1, tau2=source.tau2, optimal_delay_ps=d_opt)
    else:
        raise TypeError(f"unsupported source {type(source).__name__}")
    p = np.atleast_1d(p)
    return HomCurve(d, p, float(p.max()), meta)


def write_hom_curve_csv(curve: HomCurve, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["delay_ps", "p_int", "normalized_rate"])
        for d, p, r in zip(curve.delays, curve.p_int, curve.normalized_rate):
            writer.writerow([f"{d:.12g}", f"{p:.12g}", f"{r:.12g}"])


def write_visibility_scan_csv(points: Sequence[ScanPoint], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["M", "visibility", "argmax_delay_ps"])
        for pt in points:
            writer.writerow([f"{pt.M:.12g}", f"{pt.visibility:.12g}", f"{pt.argmax_delay:.12g}"])
