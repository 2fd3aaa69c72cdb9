"""Dispersive media and time lenses acting on sampled envelopes."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .envelope import (
    Moments,
    SampledEnvelope,
    TimeGrid,
    measure_moments,
    residual_chirp,
)
from .errors import (
    AliasingRisk,
    ChronoscopeError,
    ConfigParseError,
    FocalDegeneracy,
    InvalidLens,
    WindowTooSmall,
    ZeroEnergy,
    ZeroInputGDD,
)


@dataclass(frozen=True)
class DispersiveMedium:
    gdd: float

    def __post_init__(self):
        if not math.isfinite(self.gdd):
            raise ValueError("gdd must be finite")


@dataclass(frozen=True)
class IdealTimeLens:
    focal_gdd: float

    def __post_init__(self):
        if self.focal_gdd == 0 or not math.isfinite(self.focal_gdd):
            raise InvalidLens("focal GDD must be finite and nonzero")


@dataclass(frozen=True)
class FresnelTimeLens:
    """EOPM lens with a 2pi-wrapped parabolic phase over the aperture ``|D_f| Omega_m``."""

    focal_gdd: float
    modulator_bandwidth: float

    def __post_init__(self):
        if self.focal_gdd == 0 or not math.isfinite(self.focal_gdd):
            raise InvalidLens("focal GDD must be finite and nonzero")
        if not self.modulator_bandwidth > 0:
            raise InvalidLens("modulator bandwidth must be positive")

    @property
    def aperture(self) -> float:
        return abs(self.focal_gdd) * self.modulator_bandwidth


Element = Union[DispersiveMedium, IdealTimeLens, FresnelTimeLens]


def _require_energy(env: SampledEnvelope) -> None:
    if not np.any(env.samples):
        raise ZeroEnergy("envelope carries no energy")


def predicted_width_after_dispersion(env: SampledEnvelope, gdd: float) -> tuple[float, float]:
    """Exact centroid and intensity std after GDD ``gdd``, without propagating.

    Uses ``t -> t + D * Omega`` for the time operator under free dispersion.
    """
    g = env.grid
    a = env.samples
    t = g.t - g.t_center
    omega_a = np.fft.fft(g.omega_fft * np.fft.ifft(a))
    v = t * a + gdd * omega_a
    norm = np.vdot(a, a).real
    mean = np.vdot(a, v).real / norm
    second = np.vdot(v, v).real / norm
    return mean + g.t_center, math.sqrt(max(second - mean**2, 0.0))


def apply_dispersion(env: SampledEnvelope, medium: DispersiveMedium) -> SampledEnvelope:
    """Multiply the spectrum by ``exp(+i D Omega^2 / 2)``.

    In the time domain this is the Fresnel kernel ``exp(-i (t - t')^2 / 2D)``; a
    component at detuning ``Omega`` is delayed by ``D Omega``.
    """
    _require_energy(env)
    if medium.gdd == 0:
        return env
    g = env.grid
    _, width = predicted_width_after_dispersion(env, medium.gdd)
    if width > g.window / 8.0:
        raise WindowTooSmall(
            f"pulse would spread to std {width:.6g} ps, above window/8 = {g.window / 8.0:.6g} ps"
        )
    phase = np.exp(0.5j * medium.gdd * g.omega_fft**2)
    return env.with_samples(np.fft.fft(np.fft.ifft(env.samples) * phase))


def aperture_clip_fraction(env: SampledEnvelope, lens: FresnelTimeLens) -> float:
    """Energy fraction outside the lens aperture, centred on the intensity centroid."""
    intensity = env.intensity
    t = env.t
    centre = float((t * intensity).sum() / intensity.sum())
    outside = np.abs(t - centre) > lens.aperture / 2.0
    return float(intensity[outside].sum() / intensity.sum())


def apply_time_lens(env: SampledEnvelope, lens: IdealTimeLens | FresnelTimeLens) -> SampledEnvelope:
    """Imprint ``exp(i t^2 / 2 D_f)``; a Fresnel lens only inside its aperture."""
    _require_energy(env)
    g = env.grid
    t = env.t
    d_f = lens.focal_gdd
    if isinstance(lens, FresnelTimeLens):
        intensity = env.intensity
        centre = float((t * intensity).sum() / intensity.sum())
        inside = np.abs(t - centre) <= lens.aperture / 2.0
        reach = min(lens.aperture, g.window) / 2.0
    else:
        inside = None
        reach = g.window / 2.0
    max_freq = reach / abs(d_f)
    if max_freq > g.nyquist:
        raise AliasingRisk(
            f"lens chirp reaches {max_freq:.6g} rad/ps, above Nyquist {g.nyquist:.6g} rad/ps"
        )
    phase = t**2 / (2.0 * d_f)
    if inside is None:
        return env.with_samples(env.samples * np.exp(1j * phase))
    wrapped = np.mod(phase, 2.0 * math.pi)
    factor = np.where(inside, np.exp(1j * wrapped), 1.0)
    return env.with_samples(env.samples * factor)


def apply_element(env: SampledEnvelope, element: Element) -> SampledEnvelope:
    if isinstance(element, DispersiveMedium):
        return apply_dispersion(env, element)
    if isinstance(element, (IdealTimeLens, FresnelTimeLens)):
        return apply_time_lens(env, element)
    raise TypeError(f"not an optical element: {element!r}")


@dataclass(frozen=True)
class StageRecord:
    index: int
    element: Element | None
    envelope: SampledEnvelope
    moments: Moments
    chirp_c2: float
    clip_fraction: float | None = None


def _stage_error(exc: ChronoscopeError, index: int, element: Element) -> ChronoscopeError:
    annotated = type(exc)(f"stage {index} ({type(element).__name__}): {exc}")
    annotated.stage = index
    return annotated


def _safe_chirp(env: SampledEnvelope) -> float:
    try:
        return residual_chirp(env)
    except ChronoscopeError:
        return float("nan")


def trace_chain(env: SampledEnvelope, chain: Sequence[Element]) -> list[StageRecord]:
    """Propagate and record diagnostics; record 0 is the input."""
    records = [StageRecord(0, None, env, measure_moments(env), _safe_chirp(env))]
    for i, element in enumerate(chain, start=1):
        clip = aperture_clip_fraction(env, element) if isinstance(element, FresnelTimeLens) else None
        try:
            env = apply_element(env, element)
        except ChronoscopeError as exc:
            raise _stage_error(exc, i, element) from exc
        records.append(StageRecord(i, element, env, measure_moments(env), _safe_chirp(env), clip))
    return records


def propagate_chain(env: SampledEnvelope, chain: Iterable[Element]) -> SampledEnvelope:
    for i, element in enumerate(chain, start=1):
        try:
            env = apply_element(env, element)
        except ChronoscopeError as exc:
            raise _stage_error(exc, i, element) from exc
    return env


@dataclass(frozen=True)
class SingleLensImage:
    envelope: SampledEnvelope
    magnification: float
    output_gdd: float


def single_lens_image(d_in: float, d_f: float) -> tuple[float, float]:
    """Output GDD and magnification from the temporal thin-lens equation."""
    if d_in == 0:
        raise ZeroInputGDD("input GDD must be nonzero")
    if d_f == 0:
        raise InvalidLens("focal GDD must be nonzero")
    if d_in == d_f:
        raise FocalDegeneracy("object at the focal GDD: image at infinity")
    d_out = 1.0 / (1.0 / d_f - 1.0 / d_in)
    return d_out, -d_out / d_in


def single_lens_image_analytic(env: SampledEnvelope, d_in: float, d_f: float) -> SingleLensImage:
    """Closed-form single-lens image ``-(1/sqrt|m|) exp(i t^2 / 2 m D_f) A(t / m)``.

    The output lives on the input grid scaled by ``m`` (step ``|m| dt``), so for
    ``m > 0`` no interpolation is needed and for ``m < 0`` the samples are the
    time-reversed input. For ``m < 0`` the prefactor ``-1/sqrt(m)`` is only
    defined up to a global phase; ``-1/sqrt|m|`` is used.
    """
    d_out, m = single_lens_image(d_in, d_f)
    g = env.grid
    out_grid = TimeGrid(g.n_points, abs(m) * g.dt, m * g.t_center)
    t_out = out_grid.t
    t_src = t_out / m
    t_in = g.t
    re = CubicSpline(t_in, env.samples.real)(t_src)
    im = CubicSpline(t_in, env.samples.imag)(t_src)
    a = re + 1j * im
    # tolerance keeps the exact end node when m < 0 maps onto it
    outside = (t_src < t_in[0] - 1e-9 * g.dt) | (t_src > t_in[-1] + 1e-9 * g.dt)
    a[outside] = 0.0
    samples = -a * np.exp(1j * t_out**2 / (2.0 * m * d_f)) / math.sqrt(abs(m))
    return SingleLensImage(SampledEnvelope(out_grid, samples, env.carrier_offset), m, d_out)


def element_to_dict(element: Element) -> dict:
    if isinstance(element, DispersiveMedium):
        return {"kind": "dispersion", "gdd_ps2": element.gdd}
    if isinstance(element, FresnelTimeLens):
        return {
            "kind": "fresnel_lens",
            "focal_gdd_ps2": element.focal_gdd,
            "bandwidth_rad_per_ps": element.modulator_bandwidth,
        }
    if isinstance(element, IdealTimeLens):
        return {"kind": "lens", "focal_gdd_ps2": element.focal_gdd}
    raise TypeError(f"not an optical element: {element!r}")


def element_from_dict(item: dict) -> Element:
    try:
        kind = item["kind"]
        if kind == "dispersion":
            return DispersiveMedium(float(item["gdd_ps2"]))
        if kind == "lens":
            return IdealTimeLens(float(item["focal_gdd_ps2"]))
        if kind == "fresnel_lens":
            return FresnelTimeLens(float(item["focal_gdd_ps2"]), float(item["bandwidth_rad_per_ps"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigParseError(f"bad chain element {item!r}: {exc}") from exc
    raise ConfigParseError(f"unknown element kind {kind!r}")


def load_chain(source: str | Path | list) -> list[Element]:
    if isinstance(source, list):
        items = source
    else:
        try:
            items = json.loads(Path(source).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigParseError(f"cannot read chain file {source}: {exc}") from exc
    if not isinstance(items, list):
        raise ConfigParseError("chain description must be a JSON list")
    return [element_from_dict(item) for item in items]


def write_stage_csv(records: Sequence[StageRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["stage", "delta_t_ps", "delta_omega", "energy", "chirp_c2"])
        for r in records:
            m = r.moments
            writer.writerow(
                [r.index, f"{m.delta_t:.12g}", f"{m.delta_omega:.12g}", f"{m.energy:.12g}", f"{r.chirp_c2:.12g}"]
            )
