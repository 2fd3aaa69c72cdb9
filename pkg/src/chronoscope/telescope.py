"""Two-time-lens telescopes: design, classification and Fresnel-lens sizing."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

from .elements import DispersiveMedium, Element, FresnelTimeLens, IdealTimeLens
from .errors import ChronoscopeError, DegenerateMagnification, InfeasibleBandwidth

FOUR_LN2 = 4.0 * math.log(2.0)

# Relative slack on the second-lens bandwidth bound; the published 70 GHz / 2.1 ns /
# M = 0.003 design sits 0.06 % inside the strict inequality because of rounding.
BANDWIDTH_SLACK = 1e-3


def _check_magnification(m: float) -> None:
    if m == 0 or not math.isfinite(m):
        raise DegenerateMagnification("magnification must be finite and nonzero")
    if m == 1:
        raise DegenerateMagnification("M = 1 needs infinite focal GDDs; use an empty chain")


@dataclass(frozen=True)
class TelescopeDesign:
    """Telescope fixed by magnification, inter-lens GDD and object distance (input GDD)."""

    magnification: float
    inter_gdd: float
    input_gdd: float = 0.0

    def __post_init__(self):
        _check_magnification(self.magnification)
        if self.inter_gdd == 0 or not math.isfinite(self.inter_gdd):
            raise DegenerateMagnification("inter-lens GDD must be finite and nonzero")

    @property
    def focal_1(self) -> float:
        return self.inter_gdd / (1.0 - self.magnification)

    @property
    def focal_2(self) -> float:
        return -self.magnification * self.inter_gdd / (1.0 - self.magnification)

    @property
    def output_gdd(self) -> float:
        m = self.magnification
        return -(m**2) * self.input_gdd - m * self.inter_gdd

    @property
    def total_gdd_modulus(self) -> float:
        return abs(self.input_gdd) + abs(self.inter_gdd) + abs(self.output_gdd)

    def lens_magnifications(self) -> tuple[float, float]:
        """Magnifications ``(m, m')`` of the two constituent single-lens imagers.

        ``m`` is infinite when the object sits at the first focal GDD.
        """
        d_f, d_f2 = self.focal_1, self.focal_2
        if self.input_gdd == d_f:
            return math.inf, 0.0
        m1 = d_f / (d_f - self.input_gdd)
        d_out = self.input_gdd * d_f / (self.input_gdd - d_f)
        d_in2 = self.inter_gdd - d_out
        m2 = d_f2 / (d_f2 - d_in2)
        return m1, m2

    def chirp_coefficient(self) -> float:
        """Output chirp ``(M D_f + D_f') / (M m' D_f D_f')`` of the cascade; zero here."""
        m = self.magnification
        numerator = m * self.focal_1 + self.focal_2
        _, m2 = self.lens_magnifications()
        if m2 == 0:
            return 0.0 if numerator == 0 else math.inf
        return numerator / (m * m2 * self.focal_1 * self.focal_2)

    def elements(self, fresnel_bandwidths: tuple[float, float] | None = None) -> list[Element]:
        """Element chain ``[D_in, lens, D_inter, lens', D_out']``; zero GDDs are dropped."""
        if fresnel_bandwidths is None:
            lens1: Element = IdealTimeLens(self.focal_1)
            lens2: Element = IdealTimeLens(self.focal_2)
        else:
            lens1 = FresnelTimeLens(self.focal_1, fresnel_bandwidths[0])
            lens2 = FresnelTimeLens(self.focal_2, fresnel_bandwidths[1])
        chain: list[Element] = []
        if self.input_gdd:
            chain.append(DispersiveMedium(self.input_gdd))
        chain += [lens1, DispersiveMedium(self.inter_gdd), lens2]
        if self.output_gdd:
            chain.append(DispersiveMedium(self.output_gdd))
        return chain

    def as_dict(self) -> dict:
        return {
            "magnification": self.magnification,
            "inter_gdd_ps2": self.inter_gdd,
            "input_gdd_ps2": self.input_gdd,
            "focal_1_ps2": self.focal_1,
            "focal_2_ps2": self.focal_2,
            "output_gdd_ps2": self.output_gdd,
        }


def design_from(magnification: float, inter_gdd: float, input_gdd: float = 0.0) -> TelescopeDesign:
    return TelescopeDesign(magnification, inter_gdd, input_gdd)


class TelescopeKind(str, enum.Enum):
    INVERTING_MAGNIFYING = "InvertingMagnifying"
    INVERTING_COMPRESSING = "InvertingCompressing"
    ERECTING_COMPRESSING = "ErectingCompressing"
    ERECTING_MAGNIFYING = "ErectingMagnifying"


class SpatialCounterpart(str, enum.Enum):
    BEAM_EXPANDER = "BeamExpander"
    KEPLERIAN = "Keplerian"
    GALILEAN = "Galilean"
    INVERTED_GALILEAN = "InvertedGalilean"
    NONE = "None"


@dataclass(frozen=True)
class TelescopeClass:
    kind: TelescopeKind
    spatial_counterpart: SpatialCounterpart

    @property
    def has_spatial_counterpart(self) -> bool:
        return self.spatial_counterpart is not SpatialCounterpart.NONE

    @property
    def erecting(self) -> bool:
        return self.kind in (TelescopeKind.ERECTING_COMPRESSING, TelescopeKind.ERECTING_MAGNIFYING)


_COUNTERPARTS = {
    TelescopeKind.INVERTING_MAGNIFYING: SpatialCounterpart.BEAM_EXPANDER,
    TelescopeKind.INVERTING_COMPRESSING: SpatialCounterpart.KEPLERIAN,
    TelescopeKind.ERECTING_COMPRESSING: SpatialCounterpart.GALILEAN,
    TelescopeKind.ERECTING_MAGNIFYING: SpatialCounterpart.INVERTED_GALILEAN,
}


def classify(design: TelescopeDesign) -> TelescopeClass:
    # M = -1 (unit inverting relay, D_f = D_f') is grouped with the beam expanders
    m = design.magnification
    if m <= -1:
        kind = TelescopeKind.INVERTING_MAGNIFYING
    elif m < 0:
        kind = TelescopeKind.INVERTING_COMPRESSING
    elif m < 1:
        kind = TelescopeKind.ERECTING_COMPRESSING
    else:
        kind = TelescopeKind.ERECTING_MAGNIFYING
    counterpart = _COUNTERPARTS[kind] if design.inter_gdd > 0 else SpatialCounterpart.NONE
    return TelescopeClass(kind, counterpart)


@dataclass(frozen=True)
class MinimalLossConfig:
    magnification: float
    inter_gdd: float
    total_no_input: float
    total_field_lens: float
    choice: str

    @property
    def input_gdd(self) -> float:
        return 0.0 if self.choice == "no_input" else -self.inter_gdd / self.magnification

    def design(self) -> TelescopeDesign:
        return TelescopeDesign(self.magnification, self.inter_gdd, self.input_gdd)


def minimal_loss_config(magnification: float, inter_gdd: float) -> MinimalLossConfig:
    """Compare the two-medium layouts: ``D_in = 0`` versus the field-lens ``D_out' = 0``."""
    _check_magnification(magnification)
    a = abs(magnification)
    no_input = (1.0 + a) * abs(inter_gdd)
    field_lens = (1.0 + 1.0 / a) * abs(inter_gdd)
    choice = "no_input" if no_input <= field_lens else "field_lens"
    return MinimalLossConfig(magnification, inter_gdd, no_input, field_lens, choice)


@dataclass(frozen=True)
class FresnelDesignReport:
    """Erecting compressing telescope sized for Fresnel time lenses.

    ``focal_1_min`` is the smallest first focal GDD whose aperture holds the
    pulse at both lenses when the second modulator just covers the output band.
    """

    input_fwhm: float
    magnification: float
    modulator_bandwidth_2: float
    focal_1_min: float
    focal_2: float
    inter_gdd: float
    output_gdd: float
    required_bw_1: float
    required_bw_2: float
    min_output_fwhm: float
    fourier_processor_M_omega: float

    @property
    def input_bandwidth(self) -> float:
        return FOUR_LN2 / self.input_fwhm

    def design(self) -> TelescopeDesign:
        return TelescopeDesign(self.magnification, self.inter_gdd, 0.0)

    def elements(self) -> list[Element]:
        return self.design().elements((self.required_bw_1, self.modulator_bandwidth_2))

    def as_dict(self) -> dict:
        return asdict(self)


def fresnel_design(input_fwhm: float, magnification: float, modulator_bandwidth_2: float) -> FresnelDesignReport:
    t0, m, bw2 = input_fwhm, magnification, modulator_bandwidth_2
    if not t0 > 0:
        raise ChronoscopeError("input FWHM must be positive")
    if not 0 < m < 1:
        raise DegenerateMagnification("Fresnel sizing applies to erecting compressing telescopes, 0 < M < 1")
    omega0 = FOUR_LN2 / t0
    needed = omega0 / m
    if bw2 < needed * (1.0 - BANDWIDTH_SLACK):
        m_min = FOUR_LN2 / (t0 * bw2)
        raise InfeasibleBandwidth(
            f"second modulator bandwidth {bw2:.6g} rad/ps below output bandwidth {needed:.6g} rad/ps; "
            f"smallest feasible magnification is {m_min:.6g}",
            min_feasible_magnification=m_min,
        )
    d_f = math.sqrt(2.0 * m) * t0**2 / (2.0 * FOUR_LN2)
    d_inter = d_f * (1.0 - m)
    return FresnelDesignReport(
        input_fwhm=t0,
        magnification=m,
        modulator_bandwidth_2=bw2,
        focal_1_min=d_f,
        focal_2=-m * d_f,
        inter_gdd=d_inter,
        output_gdd=-m * d_inter,
        required_bw_1=omega0 * math.sqrt(2.0 / m),
        required_bw_2=needed,
        min_output_fwhm=FOUR_LN2 / bw2,
        fourier_processor_M_omega=d_f * bw2**2 / FOUR_LN2,
    )


@dataclass(frozen=True)
class GaussianMoments:
    delta_omega_0: float
    delta_omega_1: float
    delta_t_2: float
    delta_omega_3: float
    delta_t_4: float


def analytic_gaussian_moments(delta_t0: float, design: TelescopeDesign) -> GaussianMoments:
    """Intensity std's of a transform-limited Gaussian after each telescope element.

    Valid for the two-medium layout without input dispersion.
    """
    if not delta_t0 > 0:
        raise ChronoscopeError("delta_t0 must be positive")
    if design.input_gdd != 0:
        raise ChronoscopeError("closed-form moment chain needs input_gdd = 0")
    m = design.magnification
    d_f = design.focal_1
    dw0 = 1.0 / (2.0 * delta_t0)
    dw1 = dw0 * math.sqrt(1.0 + d_f**-2 / (4.0 * dw0**4))
    dt2 = abs(m) * delta_t0 * math.sqrt(1.0 + d_f**2 * (1.0 - m) ** 2 / (4.0 * delta_t0**4 * m**2))
    return GaussianMoments(dw0, dw1, dt2, dw0 / abs(m), abs(m) * delta_t0)
