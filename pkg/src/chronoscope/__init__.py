"""Temporal imaging with time telescopes and HOM interference of reshaped photons."""

__version__ = "0.1.0"

from .elements import (
    DispersiveMedium,
    FresnelTimeLens,
    IdealTimeLens,
    apply_dispersion,
    apply_time_lens,
    propagate_chain,
    single_lens_image,
    single_lens_image_analytic,
    trace_chain,
)
from .envelope import (
    GaussianPulseSpec,
    SampledEnvelope,
    TimeGrid,
    from_function,
    make_gaussian,
    measure_moments,
    residual_chirp,
)
from .errors import ChronoscopeError
from .hom import (
    EmitterMode,
    EmitterPair,
    HomCurve,
    SpdcSource,
    coincidence_curve,
    p_int_emitter,
    p_int_spdc,
    p_int_spdc_analytic,
    visibility_scan,
)
from .spdc import SpdcConfig, jsa, load_crystal, phase_matching_solve, photon_marginals
from .telescope import (
    TelescopeDesign,
    analytic_gaussian_moments,
    classify,
    design_from,
    fresnel_design,
    minimal_loss_config,
)

__all__ = [
    "ChronoscopeError",
    "DispersiveMedium",
    "EmitterMode",
    "EmitterPair",
    "FresnelTimeLens",
    "GaussianPulseSpec",
    "HomCurve",
    "IdealTimeLens",
    "SampledEnvelope",
    "SpdcConfig",
    "SpdcSource",
    "TelescopeDesign",
    "TimeGrid",
    "analytic_gaussian_moments",
    "apply_dispersion",
    "apply_time_lens",
    "classify",
    "coincidence_curve",
    "design_from",
    "fresnel_design",
    "from_function",
    "jsa",
    "load_crystal",
    "make_gaussian",
    "measure_moments",
    "minimal_loss_config",
    "p_int_emitter",
    "p_int_spdc",
    "p_int_spdc_analytic",
    "phase_matching_solve",
    "photon_marginals",
    "propagate_chain",
    "residual_chirp",
    "single_lens_image",
    "single_lens_image_analytic",
    "trace_chain",
    "visibility_scan",
]
