import math

import numpy as np
import pytest

from chronoscope.elements import DispersiveMedium, IdealTimeLens, propagate_chain
from chronoscope.envelope import GaussianPulseSpec, TimeGrid, from_function, make_gaussian, measure_moments, phase_aligned_error
from chronoscope.errors import ChronoscopeError, DegenerateMagnification, InfeasibleBandwidth
from chronoscope.pulses import DoublePulse, SmoothedExponential
from chronoscope.telescope import (
    FOUR_LN2,
    SpatialCounterpart,
    TelescopeDesign,
    TelescopeKind,
    analytic_gaussian_moments,
    classify,
    design_from,
    fresnel_design,
    minimal_loss_config,
)

TWO_PI_70GHZ = 2 * math.pi * 0.07


class TestDesign:
    def test_published_numbers(self):
        d = design_from(0.003, 61515.0)
        assert d.focal_1 == pytest.approx(61700, rel=1e-3)
        assert d.focal_2 == pytest.approx(-185, rel=1e-3)
        assert d.output_gdd == pytest.approx(-184.5, rel=1e-3)

    @pytest.mark.parametrize("M", [-4.0, -1.0, -0.3, 0.2, 0.9, 1.1, 7.0])
    @pytest.mark.parametrize("d_inter", [-3.0, 0.5, 100.0])
    def test_algebraic_identities(self, M, d_inter):
        d = TelescopeDesign(M, d_inter, input_gdd=0.7)
        assert d.inter_gdd - d.focal_1 - d.focal_2 == pytest.approx(0.0, abs=1e-12 * abs(d_inter))
        assert d.focal_2 + M * d.focal_1 == pytest.approx(0.0, abs=1e-12 * abs(d_inter))
        assert d.chirp_coefficient() == pytest.approx(0.0, abs=1e-12)
        m1, m2 = d.lens_magnifications()
        assert m1 * m2 == pytest.approx(M, rel=1e-10)

    def test_field_lens(self):
        d = TelescopeDesign(0.25, 8.0, input_gdd=-8.0 / 0.25)
        assert d.output_gdd == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_inverting(self):
        d = design_from(-1.0, 6.0)
        assert d.focal_1 == d.focal_2 == 3.0

    @pytest.mark.parametrize("M", [0.0, 1.0, math.inf, math.nan])
    def test_degenerate_magnification(self, M):
        with pytest.raises(DegenerateMagnification):
            design_from(M, 1.0)

    def test_zero_inter_gdd(self):
        with pytest.raises(DegenerateMagnification):
            design_from(0.5, 0.0)

    def test_elements_drop_empty_media(self):
        chain = design_from(0.5, 2.0).elements()
        assert chain == [IdealTimeLens(4.0), DispersiveMedium(2.0), IdealTimeLens(-2.0), DispersiveMedium(-1.0)]
        field = TelescopeDesign(0.5, 2.0, -4.0).elements()
        assert field[0] == DispersiveMedium(-4.0) and len(field) == 4


class TestClassify:
    @pytest.mark.parametrize(
        "M, kind, counterpart",
        [
            (-3.0, TelescopeKind.INVERTING_MAGNIFYING, SpatialCounterpart.BEAM_EXPANDER),
            (-1.0, TelescopeKind.INVERTING_MAGNIFYING, SpatialCounterpart.BEAM_EXPANDER),
            (-0.5, TelescopeKind.INVERTING_COMPRESSING, SpatialCounterpart.KEPLERIAN),
            (0.5, TelescopeKind.ERECTING_COMPRESSING, SpatialCounterpart.GALILEAN),
            (2.0, TelescopeKind.ERECTING_MAGNIFYING, SpatialCounterpart.INVERTED_GALILEAN),
        ],
    )
    def test_table(self, M, kind, counterpart):
        cls = classify(design_from(M, 1.0))
        assert cls.kind is kind
        assert cls.spatial_counterpart is counterpart
        assert cls.has_spatial_counterpart
        assert cls.erecting == (M > 0)

    def test_galilean_focal_signs(self):
        d = design_from(0.5, 1.0)
        assert d.focal_1 > 0 > d.focal_2
        assert d.focal_1 > abs(d.focal_2)

    @pytest.mark.parametrize("M", [-2.0, -0.5, 0.5, 2.0])
    def test_negative_inter_gdd(self, M):
        cls = classify(design_from(M, -1.0))
        assert cls.spatial_counterpart is SpatialCounterpart.NONE
        assert not cls.has_spatial_counterpart


class TestMinimalLoss:
    def test_published_case(self):
        cfg = minimal_loss_config(0.003, 61515.0)
        assert cfg.total_no_input == pytest.approx(61699.545)
        assert cfg.total_field_lens == pytest.approx(2.057e7, rel=1e-3)
        assert cfg.choice == "no_input"
        assert cfg.input_gdd == 0.0

    def test_one_third(self):
        cfg = minimal_loss_config(1 / 3, 3.0)
        assert (cfg.total_no_input, cfg.total_field_lens) == pytest.approx((4.0, 12.0))
        assert cfg.choice == "no_input"

    def test_three(self):
        cfg = minimal_loss_config(3.0, 3.0)
        assert (cfg.total_no_input, cfg.total_field_lens) == pytest.approx((12.0, 4.0))
        assert cfg.choice == "field_lens"
        assert cfg.input_gdd == pytest.approx(-1.0)
        d = cfg.design()
        assert d.output_gdd == pytest.approx(0.0, abs=1e-12)
        assert d.total_gdd_modulus == pytest.approx(4.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateMagnification):
            minimal_loss_config(1.0, 1.0)


class TestFresnelDesign:
    def test_published_example(self):
        r = fresnel_design(2100.0, 0.003, TWO_PI_70GHZ)
        assert r.focal_1_min == pytest.approx(61700, rel=0.01)
        assert r.focal_2 == pytest.approx(-185, rel=0.01)
        assert r.required_bw_1 / (2 * math.pi) * 1e3 == pytest.approx(5.4, rel=0.02)
        assert r.min_output_fwhm == pytest.approx(6.3, rel=0.02)
        assert r.fourier_processor_M_omega == pytest.approx(4300, rel=0.02)

    def test_scaling_with_m(self):
        a = fresnel_design(2100.0, 0.003, TWO_PI_70GHZ)
        b = fresnel_design(2100.0, 0.012, TWO_PI_70GHZ)
        assert b.focal_1_min == pytest.approx(2 * a.focal_1_min, rel=1e-12)

    def test_boundary(self):
        M = FOUR_LN2 / (2100.0 * TWO_PI_70GHZ)
        r = fresnel_design(2100.0, M, TWO_PI_70GHZ)
        assert r.min_output_fwhm == pytest.approx(M * 2100.0, rel=1e-12)

    def test_bandwidth_inequalities(self):
        r = fresnel_design(10.0, 0.2, 2.0)
        omega0 = FOUR_LN2 / 10.0
        assert r.required_bw_1 >= omega0 * math.sqrt(2 / 0.2) * (1 - 1e-12)
        assert r.modulator_bandwidth_2 >= omega0 / 0.2
        d = r.design()
        assert d.inter_gdd == pytest.approx(r.inter_gdd)
        assert d.output_gdd == pytest.approx(r.output_gdd)

    def test_infeasible(self):
        with pytest.raises(InfeasibleBandwidth) as info:
            fresnel_design(2100.0, 0.003, 2 * math.pi * 0.01)
        assert info.value.min_feasible_magnification == pytest.approx(FOUR_LN2 / (2100.0 * 2 * math.pi * 0.01))

    @pytest.mark.parametrize("M", [-0.5, 1.5])
    def test_requires_compressing_erecting(self, M):
        with pytest.raises(DegenerateMagnification):
            fresnel_design(10.0, M, 100.0)


class TestAnalyticMoments:
    def test_output_width(self):
        mom = analytic_gaussian_moments(1.3, design_from(0.2, 5.0))
        assert mom.delta_t_4 == 0.2 * 1.3
        assert mom.delta_omega_3 == pytest.approx(1 / (2 * 1.3 * 0.2))

    def test_weak_lens_limit(self):
        mom = analytic_gaussian_moments(1.0, design_from(0.5, 1e8))
        assert mom.delta_omega_1 == pytest.approx(mom.delta_omega_0, rel=1e-12)

    def test_against_numeric_chain(self):
        design = design_from(0.5, 2.0)
        mom = analytic_gaussian_moments(1.0, design)
        grid = TimeGrid(8192, 0.01)
        env = make_gaussian(GaussianPulseSpec(1.0), grid)
        widths = []
        for element in design.elements():
            env = propagate_chain(env, [element])
            widths.append(measure_moments(env))
        assert widths[0].delta_omega == pytest.approx(mom.delta_omega_1, rel=1e-3)
        assert widths[1].delta_t == pytest.approx(mom.delta_t_2, rel=1e-3)
        assert widths[2].delta_omega == pytest.approx(mom.delta_omega_3, rel=1e-3)
        assert widths[3].delta_t == pytest.approx(mom.delta_t_4, rel=1e-3)

    def test_requires_no_input_gdd(self):
        with pytest.raises(ChronoscopeError):
            analytic_gaussian_moments(1.0, TelescopeDesign(0.5, 1.0, 1.0))


def _scaled(pulse, t, M):
    return pulse(t / M) / math.sqrt(abs(M))


class TestEndToEnd:
    GRID = TimeGrid(16384, 0.01)

    @pytest.mark.parametrize("M1, M2", [(0.5, -2.0 / 3.0), (2.0, 0.25), (-0.5, -0.5)])
    def test_composition(self, M1, M2):
        pulse = DoublePulse(0.5, 2.0, ratio=0.6)
        env = from_function(pulse, self.GRID)
        cascade = design_from(M1, 2 * abs(1 - M1)).elements() + design_from(M2, 2 * abs(1 - M2)).elements()
        direct = design_from(M1 * M2, 2 * abs(1 - M1 * M2)).elements()
        a = propagate_chain(env, cascade)
        b = propagate_chain(env, direct)
        assert phase_aligned_error(a.samples, b.samples) <= 2e-3

    @pytest.mark.parametrize("M", [0.5, 2.0, -0.5, -2.0])
    def test_skewness_sign(self, M):
        pulse = SmoothedExponential(1.0, 0.3, t0=-2.0)
        env = from_function(pulse, self.GRID)
        before = measure_moments(env).skewness_t
        after = measure_moments(propagate_chain(env, design_from(M, 2 * abs(1 - M)).elements())).skewness_t
        assert before > 0.5
        assert np.sign(after) == np.sign(M)
        assert abs(after) == pytest.approx(before, rel=1e-3)

    def test_with_input_gdd(self):
        pulse = SmoothedExponential(0.8, 0.2, t0=-1.0)
        env = from_function(pulse, self.GRID)
        design = TelescopeDesign(-0.5, 3.0, input_gdd=1.5)
        out = propagate_chain(env, design.elements())
        assert phase_aligned_error(out.samples, _scaled(pulse, self.GRID.t, -0.5)) <= 1e-3
