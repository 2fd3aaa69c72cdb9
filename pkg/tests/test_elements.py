import json
import math

import numpy as np
import pytest

from chronoscope.elements import (
    DispersiveMedium,
    FresnelTimeLens,
    IdealTimeLens,
    aperture_clip_fraction,
    apply_dispersion,
    apply_time_lens,
    element_to_dict,
    load_chain,
    predicted_width_after_dispersion,
    propagate_chain,
    single_lens_image,
    single_lens_image_analytic,
    trace_chain,
    write_stage_csv,
)
from chronoscope.envelope import (
    GaussianPulseSpec,
    TimeGrid,
    from_function,
    make_gaussian,
    measure_moments,
    phase_aligned_error,
    residual_chirp,
)
from chronoscope.errors import (
    AliasingRisk,
    ConfigParseError,
    FocalDegeneracy,
    InvalidLens,
    WindowTooSmall,
    ZeroEnergy,
    ZeroInputGDD,
)
from chronoscope.pulses import SuperGaussian

GRID = TimeGrid(4096, 0.02)


def gaussian(sigma=1.0, grid=GRID, t0=0.0, c2=0.0):
    return make_gaussian(GaussianPulseSpec(sigma, t0, chirp_c2=c2), grid)


def rel_l2(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestDispersion:
    def test_zero_gdd_is_identity(self):
        env = gaussian()
        assert apply_dispersion(env, DispersiveMedium(0.0)) is env

    def test_width_against_kernel_quadrature(self):
        # direct sum of the time-domain kernel exp(-i (t - t')^2 / 2D) is the oracle
        grid = TimeGrid(1024, 0.1)
        env = gaussian(grid=grid)
        t = grid.t
        kernel = np.exp(-1j * (t[:, None] - t[None, :]) ** 2 / 20.0)
        direct = kernel @ env.samples * grid.dt / np.sqrt(2j * math.pi * 10.0)
        out = apply_dispersion(env, DispersiveMedium(10.0))
        assert phase_aligned_error(out.samples, direct) <= 1e-6
        assert measure_moments(out).delta_t == pytest.approx(math.sqrt(26.0), rel=1e-4)

    def test_spectral_intensity_unchanged(self):
        env = gaussian(c2=0.3)
        out = apply_dispersion(env, DispersiveMedium(-7.0))
        np.testing.assert_allclose(np.abs(out.spectrum()[1]), np.abs(env.spectrum()[1]), atol=1e-12)

    def test_inverse(self):
        env = gaussian(c2=0.2)
        back = apply_dispersion(apply_dispersion(env, DispersiveMedium(10.0)), DispersiveMedium(-10.0))
        assert rel_l2(back.samples, env.samples) <= 1e-10

    def test_energy(self):
        env = gaussian()
        out = apply_dispersion(env, DispersiveMedium(12.0))
        assert out.energy == pytest.approx(env.energy, rel=1e-10)

    def test_predicted_width_is_exact(self):
        env = gaussian(c2=0.4)
        _, predicted = predicted_width_after_dispersion(env, 6.0)
        measured = measure_moments(apply_dispersion(env, DispersiveMedium(6.0))).delta_t
        assert predicted == pytest.approx(measured, rel=1e-9)

    def test_window_guard(self):
        with pytest.raises(WindowTooSmall):
            apply_dispersion(gaussian(), DispersiveMedium(100.0))

    def test_zero_energy(self):
        env = gaussian().with_samples(np.zeros(GRID.n_points))
        with pytest.raises(ZeroEnergy):
            apply_dispersion(env, DispersiveMedium(1.0))


class TestIdealLens:
    def test_chirp(self):
        out = apply_time_lens(gaussian(), IdealTimeLens(2.0))
        assert residual_chirp(out) == pytest.approx(0.5, rel=1e-6)

    def test_spectral_width(self):
        out = apply_time_lens(gaussian(), IdealTimeLens(2.0))
        assert measure_moments(out).delta_omega == pytest.approx(0.5 * math.sqrt(2), rel=1e-3)

    def test_phase_uses_absolute_time(self):
        env = gaussian(t0=3.0)
        out = apply_time_lens(env, IdealTimeLens(5.0))
        np.testing.assert_allclose(out.samples, env.samples * np.exp(1j * env.t**2 / 10.0), atol=1e-15)

    def test_lens_additivity(self):
        env = gaussian()
        two = apply_time_lens(apply_time_lens(env, IdealTimeLens(3.0)), IdealTimeLens(-6.0))
        one = apply_time_lens(env, IdealTimeLens(6.0))
        assert rel_l2(two.samples, one.samples) <= 1e-10

    def test_invalid(self):
        with pytest.raises(InvalidLens):
            IdealTimeLens(0.0)
        with pytest.raises(InvalidLens):
            FresnelTimeLens(1.0, 0.0)

    def test_aliasing(self):
        with pytest.raises(AliasingRisk):
            apply_time_lens(gaussian(), IdealTimeLens(0.1))


class TestFresnelLens:
    # unit-width Gaussian, D_f = 2 ps^2; aperture T_A = 2 * Omega_m
    def run(self, aperture):
        env = gaussian()
        lens = FresnelTimeLens(2.0, aperture / 2.0)
        ideal = apply_time_lens(env, IdealTimeLens(2.0))
        fresnel = apply_time_lens(env, lens)
        return rel_l2(fresnel.samples, ideal.samples), aperture_clip_fraction(env, lens)

    def test_aperture(self):
        assert FresnelTimeLens(-4.0, 2.5).aperture == 10.0

    def test_ten_widths(self):
        err, clip = self.run(10.0)
        assert clip <= 2e-6
        # only the clipped tail can differ, by at most |1 - e^{i phi}| <= 2
        assert err <= 2.0 * math.sqrt(clip)

    def test_twelve_widths(self):
        err, clip = self.run(12.0)
        assert err <= 1e-4
        assert clip <= 1e-8

    def test_converges_to_ideal(self):
        errors = [self.run(a)[0] for a in (4.0, 6.0, 8.0, 10.0, 12.0, 14.0)]
        assert all(b < a for a, b in zip(errors, errors[1:]))

    def test_wrapped_phase_inside_aperture(self):
        env = gaussian()
        lens = FresnelTimeLens(0.5, 40.0)
        out = apply_time_lens(env, lens)
        ideal = apply_time_lens(env, IdealTimeLens(0.5))
        # wrapping phases of a few hundred rad costs ~1e-13 rad each
        assert rel_l2(out.samples, ideal.samples) <= 1e-10


class TestChain:
    def test_empty_chain(self):
        env = gaussian()
        assert propagate_chain(env, []) is env

    def test_imaging_magnifies(self):
        d_f, d_in = 2.0, 3.0
        d_out, m = single_lens_image(d_in, d_f)
        grid = TimeGrid(8192, 0.02)
        env = gaussian(0.5, grid)
        out = propagate_chain(env, [DispersiveMedium(d_in), IdealTimeLens(d_f), DispersiveMedium(d_out)])
        assert m == pytest.approx(-2.0)
        assert measure_moments(out).delta_t == pytest.approx(abs(m) * 0.5, rel=1e-4)

    def test_telescope_on_super_gaussian(self):
        M, d_inter = 0.5, 1.0
        d_f = d_inter / (1 - M)
        chain = [IdealTimeLens(d_f), DispersiveMedium(d_inter), IdealTimeLens(-M * d_f), DispersiveMedium(-M * d_inter)]
        grid = TimeGrid(16384, 0.005)
        pulse = SuperGaussian(1.0, 3)
        out = propagate_chain(from_function(pulse, grid), chain)
        expected = pulse(grid.t / M) / math.sqrt(M)
        assert phase_aligned_error(out.samples, expected) <= 1e-3
        fwhm = measure_moments(out).fwhm_t
        assert abs(residual_chirp(out)) <= 1e-3 / fwhm**2

    def test_stage_annotation(self):
        chain = [DispersiveMedium(1.0), DispersiveMedium(500.0)]
        with pytest.raises(WindowTooSmall) as info:
            propagate_chain(gaussian(), chain)
        assert info.value.stage == 2
        assert "stage 2" in str(info.value)

    def test_trace_records(self, tmp_path):
        chain = [IdealTimeLens(4.0), DispersiveMedium(2.0), FresnelTimeLens(-2.0, 10.0), DispersiveMedium(-1.0)]
        records = trace_chain(gaussian(), chain)
        assert [r.index for r in records] == [0, 1, 2, 3, 4]
        assert records[3].clip_fraction is not None and records[3].clip_fraction < 1e-12
        assert records[-1].moments.delta_t == pytest.approx(0.5, rel=1e-3)
        write_stage_csv(records, tmp_path / "s.csv")
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "stage,delta_t_ps,delta_omega,energy,chirp_c2"
        assert len(lines) == 6


class TestSingleLens:
    def test_symmetric_imaging(self):
        assert single_lens_image(4.0, 2.0) == pytest.approx((4.0, -1.0))

    def test_errors(self):
        with pytest.raises(FocalDegeneracy):
            single_lens_image(2.0, 2.0)
        with pytest.raises(ZeroInputGDD):
            single_lens_image(0.0, 2.0)
        with pytest.raises(InvalidLens):
            single_lens_image(1.0, 0.0)

    def test_magnification_three(self):
        d_f, mu = 10.0, 3.0
        d_in = d_f * (1 + 1 / mu)
        grid = TimeGrid(8192, 0.05)
        env = gaussian(grid=grid)
        image = single_lens_image_analytic(env, d_in, d_f)
        assert image.magnification == pytest.approx(-mu)
        m = measure_moments(image.envelope)
        assert m.delta_t == pytest.approx(3.0, rel=1e-3)
        assert residual_chirp(image.envelope) == pytest.approx(1 / (image.magnification * d_f), rel=1e-3)
        numeric = propagate_chain(env, [DispersiveMedium(d_in), IdealTimeLens(d_f), DispersiveMedium(image.output_gdd)])
        expected = single_lens_image_analytic(env, d_in, d_f).envelope
        # analytic samples live on a grid with step 3 dt; compare on the numeric grid at matching times
        idx = np.searchsorted(grid.t, expected.t)
        ok = (idx < grid.n_points) & (np.abs(grid.t[np.minimum(idx, grid.n_points - 1)] - expected.t) < 1e-9)
        assert phase_aligned_error(numeric.samples[idx[ok]], expected.samples[ok]) <= 1e-3


class TestChainJson:
    def test_round_trip(self, tmp_path):
        chain = [DispersiveMedium(1.5), IdealTimeLens(-2.0), FresnelTimeLens(3.0, 0.4)]
        path = tmp_path / "chain.json"
        path.write_text(json.dumps([element_to_dict(e) for e in chain]))
        assert load_chain(path) == chain

    @pytest.mark.parametrize(
        "items",
        [[{"kind": "mirror"}], [{"kind": "lens"}], {"kind": "lens"}, [{"kind": "dispersion", "gdd_ps2": "x"}]],
    )
    def test_bad_input(self, items, tmp_path):
        path = tmp_path / "chain.json"
        path.write_text(json.dumps(items))
        with pytest.raises(ConfigParseError):
            load_chain(path)

    def test_unreadable(self, tmp_path):
        with pytest.raises(ConfigParseError):
            load_chain(tmp_path / "missing.json")
