"""
Tests for the exact mean-field sums.

Covers:
- lattices, log-binomials and the Stirling form
- exact distribution: normalisation, n = 3 oracles, alpha = 0 reduction
- mean edge density and finite-size free energy
- conditioning windows and their errors
- scaled fluctuation MGFs and absolute deviations (Gaussian and quartic)
- Laplace approximation of log Z, mixture masses, conditional CLT variance
- large-deviation exponents
"""
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.special import expit, logsumexp
from scipy.stats import binom

from src.core.exceptions import DomainError, EmptyWindowError, RegimeError, SizeError
from src.meanfield.exact import (
    Centering,
    ConditionalWindow,
    EdgeDensityGrid,
    FluctuationScale,
    Lattice,
    abs_deviation_scaled,
    conditional_clt_variance,
    conditional_distribution,
    exact_distribution,
    finite_size_free_energy,
    laplace_check,
    large_deviation_profile,
    log_binomial,
    mean_edge_density,
    mixture_masses,
    scaled_fluctuation_mgf,
    scaled_fluctuation_mgf_curve,
    stirling_log_count,
)
from src.phase.limits import quartic_abs_moment, quartic_mgf
from src.phase.solver import ModelParams, classify_phase, free_energy, limiting_variance, rate_function


@pytest.mark.unit
class TestGrid:
    """Test the two edge-density lattices."""

    def test_gamma_values(self):
        """Test the GAMMA lattice spans {0, 2/n^2, ..., 1 - 1/n}."""
        grid = EdgeDensityGrid.build(3, Lattice.GAMMA)
        np.testing.assert_allclose(grid.values, [0.0, 2 / 9, 4 / 9, 2 / 3], atol=1e-15)
        assert grid.values[-1] == pytest.approx(1.0 - 1.0 / 3.0)

    def test_edge_values(self):
        """Test the EDGE lattice spans {0, 1/N, ..., 1}."""
        grid = EdgeDensityGrid.build(4, Lattice.EDGE)
        assert len(grid) == 7
        assert grid.values[-1] == 1.0

    def test_size_ceiling(self, fresh_settings):
        """Test sizes past the configured ceiling are refused before allocation."""
        with pytest.raises(SizeError):
            EdgeDensityGrid.build(20_001)

    def test_rejects_small_n(self):
        """Test n < 2 is a domain error."""
        with pytest.raises(DomainError):
            EdgeDensityGrid.build(1)


@pytest.mark.unit
class TestLogBinomial:
    """Test ln C(N, k)."""

    def test_small_values(self):
        """Test ln C(3, 1) = ln 3 and ln C(N, 0) = 0."""
        assert log_binomial(3, 1) == pytest.approx(math.log(3.0), abs=1e-12)
        assert log_binomial(435, 0) == pytest.approx(0.0, abs=1e-12)

    def test_matches_big_integer(self):
        """Test ln C(435, 217) against the exact integer binomial."""
        assert log_binomial(435, 217) == pytest.approx(math.log(math.comb(435, 217)), abs=1e-10)

    def test_rejects_out_of_range(self):
        """Test k > N is a domain error."""
        with pytest.raises(DomainError):
            log_binomial(3, 4)

    def test_stirling_form(self):
        """Test the Stirling form tracks ln C(N, k) at an interior point."""
        n = 30
        assert stirling_log_count(n, 200) == pytest.approx(log_binomial(435, 200), abs=1e-2)


@pytest.mark.unit
class TestExactDistribution:
    """Test exact_distribution."""

    def test_uniform_at_origin(self, origin_params):
        """Test n = 3 at (0, 0) is Binomial(3, 1/2) with log Z = ln 8."""
        dist = exact_distribution(3, origin_params)
        np.testing.assert_allclose(dist.probabilities, [1 / 8, 3 / 8, 3 / 8, 1 / 8], atol=1e-14)
        assert dist.log_partition == pytest.approx(math.log(8.0), abs=1e-12)

    def test_four_term_sum(self):
        """Test n = 3 at (3, 0) against the direct sum over the four grid points."""
        dist = exact_distribution(3, ModelParams(alpha=3.0, h=0.0))
        direct = sum(math.comb(3, k) * math.exp(9.0 * (2 * k / 9) ** 3 / 2.0) for k in range(4))
        assert dist.log_partition == pytest.approx(math.log(direct), abs=1e-12)

    def test_normalised(self, on_curve_params):
        """Test probabilities sum to 1 and match exp(log_weights - log Z)."""
        dist = exact_distribution(200, on_curve_params)
        assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(dist.probabilities, np.exp(dist.log_weights - dist.log_partition))

    def test_erdos_renyi_reduction(self):
        """Test alpha = 0 gives Binomial(N, sigma(h)) pointwise in log space."""
        n, h = 30, 0.7
        dist = exact_distribution(n, ModelParams(alpha=0.0, h=h))
        expected = binom.logpmf(np.arange(436), 435, expit(h))
        np.testing.assert_allclose(dist.log_weights - dist.log_partition, expected, atol=1e-10)

    def test_large_n_finite(self, critical_params):
        """Test log Z stays finite where exp(n^2 f) overflows."""
        dist = exact_distribution(500, critical_params)
        assert math.isfinite(dist.log_partition)
        assert np.all(np.isfinite(dist.probabilities))

    def test_frame_columns(self, origin_params):
        """Test the tabular form."""
        frame = exact_distribution(3, origin_params).to_frame()
        assert list(frame.columns) == ["k", "m", "log_weight", "probability"]


@pytest.mark.unit
class TestMeanAndFreeEnergy:
    """Test mean_edge_density and finite_size_free_energy."""

    def test_mean_origin(self, origin_params):
        """Test the n = 3 mean at (0, 0) is 1/3."""
        assert mean_edge_density(3, origin_params) == pytest.approx(1.0 / 3.0, abs=1e-14)

    def test_mean_erdos_renyi(self):
        """Test (1 - 1/n) sigma(h) for alpha = 0."""
        n, h = 40, -0.4
        assert mean_edge_density(n, ModelParams(alpha=0.0, h=h)) == pytest.approx((1 - 1 / n) * expit(h), abs=1e-12)

    def test_mean_approaches_maximizer(self, uniqueness_params):
        """Test the n = 1000 mean is within 1e-3 of u* at (1, 0)."""
        assert mean_edge_density(1000, uniqueness_params) == pytest.approx(0.5847, abs=1e-3)

    def test_free_energy_convergence(self, uniqueness_params):
        """Test |ln Z / n^2 - f| decreases along n."""
        f = free_energy(uniqueness_params)
        gaps = [abs(finite_size_free_energy(n, uniqueness_params) - f) for n in (100, 200, 400, 800)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))


@pytest.mark.unit
class TestConditioning:
    """Test windows and conditional laws."""

    def test_full_window_identity(self, uniqueness_params):
        """Test conditioning on the full grid changes nothing."""
        dist = exact_distribution(50, uniqueness_params)
        conditional = conditional_distribution(dist, ConditionalWindow.full(dist.grid))
        np.testing.assert_allclose(conditional.probabilities, dist.probabilities, atol=1e-15)

    def test_renormalised_inside(self, on_curve_params):
        """Test conditional probabilities equal unconditional ones divided by the window mass."""
        dist = exact_distribution(100, on_curve_params)
        u_low = classify_phase(on_curve_params).maximizers[0].u
        window = ConditionalWindow.around(dist.grid, u_low, 0.25)
        mask = window.mask(len(dist.grid))
        conditional = conditional_distribution(dist, window)
        np.testing.assert_allclose(conditional.probabilities[mask], dist.probabilities[mask] / dist.mass(mask))
        assert np.all(conditional.probabilities[~mask] == 0.0)

    def test_conditional_mean_near_maximizer(self, on_curve_params):
        """Test the n = 2000 conditional mean near u_1* is within 1e-2 of it."""
        dist = exact_distribution(2000, on_curve_params)
        u_low = classify_phase(on_curve_params).maximizers[0].u
        conditional = conditional_distribution(dist, ConditionalWindow.around(dist.grid, u_low, 0.25))
        assert conditional.mean() == pytest.approx(u_low, abs=1e-2)

    def test_empty_window(self, origin_params):
        """Test a window containing no lattice point raises."""
        dist = exact_distribution(10, origin_params)
        window = ConditionalWindow.with_radius(dist.grid, 0.0123, 1e-9)
        with pytest.raises(EmptyWindowError):
            conditional_distribution(dist, window)

    def test_critical_delta_limit(self, critical_params):
        """Test delta >= 3/8 is refused around the critical maximizer."""
        grid = EdgeDensityGrid.build(100)
        with pytest.raises(DomainError):
            ConditionalWindow.around(grid, 2.0 / 3.0, delta=0.4, critical=True)

    def test_window_size_mismatch(self, origin_params):
        """Test a window built for another n is rejected."""
        dist = exact_distribution(10, origin_params)
        window = ConditionalWindow.full(EdgeDensityGrid.build(11))
        with pytest.raises(DomainError):
            conditional_distribution(dist, window)


@pytest.mark.unit
class TestScaledFluctuations:
    """Test MGFs and absolute deviations of the scaled edge density."""

    def test_mgf_at_zero(self, critical_params):
        """Test M(0) = 1 exactly."""
        assert scaled_fluctuation_mgf(100, critical_params, 0.0) == 1.0

    def test_gaussian_mgf(self, origin_params):
        """Test the CLT-scaled MGF at (0, 0) is exp(v/2) with v = 1/4."""
        assert scaled_fluctuation_mgf(500, origin_params, 1.0) == pytest.approx(math.exp(0.125), rel=0.02)

    def test_curve_matches_pointwise(self, uniqueness_params):
        """Test the shared-distribution curve equals pointwise evaluation."""
        ts = [-1.0, 0.0, 0.5]
        curve = scaled_fluctuation_mgf_curve(80, uniqueness_params, ts)
        pointwise = [scaled_fluctuation_mgf(80, uniqueness_params, t) for t in ts]
        np.testing.assert_allclose(curve, pointwise, rtol=1e-12)

    @pytest.mark.slow
    def test_quartic_mgf_at_critical_point(self, critical_params):
        """Test the critical-scaled MGF at n = 2000 against the quartic law."""
        value = scaled_fluctuation_mgf(2000, critical_params, 1.0, exponent=FluctuationScale.CRITICAL,
                                       center=Centering.MAXIMIZER)
        assert value == pytest.approx(quartic_mgf(1.0), rel=0.05)

    @pytest.mark.slow
    def test_critical_mgf_symmetric(self, critical_params):
        """Test M(t) ~ M(-t) with maximizer centering at the critical point."""
        plus, minus = scaled_fluctuation_mgf_curve(
            2000, critical_params, [1.0, -1.0], exponent=FluctuationScale.CRITICAL, center=Centering.MAXIMIZER
        )
        assert plus == pytest.approx(minus, rel=0.05)

    def test_abs_deviation_toy(self, origin_params):
        """Test n = 3 at (0, 0) by the four-term sum: sqrt(6) / 4."""
        assert abs_deviation_scaled(3, origin_params) == pytest.approx(math.sqrt(6.0) / 4.0, abs=1e-12)

    def test_abs_deviation_gaussian(self, origin_params):
        """Test sqrt(2L) E|x - 1/2| tends to 1/sqrt(pi)."""
        assert abs_deviation_scaled(500, origin_params) == pytest.approx(1.0 / math.sqrt(math.pi), abs=1e-2)

    @pytest.mark.slow
    def test_abs_deviation_quartic(self, critical_params):
        """Test (2L)^(1/4) E|x - 2/3| tends to E|Y| ~ 0.4609."""
        assert abs_deviation_scaled(2000, critical_params) == pytest.approx(quartic_abs_moment(), rel=0.03)

    def test_abs_deviation_needs_window_on_curve(self, on_curve_params):
        """Test on-curve parameters without a window are refused."""
        with pytest.raises(RegimeError):
            abs_deviation_scaled(50, on_curve_params)

    def test_conditional_abs_deviation(self, on_curve_params):
        """Test the conditional form is finite and positive on the curve."""
        grid = EdgeDensityGrid.build(400, Lattice.EDGE)
        u_high = classify_phase(on_curve_params).maximizers[1].u
        window = ConditionalWindow.around(grid, u_high, 0.25)
        value = abs_deviation_scaled(400, on_curve_params, window=window)
        assert 0.0 < value < 5.0


@pytest.mark.unit
class TestLaplaceCheck:
    """Test the Laplace approximation of ln Z."""

    def test_origin_discrepancy_small(self, origin_params):
        """Test the discrepancy at (0, 0), n = 500 is negligible."""
        check = laplace_check(500, origin_params)
        assert abs(check.discrepancy) < 1e-3

    def test_discrepancy_trend(self, uniqueness_params):
        """Test |discrepancy| shrinks as n grows."""
        values = [abs(laplace_check(n, uniqueness_params).discrepancy) for n in (100, 200, 400)]
        assert values[-1] < values[0]

    def test_two_window_sums_on_curve(self, on_curve_params):
        """Test both window sums are positive and their Riemann forms approach 2 sqrt(pi / s_i)."""
        check = laplace_check(1000, on_curve_params)
        assert len(check.window_sums) == 2
        assert all(value > 0 for value in check.window_sums)
        for riemann, limit in zip(check.riemann_window_sums, check.limiting_window_sums):
            assert riemann == pytest.approx(limit, rel=0.05)

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [500, 1000, 2000])
    def test_on_curve_sums_finite(self, on_curve_params, n):
        """Test both on-curve window sums stay finite and the log partitions agree."""
        check = laplace_check(n, on_curve_params)
        assert all(math.isfinite(value) and value > 0 for value in check.window_sums)
        assert math.isfinite(check.log_partition_laplace)
        assert abs(check.discrepancy) < 1e-2
        for riemann, limit in zip(check.riemann_window_sums, check.limiting_window_sums):
            assert riemann == pytest.approx(limit, rel=0.02)

    def test_small_n_refused(self, origin_params):
        """Test laplace_check needs a reasonable n."""
        with pytest.raises(DomainError):
            laplace_check(10, origin_params)


@pytest.mark.unit
class TestMixtureAndConditionalMoments:
    """Test masses on the curve and conditional variances."""

    def test_masses_partition(self, on_curve_params):
        """Test lower + upper + complement = 1."""
        portrait = classify_phase(on_curve_params)
        masses = mixture_masses(exact_distribution(400, on_curve_params, Lattice.EDGE), portrait, 0.1)
        assert masses.lower + masses.upper + masses.complement == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.slow
    def test_ratio_approaches_kappa(self, on_curve_params):
        """Test the lower-window share is within 0.05 of kappa at n = 2000."""
        portrait = classify_phase(on_curve_params)
        masses = mixture_masses(exact_distribution(2000, on_curve_params, Lattice.EDGE), portrait, 0.1)
        assert masses.ratio == pytest.approx(portrait.kappa, abs=0.05)

    def test_ratio_survives_underflow(self, on_curve_params):
        """Test the window ratio stays finite when both window masses underflow to zero."""
        portrait = classify_phase(on_curve_params)
        dist = exact_distribution(400, on_curve_params, Lattice.EDGE)
        reference = mixture_masses(dist, portrait, 0.1)
        x = dist.grid.values
        in_windows = np.zeros(len(x), dtype=bool)
        for center in reference.centers:
            in_windows |= np.abs(x - center) <= 0.1
        log_weights = np.where(in_windows, dist.log_weights - 2000.0, dist.log_weights)
        log_partition = float(logsumexp(log_weights))
        starved = replace(dist, log_weights=log_weights, log_partition=log_partition,
                          probabilities=np.exp(log_weights - log_partition))
        masses = mixture_masses(starved, portrait, 0.1)
        assert masses.lower == 0.0 and masses.upper == 0.0
        assert masses.ratio == pytest.approx(reference.ratio, rel=1e-9)

    def test_windows_without_lattice_points(self, on_curve_params):
        """Test windows holding no lattice point raise instead of dividing by zero."""
        portrait = classify_phase(on_curve_params)
        with pytest.raises(EmptyWindowError):
            mixture_masses(exact_distribution(10, on_curve_params, Lattice.EDGE), portrait, 1e-9)

    def test_overlapping_windows_refused(self, on_curve_params):
        """Test 2 epsilon >= u2 - u1 is a domain error."""
        portrait = classify_phase(on_curve_params)
        with pytest.raises(DomainError):
            mixture_masses(exact_distribution(50, on_curve_params), portrait, 0.4)

    def test_masses_need_curve(self, uniqueness_params):
        """Test a unique maximizer has no mixture."""
        with pytest.raises(RegimeError):
            mixture_masses(exact_distribution(50, uniqueness_params), classify_phase(uniqueness_params))

    def test_conditional_variance_uniqueness(self, uniqueness_params):
        """Test L Var(x | window) approaches v(1, 0)."""
        moments = conditional_clt_variance(1000, uniqueness_params)
        expected = limiting_variance(classify_phase(uniqueness_params))
        assert moments.scaled_variance == pytest.approx(expected, rel=0.05)

    @pytest.mark.slow
    def test_conditional_variance_on_curve(self, on_curve_params):
        """Test the upper-maximizer conditional variance at n = 2000 within 5% of v_2."""
        moments = conditional_clt_variance(2000, on_curve_params, which=1)
        expected = limiting_variance(classify_phase(on_curve_params), which=1)
        assert moments.scaled_variance == pytest.approx(expected, rel=0.05)


@pytest.mark.unit
class TestLargeDeviations:
    """Test the exact tail exponent against the rate function."""

    def test_rate_infimum_origin(self, origin_params):
        """Test the infimum over |x - 1/2| >= 0.1 is attained at 0.6."""
        point = large_deviation_profile(200, origin_params, 0.1)
        assert point.rate_infimum == pytest.approx(float(rate_function(0.6, origin_params)), abs=1e-9)

    def test_exponent_approaches_rate(self, origin_params):
        """Test -(1/2L) ln P is within 5% of the rate infimum at n = 500."""
        point = large_deviation_profile(500, origin_params, 0.1)
        assert point.exact_exponent == pytest.approx(point.rate_infimum, rel=0.05)

    def test_needs_unique_maximizer(self, on_curve_params):
        """Test on-curve parameters are refused."""
        with pytest.raises(RegimeError):
            large_deviation_profile(100, on_curve_params, 0.1)
