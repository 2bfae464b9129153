import math

import pytest

from ergolab.errors import DegenerateSeriesError, NoDecayFitError
from ergolab.mixing import (
    CorrelationSeries,
    DECAY_EXPONENTIAL,
    DECAY_INCONCLUSIVE,
    DECAY_POLYNOMIAL,
    DecayFit,
    constant_function,
    cosine_wave,
    doubling_autocovariance_mix,
    dyadic_harmonic_mix,
    estimate_correlation,
    fit_decay,
    from_observable,
    intersection_bound_check,
)
from ergolab.observables import DistToPoint, RadiusLadder
from ergolab.systems import Doubling

DOUBLING = Doubling()


def synthetic_series(values, lags=None, hw=1e-12):
    values = tuple(values)
    lags = tuple(lags or range(1, len(values) + 1))
    return CorrelationSeries(
        lags=lags,
        values=values,
        half_widths=tuple(hw for _ in values),
        phi_norm=(1.0, 1.0),
        psi_norm=(1.0, 1.0),
    )


class TestFitDecay:
    def test_exact_geometric_series(self):
        fit = fit_decay(synthetic_series([2.0 ** -n for n in range(1, 13)]))
        assert fit.kind == DECAY_EXPONENTIAL
        assert fit.rate == pytest.approx(math.log(2), rel=0.05)
        assert fit.envelope(3) == pytest.approx(2.0 ** -3, rel=0.05)

    def test_exact_power_series(self):
        fit = fit_decay(synthetic_series([float(n) ** -2 for n in range(1, 13)]))
        assert fit.kind == DECAY_POLYNOMIAL
        assert fit.rate == pytest.approx(2.0, rel=0.05)

    def test_all_noise_is_inconclusive(self):
        series = synthetic_series([1e-6] * 10, hw=1e-3)
        assert fit_decay(series).kind == DECAY_INCONCLUSIVE

    def test_too_few_usable_lags_degenerate(self):
        # four clear lags, the rest in the noise
        values = [0.5, 0.25, 0.125, 0.0625] + [1e-9] * 6
        with pytest.raises(DegenerateSeriesError):
            fit_decay(synthetic_series(values, hw=1e-6))

    def test_growing_series_inconclusive(self):
        fit = fit_decay(synthetic_series([0.1 * 1.5 ** n for n in range(8)]))
        assert fit.kind == DECAY_INCONCLUSIVE


class TestEstimateCorrelation:
    def test_fourier_orthogonality_at_lag_one(self):
        phi = cosine_wave(1)
        series = estimate_correlation(DOUBLING, phi, phi, [1], seed=3, n_samples=40_000)
        assert series.values[0] <= series.half_widths[0]

    def test_constant_observable_gives_zero(self):
        phi = cosine_wave(1)
        psi = constant_function(0.7)
        series = estimate_correlation(DOUBLING, phi, psi, [1, 5, 9], seed=0, n_samples=5_000)
        # zero in expectation; centering leaves only float residue
        assert all(v <= 1e-12 for v in series.values)

    def test_dyadic_mix_matches_closed_form(self):
        # oracle: autocovariance (2/3) 2^-n (1 - 4^(n-depth-1)), derived from
        # the Fourier expansion; the estimator must land within its CI
        depth = 10
        phi = dyadic_harmonic_mix(depth)
        lags = list(range(1, 9))
        series = estimate_correlation(DOUBLING, phi, phi, lags, seed=11, n_samples=200_000)
        for lag, value, hw in zip(series.lags, series.values, series.half_widths):
            want = doubling_autocovariance_mix(depth, lag)
            assert abs(value - want) <= 2.5 * hw, lag

    def test_distance_observable_correlations_vanish(self):
        # triangle waves have only odd harmonics, which the doubling map
        # pushes onto even ones: the true covariance is 0 at every lag
        f = from_observable(DistToPoint((0.375,)))
        lags = list(range(25, 31))
        series = estimate_correlation(DOUBLING, f, f, lags, seed=5, n_samples=100_000)
        for v, hw in zip(series.values, series.half_widths):
            assert v <= 2.0 * hw

    def test_cauchy_schwarz_norm_bound(self):
        phi = dyadic_harmonic_mix(6)
        series = estimate_correlation(DOUBLING, phi, phi, [1, 2, 3], seed=2, n_samples=10_000)
        bound = phi.norm * phi.norm
        for v, hw in zip(series.values, series.half_widths):
            assert v <= bound + hw

    def test_seed_determinism(self):
        phi = cosine_wave(2)
        a = estimate_correlation(DOUBLING, phi, phi, [1, 4], seed=9, n_samples=5_000)
        b = estimate_correlation(DOUBLING, phi, phi, [1, 4], seed=9, n_samples=5_000)
        assert a.values == b.values

    def test_generic_orbit_path(self):
        from ergolab.systems import CircleRotation

        phi = cosine_wave(1)
        series = estimate_correlation(
            CircleRotation.golden(), phi, phi, [1, 2], seed=1, n_samples=2_000
        )
        # rotation correlations of a pure mode keep modulus 1/2 cos(2 pi n a)
        alpha = float(CircleRotation.golden().alpha)
        for lag, v, hw in zip(series.lags, series.values, series.half_widths):
            want = abs(0.5 * math.cos(2 * math.pi * lag * alpha))
            assert abs(v - want) <= 3 * hw

    def test_reseeded_estimates_agree(self):
        # corpus-level symmetry: independent seeds agree within joint CIs
        phi = dyadic_harmonic_mix(8)
        agree = 0
        for s in range(20):
            a = estimate_correlation(DOUBLING, phi, phi, [2], seed=100 + s, n_samples=20_000)
            b = estimate_correlation(DOUBLING, phi, phi, [2], seed=900 + s, n_samples=20_000)
            if abs(a.values[0] - b.values[0]) <= a.half_widths[0] + b.half_widths[0]:
                agree += 1
        assert agree >= 18

    def test_sample_floor(self):
        with pytest.raises(ValueError):
            estimate_correlation(DOUBLING, cosine_wave(1), cosine_wave(1), [1], 0, 100)


@pytest.fixture(scope="module")
def decay():
    phi = dyadic_harmonic_mix(10)
    series = estimate_correlation(DOUBLING, phi, phi, list(range(1, 9)),
                                  seed=21, n_samples=300_000)
    fit = fit_decay(series)
    assert fit.kind == DECAY_EXPONENTIAL
    return fit


class TestIntersectionBound:

    def test_bound_holds_for_separated_pair(self, decay):
        f = DistToPoint((0.375,))
        ladder = RadiusLadder.dyadic(3, 13)
        lhs, rhs = intersection_bound_check(
            DOUBLING, f, ladder, k=8, j=3, seed=4, n_samples=100_000, decay=decay
        )
        assert lhs.estimate <= rhs + lhs.half_width

    def test_far_separation_approaches_product(self, decay):
        f = DistToPoint((0.375,))
        ladder = RadiusLadder((0.4, 0.3, 0.22, 0.17, 0.12, 0.1, 0.08, 0.06,
                               0.05, 0.04, 0.03, 0.025, 0.02, 0.016, 0.012,
                               0.01, 0.008, 0.007, 0.006, 0.005, 0.004,
                               0.0035, 0.003, 0.0025, 0.002, 0.0017))
        k, j = 25, 2
        lhs, rhs = intersection_bound_check(
            DOUBLING, f, ladder, k=k, j=j, seed=8, n_samples=200_000, decay=decay
        )
        mu_k = min(2 * ladder.radii[k], 1.0)
        mu_j = min(2 * ladder.radii[j], 1.0)
        assert abs(lhs.estimate - mu_k * mu_j) <= 3 * lhs.half_width + 1e-4
        assert lhs.estimate <= rhs + lhs.half_width

    def test_full_space_rung_containment(self, decay):
        f = DistToPoint((0.375,))
        ladder = RadiusLadder((0.6, 0.5, 0.1, 0.05, 0.025, 0.0125))
        lhs, _ = intersection_bound_check(
            DOUBLING, f, ladder, k=4, j=1, seed=2, n_samples=50_000, decay=decay
        )
        mu_prev_k = min(2 * ladder.radii[3], 1.0)
        assert lhs.estimate <= mu_prev_k + lhs.half_width

    def test_requires_decay_fit(self):
        f = DistToPoint((0.375,))
        with pytest.raises(NoDecayFitError):
            intersection_bound_check(
                DOUBLING, f, RadiusLadder.dyadic(3, 10), k=4, j=2, seed=0,
                n_samples=1_000,
                decay=DecayFit(DECAY_INCONCLUSIVE, None, None, (), None),
            )

    def test_index_validation(self, decay):
        f = DistToPoint((0.375,))
        with pytest.raises(ValueError):
            intersection_bound_check(DOUBLING, f, RadiusLadder.dyadic(3, 10),
                                     k=2, j=2, seed=0, n_samples=1000, decay=decay)
        with pytest.raises(ValueError):
            intersection_bound_check(DOUBLING, f, RadiusLadder.dyadic(3, 6),
                                     k=9, j=2, seed=0, n_samples=1000, decay=decay)


def test_series_validation():
    with pytest.raises(ValueError):
        CorrelationSeries((3, 2), (0.1, 0.1), (0.0, 0.0), (1, 1), (1, 1))
    with pytest.raises(ValueError):
        CorrelationSeries((1, 2), (-0.1, 0.1), (0.0, 0.0), (1, 1), (1, 1))
