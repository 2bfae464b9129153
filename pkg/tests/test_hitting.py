import numpy as np
import pytest

from ergolab.errors import AllCensoredError, InvalidBetaError
from ergolab.hitting import (
    BCCounter,
    HittingRecord,
    bc_counter_series,
    default_window,
    estimate_R,
    hitting_time,
    ladder_hitting_times,
    power_law_radii,
)
from ergolab.observables import DistToPoint, RadiusLadder
from ergolab.points import FractionPoint
from ergolab.systems import CircleRotation, Doubling


class IdentitySystem:
    """Test double: the identity map on the circle."""

    dim = 1
    exact = True

    def step(self, p):
        return p

    def orbit_window(self, p, n):
        return p

    def orbit_blocks(self, p, start, stop, block=4096):
        x = p.float_coords()
        n = start
        while n < stop:
            size = min(block, stop - n)
            yield n, np.tile(x, (size, 1))
            n += size


def frac_point(*coords):
    return FractionPoint(tuple(coords))


class TestHittingTime:
    def test_doubling_exact_fraction_orbit(self):
        # oracle: 1/5 -> 2/5 -> 4/5; dist(2/5, 0) = 0.4, dist(4/5, 0) = 0.2
        sys = Doubling(engine="fraction")
        rec = hitting_time(sys, frac_point("1/5"), DistToPoint((0.0,)), 0.25, cap=100)
        assert rec.tau == 2 and not rec.censored

    def test_periodic_orbit_censors(self):
        sys = Doubling(engine="fraction")
        rec = hitting_time(sys, frac_point("1/3"), DistToPoint((0.0,)), 0.05, cap=100)
        assert rec.censored and rec.cap == 100 and rec.steps_used == 100

    def test_budget_exhaustion_is_distinct_from_censoring(self):
        # a dyadic point on the fraction engine cannot honor a long scan;
        # that surfaces as a budget error, never as a censored record
        from ergolab.errors import BudgetExhaustedError

        sys = Doubling(engine="fraction")
        with pytest.raises(BudgetExhaustedError):
            hitting_time(sys, frac_point("3/8"), DistToPoint((0.0,)), 0.01, cap=100)

    def test_rotation_quarter(self):
        # oracle: 0 -> 1/4 -> 1/2
        sys = CircleRotation.from_fraction("1/4")
        rec = hitting_time(sys, frac_point(0), DistToPoint((0.5,)), 0.1, cap=100)
        assert rec.tau == 2

    def test_time_zero_never_counts(self):
        # start already inside the target; tau still counts from n = 1
        sys = CircleRotation.from_fraction("1/4")
        rec = hitting_time(sys, frac_point("1/2"), DistToPoint((0.5,)), 0.1, cap=100)
        assert rec.tau == 4

    def test_record_validation(self):
        with pytest.raises(ValueError):
            HittingRecord(point_id=0, radius=0.1, tau=0, cap=10, steps_used=1)


class TestLadderScan:
    def test_matches_single_rung_calls(self):
        sys = Doubling()
        f = DistToPoint((0.375,))
        ladder = RadiusLadder.dyadic(2, 9)
        for idx in range(4):
            x = sys.sample_invariant(seed=42, count=4)[idx]
            recs = ladder_hitting_times(sys, x, f, ladder, cap=200_000)
            for rec in recs:
                single = hitting_time(sys, x, f, rec.radius, cap=200_000)
                assert single.tau == rec.tau

    def test_nesting_monotonicity(self):
        sys = Doubling()
        f = DistToPoint((0.375,))
        ladder = RadiusLadder.dyadic(2, 10)
        for x in sys.sample_invariant(seed=7, count=8):
            recs = ladder_hitting_times(sys, x, f, ladder, cap=500_000)
            taus = [r.tau for r in recs if r.tau is not None]
            assert all(a <= b for a, b in zip(taus, taus[1:]))


class TestEstimateR:
    def test_constant_hits_give_zero_slopes(self):
        # f(Tx) = 0: tau = 1 at every rung
        sys = CircleRotation.from_fraction("1/2")
        est = estimate_R(sys, frac_point(0), DistToPoint((0.5,)),
                         RadiusLadder.dyadic(3, 10), cap=50)
        assert est.r_upper == est.r_lower == est.exponent == 0.0
        assert est.censor_fraction == 0.0

    def test_doubling_typical_point(self):
        sys = Doubling()
        f = DistToPoint((0.375,))
        ladder = RadiusLadder.dyadic(3, 14)
        x = sys.sample_invariant(seed=2024, count=1)[0]
        est = estimate_R(sys, x, f, ladder, cap=50 * (1 << 13))
        assert 0.8 <= est.r_lower <= est.r_upper <= 1.2
        assert est.censor_fraction == 0.0

    def test_all_censored(self):
        sys = Doubling(engine="fraction")
        with pytest.raises(AllCensoredError):
            estimate_R(sys, frac_point("1/3"), DistToPoint((0.0,)),
                       RadiusLadder.dyadic(5, 10), cap=50)

    def test_censored_rungs_reported(self):
        sys = Doubling(engine="fraction")
        # periodic orbit at distance 1/3: rungs above 1/3 hit, below censor
        est = estimate_R(sys, frac_point("1/3"), DistToPoint((0.0,)),
                         RadiusLadder((0.4, 0.34, 0.05, 0.04)), cap=100)
        assert est.censor_fraction == pytest.approx(0.5)

    def test_default_window_rule(self):
        assert default_window(12) == 11
        assert default_window(23) == 21
        assert default_window(4) == 4

    def test_liouville_rotation_upper_exponent_excess(self):
        # the rotation angle admits rational approximations of quality
        # q^-3 and beyond (denominators 1, 9, 100, 9909, ..., 1e6, ~1e18),
        # so hitting times jump across convergent scales; narrow windows on
        # a refined deep ladder expose an upper exponent far above d = 1
        sys = CircleRotation.liouville()
        f = DistToPoint((0.375,))
        ladder = RadiusLadder.dyadic(3, 20, per_octave=2)
        ups = []
        for x in sys.sample_invariant(seed=4, count=20):
            est = estimate_R(sys, x, f, ladder, cap=2_000_000, window=4)
            ups.append(est.r_upper)
        assert np.median(ups) >= 2.0
        assert min(ups) >= 2.0  # at this depth every start sees the jump


class TestBorelCantelliCounter:
    def test_identity_double_counts_everything(self):
        sys = IdentitySystem()
        x = frac_point("3/8")
        f = DistToPoint((0.375,))  # f(x) = 0 on the whole orbit
        series = bc_counter_series(
            sys, x, f, beta=0.5, k_max=50,
            measures=lambda r: min(2.0 * r, 1.0), d_upper=1.0,
        )
        final = series[-1]
        assert final.k == 50 and final.z == 51
        expected = sum(min(2.0 * (i ** -0.5 if i else 1.0), 1.0) for i in range(51))
        assert final.expected == pytest.approx(expected)
        assert final.ratio == pytest.approx(51 / expected)

    def test_expected_counter_closed_form(self):
        # independent oracle: E(Z_k) = sum of min(2 i^-1/2, 1); every term
        # through i = 4 clamps to 1, later terms do not
        radii = power_law_radii(0.5, 10)
        mu = [min(2.0 * r, 1.0) for r in radii]
        assert mu[:5] == [1.0, 1.0, 1.0, 1.0, 1.0]
        ez4 = sum(mu[:5])
        assert ez4 == pytest.approx(5.0)
        ez10 = sum(mu)
        oracle = 5.0 + sum(2.0 * i ** -0.5 for i in range(5, 11))
        assert ez10 == pytest.approx(oracle)

    def test_doubling_ratio_near_one(self):
        sys = Doubling()
        f = DistToPoint((0.375,))
        x = sys.sample_invariant(seed=5, count=1)[0]
        series = bc_counter_series(sys, x, f, beta=0.5, k_max=20_000)
        final = series[-1]
        assert 0.6 <= final.ratio <= 1.4
        ks = [c.k for c in series]
        zs = [c.z for c in series]
        assert ks == sorted(ks)
        assert zs == sorted(zs)  # Z_k non-decreasing

    def test_expected_strictly_increasing(self):
        sys = Doubling()
        f = DistToPoint((0.375,))
        x = sys.sample_invariant(seed=6, count=1)[0]
        series = bc_counter_series(sys, x, f, beta=0.5, k_max=500)
        es = [c.expected for c in series]
        assert all(a < b for a, b in zip(es, es[1:]))

    def test_invalid_beta(self):
        sys = Doubling()
        f = DistToPoint((0.375,))
        x = sys.sample_invariant(seed=0, count=1)[0]
        with pytest.raises(InvalidBetaError):
            bc_counter_series(sys, x, f, beta=1.0, k_max=100)
        with pytest.raises(InvalidBetaError):
            bc_counter_series(sys, x, f, beta=-0.1, k_max=100)

    def test_mc_measures_close_to_exact(self):
        sys = Doubling()
        f = DistToPoint((0.375,))
        x = sys.sample_invariant(seed=9, count=1)[0]
        exact = bc_counter_series(sys, x, f, beta=0.5, k_max=300)
        mc = bc_counter_series(sys, x, f, beta=0.5, k_max=300,
                               measures="mc", seed=1, n_samples=400_000)
        assert mc[-1].z == exact[-1].z
        assert mc[-1].expected == pytest.approx(exact[-1].expected, rel=0.05)

    def test_counter_bounds_validated(self):
        with pytest.raises(ValueError):
            BCCounter(k=3, z=5, expected=1.0, ratio=5.0)
