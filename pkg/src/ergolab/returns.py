"""Return-time statistics in sublevel targets.

Starts are drawn from the invariant measure conditioned on the target
(direct draws where the target has closed form, rejection sampling
otherwise); their first-return times feed the rescaled survival curve
g(t) = fraction of starts with tau >= t / mu(S_r), the sup distance of that
curve from exp(-t), and the long-return indicator
mu{x in S_r : tau > l / mu(S_r)} / mu(S_r).

Conventions: curves use tau >= threshold, the long-return set uses a strict
inequality, exactly as defined; the two differ only when the threshold is
attained, which cannot happen for non-integer thresholds.  Returns censored
at the cap stay in the numerator up to t = cap * mu and the curve is flagged
beyond.  The default cap of 100 mean-return times truncates a mass of about
exp(-100) under an exponential law.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import RejectionStallError
from .hitting import ladder_hitting_times
from .observables import DistToPoint, estimate_measure, z_value
from .points import FloatPoint, FractionPoint, ReservoirPoint
from .rand import master_rng, point_rng, subseed
from .reservoir import BitReservoir
from .systems import (
    CircleRotation,
    Doubling,
    ToralAutomorphism,
    invariant_sample_floats,
    is_lebesgue,
)

DEFAULT_T_GRID = tuple(round(0.1 * k, 10) for k in range(51))
STALL_ACCEPTANCE = 1e-6
_STALL_CHECK_AFTER = 2_000_000
_EDGE_GUARD = 2.0 ** -50


def default_cap(mu):
    """Censoring cap: 100 mean return times."""
    return int(math.ceil(100.0 / mu))


def sample_conditioned(system, f, r, seed, count, max_attempts=20_000_000):
    """``count`` points distributed as the invariant measure restricted to
    {f <= r}: direct draws for interval and disc targets under Lebesgue,
    rejection sampling otherwise."""
    if count < 1:
        raise ValueError("count must be >= 1")
    direct = _direct_sampler(system, f, r)
    if direct is not None:
        return direct(seed, count)
    return _rejection_sample(system, f, r, seed, count, max_attempts)


def _direct_sampler(system, f, r):
    if not (is_lebesgue(system) and isinstance(f, DistToPoint)):
        return None
    if f.dim == 1 and isinstance(system, Doubling) and system.engine == "reservoir":
        return lambda seed, count: _interval_reservoir_points(
            f.target[0], min(r, 0.5), seed, count
        )
    if f.dim == 1 and isinstance(system, (Doubling, CircleRotation)):
        bits = system.precision_bits
        return lambda seed, count: _interval_dyadic_points(
            f.target[0], min(r, 0.5), bits, seed, count
        )
    if f.dim == 2 and isinstance(system, ToralAutomorphism) and r <= 0.5:
        return lambda seed, count: _disc_dyadic_points(
            f.target, r, system.precision_bits, seed, count
        )
    return None


def _interval_reservoir_points(center, r, seed, count):
    # The prefix must carry full 64-bit entropy: drawing a float and scaling
    # leaves its low ~11 bits zero, and those zero blocks slide through the
    # observation window and align onto dyadic targets, faking short returns.
    rng = master_rng(subseed(seed, "conditioned-prefix"))
    scale = 1 << 64
    lo = int(math.ceil((center - r + _EDGE_GUARD) * scale))
    hi = int(math.floor((center + r - _EDGE_GUARD) * scale))
    span = hi - lo + 1
    draws = rng.integers(0, span, size=count, dtype=np.uint64)
    points = []
    for i in range(count):
        prefix_int = (lo + int(draws[i])) % scale
        prefix = prefix_int.to_bytes(8, "big")
        points.append(ReservoirPoint(BitReservoir(seed, i, prefix=prefix)))
    return points


def _interval_dyadic_points(center, r, bits, seed, count):
    scale = 1 << bits
    lo = int(math.ceil((center - r + _EDGE_GUARD) * scale))
    hi = int(math.floor((center + r - _EDGE_GUARD) * scale))
    span = hi - lo + 1
    points = []
    for i in range(count):
        rng = point_rng(subseed(seed, "conditioned"), i)
        raw = int.from_bytes(rng.bytes((bits + 7) // 8 + 8), "big")
        num = (lo + raw % span) % scale
        points.append(FractionPoint((_frac(num, scale),)))
    return points


def _frac(num, den):
    from fractions import Fraction

    return Fraction(num, den)


def _disc_dyadic_points(center, r, bits, seed, count):
    # polar draw at float resolution, low-order bits topped up with fresh
    # randomness so the points do not sit on a coarse dyadic sublattice
    scale = 1 << bits
    cx, cy = center
    points = []
    low_bits = bits - 53
    for i in range(count):
        rng = point_rng(subseed(seed, "conditioned"), i)
        u, v = rng.random(2)
        rho = (r - _EDGE_GUARD) * math.sqrt(u)
        theta = 2.0 * math.pi * v
        coords = []
        for c, off in ((cx, rho * math.cos(theta)), (cy, rho * math.sin(theta))):
            head = int(((c + off) % 1.0) * (1 << 53)) % (1 << 53)
            tail = int.from_bytes(rng.bytes((low_bits + 7) // 8), "big") >> (
                ((low_bits + 7) // 8) * 8 - low_bits
            ) if low_bits > 0 else 0
            coords.append(_frac((head << max(low_bits, 0)) | tail, scale))
        points.append(FractionPoint(tuple(coords)))
    return points


def _rejection_sample(system, f, r, seed, count, max_attempts):
    accepted = []
    attempts = 0
    chunk = 65_536
    stream = 0
    while len(accepted) < count:
        coords = invariant_sample_floats(system, subseed(seed, f"rej{stream}"), chunk)
        keep = np.flatnonzero(f.values(coords) <= r)
        for idx in keep:
            accepted.append(FloatPoint(tuple(coords[idx])))
            if len(accepted) == count:
                break
        attempts += chunk
        stream += 1
        if attempts >= _STALL_CHECK_AFTER or attempts >= max_attempts:
            rate = len(accepted) / attempts
            if rate < STALL_ACCEPTANCE:
                raise RejectionStallError(
                    f"acceptance rate {rate:.2e} after {attempts} draws"
                )
            if attempts >= max_attempts and len(accepted) < count:
                raise RejectionStallError(
                    f"only {len(accepted)}/{count} accepted in {max_attempts} draws"
                )
    return accepted


def target_measure(system, f, r, seed, n_samples=200_000):
    """mu(S_r) for curve scaling: exact when available, else Monte Carlo."""
    est = estimate_measure(f, r, system, subseed(seed, "target-measure"), n_samples)
    return est


def _scan_block(mean_return):
    """Orbit block size ~4 mean returns: one block usually settles a point."""
    return int(min(max(64, 4 * mean_return), 1 << 14))


def conditioned_return_times(system, f, r, seed, count, cap, block=None):
    """First-return times of conditioned starts; censored entries hold cap.

    Returns (taus, censored): int64 array and boolean mask, index-aligned
    with sample_conditioned(system, f, r, seed, count).
    """
    points = sample_conditioned(system, f, r, seed, count)
    taus = np.empty(count, dtype=np.int64)
    censored = np.zeros(count, dtype=bool)
    scan_block = block or min(max(256, 4 * cap // 100), 1 << 14)
    for i, p in enumerate(points):
        rec = ladder_hitting_times(system, p, f, [float(r)], cap,
                                   point_id=i, block=scan_block)[0]
        if rec.tau is None:
            taus[i] = cap
            censored[i] = True
        else:
            taus[i] = rec.tau
    return taus, censored


@dataclass(frozen=True)
class ReturnCurve:
    """Empirical rescaled survival function of return times."""

    radius: float
    measure: float
    t_grid: tuple
    g_values: tuple
    sample_count: int
    cap: int
    censored_count: int
    flagged: tuple  # grid points where censoring leaves g an upper bound

    def __post_init__(self):
        g = self.g_values
        if any(b > a + 1e-12 for a, b in zip(g, g[1:])):
            raise ValueError("survival curve must be non-increasing")
        if any(not 0.0 <= v <= 1.0 for v in g):
            raise ValueError("survival values lie in [0, 1]")

    def value_at(self, t):
        if t not in self.t_grid:
            raise KeyError(f"t={t} not on the grid")
        return self.g_values[self.t_grid.index(t)]


def return_curve(system, f, r, seed, count, t_grid=DEFAULT_T_GRID,
                 cap=None, measure=None):
    """Empirical g(t) = fraction of conditioned starts with tau >= t/mu."""
    mu = measure if measure is not None else target_measure(system, f, r, seed).estimate
    if mu <= 0:
        raise ValueError("target has vanishing measure estimate")
    cap = cap or default_cap(mu)
    taus, censored = conditioned_return_times(system, f, r, seed, count, cap,
                                              block=_scan_block(1.0 / mu))
    grid = tuple(float(t) for t in t_grid)
    g = []
    flagged = []
    n_censored = int(censored.sum())
    for t in grid:
        threshold = t / mu
        hits = int(np.count_nonzero((taus >= threshold) | censored))
        g.append(hits / len(taus))
        flagged.append(threshold > cap and n_censored > 0)
    return ReturnCurve(
        radius=float(r),
        measure=float(mu),
        t_grid=grid,
        g_values=tuple(g),
        sample_count=count,
        cap=int(cap),
        censored_count=n_censored,
        flagged=tuple(flagged),
    )


def exp_law_distance(curve):
    """sup over the grid of |g(t) - exp(-t)|."""
    return max(
        abs(g - math.exp(-t)) for t, g in zip(curve.t_grid, curve.g_values)
    )


@dataclass(frozen=True)
class TrivialityIndicator:
    """Conditioned mass of returns longer than l mean-return times."""

    l_value: float
    radius: float
    value: float
    half_width: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("indicator is a probability")


def triviality_indicator(system, f, r, l_value, seed, count, cap=None,
                         measure=None, level=0.95):
    """Empirical mu{x in S_r : tau > l/mu} / mu(S_r).

    Shares its samples with return_curve for equal (seed, count, cap), so
    the indicator at l equals the curve at t = l whenever l/mu is not an
    attained integer.
    """
    mu = measure if measure is not None else target_measure(system, f, r, seed).estimate
    if mu <= 0:
        raise ValueError("target has vanishing measure estimate")
    cap = cap or default_cap(mu)
    taus, censored = conditioned_return_times(system, f, r, seed, count, cap,
                                              block=_scan_block(1.0 / mu))
    threshold = l_value / mu
    hits = int(np.count_nonzero((taus > threshold) | censored))
    p = hits / len(taus)
    smoothed = (hits + 0.5) / (len(taus) + 1.0)
    hw = z_value(level) * math.sqrt(smoothed * (1.0 - smoothed) / len(taus))
    return TrivialityIndicator(
        l_value=float(l_value), radius=float(r), value=p, half_width=hw
    )


def kac_statistic(system, f, r, seed, count, cap=None, measure=None):
    """(mean return time * mu, stderr of that product) over the sample.

    Kac's lemma makes the expectation exactly 1 for ergodic systems;
    censored returns enter at the cap, biasing the mean down by at most the
    censored tail mass.
    """
    mu = measure if measure is not None else target_measure(system, f, r, seed).estimate
    cap = cap or default_cap(mu)
    taus, _ = conditioned_return_times(system, f, r, seed, count, cap,
                                       block=_scan_block(1.0 / mu))
    scaled = taus * mu
    return float(scaled.mean()), float(scaled.std(ddof=1) / math.sqrt(len(scaled)))


def count_jump_clusters(curve, min_drop=0.0):
    """Number of maximal runs of consecutive grid steps where g decreases.

    A pure step-function limit (rotations) shows as a handful of clusters;
    an exponential limit decreases at almost every grid step.
    """
    drops = [
        b < a - min_drop
        for a, b in zip(curve.g_values, curve.g_values[1:])
    ]
    clusters = 0
    prev = False
    for d in drops:
        if d and not prev:
            clusters += 1
        prev = d
    return clusters
