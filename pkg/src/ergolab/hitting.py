"""Hitting times into sublevel targets, power-law exponent fits, and the
shrinking-target counter with its expectation.

Hitting time is the first n >= 1 with f(T^n x) <= r; n = 0 never counts.
Because the sublevels nest, one orbit pass serves a whole radius ladder: a
scan records the first passage below every rung it crosses.  Censored rungs
(no hit up to the cap) are excluded from slope fits and reported as a
censor fraction; fitted exponents are then lower bounds only.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllCensoredError, InvalidBetaError
from .observables import exact_dimension, exact_measure, fit_line, sliding_slopes
from .systems import invariant_sample_floats

DEFAULT_SCAN_BLOCK = 1 << 13
WINDOW_FRACTION = 0.9


@dataclass(frozen=True)
class HittingRecord:
    """One (point, radius) hitting observation; tau None means censored."""

    point_id: int
    radius: float
    tau: int | None
    cap: int
    steps_used: int

    def __post_init__(self):
        if self.tau is not None and self.tau < 1:
            raise ValueError("hitting times count from n = 1")

    @property
    def censored(self):
        return self.tau is None


def ladder_hitting_times(system, x, f, ladder, cap, point_id=0, block=DEFAULT_SCAN_BLOCK):
    """Hitting records for every rung of a decreasing ladder, one orbit pass.

    The scan walks T^n x for n = 1..cap; whenever the observable dips below
    the radius of the deepest rung not yet hit, it assigns that first-passage
    time to every rung newly covered.  Records come back in rung order and
    are non-decreasing in tau by construction.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    radii = list(ladder)
    taus = [None] * len(radii)
    next_rung = 0
    steps = 0
    for n0, coords in system.orbit_blocks(x, 1, cap + 1, block=block):
        vals = f.values(coords)
        steps = n0 + len(vals) - 1
        while next_rung < len(radii):
            hits = np.flatnonzero(vals <= radii[next_rung])
            if hits.size == 0:
                break
            tau = n0 + int(hits[0])
            v = vals[hits[0]]
            while next_rung < len(radii) and v <= radii[next_rung]:
                taus[next_rung] = tau
                next_rung += 1
            vals = vals[hits[0]:]
            n0 = tau
        if next_rung >= len(radii):
            break
    return [
        HittingRecord(point_id=point_id, radius=r, tau=t, cap=cap,
                      steps_used=t if t is not None else cap)
        for r, t in zip(radii, taus)
    ]


def hitting_time(system, x, f, r, cap, point_id=0, block=DEFAULT_SCAN_BLOCK):
    """First n in [1, cap] with f(T^n x) <= r, else a censored record."""
    return ladder_hitting_times(system, x, f, [float(r)], cap, point_id, block)[0]


@dataclass(frozen=True)
class ExponentEstimate:
    """Sliding-window slopes of log tau against -log r for one start point.

    ``exponent`` is the slope over the full usable window; upper/lower are
    the extreme sliding-window slopes.  When any rung was censored the
    estimates are lower bounds only.
    """

    r_upper: float
    r_lower: float
    exponent: float
    pairs: tuple  # of (-log r, log tau) over uncensored rungs
    censor_fraction: float

    def __post_init__(self):
        if self.r_lower > self.r_upper + 1e-9:
            raise ValueError("window extremes out of order")


def default_window(n_usable):
    return max(4, math.ceil(WINDOW_FRACTION * n_usable))


def estimate_R(system, x, f, ladder, cap, window=None, point_id=0, records=None):
    """Hitting-exponent estimate over a radius ladder for one start point.

    Censored rungs are dropped before fitting.  The default window spans
    ceil(0.9 m) of the m usable rungs, wide enough to tame the log-scale
    noise of single hitting times while keeping distinct windows for the
    lim sup / lim inf split.
    """
    if records is None:
        records = ladder_hitting_times(system, x, f, ladder, cap, point_id)
    taus = [rec.tau for rec in records]
    # nesting makes tau non-increasing in r; violations would be a scan bug
    usable_taus = [t for t in taus if t is not None]
    assert all(a <= b for a, b in zip(usable_taus, usable_taus[1:]))
    usable = [(rec.radius, rec.tau) for rec in records if rec.tau is not None]
    if not usable:
        raise AllCensoredError("every rung censored at the cap")
    censor_fraction = 1.0 - len(usable) / len(records)
    x_pairs = np.array([-math.log(r) for r, _ in usable])
    y_pairs = np.array([math.log(t) for _, t in usable])
    pairs = tuple(zip(x_pairs.tolist(), y_pairs.tolist()))
    if len(usable) == 1:
        return ExponentEstimate(0.0, 0.0, 0.0, pairs, censor_fraction)
    width = window or default_window(len(usable))
    width = min(max(width, 2), len(usable))
    slopes = sliding_slopes(x_pairs, y_pairs, width)
    exponent, _, _ = fit_line(x_pairs, y_pairs)
    return ExponentEstimate(
        r_upper=float(slopes.max()),
        r_lower=float(slopes.min()),
        exponent=exponent,
        pairs=pairs,
        censor_fraction=censor_fraction,
    )


@dataclass(frozen=True)
class BCCounter:
    """Shrinking-target hit counter at index k with its expected value."""

    k: int
    z: int
    expected: float
    ratio: float

    def __post_init__(self):
        if not 0 <= self.z <= self.k + 1:
            raise ValueError("counter outside [0, k+1]")


def power_law_radii(beta, k_max):
    """Radii r_i = i^-beta for i = 0..k_max with the r_0 := 1 convention."""
    tail = np.arange(1, k_max + 1, dtype=float) ** -beta
    return np.concatenate([[1.0], tail])


def bc_counter_series(
    system, x, f, beta, k_max, measures="exact", seed=0, n_samples=200_000,
    d_upper=None, checkpoints=None, block=DEFAULT_SCAN_BLOCK,
):
    """Cumulative counter Z_k of orbit entries into the shrinking targets
    {f <= i^-beta} at time i, with E(Z_k) = sum of target measures.

    beta must satisfy 0 < beta < 1/d_upper, where d_upper is the upper
    sublevel exponent (closed form when available, else estimated or passed
    explicitly).  The i = 0 rung uses r_0 = 1 with its measure clamped to
    the full space.

    measures: "exact" (closed form required), "mc" (empirical sublevel law
    from one invariant sample), or a callable r -> measure.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if d_upper is None:
        d_upper = exact_dimension(system, f)
    if d_upper is None:
        raise InvalidBetaError(
            "no closed-form sublevel exponent: pass d_upper explicitly"
        )
    if d_upper > 0 and not 0 < beta < 1.0 / d_upper:
        raise InvalidBetaError(f"beta must lie in (0, {1.0 / d_upper}); got {beta}")
    if beta <= 0:
        raise InvalidBetaError("beta must be positive")

    radii = power_law_radii(beta, k_max)
    mu = _measures_for(system, f, radii, measures, seed, n_samples)

    hits = np.empty(k_max + 1, dtype=bool)
    for n0, coords in system.orbit_blocks(x, 0, k_max + 1, block=block):
        vals = f.values(coords)
        hits[n0:n0 + len(vals)] = vals <= radii[n0:n0 + len(vals)]
    z = np.cumsum(hits)
    expected = np.cumsum(mu)

    if checkpoints is None:
        checkpoints = default_checkpoints(k_max)
    out = []
    for k in checkpoints:
        out.append(BCCounter(k=int(k), z=int(z[k]), expected=float(expected[k]),
                             ratio=float(z[k] / expected[k])))
    return out


def default_checkpoints(k_max):
    if k_max <= 1000:
        return list(range(k_max + 1))
    marks = np.unique(np.geomspace(1, k_max, 200).astype(int))
    return sorted(set([0, *marks.tolist(), k_max]))


def _measures_for(system, f, radii, measures, seed, n_samples):
    if callable(measures):
        return np.array([min(max(measures(r), 0.0), 1.0) for r in radii])
    if measures == "exact":
        out = np.empty(len(radii))
        for i, r in enumerate(radii):
            m = exact_measure(system, f, r)
            if m is None:
                raise InvalidBetaError(
                    f"no closed-form measure at r={r}; use measures='mc'"
                )
            out[i] = m
        return out
    if measures == "mc":
        coords = invariant_sample_floats(system, seed, n_samples)
        vals = np.sort(f.values(coords))
        counts = np.searchsorted(vals, radii, side="right")
        return counts / n_samples
    raise ValueError("measures must be 'exact', 'mc', or a callable")
