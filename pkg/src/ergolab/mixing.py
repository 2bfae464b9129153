"""Correlation estimation for Lipschitz observables, decay-rate fits, and a
numerical consistency check of the sublevel intersection bound.

Correlation here means Cov(phi o T^n, psi) estimated over invariant samples.
Observable norms follow the sup + Lipschitz convention, with the two terms
recorded separately.  The decay fit compares an exponential model against a
power law on the lags that clear the noise floor (3x the half-width); the
fitted envelope, inflated by its residual, stands in for the unknowable true
decay function when bounding intersection measures.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError, NoDecayFitError
from .observables import estimate_measure, fit_line, z_value
from .rand import master_rng, subseed
from .reservoir import bulk_window_floats
from .systems import Doubling

NOISE_FLOOR_FACTOR = 3.0
MIN_USABLE_LAGS = 6
_CHUNK = 1 << 15


@dataclass(frozen=True)
class LipschitzFunction:
    """Bounded Lipschitz test function with its norm data."""

    fn: object  # callable on (n, d) coordinate arrays
    sup_bound: float
    lipschitz: float
    label: str = ""

    @property
    def norm(self):
        """Lipschitz norm: sup + Lipschitz constant."""
        return self.sup_bound + self.lipschitz

    def values(self, coords):
        return self.fn(coords)


def from_observable(f, label=""):
    return LipschitzFunction(f.values, f.sup_bound, f.lipschitz, label or repr(f))


def cosine_wave(freq, axis=0):
    """cos(2 pi k x_axis); a single Fourier mode."""
    def fn(coords):
        return np.cos(2.0 * math.pi * freq * np.asarray(coords, dtype=float)[:, axis])

    return LipschitzFunction(fn, 1.0, 2.0 * math.pi * freq, f"cos:{freq}")


def constant_function(c):
    def fn(coords):
        return np.full(np.asarray(coords).shape[0], float(c))

    return LipschitzFunction(fn, abs(float(c)), 0.0, f"const:{c}")


def dyadic_harmonic_mix(depth=10, axis=0):
    """sum_j 2^-j cos(2 pi 2^j x) for j = 0..depth.

    Unlike distance observables (triangle waves carry only odd harmonics,
    so their doubling autocorrelations vanish identically), this mix couples
    across octaves: under the doubling map its autocovariance is exactly
    (2/3) 2^-n (1 - 4^(n-depth-1)) for n <= depth, a clean exponential with
    a closed form to test against.
    """
    freqs = 2 ** np.arange(depth + 1)
    weights = 2.0 ** -np.arange(depth + 1)

    def fn(coords):
        angles = 2.0 * math.pi * np.asarray(coords, dtype=float)[:, axis]
        return np.cos(np.outer(angles, freqs)) @ weights

    lip = float(2.0 * math.pi * (depth + 1))
    return LipschitzFunction(fn, float(weights.sum()), lip, f"dyadicmix:{depth}")


def doubling_autocovariance_mix(depth, n):
    """Exact autocovariance of dyadic_harmonic_mix under the doubling map."""
    if n > depth:
        return 0.0
    return (2.0 / 3.0) * 2.0 ** -n * (1.0 - 4.0 ** (n - depth - 1))


@dataclass(frozen=True)
class CorrelationSeries:
    """|Cov(phi o T^n, psi)| estimates over a set of lags."""

    lags: tuple
    values: tuple
    half_widths: tuple
    phi_norm: tuple  # (sup, lipschitz)
    psi_norm: tuple

    def __post_init__(self):
        lags = tuple(int(n) for n in self.lags)
        if any(b <= a for a, b in zip(lags, lags[1:])):
            raise ValueError("lags must be strictly increasing")
        if any(v < 0 for v in self.values):
            raise ValueError("correlation magnitudes are non-negative")
        object.__setattr__(self, "lags", lags)

    def usable(self, factor=NOISE_FLOOR_FACTOR):
        """Indices of lags above the noise floor."""
        return [i for i, (v, hw) in enumerate(zip(self.values, self.half_widths))
                if v > factor * hw]


def _orbit_value_matrix(system, phi, psi, lags, seed, n_samples):
    """psi at time 0 and phi along the orbit at each lag, per sample point.

    Doubling reservoir points are streamed as raw byte rows (windows at bit
    offset n are the orbit); other systems iterate their orbit blocks.
    """
    max_lag = max(lags)
    psi0 = np.empty(n_samples)
    phis = np.empty((len(lags), n_samples))
    if isinstance(system, Doubling) and system.engine == "reservoir":
        rng = master_rng(subseed(seed, "corr-bytes"))
        nbytes = (max_lag + 64) // 8 + 2
        done = 0
        while done < n_samples:
            size = min(_CHUNK, n_samples - done)
            rows = rng.integers(0, 256, size=(size, nbytes), dtype=np.uint8)
            base = bulk_window_floats(rows, 0).reshape(-1, 1)
            psi0[done:done + size] = psi.values(base)
            for i, lag in enumerate(lags):
                shifted = bulk_window_floats(rows, lag).reshape(-1, 1)
                phis[i, done:done + size] = phi.values(shifted)
            done += size
        return psi0, phis

    points = system.sample_invariant(seed, n_samples)
    for j, p in enumerate(points):
        vals = system.orbit_values(p, 0, max_lag + 1)
        psi0[j] = psi.values(vals[:1])[0]
        for i, lag in enumerate(lags):
            phis[i, j] = phi.values(vals[lag:lag + 1])[0]
    return psi0, phis


def estimate_correlation(system, phi, psi, lags, seed, n_samples, level=0.95):
    """Monte Carlo |Cov(phi o T^n, psi)| for each lag n.

    Half-widths come from the sample variance of the centered products
    (normal approximation).
    """
    if n_samples < 1000:
        raise ValueError("need at least 1000 samples")
    lags = tuple(int(n) for n in lags)
    psi0, phis = _orbit_value_matrix(system, phi, psi, lags, seed, n_samples)
    psi_c = psi0 - psi0.mean()
    z = z_value(level)
    values = []
    half_widths = []
    for i in range(len(lags)):
        prod = (phis[i] - phis[i].mean()) * psi_c
        cov = float(prod.mean())
        hw = z * float(prod.std(ddof=1)) / math.sqrt(n_samples)
        values.append(abs(cov))
        half_widths.append(hw)
    return CorrelationSeries(
        lags=lags,
        values=tuple(values),
        half_widths=tuple(half_widths),
        phi_norm=(phi.sup_bound, phi.lipschitz),
        psi_norm=(psi.sup_bound, psi.lipschitz),
    )


DECAY_EXPONENTIAL = "exponential"
DECAY_POLYNOMIAL = "polynomial"
DECAY_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DecayFit:
    """Fitted correlation decay model.

    kind "exponential" means amplitude * exp(-rate n); "polynomial" means
    amplitude * n^-rate.  ``amplitude`` is already inflated by the rms fit
    residual, so the fit acts as an envelope rather than a best guess.
    """

    kind: str
    rate: float | None
    amplitude: float | None
    fit_window: tuple
    residual: float | None

    def envelope(self, n):
        """Decay envelope at lag n; undefined for inconclusive fits."""
        if self.kind == DECAY_EXPONENTIAL:
            return self.amplitude * math.exp(-self.rate * n)
        if self.kind == DECAY_POLYNOMIAL:
            return self.amplitude * float(n) ** -self.rate
        raise NoDecayFitError("inconclusive decay fit has no envelope")


def fit_decay(series, noise_factor=NOISE_FLOOR_FACTOR):
    """Classify a correlation series as exponential or power-law decay.

    Lags below the noise floor are excluded.  With no usable lags the
    verdict is inconclusive; with fewer than MIN_USABLE_LAGS the series is
    degenerate; otherwise the lower-residual model wins.
    """
    idx = series.usable(noise_factor)
    if not idx:
        return DecayFit(DECAY_INCONCLUSIVE, None, None, (), None)
    if len(idx) < MIN_USABLE_LAGS:
        raise DegenerateSeriesError(
            f"only {len(idx)} lags above the noise floor; need {MIN_USABLE_LAGS}"
        )
    ns = np.array([series.lags[i] for i in idx], dtype=float)
    logv = np.log([series.values[i] for i in idx])

    slope_e, icept_e, _ = fit_line(ns, logv)
    sse_e = float(((logv - (icept_e + slope_e * ns)) ** 2).sum())
    slope_p, icept_p, _ = fit_line(np.log(ns), logv)
    sse_p = float(((logv - (icept_p + slope_p * np.log(ns))) ** 2).sum())

    window = (int(ns[0]), int(ns[-1]))
    candidates = []
    if slope_e < 0:
        candidates.append((sse_e, DECAY_EXPONENTIAL, -slope_e, icept_e))
    if slope_p < 0:
        candidates.append((sse_p, DECAY_POLYNOMIAL, -slope_p, icept_p))
    if not candidates:
        return DecayFit(DECAY_INCONCLUSIVE, None, None, window, None)
    sse, kind, rate, icept = min(candidates)
    rms = math.sqrt(sse / len(idx))
    return DecayFit(kind, rate, math.exp(icept + rms), window, rms)


def intersection_bound_check(system, f, ladder, k, j, seed, n_samples, decay):
    """Estimate mu{T^k x in S_r_k and T^j x in S_r_j} against its bound.

    Returns (lhs, rhs): lhs a MeasureEstimate, rhs the product of the
    coarser sublevel measures plus the correlation term
    4 lip^2 Phi(k - j) / ((r_{k-1} - r_k)(r_{j-1} - r_j)) evaluated on the
    fitted decay envelope.
    """
    if not k > j >= 1:
        raise ValueError("need k > j >= 1")
    radii = list(ladder)
    if k >= len(radii):
        raise ValueError("ladder does not reach index k")
    if decay is None or decay.kind == DECAY_INCONCLUSIVE:
        raise NoDecayFitError("intersection bound needs a fitted decay envelope")

    lhs = _joint_preimage_measure(system, f, radii[k], radii[j], k, j, seed, n_samples)
    mu_k = estimate_measure(f, radii[k - 1], system, subseed(seed, "mu-k"), n_samples)
    mu_j = estimate_measure(f, radii[j - 1], system, subseed(seed, "mu-j"), n_samples)
    lip = f.lipschitz
    denom = (radii[k - 1] - radii[k]) * (radii[j - 1] - radii[j])
    rhs = mu_k.estimate * mu_j.estimate + 4.0 * lip * lip * decay.envelope(k - j) / denom
    return lhs, rhs


def _joint_preimage_measure(system, f, r_k, r_j, k, j, seed, n_samples):
    from .observables import MeasureEstimate

    hits = 0
    if isinstance(system, Doubling) and system.engine == "reservoir":
        rng = master_rng(subseed(seed, "joint-bytes"))
        nbytes = (k + 64) // 8 + 2
        done = 0
        while done < n_samples:
            size = min(_CHUNK, n_samples - done)
            rows = rng.integers(0, 256, size=(size, nbytes), dtype=np.uint8)
            at_k = f.values(bulk_window_floats(rows, k).reshape(-1, 1))
            at_j = f.values(bulk_window_floats(rows, j).reshape(-1, 1))
            hits += int(np.count_nonzero((at_k <= r_k) & (at_j <= r_j)))
            done += size
    else:
        points = system.sample_invariant(subseed(seed, "joint"), n_samples)
        for p in points:
            vals = system.orbit_values(p, 0, k + 1)
            if (f.values(vals[k:k + 1])[0] <= r_k
                    and f.values(vals[j:j + 1])[0] <= r_j):
                hits += 1
    p_hat = hits / n_samples
    smoothed = (hits + 0.5) / (n_samples + 1.0)
    hw = z_value(0.95) * math.sqrt(smoothed * (1.0 - smoothed) / n_samples)
    return MeasureEstimate(p_hat, hw, n_samples)
