"""Nonnegative Lipschitz observables and their sublevel-set statistics.

An observable f >= 0 induces targets {f <= r} (boundary inclusive).  This
module provides the observable catalog, the linear mollifier interpolating
between nested sublevel indicators, Monte Carlo and closed-form measure
estimation, and the log-log slope estimator for the sublevel scaling
exponents (the lim sup / lim inf analogues of local dimension).
"""

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .errors import DegenerateLadderError
from .points import torus_distances
from .systems import invariant_sample_floats, is_lebesgue


def z_value(level):
    return NormalDist().inv_cdf(0.5 + level / 2.0)


# ---------------------------------------------------------------------------
# observable catalog


@dataclass(frozen=True)
class DistToPoint:
    """f(x) = quotient-metric distance to a fixed target point."""

    target: tuple

    def __post_init__(self):
        object.__setattr__(self, "target", tuple(float(t) for t in self.target))

    lipschitz = 1.0

    @property
    def dim(self):
        return len(self.target)

    @property
    def sup_bound(self):
        return math.sqrt(self.dim) / 2.0

    def values(self, coords):
        return torus_distances(np.asarray(coords, dtype=float), np.array(self.target))


@dataclass(frozen=True)
class DistToProjectedPoint:
    """Distance from selected coordinates to a target in the projected torus."""

    axes: tuple
    target: tuple

    def __post_init__(self):
        axes = tuple(int(a) for a in self.axes)
        target = tuple(float(t) for t in self.target)
        if len(axes) != len(target):
            raise ValueError("one target value per projected coordinate")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "target", target)

    lipschitz = 1.0

    @property
    def sup_bound(self):
        return math.sqrt(len(self.axes)) / 2.0

    def values(self, coords):
        sub = np.asarray(coords, dtype=float)[:, list(self.axes)]
        return torus_distances(sub, np.array(self.target))


@dataclass(frozen=True)
class PushforwardDist:
    """f(x) = distance from F(x) to a fixed image point y0.

    ``image_map`` is any observation map exposing apply(), image_distances()
    and a Lipschitz constant (see ergolab.observed).
    """

    image_map: object
    image_point: tuple

    def __post_init__(self):
        object.__setattr__(self, "image_point", tuple(float(v) for v in self.image_point))

    @property
    def lipschitz(self):
        return self.image_map.lipschitz

    @property
    def sup_bound(self):
        return self.image_map.distance_sup

    def values(self, coords):
        return self.image_map.image_distances(np.asarray(coords, dtype=float), self.image_point)


@dataclass(frozen=True)
class Slack:
    """f(x) = max(0, inner(x) - margin): fattened sublevels {inner <= margin + r}."""

    inner: object
    margin: float

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin must be non-negative")

    @property
    def lipschitz(self):
        return self.inner.lipschitz

    @property
    def sup_bound(self):
        return self.inner.sup_bound

    def values(self, coords):
        return np.maximum(self.inner.values(coords) - self.margin, 0.0)


@dataclass(frozen=True)
class WeightedSum:
    """Positive combination sum_i w_i f_i of observables."""

    terms: tuple  # of (weight, observable)

    def __post_init__(self):
        terms = tuple((float(w), f) for w, f in self.terms)
        if not terms or any(w <= 0 for w, _ in terms):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "terms", terms)

    @property
    def lipschitz(self):
        return sum(w * f.lipschitz for w, f in self.terms)

    @property
    def sup_bound(self):
        return sum(w * f.sup_bound for w, f in self.terms)

    def values(self, coords):
        out = self.terms[0][0] * self.terms[0][1].values(coords)
        for w, f in self.terms[1:]:
            out += w * f.values(coords)
        return out


def evaluate(f, point):
    """f at a single phase point."""
    return float(f.values(point.float_coords().reshape(1, -1))[0])


def parse_observable(spec, dim):
    """Observable from a config string: dist:…, projdist:…, slack:…, pushdist:…

    Projected coordinates are 1-based in config strings.
    """
    kind, _, rest = spec.partition(":")
    if kind == "dist":
        target = tuple(float(v) for v in rest.split(","))
        if len(target) != dim:
            raise ValueError(f"dist target needs {dim} coordinates")
        return DistToPoint(target)
    if kind == "projdist":
        axes_part, _, target_part = rest.partition(":")
        axes = tuple(int(a) - 1 for a in axes_part.split(","))
        target = tuple(float(v) for v in target_part.split(","))
        if any(not 0 <= a < dim for a in axes):
            raise ValueError("projected coordinate out of range")
        return DistToProjectedPoint(axes, target)
    if kind == "slack":
        margin_part, _, inner_part = rest.partition(":")
        return Slack(parse_observable(inner_part, dim), float(margin_part))
    if kind == "pushdist":
        from .observed import parse_observation_map

        map_part, _, image_part = rest.partition(":")
        image_map = parse_observation_map(map_part, dim)
        image = tuple(float(v) for v in image_part.split(","))
        return PushforwardDist(image_map, image)
    raise ValueError(f"unknown observable rule: {spec}")


# ---------------------------------------------------------------------------
# radius ladders


@dataclass(frozen=True)
class RadiusLadder:
    """Strictly decreasing radii r_0 > ... > r_K with gap r_{k+1} > c * r_k."""

    radii: tuple
    gap_constant: float = None

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if len(radii) < 2:
            raise ValueError("ladder needs at least two rungs")
        if radii[-1] <= 0:
            raise ValueError("radii must be positive")
        if any(b >= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly decreasing")
        ratios = [b / a for a, b in zip(radii, radii[1:])]
        c = self.gap_constant
        if c is None:
            c = min(ratios) * (1.0 - 1e-12)
        if not 0 < c < 1:
            raise ValueError("gap constant must lie in (0, 1)")
        if any(rat <= c for rat in ratios):
            raise ValueError(f"gap condition violated: some r_k+1/r_k <= c = {c}")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "gap_constant", c)

    @classmethod
    def dyadic(cls, start_exp, stop_exp, per_octave=1):
        """Radii 2^-e for e = start_exp .. stop_exp in steps of 1/per_octave."""
        n = int(round((stop_exp - start_exp) * per_octave))
        exps = [start_exp + k / per_octave for k in range(n + 1)]
        return cls(tuple(2.0 ** -e for e in exps))

    def __len__(self):
        return len(self.radii)

    def __iter__(self):
        return iter(self.radii)


# ---------------------------------------------------------------------------
# mollifier


def mollifier_values(f, r_prev, r, coords):
    """Linear interpolation between the indicators of S_r and S_r_prev.

    1 inside S_r, 0 outside S_r_prev, (r_prev - f)/(r_prev - r) between; its
    Lipschitz constant is lip(f)/(r_prev - r).
    """
    if not 0 < r < r_prev:
        raise ValueError("need 0 < r < r_prev")
    vals = f.values(coords)
    return np.clip((r_prev - vals) / (r_prev - r), 0.0, 1.0)


def mollifier(f, r_prev, r, point):
    return float(mollifier_values(f, r_prev, r, point.float_coords().reshape(1, -1))[0])


# ---------------------------------------------------------------------------
# measures


_BALL_VOLUME = {1: 2.0}


def _ball_volume(k):
    if k not in _BALL_VOLUME:
        _BALL_VOLUME[k] = math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)
    return _BALL_VOLUME[k]


def exact_measure(system, f, r):
    """Closed-form Lebesgue measure of {f <= r}, or None when unavailable.

    Covers distance balls (r <= 1/2 in dimension >= 2; any r in dimension 1),
    coordinate strips, slack-fattened versions of those, and observation maps
    that publish their own sublevel law.
    """
    if r < 0:
        return 0.0
    if not is_lebesgue(system):
        return None
    return _lebesgue_sublevel(f, r)


def _lebesgue_sublevel(f, r):
    if isinstance(f, DistToPoint):
        return _ball_measure(f.dim, r)
    if isinstance(f, DistToProjectedPoint):
        return _ball_measure(len(f.axes), r)
    if isinstance(f, Slack):
        return _lebesgue_sublevel(f.inner, r + f.margin)
    if isinstance(f, PushforwardDist):
        law = getattr(f.image_map, "sublevel_measure", None)
        return law(r) if law is not None else None
    return None


def _ball_measure(k, r):
    if k == 1:
        return min(2.0 * r, 1.0)
    if r <= 0.5:
        return _ball_volume(k) * r ** k
    if r >= math.sqrt(k) / 2.0:
        return 1.0
    return None


def exact_dimension(system, f):
    """Limiting sublevel exponent when the closed form pins it; else None."""
    if not is_lebesgue(system):
        return None
    if isinstance(f, DistToPoint):
        return float(f.dim)
    if isinstance(f, DistToProjectedPoint):
        return float(len(f.axes))
    if isinstance(f, Slack):
        inner = _lebesgue_sublevel(f.inner, f.margin)
        if inner is not None and inner > 0:
            return 0.0
        return None
    if isinstance(f, PushforwardDist):
        dim = getattr(f.image_map, "sublevel_dimension", None)
        return dim() if dim is not None else None
    return None


@dataclass(frozen=True)
class MeasureEstimate:
    """mu(S_r) with a normal-approximation confidence half-width."""

    estimate: float
    half_width: float
    sample_count: int
    exact: bool = False

    @property
    def lower(self):
        return max(self.estimate - self.half_width, 0.0)

    @property
    def upper(self):
        return min(self.estimate + self.half_width, 1.0)


def estimate_measure(f, r, system, seed, n_samples, level=0.95):
    """mu{f <= r}: closed form when available, else a Monte Carlo fraction."""
    closed = exact_measure(system, f, r)
    if closed is not None:
        return MeasureEstimate(closed, 0.0, 0, exact=True)
    if n_samples < 100:
        raise ValueError("need at least 100 samples")
    coords = invariant_sample_floats(system, seed, n_samples)
    hits = int(np.count_nonzero(f.values(coords) <= r))
    p = hits / n_samples
    smoothed = (hits + 0.5) / (n_samples + 1.0)
    hw = z_value(level) * math.sqrt(smoothed * (1.0 - smoothed) / n_samples)
    return MeasureEstimate(p, hw, n_samples)


def measure_profile(f, ladder, system, seed, n_samples, level=0.95):
    """Measure estimates for every rung, sharing one invariant sample.

    Sharing the sample makes the profile exactly monotone in r and prices
    the whole ladder at one sampling pass.
    """
    exact_vals = [exact_measure(system, f, r) for r in ladder]
    if all(v is not None for v in exact_vals):
        return [MeasureEstimate(v, 0.0, 0, exact=True) for v in exact_vals]
    coords = invariant_sample_floats(system, seed, n_samples)
    vals = f.values(coords)
    z = z_value(level)
    out = []
    for r, closed in zip(ladder, exact_vals):
        if closed is not None:
            out.append(MeasureEstimate(closed, 0.0, 0, exact=True))
            continue
        hits = int(np.count_nonzero(vals <= r))
        p = hits / n_samples
        smoothed = (hits + 0.5) / (n_samples + 1.0)
        hw = z * math.sqrt(smoothed * (1.0 - smoothed) / n_samples)
        out.append(MeasureEstimate(p, hw, n_samples))
    return out


# ---------------------------------------------------------------------------
# dimension estimation


MIN_EXPECTED_HITS = 20


def sliding_slopes(x, y, width):
    """Least-squares slopes over every contiguous window of ``width`` points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = []
    for i in range(len(x) - width + 1):
        xs = x[i:i + width]
        ys = y[i:i + width]
        xc = xs - xs.mean()
        out.append(float((xc * (ys - ys.mean())).sum() / (xc * xc).sum()))
    return np.array(out)


def fit_line(x, y):
    """Slope, intercept and slope standard error of a least-squares line."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    sxx = float((xc * xc).sum())
    slope = float((xc * (y - y.mean())).sum() / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = max(len(x) - 2, 1)
    stderr = math.sqrt(float((resid * resid).sum()) / dof / sxx)
    return slope, intercept, stderr


@dataclass(frozen=True)
class DimensionEstimate:
    """Sliding-window slope summary of log mu(S_r) against log r."""

    d_upper: float
    d_lower: float
    slope: float
    slope_stderr: float
    window: tuple  # (first rung index used, last rung index used)
    agreement_tolerance: float = 0.1

    @property
    def d_point(self):
        """Single exponent when the upper/lower pair agrees, else None."""
        if self.d_upper - self.d_lower <= self.agreement_tolerance:
            return 0.5 * (self.d_upper + self.d_lower)
        return None


def estimate_dimension(f, ladder, system, seed, n_per_rung, window=4, level=0.95):
    """Sublevel scaling exponents from log-log slopes over the ladder.

    Rungs whose Monte Carlo estimate would see fewer than MIN_EXPECTED_HITS
    hits are dropped; at least four usable rungs are required.  d_upper and
    d_lower are the extreme sliding-window slopes (default window 4 rungs).
    """
    estimates = measure_profile(f, ladder, system, seed, n_per_rung, level)
    radii = list(ladder)
    usable = [
        k for k, est in enumerate(estimates)
        if est.estimate > 0 and (est.exact or est.estimate * n_per_rung >= MIN_EXPECTED_HITS)
    ]
    if len(usable) < 4:
        raise DegenerateLadderError(
            f"only {len(usable)} usable rungs; need at least 4"
        )
    x = np.log([radii[k] for k in usable])
    y = np.log([estimates[k].estimate for k in usable])
    width = min(max(int(window), 2), len(usable))
    slopes = sliding_slopes(x, y, width)
    slope, _, stderr = fit_line(x, y)
    return DimensionEstimate(
        d_upper=float(slopes.max()),
        d_lower=float(slopes.min()),
        slope=slope,
        slope_stderr=stderr,
        window=(usable[0], usable[-1]),
    )
