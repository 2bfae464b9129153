"""Phase points on the d-torus and the quotient metric.

Three coordinate engines coexist:

* ``FractionPoint`` — exact rationals in [0, 1).  Used by the rotation and
  toral-automorphism engines (B-bit dyadic samples by default) and by the
  exact-fraction doubling engine.
* ``ReservoirPoint`` — an offset into a seeded random binary expansion; the
  natural representation for the doubling map, where one step is a shift.
* ``FloatPoint`` — plain doubles, for the non-rigorous float engines.

Observables always evaluate on float projections of the coordinates; only
the dynamics itself is exact.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .reservoir import BitReservoir


def unit_fraction(value):
    """Coerce ``value`` to a Fraction and check it lies in [0, 1).

    Accepts Fraction, int, and strings like "3/8" or "0.25".  Floats are
    rejected: a literal such as 0.3 is not the rational 3/10, and silent
    binary truncation here has been a recurring source of confusion.
    """
    if isinstance(value, float):
        raise TypeError(
            "float coordinates are ambiguous; pass a Fraction or string "
            "(e.g. '3/8'), or use FractionPoint.from_float for the exact "
            "binary value"
        )
    frac = Fraction(value)
    if not 0 <= frac < 1:
        raise ValueError(f"coordinate {frac} outside [0, 1)")
    return frac


@dataclass(frozen=True)
class FractionPoint:
    """Point of T^d with exact rational coordinates."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(unit_fraction(c) for c in self.coords))

    @classmethod
    def from_float(cls, *values):
        """Build from floats, taking each at its exact binary value."""
        return cls(tuple(Fraction(v) for v in values))

    @property
    def dim(self):
        return len(self.coords)

    def float_coords(self):
        return np.array([float(c) for c in self.coords])


@dataclass(frozen=True)
class ReservoirPoint:
    """One-dimensional point given by a bit-reservoir handle and offset."""

    bits: BitReservoir
    offset: int = 0

    @property
    def dim(self):
        return 1

    def float_coords(self):
        return np.array([self.bits.window_float(self.offset)])


@dataclass(frozen=True)
class FloatPoint:
    """Point with double-precision coordinates (non-rigorous engines)."""

    coords: tuple

    def __post_init__(self):
        cs = tuple(float(c) for c in self.coords)
        if any(not 0.0 <= c < 1.0 for c in cs):
            raise ValueError("coordinates must lie in [0, 1)")
        object.__setattr__(self, "coords", cs)

    @property
    def dim(self):
        return len(self.coords)

    def float_coords(self):
        return np.array(self.coords)


def wrap_deltas(deltas):
    """Componentwise shortest displacement on the torus: |d| folded to [0, 1/2]."""
    d = np.abs(deltas)
    return np.minimum(d, 1.0 - d)


def torus_distance(a, b):
    """Quotient metric on T^d: min over integer translates, then Euclidean."""
    d = wrap_deltas(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return float(np.sqrt((d * d).sum()))


def torus_distances(points, target):
    """Vectorized quotient metric from rows of ``points`` (n, d) to ``target``."""
    d = wrap_deltas(points - target)
    return np.sqrt((d * d).sum(axis=1))


def float_coords(point):
    """Float coordinates of any phase point type."""
    return point.float_coords()
