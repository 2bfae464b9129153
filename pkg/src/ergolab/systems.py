"""Catalog of measure-preserving model systems with exact orbit iteration.

Engines
-------
* Doubling map x -> 2x mod 1.  Default engine is the bit reservoir: a point
  is a seeded random binary expansion and T is the one-bit shift, so orbit
  position n is an O(1) window read and orbits are unbounded.  The exact
  fraction engine iterates rationals instead; dyadic points lose one
  fractional bit per step and hit the representation floor after B steps,
  which is policed by the orbit budget.
* Hyperbolic (or any unimodular) toral automorphisms: integer matrix action
  on B-bit dyadic fractions, exact and invertible.
* Circle rotations by a B-bit fixed-point angle, exact and invertible.
* Manneville-Pomeau x -> x + x^(1+s) mod 1: double-precision engine, kept
  for contrast with the rapidly mixing systems; results carry a
  "float-engine" caveat.

Bulk orbit evaluation (`orbit_blocks`) yields float coordinate arrays for
the estimators; the underlying state stays exact for the exact engines.
Floats carry the usual 2^-53 conversion error, negligible against every
radius used by the estimators.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, gcd, isqrt

import numpy as np

from .errors import BudgetExhaustedError
from .points import FloatPoint, FractionPoint, ReservoirPoint
from .rand import master_rng, point_rng
from .reservoir import BitReservoir

DEFAULT_PRECISION_BITS = 512
DEFAULT_BLOCK = 1 << 14

MIXING_EXPONENTIAL = "exponential"
MIXING_POLYNOMIAL = "polynomial"
MIXING_NONE = "none"


@dataclass(frozen=True)
class OrbitBudget:
    """Bounds on orbit length for precision-limited engines."""

    max_steps: int
    precision_bits: int = DEFAULT_PRECISION_BITS
    guard_bits: int = 0

    def __post_init__(self):
        if self.max_steps < 1 or self.precision_bits < 1 or self.guard_bits < 0:
            raise ValueError("invalid orbit budget")

    def check_doubling_fixed(self):
        if self.max_steps > self.precision_bits - self.guard_bits:
            raise BudgetExhaustedError(
                f"max_steps {self.max_steps} exceeds {self.precision_bits} - "
                f"{self.guard_bits} bits available to the fixed-point doubling engine"
            )


def _dyadic_bits_left(frac):
    """Remaining shifts before a dyadic fraction collapses to 0; None if never."""
    den = frac.denominator
    if den & (den - 1):
        return None
    return den.bit_length() - 1


class _SystemBase:
    """Shared helpers; concrete systems define the dynamics."""

    exact = True
    caveats = ()

    def orbit_window(self, p, n):
        """T^n(p) as a phase point. n = 0 returns p itself."""
        if n < 0:
            raise ValueError("step index must be non-negative")
        if n == 0:
            return p
        return self._advance(p, n)

    def step(self, p):
        """One application of the map, exactly for the exact engines."""
        return self._advance(p, 1)

    def orbit_blocks(self, p, start, stop, block=DEFAULT_BLOCK):
        """Yield (n0, coords) with coords[i] = float coords of T^(n0+i)(p).

        Covers n = start..stop-1 in blocks; used by every scanning
        estimator.  Exact engines advance exact state between blocks.
        """
        raise NotImplementedError

    def orbit_values(self, p, start, stop):
        """Float coordinates of T^n(p) for n in [start, stop) as one array."""
        parts = [blk for _, blk in self.orbit_blocks(p, start, stop)]
        if not parts:
            return np.empty((0, self.dim))
        return np.concatenate(parts, axis=0)


@dataclass(frozen=True)
class Doubling(_SystemBase):
    """Doubling map on the circle."""

    engine: str = "reservoir"
    precision_bits: int = DEFAULT_PRECISION_BITS
    guard_bits: int = 0

    dim = 1
    mixing_class = MIXING_EXPONENTIAL

    def __post_init__(self):
        if self.engine not in ("reservoir", "fraction"):
            raise ValueError("doubling engine must be 'reservoir' or 'fraction'")

    def _check_budget(self, p, steps):
        if isinstance(p, FractionPoint):
            left = _dyadic_bits_left(p.coords[0])
            if left is not None and steps > max(left - self.guard_bits, 0):
                raise BudgetExhaustedError(
                    f"{steps} doubling steps requested but the dyadic point has "
                    f"{left} fractional bits (guard {self.guard_bits})"
                )

    def _advance(self, p, n):
        if isinstance(p, ReservoirPoint):
            return ReservoirPoint(p.bits, p.offset + n)
        self._check_budget(p, n)
        x = p.coords[0]
        num = (x.numerator * pow(2, n, x.denominator)) % x.denominator
        return FractionPoint((Fraction(num, x.denominator),))

    def orbit_blocks(self, p, start, stop, block=DEFAULT_BLOCK):
        if isinstance(p, ReservoirPoint):
            n = start
            while n < stop:
                size = min(block, stop - n)
                vals = p.bits.window_floats(p.offset + n, size)
                yield n, vals.reshape(-1, 1)
                n += size
            return
        self._check_budget(p, max(stop - 1, 0))
        x = self.orbit_window(p, start).coords[0]
        num, den = x.numerator, x.denominator
        n = start
        while n < stop:
            size = min(block, stop - n)
            out = np.empty((size, 1))
            for i in range(size):
                out[i, 0] = num / den
                num = (num * 2) % den
            yield n, out
            n += size

    def sample_invariant(self, seed, count):
        """Reservoir points (or B-bit dyadics) distributed per Lebesgue."""
        if count < 1:
            raise ValueError("count must be >= 1")
        if self.engine == "reservoir":
            return [ReservoirPoint(BitReservoir(seed, i)) for i in range(count)]
        return [
            FractionPoint((_dyadic_draw(seed, i, self.precision_bits),))
            for i in range(count)
        ]


def _dyadic_draw(seed, index, bits, lo=None, hi=None):
    """Uniform B-bit dyadic fraction from the per-index stream; optionally
    restricted to integer numerator range [lo, hi)."""
    rng = point_rng(seed, index)
    nbytes = (bits + 7) // 8
    raw = int.from_bytes(rng.bytes(nbytes), "big") >> (nbytes * 8 - bits)
    if lo is not None:
        raw = lo + raw % (hi - lo)
    return Fraction(raw, 1 << bits)


def _int_matrix(rows):
    mat = tuple(tuple(int(v) for v in row) for row in rows)
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise ValueError("matrix must be square")
    return mat


def _int_det(mat):
    n = len(mat)
    if n == 1:
        return mat[0][0]
    det = 0
    for j in range(n):
        minor = tuple(row[:j] + row[j + 1:] for row in mat[1:])
        det += (-1) ** j * mat[0][j] * _int_det(minor)
    return det


def _int_inverse(mat):
    """Inverse of a unimodular integer matrix (integer entries, via adjugate)."""
    n = len(mat)
    det = _int_det(mat)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = tuple(
                tuple(mat[r][c] for c in range(n) if c != j)
                for r in range(n) if r != i
            )
            adj[j][i] = (-1) ** (i + j) * (_int_det(minor) if n > 1 else 1)
    return tuple(tuple(v * det for v in row) for row in adj)  # det is +-1


@dataclass(frozen=True)
class ToralAutomorphism(_SystemBase):
    """Automorphism of T^d from a unimodular integer matrix."""

    matrix: tuple
    precision_bits: int = DEFAULT_PRECISION_BITS

    mixing_class = MIXING_EXPONENTIAL

    def __post_init__(self):
        mat = _int_matrix(self.matrix)
        object.__setattr__(self, "matrix", mat)
        if abs(_int_det(mat)) != 1:
            raise ValueError("matrix determinant must be +-1")

    @property
    def dim(self):
        return len(self.matrix)

    def inverse(self):
        return ToralAutomorphism(_int_inverse(self.matrix), self.precision_bits)

    def _state(self, p):
        """Numerators over a common denominator; exact for any rational point."""
        denoms = [c.denominator for c in p.coords]
        modulus = denoms[0]
        for d in denoms[1:]:
            modulus = modulus * d // gcd(modulus, d)
        nums = [c.numerator * (modulus // c.denominator) for c in p.coords]
        return nums, modulus

    def _advance(self, p, n):
        nums, modulus = self._state(p)
        mat = _matrix_power(self.matrix, n, modulus) if n > 1 else self.matrix
        out = [
            sum(mat[i][j] * nums[j] for j in range(self.dim)) % modulus
            for i in range(self.dim)
        ]
        return FractionPoint(tuple(Fraction(v, modulus) for v in out))

    def orbit_blocks(self, p, start, stop, block=DEFAULT_BLOCK):
        state, modulus = self._state(self.orbit_window(p, start) if start else p)
        mat = self.matrix
        d = self.dim
        n = start
        dyadic_shift = modulus.bit_length() - 1 - 53
        fast = modulus & (modulus - 1) == 0 and dyadic_shift >= 0
        if fast and d == 2 and mat == ((2, 1), (1, 1)):
            mask = modulus - 1
            inv = 2.0 ** -53
            a, b = state
            while n < stop:
                size = min(block, stop - n)
                out = np.empty((size, 2))
                for i in range(size):
                    out[i, 0] = (a >> dyadic_shift) * inv
                    out[i, 1] = (b >> dyadic_shift) * inv
                    s = a + b
                    a = (a + s) & mask
                    b = s & mask
                yield n, out
                n += size
            return
        state = list(state)
        while n < stop:
            size = min(block, stop - n)
            out = np.empty((size, d))
            for i in range(size):
                for j in range(d):
                    out[i, j] = state[j] / modulus
                state = [
                    sum(mat[r][c] * state[c] for c in range(d)) % modulus
                    for r in range(d)
                ]
            yield n, out
            n += size

    def sample_invariant(self, seed, count):
        if count < 1:
            raise ValueError("count must be >= 1")
        bits = self.precision_bits
        return [
            FractionPoint(tuple(
                _dyadic_draw(seed, i * self.dim + j, bits) for j in range(self.dim)
            ))
            for i in range(count)
        ]


def _matrix_power(mat, n, modulus):
    n0 = len(mat)
    result = tuple(tuple(int(i == j) for j in range(n0)) for i in range(n0))
    base = mat
    while n:
        if n & 1:
            result = _mat_mul(result, base, modulus)
        base = _mat_mul(base, base, modulus)
        n >>= 1
    return result


def _mat_mul(a, b, modulus):
    n = len(a)
    return tuple(
        tuple(
            sum(a[i][k] * b[k][j] for k in range(n)) % modulus
            for j in range(n)
        )
        for i in range(n)
    )


@dataclass(frozen=True)
class CircleRotation(_SystemBase):
    """Rotation x -> x + alpha mod 1 with alpha a B-bit fixed-point fraction."""

    alpha_numerator: int
    precision_bits: int = DEFAULT_PRECISION_BITS

    dim = 1
    mixing_class = MIXING_NONE

    def __post_init__(self):
        if not 0 <= self.alpha_numerator < (1 << self.precision_bits):
            raise ValueError("alpha numerator outside [0, 2^B)")

    @property
    def alpha(self):
        return Fraction(self.alpha_numerator, 1 << self.precision_bits)

    @classmethod
    def from_fraction(cls, alpha, precision_bits=DEFAULT_PRECISION_BITS):
        """Rotation by ``alpha`` truncated to B fractional bits."""
        alpha = Fraction(alpha)
        if not 0 <= alpha < 1:
            raise ValueError("alpha must lie in [0, 1)")
        num = (alpha.numerator << precision_bits) // alpha.denominator
        return cls(num, precision_bits)

    @classmethod
    def golden(cls, precision_bits=DEFAULT_PRECISION_BITS):
        """Rotation by (sqrt(5) - 1) / 2 truncated to B bits."""
        num = (isqrt(5 << (2 * precision_bits)) - (1 << precision_bits)) // 2
        return cls(num, precision_bits)

    @classmethod
    def liouville(cls, precision_bits=DEFAULT_PRECISION_BITS):
        """Rotation by sum over n=1..6 of 10^(-n!) truncated to B bits."""
        alpha = sum(Fraction(1, 10 ** factorial(n)) for n in range(1, 7))
        return cls.from_fraction(alpha, precision_bits)

    def _advance(self, p, n):
        return FractionPoint(((p.coords[0] + n * self.alpha) % 1,))

    def step_back(self, p):
        return FractionPoint(((p.coords[0] - self.alpha) % 1,))

    def orbit_blocks(self, p, start, stop, block=DEFAULT_BLOCK):
        # Per block: exact rational anchor, then float offsets j * alpha.
        # Within-block error <= block * 2^-53 ~ 7e-12, far below any radius.
        alpha = self.alpha
        alpha_f = float(alpha)
        state = (p.coords[0] + start * alpha) % 1
        n = start
        while n < stop:
            size = min(block, stop - n)
            anchor = state.numerator / state.denominator
            vals = (anchor + np.arange(size) * alpha_f) % 1.0
            yield n, vals.reshape(-1, 1)
            state = (state + size * alpha) % 1
            n += size

    def sample_invariant(self, seed, count):
        if count < 1:
            raise ValueError("count must be >= 1")
        bits = self.precision_bits
        return [FractionPoint((_dyadic_draw(seed, i, bits),)) for i in range(count)]


@dataclass(frozen=True)
class MannevillePomeau(_SystemBase):
    """Intermittent map x -> x + x^(1+s) mod 1 on the double-precision engine."""

    s: float
    burn_in: int = 10_000
    stride: int = 10

    dim = 1
    mixing_class = MIXING_POLYNOMIAL
    exact = False
    caveats = ("float-engine",)

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError("Manneville-Pomeau parameter s must lie in (0, 1)")
        if self.burn_in < 0 or self.stride < 1:
            raise ValueError("invalid sampler settings")

    def _map(self, x):
        y = x + x ** (1.0 + self.s)
        return y - 1.0 if y >= 1.0 else y

    def _advance(self, p, n):
        x = p.coords[0]
        for _ in range(n):
            x = self._map(x)
        return FloatPoint((x,))

    def orbit_blocks(self, p, start, stop, block=DEFAULT_BLOCK):
        x = p.coords[0]
        for _ in range(start):
            x = self._map(x)
        step = self._map
        n = start
        while n < stop:
            size = min(block, stop - n)
            out = np.empty((size, 1))
            for i in range(size):
                out[i, 0] = x
                x = step(x)
            yield n, out
            n += size

    def sample_invariant(self, seed, count):
        """Points off one long orbit, after burn-in, spaced by the stride."""
        if count < 1:
            raise ValueError("count must be >= 1")
        return [FloatPoint((x,)) for x in self.sample_invariant_floats(seed, count)[:, 0]]

    def sample_invariant_floats(self, seed, count):
        rng = master_rng(seed)
        x = float(rng.random())
        while x == 0.0:
            x = float(rng.random())
        step = self._map
        for _ in range(self.burn_in):
            x = step(x)
        out = np.empty(count)
        for i in range(count):
            out[i] = x
            for _ in range(self.stride):
                x = step(x)
        return out.reshape(-1, 1)


def invariant_sample_floats(system, seed, count):
    """Invariant samples as a float array (n, d); fast path for estimators.

    Lebesgue systems draw uniforms from the master stream; the intermittent
    map falls back to its Birkhoff sampler.
    """
    if isinstance(system, MannevillePomeau):
        return system.sample_invariant_floats(seed, count)
    return master_rng(seed).random((count, system.dim))


def is_lebesgue(system):
    return not isinstance(system, MannevillePomeau)


CAT_MATRIX = ((2, 1), (1, 1))


def system_from_id(system_id, precision_bits=None):
    """Resolve a catalog id: 'doubling', 'cat', 'rotation:<spec>', 'mp:<s>'."""
    bits = precision_bits or DEFAULT_PRECISION_BITS
    if system_id == "doubling":
        return Doubling(precision_bits=bits)
    if system_id == "cat":
        return ToralAutomorphism(CAT_MATRIX, precision_bits=bits)
    if system_id.startswith("rotation:"):
        spec = system_id.split(":", 1)[1]
        if spec == "golden":
            return CircleRotation.golden(bits)
        if spec == "liouville":
            return CircleRotation.liouville(bits)
        return CircleRotation.from_fraction(Fraction(spec), bits)
    if system_id.startswith("mp:"):
        return MannevillePomeau(float(system_id.split(":", 1)[1]))
    raise KeyError(f"unknown system id: {system_id}")


def catalog_entries():
    """Descriptive rows for the catalog listing."""
    return [
        {
            "id": "doubling",
            "description": "doubling map, bit-reservoir engine (exact shift dynamics)",
            "dimension": 1,
            "mixing": MIXING_EXPONENTIAL,
            "notes": "O(1) random orbit access; unbounded orbit length",
        },
        {
            "id": "cat",
            "description": "hyperbolic toral automorphism [[2,1],[1,1]] on T^2, "
                           "fixed-point engine",
            "dimension": 2,
            "mixing": MIXING_EXPONENTIAL,
            "notes": "exact integer-matrix action on B-bit dyadic lattice",
        },
        {
            "id": "rotation:<alpha|golden|liouville>",
            "description": "circle rotation by a B-bit fixed-point angle",
            "dimension": 1,
            "mixing": MIXING_NONE,
            "notes": "liouville uses sum of 10^(-n!) for n<=6, truncated to B bits",
        },
        {
            "id": "mp:<s>",
            "description": "Manneville-Pomeau intermittent map, s in (0,1)",
            "dimension": 1,
            "mixing": MIXING_POLYNOMIAL,
            "notes": "float-engine caveat: double precision, non-rigorous orbits; "
                     "Birkhoff burn-in sampler",
        },
    ]
