"""Halton sequences and their p-adically shifted versions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import csvio
from .exceptions import DomainError, IncompatibleOperandsError, ResourceError
from .padic import (PAdicNumber, Shift, UnitPoint, monna_map, monna_map_fraction,
                    padic_add, radical_inverse_fraction)
from .primes import check_bases

#: Largest number of coordinates (N * s) a block may hold in memory.
MAX_BLOCK_ENTRIES = 1 << 28


@dataclass(frozen=True)
class HaltonSpec:
    bases: tuple
    start_index: int = 0
    shift: Optional[Shift] = None

    def __post_init__(self):
        bases = check_bases(self.bases)
        object.__setattr__(self, "bases", bases)
        if int(self.start_index) < 0:
            raise DomainError("start_index must be nonnegative")
        object.__setattr__(self, "start_index", int(self.start_index))
        if self.shift is not None and tuple(self.shift.bases) != bases:
            raise IncompatibleOperandsError(
                f"shift bases {self.shift.bases} != sequence bases {bases}")

    @property
    def dim(self):
        return len(self.bases)


@dataclass
class PointSet:
    """``points`` is an ``(N, s)`` float array; row i is point ``start_index + i``."""

    points: np.ndarray
    bases: tuple = ()
    start_index: int = 0
    shift: Optional[Shift] = None

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def to_csv(self, fh):
        s = self.dim
        header = ["n"] + [f"x{j + 1}" for j in range(s)]
        rows = ([self.start_index + i] + [float(v) for v in row]
                for i, row in enumerate(self.points))
        csvio.write_rows(fh, header, rows)


def as_array(points):
    """Accept a PointSet or anything array-like; return a 2-D float array."""
    if isinstance(points, PointSet):
        return points.points
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DomainError("points must be an (N, s) array")
    return arr


def halton_point(spec, n, exact=False):
    """Point number ``n`` (absolute index) of the possibly shifted sequence.

    The shifted coordinate uses ``phi^+(phi(n)) = n`` and adds ``sigma_j``
    directly to the integer ``n`` in Z_{p_j}; no floating digit extraction.
    """
    n = int(n)
    if n < 0:
        raise DomainError("index must be nonnegative")
    coords = []
    for j, p in enumerate(spec.bases):
        if spec.shift is None:
            c = radical_inverse_fraction(p, n)
        else:
            z = spec.shift.sigma[j]
            c = monna_map_fraction(padic_add(PAdicNumber.from_int(n, p, z.precision), z))
        coords.append(c if exact else float(c))
    return UnitPoint(tuple(coords), spec.bases)


class _ReflectedCounter:
    """Base-p digit counter that also tracks the reflected numerator.

    With ``width`` set, the counter lives in Z / p^width (carries out of the
    top digit are dropped); otherwise it grows like an ordinary integer.
    Value of the reflected digits is ``numer / p**len(digits)``.
    """

    def __init__(self, p, digits, width=None):
        self.p = p
        self.width = width
        self.digits = list(digits) or [0]
        self.numer = 0
        for d in self.digits:
            self.numer = self.numer * p + d
        self._powers()

    def _powers(self):
        K = len(self.digits)
        self.pw = [self.p ** (K - 1 - i) for i in range(K)]
        self.denom = self.p**K

    def value(self):
        return Fraction(self.numer, self.denom)

    def increment(self):
        p, digits = self.p, self.digits
        i = 0
        K = len(digits)
        while i < K and digits[i] == p - 1:
            digits[i] = 0
            self.numer -= (p - 1) * self.pw[i]
            i += 1
        if i < K:
            digits[i] += 1
            self.numer += self.pw[i]
        elif self.width is None:
            digits.append(1)
            self.numer = self.numer * p + 1
            self._powers()


def iter_halton(spec, exact=False):
    """Infinite stream of points starting at ``spec.start_index``.

    Each step is one add-with-carry per coordinate, so N points cost O(N s)
    amortized digit operations.
    """
    counters = []
    for j, p in enumerate(spec.bases):
        if spec.shift is None:
            start = PAdicNumber.from_int(spec.start_index, p, _ndigits(spec.start_index, p))
            counters.append(_ReflectedCounter(p, start.digits))
        else:
            z = spec.shift.sigma[j]
            start = padic_add(PAdicNumber.from_int(spec.start_index, p, z.precision), z)
            counters.append(_ReflectedCounter(p, start.digits, width=z.precision))
    while True:
        vals = [c.value() for c in counters]
        yield tuple(vals) if exact else tuple(float(v) for v in vals)
        for c in counters:
            c.increment()


def _ndigits(n, p):
    a = 1
    while p**a <= n:
        a += 1
    return a


def radical_inverse_array(p, n, ndigits=None):
    """Vectorised radical inverse of an int64 array, reflected over ``ndigits``."""
    n = np.asarray(n, dtype=np.int64)
    if ndigits is None:
        ndigits = _ndigits(int(n.max()) if n.size else 0, p)
    if p**ndigits > 2**53:
        return np.array([float(radical_inverse_fraction(p, int(v))) for v in n.ravel()]
                        ).reshape(n.shape)
    v = n.copy()
    numer = np.zeros_like(v)
    for _ in range(ndigits):
        numer = numer * p + v % p
        v //= p
    return numer.astype(np.float64) / float(p**ndigits)


def _reverse_int(value, p, ndigits):
    numer = 0
    for _ in range(ndigits):
        value, d = divmod(value, p)
        numer = numer * p + d
    return numer


def shifted_radical_inverse_array(p, n, sigma_int, precision):
    """``phi_p((n + sigma) mod p^P)`` for an array of indices ``n``.

    Only the low ``c`` digits (those of the largest index) see ``n``; the high
    part is the shift's own digits plus at most one carry, so it takes just
    two values per coordinate.
    """
    n = np.asarray(n, dtype=np.int64)
    c = _ndigits(int(n.max()) if n.size else 0, p)
    P = precision
    if c >= P:
        raise DomainError("index exceeds the shift precision")
    mod_c = p**c
    s_high, s_low = divmod(int(sigma_int), mod_c)
    low = n + s_low
    carry = low >= mod_c
    low = np.where(carry, low - mod_c, low)
    value_low = radical_inverse_array(p, low, ndigits=c)
    high_width = P - c
    h0 = float(Fraction(_reverse_int(s_high, p, high_width), p**P))
    h1 = float(Fraction(_reverse_int((s_high + 1) % p**high_width, p, high_width), p**P))
    return value_low + np.where(carry, h1, h0)


def halton_block(spec, N, max_entries=MAX_BLOCK_ENTRIES):
    """The ``N`` points ``start_index, ..., start_index + N - 1`` as a PointSet."""
    N = int(N)
    if N < 1:
        raise DomainError("N must be at least 1")
    if N * spec.dim > max_entries:
        raise ResourceError(
            f"{N} x {spec.dim} points exceed the block budget of {max_entries}; "
            "use iter_halton for streaming")
    n = np.arange(spec.start_index, spec.start_index + N, dtype=np.int64)
    cols = []
    for j, p in enumerate(spec.bases):
        if spec.shift is None:
            cols.append(radical_inverse_array(p, n))
        else:
            z = spec.shift.sigma[j]
            cols.append(shifted_radical_inverse_array(p, n, z.to_int(), z.precision))
    return PointSet(np.column_stack(cols), spec.bases, spec.start_index, spec.shift)


def shifted_blocks(bases, N, shifts, start_index=0):
    """Stack of shifted blocks, shape ``(len(shifts), N, s)``."""
    return np.stack([halton_block(HaltonSpec(bases, start_index, sh), N).points
                     for sh in shifts])


def shift_value(shift):
    """The shift as a point of [0, 1)^s (doubles)."""
    return tuple(monna_map(z) for z in shift.sigma)
