"""Truncated p-adic integers, the radical inverse and the p-adic shift.

A p-adic integer ``z = sum_r z_r p^r`` is stored as its first ``P`` digits,
i.e. as an element of Z / p^P Z.  Every identity used downstream (group laws,
the character homomorphism, shift invariance) holds modulo p^P, so dropping
the carry out of digit ``P - 1`` is harmless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .exceptions import DomainError, IncompatibleOperandsError
from .primes import check_bases, check_prime
from .rng import uniform_digits


def default_precision(p):
    """Smallest ``P`` with ``p**-P <= 2**-64``."""
    p = check_prime(p)
    P = 1
    while p**P < 2**64:
        P += 1
    return P


def shared_precision(bases):
    """One precision that is at least the default for every base."""
    return max(default_precision(p) for p in bases)


def float_digits(p):
    """Number of base-p digits a double in [0, 1) resolves unambiguously.

    Rounding ``x * p**D`` to the nearest integer recovers the digits of any
    p-adic rational with at most ``D`` digits from its correctly rounded
    double, provided ``p**D < 2**52``.
    """
    D = 0
    while p ** (D + 1) < 2**52:
        D += 1
    return D


@dataclass(frozen=True)
class PAdicNumber:
    """Element of Z_p truncated to ``len(digits)`` digits.

    ``digits[r]`` is the coefficient of ``p**r``.
    """

    base: int
    digits: tuple

    def __post_init__(self):
        check_prime(self.base)
        digits = tuple(int(d) for d in self.digits)
        if len(digits) < 1:
            raise DomainError("precision must be at least 1")
        for d in digits:
            if not 0 <= d < self.base:
                raise DomainError(f"digit {d} outside [0, {self.base - 1}]")
        object.__setattr__(self, "digits", digits)

    @property
    def precision(self):
        return len(self.digits)

    @classmethod
    def zero(cls, base, precision):
        return cls(base, (0,) * precision)

    @classmethod
    def from_int(cls, value, base, precision):
        """Embed an integer (negative values wrap, as in Z_p) truncated to P digits."""
        value = int(value) % base**precision
        digits = []
        for _ in range(precision):
            value, d = divmod(value, base)
            digits.append(d)
        return cls(base, tuple(digits))

    def to_int(self):
        """The residue ``sum_r z_r p^r`` in [0, p^P)."""
        value = 0
        for d in reversed(self.digits):
            value = value * self.base + d
        return value

    def __add__(self, other):
        return padic_add(self, other)

    def __sub__(self, other):
        return padic_sub(self, other)

    def __neg__(self):
        return padic_neg(self)


def _check_compatible(a, b):
    if a.base != b.base:
        raise IncompatibleOperandsError(f"bases differ: {a.base} != {b.base}")
    if a.precision != b.precision:
        raise IncompatibleOperandsError(
            f"precisions differ: {a.precision} != {b.precision}")


def padic_add(a, b):
    """Schoolbook carry addition; the carry out of the last digit is dropped."""
    _check_compatible(a, b)
    p = a.base
    out = []
    carry = 0
    for x, y in zip(a.digits, b.digits):
        carry, d = divmod(x + y + carry, p)
        out.append(d)
    return PAdicNumber(p, tuple(out))


def padic_neg(a):
    """Additive inverse: digit complement plus one."""
    p = a.base
    complement = PAdicNumber(p, tuple(p - 1 - d for d in a.digits))
    return padic_add(complement, PAdicNumber.from_int(1, p, a.precision))


def padic_sub(a, b):
    _check_compatible(a, b)
    return padic_add(a, padic_neg(b))


def radical_inverse(p, n):
    """Base-p radical inverse of a nonnegative integer, correctly rounded."""
    return float(radical_inverse_fraction(p, n))


def radical_inverse_fraction(p, n):
    p = check_prime(p)
    n = int(n)
    if n < 0:
        raise DomainError(f"radical inverse needs n >= 0, got {n}")
    numerator = 0
    denominator = 1
    while n:
        n, d = divmod(n, p)
        numerator = numerator * p + d
        denominator *= p
    return Fraction(numerator, denominator)


def monna_map_fraction(z):
    p = z.base
    numerator = 0
    for d in z.digits:
        numerator = numerator * p + d
    return Fraction(numerator, p**z.precision)


def monna_map(z):
    """Monna map of a truncated p-adic integer as a correctly rounded double."""
    return float(monna_map_fraction(z))


def monna_inverse(x, p, precision=None):
    """Digits of ``x`` in base ``p`` read as a p-adic integer.

    ``x`` may be a :class:`fractions.Fraction` (or int), in which case the
    digits are extracted exactly and p-adic rationals get their terminating
    expansion.  Doubles are exact dyadic rationals, so for ``p == 2`` they are
    expanded exactly too; for other bases the double is rounded to the
    nearest multiple of ``p**-D`` with ``D = float_digits(p)``, which recovers
    every p-adic rational with at most ``D`` digits from its nearest double.
    """
    p = check_prime(p)
    P = default_precision(p) if precision is None else int(precision)
    if P < 1:
        raise DomainError("precision must be at least 1")
    if isinstance(x, Rational):
        q = Fraction(x)
        if not 0 <= q < 1:
            raise DomainError(f"x must lie in [0, 1), got {x}")
        m = math.floor(q * p**P)
    else:
        x = float(x)
        if not (0.0 <= x < 1.0):
            raise DomainError(f"x must lie in [0, 1), got {x}")
        if p == 2:
            m = math.floor(Fraction(x) * 2**P)
        else:
            D = float_digits(p)
            top = round(Fraction(x) * p**D)
            top = min(top, p**D - 1)
            m = top * p ** (P - D) if P >= D else top // p ** (D - P)
    digits = []
    for _ in range(P):
        m, d = divmod(m, p)
        digits.append(d)
    digits.reverse()
    return PAdicNumber(p, tuple(digits))


@dataclass(frozen=True)
class UnitPoint:
    """A point of [0, 1)^s together with the base attached to each coordinate."""

    coords: tuple
    bases: tuple

    def __post_init__(self):
        coords = tuple(self.coords)
        bases = check_bases(self.bases)
        if len(coords) != len(bases):
            raise IncompatibleOperandsError(
                f"{len(coords)} coordinates but {len(bases)} bases")
        for c in coords:
            if not 0 <= c < 1:
                raise DomainError(f"coordinate {c} outside [0, 1)")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "bases", bases)

    @property
    def dim(self):
        return len(self.coords)


@dataclass(frozen=True)
class Shift:
    """A p-adic shift: one truncated p_j-adic integer per coordinate.

    ``provenance`` is ``("explicit",)`` or ``("sampled", seed, replicate)``.
    """

    sigma: tuple
    provenance: tuple = field(default=("explicit",))

    def __post_init__(self):
        sigma = tuple(self.sigma)
        if not sigma:
            raise DomainError("a shift needs at least one coordinate")
        check_bases([z.base for z in sigma])
        if len({z.precision for z in sigma}) != 1:
            raise IncompatibleOperandsError("all shift components must share one precision")
        object.__setattr__(self, "sigma", sigma)

    @property
    def bases(self):
        return tuple(z.base for z in self.sigma)

    @property
    def precision(self):
        return self.sigma[0].precision

    @classmethod
    def zero(cls, bases, precision=None):
        bases = check_bases(bases)
        P = shared_precision(bases) if precision is None else precision
        return cls(tuple(PAdicNumber.zero(p, P) for p in bases))

    @classmethod
    def from_values(cls, values, bases, precision=None):
        """Explicit shift given by points of [0, 1) (Fractions are exact)."""
        bases = check_bases(bases)
        P = shared_precision(bases) if precision is None else precision
        return cls(tuple(monna_inverse(v, p, P) for v, p in zip(values, bases, strict=True)))

    def values(self):
        return tuple(monna_map(z) for z in self.sigma)

    def as_ints(self):
        return tuple(z.to_int() for z in self.sigma)


def _check_shift(x, sigma):
    if tuple(x.bases) != tuple(sigma.bases):
        raise IncompatibleOperandsError(f"point bases {x.bases} != shift bases {sigma.bases}")


def _combine(x, sigma, op):
    _check_shift(x, sigma)
    coords = []
    for c, z in zip(x.coords, sigma.sigma):
        w = op(monna_inverse(c, z.base, z.precision), z)
        coords.append(monna_map_fraction(w) if isinstance(c, Rational) else monna_map(w))
    return UnitPoint(tuple(coords), x.bases)


def shift_point(x, sigma):
    """Coordinatewise ``phi(phi^+(x_j) + sigma_j)`` with addition in Z_{p_j}.

    Exact (Fraction) coordinates stay exact; doubles come back as doubles.
    """
    return _combine(x, sigma, padic_add)


def unshift_point(x, sigma):
    """Inverse of :func:`shift_point` (subtraction in Z_{p_j})."""
    return _combine(x, sigma, padic_sub)


def sample_shift(bases, precision=None, seed=0, replicate=0):
    """Random shift with i.i.d. uniform digits from a counter-based stream.

    Digit ``r`` of coordinate ``j`` depends only on ``(seed, replicate, j, r)``.
    """
    bases = check_bases(bases)
    P = shared_precision(bases) if precision is None else int(precision)
    if P < 1:
        raise DomainError("precision must be at least 1")
    sigma = tuple(
        PAdicNumber(p, tuple(uniform_digits(p, P, seed, replicate, j)))
        for j, p in enumerate(bases))
    return Shift(sigma, ("sampled", int(seed), int(replicate)))


def shift_digits_array(shift):
    """Shift digits as an ``(s, P)`` integer array (row j, column r)."""
    return np.array([z.digits for z in shift.sigma], dtype=np.int64)
