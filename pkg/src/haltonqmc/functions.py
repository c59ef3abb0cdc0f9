"""The p-adic function system: beta_k, character sums over Halton prefixes,
orthonormality checks and index boxes."""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import DomainError, IncompatibleOperandsError, NumericalConsistencyError, ResolutionError
from .padic import float_digits, monna_inverse, radical_inverse_fraction
from .primes import check_bases, check_prime

TWO_PI = 2.0 * math.pi


def digit_length(k, p):
    """Number of base-p digits of k (0 for k = 0)."""
    k = int(k)
    if k < 0:
        raise DomainError("frequency index must be nonnegative")
    a = 0
    while k:
        k //= p
        a += 1
    return a


def leading_digit(k, p):
    """Most significant base-p digit of k > 0 (0 for k = 0)."""
    k = int(k)
    if k == 0:
        return 0
    while k >= p:
        k //= p
    return k


def phi_numerator(k, p):
    """``(K, a)`` with ``phi_p(k) = K / p**a`` and a the digit length of k."""
    a = digit_length(k, p)
    K = 0
    for _ in range(a):
        k, d = divmod(k, p)
        K = K * p + d
    return K, a


def e(t):
    """``exp(2 pi i t)`` for an exact fraction t, reduced mod 1 first."""
    t = Fraction(t) % 1
    return cmath.exp(1j * TWO_PI * float(t))


@dataclass(frozen=True)
class FrequencyIndex:
    """A frequency vector k with its per-coordinate digit structure."""

    k: tuple
    bases: tuple

    def __post_init__(self):
        bases = check_bases(self.bases)
        k = tuple(int(v) for v in self.k)
        if len(k) != len(bases):
            raise IncompatibleOperandsError(f"{len(k)} frequencies but {len(bases)} bases")
        if any(v < 0 for v in k):
            raise DomainError("frequencies must be nonnegative")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "bases", bases)
        if any(k):
            th = self.theta
            # distinct primes: the reduced denominator is prod p_j^{a_j} > 1
            if th == 0 or th.denominator != math.prod(p**a for p, a in zip(bases, self.lengths)):
                raise NumericalConsistencyError(f"degenerate theta {th} for k={k}")

    @property
    def lengths(self):
        return tuple(digit_length(v, p) for v, p in zip(self.k, self.bases))

    @property
    def leading_digits(self):
        return tuple(leading_digit(v, p) for v, p in zip(self.k, self.bases))

    @property
    def theta(self):
        """``sum_j phi_{p_j}(k_j) mod 1`` as an exact fraction."""
        return sum((radical_inverse_fraction(p, v) for v, p in zip(self.k, self.bases)),
                   Fraction(0)) % 1

    def is_zero(self):
        return not any(self.k)


def beta(p, k, x):
    """``beta_k(x) = exp(2 pi i phi_p(k) phi_p^+(x))``.

    Only the first ``a`` digits of x matter, a being the digit length of k;
    the product is reduced modulo p^a in integers before the exponential.
    """
    p = check_prime(p)
    K, a = phi_numerator(k, p)
    if a == 0:
        return 1.0 + 0.0j
    z = monna_inverse(x, p, a).to_int()
    return cmath.exp(1j * TWO_PI * ((K * z) % p**a) / p**a)


def beta_multi(bases, k, x):
    """Product of the one-dimensional beta values."""
    if isinstance(k, FrequencyIndex):
        k = k.k
    coords = getattr(x, "coords", x)
    if not (len(bases) == len(k) == len(coords)):
        raise IncompatibleOperandsError("dimension mismatch")
    out = 1.0 + 0.0j
    for p, kj, xj in zip(bases, k, coords):
        out *= beta(p, kj, xj)
    return out


def leading_digits_array(x, p, a):
    """Integer ``floor(x p^a)`` for an array of doubles, consistent with
    :func:`monna_inverse` (exact for p = 2, snapped at float resolution
    otherwise)."""
    x = np.asarray(x, dtype=np.float64)
    if p == 2:
        return np.floor(np.ldexp(x, a)).astype(np.int64)
    D = float_digits(p)
    top = np.rint(x * float(p**D)).astype(np.int64)
    top = np.minimum(top, p**D - 1)
    if a <= D:
        return top // p ** (D - a)
    return top * p ** (a - D)


def _reverse_array(m, p, a):
    out = np.zeros_like(m)
    for _ in range(a):
        out = out * p + m % p
        m = m // p
    return out


def beta_array(p, k, x):
    """Vectorised :func:`beta` over an array of coordinates."""
    K, a = phi_numerator(k, p)
    x = np.asarray(x, dtype=np.float64)
    if a == 0:
        return np.ones(x.shape, dtype=np.complex128)
    if p ** (2 * a) >= 2**62:
        return np.array([beta(p, k, float(v)) for v in x.ravel()]).reshape(x.shape)
    z = _reverse_array(leading_digits_array(x, p, a), p, a)
    mod = p**a
    return np.exp(1j * TWO_PI * ((K * z) % mod) / mod)


def _e_ratio(num, den):
    return cmath.exp(1j * TWO_PI * (num % den) / den)


def _sin_pi(num, den):
    """``sin(pi num / den)`` with the argument reduced exactly into [0, pi/2]."""
    m = num % (2 * den)
    sign = 1.0
    if m >= den:
        m -= den
        sign = -1.0
    if 2 * m > den:
        m = den - m
    return sign * math.sin(math.pi * m / den)


def char_sum_halton(bases, k, N, start_index=0, shift=None):
    """``sum_{n=start}^{start+N-1} beta_k(x_n)`` over the Halton sequence.

    Uses ``beta_k(x_n) = e(n theta)`` with the exact fraction theta, so the
    sum is a geometric series.  It is evaluated as
    ``e((N - 1) theta / 2) sin(pi N theta) / sin(pi theta)`` with both sine
    arguments reduced in integer arithmetic, which stays accurate when theta
    is close to an integer.  A shift multiplies it by ``beta_k(sigma)``.
    """
    if not isinstance(k, FrequencyIndex):
        k = FrequencyIndex(tuple(k), tuple(bases))
    N = int(N)
    if N < 1:
        raise DomainError("N must be at least 1")
    if k.is_zero():
        return complex(N)
    th = k.theta
    num, den = th.numerator, th.denominator
    total = _e_ratio((N - 1) * num, 2 * den) * (_sin_pi(N * num, den) / _sin_pi(num, den))
    if start_index:
        total *= _e_ratio(start_index * num, den)
    if shift is not None:
        total *= shift_character(k, shift)
    return total


def shift_character(k, shift):
    """``chi_k(sigma) = prod_j e(phi(k_j) sigma_j)`` with sigma in Z_p."""
    phase = Fraction(0)
    for kj, p, z in zip(k.k, k.bases, shift.sigma):
        K, a = phi_numerator(kj, p)
        if a:
            phase += Fraction(K * (z.to_int() % p**a), p**a)
    return e(phase)


def char_sum_direct(bases, k, N, start_index=0, points=None):
    """Direct summation of beta_k over Halton points, digit by digit.

    The digits are read off the (exact) Halton coordinates, so this route
    shares nothing with the geometric closed form.
    """
    if isinstance(k, FrequencyIndex):
        k = k.k
    bases = check_bases(bases)
    if points is None:
        from .halton import HaltonSpec, halton_block
        points = halton_block(HaltonSpec(bases, start_index), N).points
    vals = np.ones(points.shape[0], dtype=np.complex128)
    for j, (p, kj) in enumerate(zip(bases, k)):
        vals *= beta_array(p, kj, points[:, j])
    return complex(vals.sum())


def gram_check(p, g, Q=None):
    """Max entrywise deviation of the Gram matrix of {beta_k : k < p^g} from I.

    All these functions are constant on the p^g cells of width p^-g, so
    averaging over the midpoints of Q equal cells (Q a multiple of p^g) gives
    the L2 inner products exactly.
    """
    p = check_prime(p)
    size = p**g
    Q = size if Q is None else int(Q)
    if Q % size:
        raise ResolutionError(f"Q={Q} is not a multiple of p^g={size}")
    mids = (np.arange(Q) + 0.5) / Q
    B = np.stack([beta_array(p, k, mids) for k in range(size)])
    G = B @ B.conj().T / Q
    return float(np.max(np.abs(G - np.eye(size))))


FULL, PUNCTURED, INTERIOR = "full", "punctured", "interior"


@dataclass(frozen=True)
class IndexBox:
    """The frequency boxes used to truncate series.

    ``full``: 0 <= k_j < p_j^{g_j}; ``punctured``: full minus the zero vector;
    ``interior``: 1 <= k_j < p_j^{g_j}.
    """

    g: tuple
    bases: tuple
    mode: str = FULL

    def __post_init__(self):
        g = tuple(int(v) for v in self.g)
        bases = check_bases(self.bases)
        if len(g) != len(bases):
            raise IncompatibleOperandsError("g and bases differ in length")
        if any(v < 1 for v in g):
            raise DomainError("g_j must be at least 1")
        if self.mode not in (FULL, PUNCTURED, INTERIOR):
            raise DomainError(f"unknown box mode {self.mode!r}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "bases", bases)

    @property
    def size(self):
        if self.mode == INTERIOR:
            return math.prod(p**g - 1 for p, g in zip(self.bases, self.g))
        full = math.prod(p**g for p, g in zip(self.bases, self.g))
        return full - 1 if self.mode == PUNCTURED else full

    def __iter__(self):
        lo = 1 if self.mode == INTERIOR else 0
        ranges = [range(lo, p**g) for p, g in zip(self.bases, self.g)]
        for k in itertools.product(*ranges):
            if self.mode == PUNCTURED and not any(k):
                continue
            yield k
