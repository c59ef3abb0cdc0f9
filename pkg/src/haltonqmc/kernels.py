"""Reproducing kernels and the coefficients of their p-adic shift-invariant
versions.

Shift-invariant kernels are diagonal in the beta system,
``K_sh(x, y) = sum_k r(k) beta_k(x) conj(beta_k(y))``, and ``r(k)`` depends on
k only through its digit length ``a`` and leading digit.  Grouping the sum by
``(a, leading digit)`` collapses the inner sums into character sums that are
either 0 or ``p^(a-1)``, which gives the O(g p) evaluation in
:func:`kernel_by_difference`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DomainError, IncompatibleOperandsError, NumericalConsistencyError
from .functions import IndexBox, beta_multi, digit_length, leading_digit
from .padic import monna_inverse
from .primes import check_bases, check_prime

ONE, W, UNANCHORED = "one", "w", "unanchored"


@dataclass(frozen=True)
class WeightedSpace:
    """Bases, product weights and (for the Korobov-type space) smoothness.

    ``anchor`` is ``"one"`` (the default anchored Sobolev space), ``"w"``
    with the anchor point in ``w``, or ``"unanchored"``.  Giving ``alpha``
    selects the Korobov-type p-adic space instead of a Sobolev space.
    """

    bases: tuple
    gamma: tuple
    alpha: Optional[tuple] = None
    anchor: str = ONE
    w: Optional[tuple] = None

    def __post_init__(self):
        bases = check_bases(self.bases)
        gamma = tuple(float(g) for g in self.gamma)
        if len(gamma) != len(bases):
            raise IncompatibleOperandsError("gamma and bases differ in length")
        if any(not g > 0 for g in gamma):
            raise DomainError("weights must be positive")
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "gamma", gamma)
        if self.alpha is not None:
            alpha = tuple(float(a) for a in self.alpha)
            if len(alpha) != len(bases) or any(not a > 1 for a in alpha):
                raise DomainError("alpha needs one value > 1 per coordinate")
            object.__setattr__(self, "alpha", alpha)
        if self.anchor not in (ONE, W, UNANCHORED):
            raise DomainError(f"unknown anchor {self.anchor!r}")
        if self.anchor == W:
            if self.w is None or len(self.w) != len(bases):
                raise DomainError("anchor 'w' needs one anchor value per coordinate")
            w = tuple(float(v) for v in self.w)
            if any(not 0 <= v <= 1 for v in w):
                raise DomainError("anchor components must lie in [0, 1]")
            object.__setattr__(self, "w", w)

    @property
    def dim(self):
        return len(self.bases)

    @property
    def is_korobov(self):
        return self.alpha is not None

    def coefficients(self, j):
        """Shift-invariant coefficient family of coordinate j."""
        p, g = self.bases[j], self.gamma[j]
        if self.is_korobov:
            return KorobovCoefficients(p, g, self.alpha[j])
        if self.anchor == UNANCHORED:
            return SobolevCoefficients(p, g, r0=1.0)
        if self.anchor == W:
            return SobolevCoefficients(p, g, r0=anchor_w_r0(g, self.w[j]))
        return SobolevCoefficients(p, g)

    def describe(self):
        if self.is_korobov:
            return "korobov"
        return "sobolev" if self.anchor == ONE else f"sobolev-{self.anchor}"


def _coords(x):
    return tuple(getattr(x, "coords", x))


def sobolev_kernel(space, x, y):
    """``prod_j (1 + gamma_j min(1 - x_j, 1 - y_j))`` (anchor one)."""
    x, y = _coords(x), _coords(y)
    if not len(x) == len(y) == space.dim:
        raise IncompatibleOperandsError("dimension mismatch")
    out = 1.0
    for g, a, b in zip(space.gamma, x, y):
        out *= 1.0 + g * min(1.0 - a, 1.0 - b)
    return out


def anchored_kernel_1d(gamma, w, x, y):
    """One factor of the Sobolev kernel with anchor w."""
    if (x - w) * (y - w) <= 0:
        return 1.0
    return 1.0 + gamma * min(abs(x - w), abs(y - w))


def bernoulli2(x):
    return x * x - x + 1.0 / 6.0


def unanchored_kernel(space, x, y):
    """``prod_j (1 + gamma_j (B2({x_j - y_j}) / 2 + (x_j - 1/2)(y_j - 1/2)))``."""
    x, y = _coords(x), _coords(y)
    if not len(x) == len(y) == space.dim:
        raise IncompatibleOperandsError("dimension mismatch")
    out = 1.0
    for g, a, b in zip(space.gamma, x, y):
        out *= 1.0 + g * (bernoulli2((a - b) % 1.0) / 2.0 + (a - 0.5) * (b - 0.5))
    return out


def kernel(space, x, y):
    """Evaluate the reproducing kernel of a Sobolev-type space."""
    if space.is_korobov:
        raise DomainError("the Korobov-type kernel is only available as a series")
    if space.anchor == UNANCHORED:
        return unanchored_kernel(space, x, y)
    if space.anchor == W:
        x, y = _coords(x), _coords(y)
        return math.prod(anchored_kernel_1d(g, w, a, b)
                         for g, w, a, b in zip(space.gamma, space.w, x, y))
    return sobolev_kernel(space, x, y)


def sin_sq_inverse(kappa, p):
    return 1.0 / math.sin(kappa * math.pi / p) ** 2


def r_sobolev(p, gamma, k):
    """Coefficient of the shift-invariant anchored Sobolev kernel."""
    k = int(k)
    if k == 0:
        return 1.0 + gamma / 3.0
    a = digit_length(k, p)
    kappa = leading_digit(k, p)
    return gamma / (2.0 * p ** (2 * a)) * (sin_sq_inverse(kappa, p) - 1.0 / 3.0)


def r_sum_box(p, gamma, g):
    """``sum_{k < p^g} r_sobolev(p, gamma, k)`` in closed form."""
    return 1.0 + gamma / 3.0 + gamma / 6.0 * (1.0 - float(p) ** -g)


def r_sum_total(gamma):
    return 1.0 + gamma / 2.0


def r_sum_box_multi(bases, gammas, g):
    return math.prod(r_sum_box(p, ga, gj) for p, ga, gj in zip(bases, gammas, g))


def r_sum_total_multi(gammas):
    return math.prod(r_sum_total(ga) for ga in gammas)


def r_tail_multi(bases, gammas, g):
    """``sum_{k outside the box} r(k)``, computed without cancellation.

    Telescopes ``prod(T_j) - prod(B_j)`` as
    ``sum_j (prod_{i<j} B_i) (T_j - B_j) prod_{i>j} T_i``.
    """
    boxes = [r_sum_box(p, ga, gj) for p, ga, gj in zip(bases, gammas, g)]
    totals = [r_sum_total(ga) for ga in gammas]
    tails = [ga / 6.0 * float(p) ** -gj for p, ga, gj in zip(bases, gammas, g)]
    return _telescoped(boxes, totals, tails)


def _telescoped(boxes, totals, tails):
    out = 0.0
    for j in range(len(boxes)):
        out += math.prod(boxes[:j]) * tails[j] * math.prod(totals[j + 1:])
    return out


def r_korobov(p, alpha, gamma, k):
    """``1`` for k = 0, ``gamma p^(-alpha floor(log_p k))`` otherwise."""
    if alpha <= 1:
        raise DomainError("alpha must exceed 1")
    k = int(k)
    if k == 0:
        return 1.0
    return gamma * float(p) ** (-alpha * (digit_length(k, p) - 1))


def korobov_sum_box(p, alpha, gamma, g):
    return 1.0 + gamma * (p - 1) * sum(float(p) ** (b * (1.0 - alpha)) for b in range(g))


def korobov_sum_total(p, alpha, gamma):
    return 1.0 + gamma * (p - 1) / (1.0 - float(p) ** (1.0 - alpha))


def korobov_tail(p, alpha, gamma, g):
    """``sum_{k >= p^g} r_korobov(k) = gamma (p-1) p^(g(1-alpha)) / (1 - p^(1-alpha))``."""
    q = float(p) ** (1.0 - alpha)
    return gamma * (p - 1) * q**g / (1.0 - q)


def korobov_tail_multi(bases, alphas, gammas, g):
    boxes = [korobov_sum_box(p, al, ga, gj) for p, al, ga, gj in zip(bases, alphas, gammas, g)]
    totals = [korobov_sum_total(p, al, ga) for p, al, ga in zip(bases, alphas, gammas)]
    tails = [korobov_tail(p, al, ga, gj) for p, al, ga, gj in zip(bases, alphas, gammas, g)]
    return _telescoped(boxes, totals, tails)


def anchor_w_r0(gamma, w):
    """Zero-frequency coefficient for the Sobolev space anchored at w."""
    if not 0 <= w <= 1:
        raise DomainError("anchor must lie in [0, 1]")
    return 1.0 + gamma * (w * w - w + 1.0 / 3.0)


class SobolevCoefficients:
    """r(k) of the shift-invariant Sobolev kernel, grouped by (a, leading digit)."""

    def __init__(self, p, gamma, r0=None):
        self.p = check_prime(p)
        self.gamma = float(gamma)
        self.r0 = 1.0 + self.gamma / 3.0 if r0 is None else float(r0)
        kappa = np.arange(1, self.p)
        self._shape = 1.0 / np.sin(kappa * np.pi / self.p) ** 2 - 1.0 / 3.0

    def level(self, a):
        """Coefficients for digit length a, indexed by leading digit 1..p-1."""
        return self.gamma / (2.0 * float(self.p) ** (2 * a)) * self._shape

    def __call__(self, k):
        return self.r0 if k == 0 else r_sobolev(self.p, self.gamma, k)

    def box_sum(self, g):
        return self.r0 - 1.0 - self.gamma / 3.0 + r_sum_box(self.p, self.gamma, g)

    def total(self):
        return self.r0 - 1.0 - self.gamma / 3.0 + r_sum_total(self.gamma)

    def tail(self, g):
        return self.gamma / 6.0 * float(self.p) ** -g


class KorobovCoefficients:
    """r(k) of the Korobov-type p-adic space."""

    def __init__(self, p, gamma, alpha):
        self.p = check_prime(p)
        self.gamma = float(gamma)
        self.alpha = float(alpha)
        if self.alpha <= 1:
            raise DomainError("alpha must exceed 1")
        self.r0 = 1.0

    def level(self, a):
        v = self.gamma * float(self.p) ** (-self.alpha * (a - 1))
        return np.full(self.p - 1, v)

    def __call__(self, k):
        return r_korobov(self.p, self.alpha, self.gamma, k)

    def box_sum(self, g):
        return korobov_sum_box(self.p, self.alpha, self.gamma, g)

    def total(self):
        return korobov_sum_total(self.p, self.alpha, self.gamma)

    def tail(self, g):
        return korobov_tail(self.p, self.alpha, self.gamma, g)


def kernel_by_difference(coeffs, z, g=None):
    """``sum_{k < p^g} r(k) e(phi_p(k) z)`` for an int64 array of differences z.

    ``z`` holds ``phi^+(x) - phi^+(y)``; only its residue mod p^g matters.
    With ``g=None`` the full series is summed: for z != 0 only digit lengths
    up to ``v_p(z) + 1`` contribute, for z = 0 the value is the total sum.
    Leading digits kappa and p - kappa carry equal coefficients and conjugate
    phases, so the sum is real and only cosines are needed.
    """
    p = coeffs.p
    z = np.asarray(z, dtype=np.int64)
    out = np.empty(z.shape, dtype=np.float64)
    zero = z == 0
    out[zero] = coeffs.total() if g is None else coeffs.box_sum(g)
    nz = ~zero
    zz = z[nz]
    acc = np.full(zz.shape, coeffs.r0)
    kappa = np.arange(1, p, dtype=np.int64)
    a = 1
    active = np.ones(zz.shape, dtype=bool)
    pa1 = 1  # p^(a-1)
    while (g is None or a <= g) and active.any():
        if pa1 * p >= 2**62 // p:
            raise DomainError("difference too large for int64 phase reduction")
        active &= (zz % pa1) == 0
        if not active.any():
            break
        mod = pa1 * p
        zr = zz[active] % mod
        phase = (zr[:, None] * kappa[None, :]) % mod
        contrib = np.cos(2.0 * np.pi * phase / mod) @ coeffs.level(a)
        acc[active] += pa1 * contrib
        a += 1
        pa1 *= p
    out[nz] = acc
    return out


def kernel_by_difference_exact(coeffs, z, g=None):
    """Scalar :func:`kernel_by_difference` with exact integer phases."""
    p = coeffs.p
    z = int(z)
    if z == 0 or (g is not None and z % p**g == 0):
        return coeffs.total() if g is None else coeffs.box_sum(g)
    kappa = np.arange(1, p)
    acc = coeffs.r0
    a = 1
    while g is None or a <= g:
        pa1 = p ** (a - 1)
        if z % pa1:
            break
        mod = pa1 * p
        zr = z % mod
        phase = np.array([(zr * int(k)) % mod for k in kappa], dtype=np.float64) / mod
        acc += pa1 * float(np.cos(2.0 * np.pi * phase) @ coeffs.level(a))
        a += 1
    return acc


def padic_difference(x, y, p, digits):
    """``(phi^+(x) - phi^+(y)) mod p^digits`` as an int."""
    mod = p**digits
    return (monna_inverse(x, p, digits).to_int() - monna_inverse(y, p, digits).to_int()) % mod


def shift_invariant_kernel(space, x, y, g):
    """Truncated shift-invariant kernel and a certified bound on the tail.

    Returns ``(value, tail_bound)`` where value sums k over the full box with
    cutoffs ``g`` and ``|K_sh(x, y) - value| <= tail_bound``.
    """
    x, y = _coords(x), _coords(y)
    g = _expand_g(g, space.dim)
    value = 1.0
    boxes, totals, tails = [], [], []
    for j, p in enumerate(space.bases):
        c = space.coefficients(j)
        z = padic_difference(x[j], y[j], p, g[j])
        value *= kernel_by_difference_exact(c, z, g[j])
        boxes.append(c.box_sum(g[j]))
        totals.append(c.total())
        tails.append(c.tail(g[j]))
    return value, _telescoped(boxes, totals, tails)


def shift_invariant_kernel_enumerate(space, x, y, g):
    """Same partial sum by explicit enumeration of the box (small boxes only)."""
    x, y = _coords(x), _coords(y)
    g = _expand_g(g, space.dim)
    coeffs = [space.coefficients(j) for j in range(space.dim)]
    total = 0.0 + 0.0j
    for k in IndexBox(g, space.bases):
        r = math.prod(c(kj) for c, kj in zip(coeffs, k))
        total += r * beta_multi(space.bases, k, x) * beta_multi(space.bases, k, y).conjugate()
    if abs(total.imag) > 1e-10:
        raise NumericalConsistencyError(f"imaginary part {total.imag} in a real kernel")
    return total.real


def _expand_g(g, s):
    if isinstance(g, int):
        return (g,) * s
    g = tuple(int(v) for v in g)
    if len(g) != s:
        raise IncompatibleOperandsError("one cutoff per coordinate is required")
    if any(v < 1 for v in g):
        raise DomainError("cutoffs must be at least 1")
    return g
