"""Brute-force oracles for the closed forms, runnable as a named check suite.

Each oracle is written against the definitions rather than the fast routines
it checks: cell decompositions, direct trigonometric sums, quadrature over
shifts and direct summation of the function system over point digits.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import parallel_map, wce_sq_sobolev
from .exceptions import DomainError, ResourceError
from .functions import gram_check
from .halton import HaltonSpec, halton_block
from .kernels import WeightedSpace, r_sobolev, r_sum_box, r_sum_total, shift_invariant_kernel
from .padic import (PAdicNumber, Shift, UnitPoint, monna_inverse, monna_map, monna_map_fraction,
                    radical_inverse_fraction, sample_shift, shift_point, unshift_point)
from .primes import check_bases, check_prime, first_primes
from .rng import integers, uniform01

#: Resolutions and tolerances used by :func:`run_suite`.
MANIFEST = {
    "sin_sum": {"primes_up_to": 101, "tolerance": 1e-8},
    "tau": {"bases": (2, 3, 5), "max_digits": 3, "tolerance": 1e-12},
    "khat0": {"cases": ((0.0, 64, 1e-12), (1.0, 1024, 1e-5), (3.0, 4096, 1e-6))},
    "gram": {"cases": ((2, 4), (3, 3), (5, 2)), "tolerance": 1e-12},
    "le2": {"bases": (2, 3, 5, 7), "gammas": (0.5, 1.0, 2.0), "max_g": 12, "tolerance": 1e-13},
    "errl2disc": {"sets": 200, "max_dim": 3, "max_N": 64, "tolerance": 1e-10},
    "single_point": {"gammas": (0.25, 1.0, 1.7), "tolerance": 1e-14},
    "shift_kernel": {"bases": (2, 3), "pairs": 20, "g": 12, "cells": {2: 2**14, 3: 3**9},
                     "tolerance": 1e-3},
    "char_sum": {"bases": ((2, 3), (2, 3, 5)), "samples": 10_000, "max_N": 2**12,
                 "tolerance": 1e-9},
    "bdt": {"cases": (((2,), (0,)), ((3,), (0,)), ((2, 3), (0, 0)), ((2, 3), (2, 1)),
                      ((2, 3, 5), (1, 1, 0)), ((5, 7), (1, 1)))},
    "padic": {"trials": 500},
    "measure": {"samples": 4096, "critical": 2.0},
    "halton_table": {},
}


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check: ``measured`` is compared against ``tolerance``."""

    name: str
    passed: bool
    measured: float
    tolerance: float

    def csv_row(self):
        return [self.name, "pass" if self.passed else "fail", self.measured, self.tolerance]


def _digits_msb(u, p, a):
    """Digits of u (0 <= u < p^a), most significant first."""
    out = []
    for _ in range(a):
        u, d = divmod(u, p)
        out.append(d)
    return out[::-1]


# ---------------------------------------------------------------- tau

def tau_closed_form(p, k):
    """``p^{-2a} (1/3 - 1/sin^2(kappa pi / p))`` with kappa the leading digit."""
    a, kappa = 0, 0
    m = k
    while m:
        kappa = m
        m //= p
        a += 1
    return (1.0 / 3.0 - 1.0 / math.sin(kappa * math.pi / p) ** 2) / p ** (2 * a)


def tau_brute_force(p, k):
    """``int int |x - y| conj(beta_k(x)) beta_k(y)`` by the cell decomposition.

    beta_k is constant on the p^a cells of width p^-a; on cell u its phase is
    ``sum_r kappa_r (digit r+1 of u) ...`` read directly from the digits.
    """
    a = 0
    m = k
    kd = []
    while m:
        m, d = divmod(m, p)
        kd.append(d)
        a += 1
    n = p**a
    # phi(k) = sum_r kd[r] p^{-r-1}; phi^+(x) on cell u = sum_i u_{i+1} p^i
    phase = np.empty(n)
    for u in range(n):
        ud = _digits_msb(u, p, a)
        t = Fraction(0)
        for r, kr in enumerate(kd):
            for i, ui in enumerate(ud):
                t += Fraction(kr * ui * p**i, p ** (r + 1))
        phase[u] = float(t % 1)
    b = np.exp(2j * np.pi * phase)
    idx = np.arange(n)
    cell = np.abs(idx[:, None] - idx[None, :]).astype(np.float64)
    cell[idx, idx] = 1.0 / 3.0
    cell /= float(p) ** (3 * a)
    value = np.conj(b) @ cell @ b
    return float(value.real)


def check_tau(p, k):
    """``(closed form, brute force, |difference|)`` for one index k >= 1."""
    p = check_prime(p)
    k = int(k)
    if k < 1:
        raise DomainError("tau is checked for k >= 1")
    a, m = 0, k
    while m:
        m //= p
        a += 1
    if p ** (2 * a) > 2**22:
        raise ResourceError("cell decomposition too large")
    closed = tau_closed_form(p, k)
    brute = tau_brute_force(p, k)
    return closed, brute, abs(closed - brute)


def _suite_tau(seed):
    cfg = MANIFEST["tau"]
    worst = 0.0
    for p in cfg["bases"]:
        for k in range(1, p ** cfg["max_digits"]):
            closed, brute, diff = check_tau(p, k)
            worst = max(worst, diff)
            for gamma in (0.5, 1.0, 2.0):
                r = r_sobolev(p, gamma, k)
                worst = max(worst, abs(-gamma / 2.0 * brute - r))
    return worst, cfg["tolerance"]


# ---------------------------------------------------------------- sin sum

def check_sin_sum(p):
    """``sum_{kappa=1}^{p-1} 1/sin^2(pi kappa/p)`` against ``(p^2 - 1)/3``."""
    p = check_prime(p)
    if p > 10**4:
        raise DomainError("p must be at most 10^4")
    lhs = math.fsum(1.0 / math.sin(math.pi * kappa / p) ** 2 for kappa in range(1, p))
    rhs = (p * p - 1) / 3.0
    return lhs, rhs, abs(lhs - rhs)


def _suite_sin_sum(seed):
    cfg = MANIFEST["sin_sum"]
    primes = [p for p in first_primes(30) if p <= cfg["primes_up_to"]]
    return max(check_sin_sum(p)[2] for p in primes), cfg["tolerance"]


# ---------------------------------------------------------------- k-hat(0, 0)

def check_khat0(gamma, Q):
    """Midpoint rule for ``int int 1 + gamma min(1-x, 1-y)`` against ``1 + gamma/3``."""
    Q = int(Q)
    if Q < 64:
        raise DomainError("Q must be at least 64")
    mids = (np.arange(Q) + 0.5) / Q
    parts = []
    for lo in range(0, Q, 256):
        blk = mids[lo:lo + 256]
        parts.append(float(np.sum(np.minimum(1.0 - blk[:, None], 1.0 - mids[None, :]))))
    quad = 1.0 + gamma * math.fsum(parts) / (Q * Q)
    return abs(quad - (1.0 + gamma / 3.0))


def _suite_khat0(seed):
    ratios = [check_khat0(g, Q) / tol for g, Q, tol in MANIFEST["khat0"]["cases"]]
    return max(ratios), 1.0


# ---------------------------------------------------------------- Gram matrix

def _suite_gram(seed):
    cfg = MANIFEST["gram"]
    return max(gram_check(p, g) for p, g in cfg["cases"]), cfg["tolerance"]


# ---------------------------------------------------------------- coefficient box sums

def r_box_direct(p, gamma, g, enumerate_limit=10**5):
    """``sum_{k < p^g} r(k)`` term by term (or level by level when huge).

    Above ``enumerate_limit`` indices the terms are grouped by digit length
    and leading digit, each group holding p^(a-1) equal terms.
    """
    if p**g <= enumerate_limit:
        return math.fsum(r_sobolev(p, gamma, k) for k in range(p**g))
    terms = [1.0 + gamma / 3.0]
    for a in range(1, g + 1):
        for kappa in range(1, p):
            terms.append(p ** (a - 1) * r_sobolev(p, gamma, kappa * p ** (a - 1)))
    return math.fsum(terms)


def _suite_le2(seed):
    cfg = MANIFEST["le2"]
    worst = 0.0
    for p in cfg["bases"]:
        for gamma in cfg["gammas"]:
            for g in range(1, cfg["max_g"] + 1):
                closed = r_sum_box(p, gamma, g)
                worst = max(worst, abs(r_box_direct(p, gamma, g) - closed) / closed)
            # sixty levels leave a tail far below double resolution
            total = r_sum_total(gamma)
            worst = max(worst, abs(r_box_direct(p, gamma, 60) - total) / total)
    return worst, cfg["tolerance"]


# ---------------------------------------------------------------- discrepancy identity

def warnock_subset_sum(x, gamma):
    """Weighted L2-discrepancy by looping over every subset explicitly."""
    N, s = x.shape
    total = []
    for size in range(1, s + 1):
        for u in itertools.combinations(range(s), size):
            xu = x[:, list(u)]
            w = math.prod(gamma[j] for j in u)
            a = 3.0**-size
            b = math.fsum(np.prod((1.0 - xu * xu) / 2.0, axis=1)) / N
            c = math.fsum(np.prod(1.0 - np.maximum(xu[:, None, :], xu[None, :, :]),
                                  axis=2).ravel()) / (N * N)
            total.append(w * (a - 2.0 * b + c))
    return math.fsum(total)


def _suite_errl2disc(seed):
    cfg = MANIFEST["errl2disc"]
    worst = 0.0
    for i in range(cfg["sets"]):
        dims = integers(1, cfg["max_dim"] + 1, 1, seed, i, 0)
        s = int(dims[0])
        N = int(integers(1, cfg["max_N"] + 1, 1, seed, i, 1)[0])
        x = uniform01(N * s, seed, i, 2).reshape(N, s)
        gamma = [2.0 * (1.0 - v) for v in uniform01(s, seed, i, 3)]
        worst = max(worst, abs(wce_sq_sobolev(x, gamma) - warnock_subset_sum(x, gamma)))
    return worst, cfg["tolerance"]


def _suite_single_point(seed):
    cfg = MANIFEST["single_point"]
    worst = 0.0
    for g in cfg["gammas"]:
        worst = max(worst, abs(wce_sq_sobolev([[1.0]], [g]) - g / 3.0),
                    abs(wce_sq_sobolev([[0.5]], [g]) - g / 12.0))
    return worst, cfg["tolerance"]


# ---------------------------------------------------------------- shift-invariant kernel

def _reflect(values, p, digits):
    numer = np.zeros_like(values)
    for _ in range(digits):
        numer = numer * p + values % p
        values = values // p
    return numer.astype(np.float64) / float(p) ** digits


@functools.lru_cache(maxsize=8)
def _midpoint_shifts(p, cells):
    """Digits of the shift cell midpoints as residues mod p^P, p^P < 2^62."""
    P = 0
    while p ** (P + 1) < 2**62:
        P += 1
    sig = np.array([monna_inverse(Fraction(2 * i + 1, 2 * cells), p, P).to_int()
                    for i in range(cells)], dtype=np.int64)
    sig.flags.writeable = False
    return P, sig


def shift_average_kernel(p, gamma, x, y, cells):
    """Average of the anchored kernel over shifts at the cell midpoints.

    Sums are formed in Z / p^P with ``p^P < 2^62`` using the digits of x, y
    and each shift midpoint, then mapped back with the radical inverse.
    """
    m = 0
    while p**m < cells:
        m += 1
    if p**m != cells:
        raise DomainError("the number of shift cells must be a power of p")
    P, sig = _midpoint_shifts(p, cells)
    mod = p**P
    xi = monna_inverse(x, p, P).to_int()
    yi = monna_inverse(y, p, P).to_int()
    xs = _reflect((sig + xi) % mod, p, P)
    ys = _reflect((sig + yi) % mod, p, P)
    vals = 1.0 + gamma * np.minimum(1.0 - xs, 1.0 - ys)
    return math.fsum(vals) / cells


def check_shift_invariant_kernel(p, gamma, pairs, g, cells):
    """Largest excess of |quadrature - series| over the series tail bound."""
    space = WeightedSpace((p,), (gamma,))
    worst = -math.inf
    for x, y in pairs:
        value, tail = shift_invariant_kernel(space, (x,), (y,), g)
        quad = shift_average_kernel(p, gamma, x, y, cells)
        worst = max(worst, abs(quad - value) - tail)
    return worst


def _suite_shift_kernel(seed):
    cfg = MANIFEST["shift_kernel"]
    worst = -math.inf
    for j, p in enumerate(cfg["bases"]):
        u = uniform01(2 * cfg["pairs"], seed, 0, 100 + j)
        pairs = list(zip(u[::2], u[1::2]))
        gamma = 1.0
        worst = max(worst, check_shift_invariant_kernel(p, gamma, pairs, cfg["g"],
                                                        cfg["cells"][p]))
    return max(worst, 0.0), cfg["tolerance"]


# ---------------------------------------------------------------- character sums

def _point_digits(x, p, a):
    """phi^+(x) read off the first a digits of each coordinate.

    The coordinates have at most a digits, so ``x p^a`` rounds to the exact
    integer whose digits, reversed, give phi^+(x).
    """
    m = np.rint(x * float(p**a)).astype(np.int64)
    out = np.zeros_like(m)
    for _ in range(a):
        m, d = np.divmod(m, p)
        out = out * p + d
    return out


def check_char_sum_bound(bases, samples, seed=0, max_N=2**12):
    """Max of ``|S_N(k)| |sin(pi theta)|`` over random k and N (direct sums)."""
    bases = check_bases(bases)
    s = len(bases)
    g = []
    for p in bases:
        a = 1
        while p**a < max_N:
            a += 1
        g.append(a)
    pts = halton_block(HaltonSpec(bases), max_N).points
    digits = [_point_digits(pts[:, j], p, gj) for j, (p, gj) in enumerate(zip(bases, g))]
    ks = np.stack([integers(0, p**gj, samples, seed, 0, j)
                   for j, (p, gj) in enumerate(zip(bases, g))], axis=1)
    Ns = integers(1, max_N + 1, samples, seed, 0, s)
    worst = 0.0
    for k, N in zip(ks, Ns):
        if not k.any():
            continue
        phase = np.zeros(int(N))
        theta = Fraction(0)
        for j, (p, kj) in enumerate(zip(bases, k)):
            phi = radical_inverse_fraction(p, int(kj))
            theta += phi
            a = 0
            while p**a < phi.denominator:
                a += 1
            if a:
                K = phi.numerator
                phase += ((K * (digits[j][:N] % p**a)) % p**a) / float(p**a)
        S = abs(np.exp(2j * np.pi * phase).sum())
        worst = max(worst, S * abs(math.sin(math.pi * float(theta % 1))))
    return worst


def _suite_char_sum(seed):
    cfg = MANIFEST["char_sum"]
    worst = max(check_char_sum_bound(b, cfg["samples"], seed, cfg["max_N"])
                for b in cfg["bases"])
    return worst - 1.0, cfg["tolerance"]


# ---------------------------------------------------------------- bdt

def check_bdt_small(bases, u):
    """``(sum 1/sin^2(pi sum_j phi(k_j)), (1/3) prod p_j^(2 u_j + 2))``.

    Each k_j runs over the indices with exactly u_j + 1 digits.
    """
    bases = check_bases(bases)
    u = [int(v) for v in u]
    if len(u) != len(bases):
        raise DomainError("one u per base is required")
    if math.prod(p ** (uj + 1) for p, uj in zip(bases, u)) > 10**6:
        raise ResourceError("digit box exceeds the enumeration budget")
    ranges = [range(p**uj, p ** (uj + 1)) for p, uj in zip(bases, u)]
    phis = [[radical_inverse_fraction(p, k) for k in r] for p, r in zip(bases, ranges)]
    terms = []
    for combo in itertools.product(*phis):
        t = sum(combo, Fraction(0)) % 1
        terms.append(1.0 / math.sin(math.pi * float(t)) ** 2)
    rhs = math.prod(p ** (2 * uj + 2) for p, uj in zip(bases, u)) / 3.0
    return math.fsum(terms), rhs


def _suite_bdt(seed):
    worst = max(lhs / rhs for lhs, rhs in (check_bdt_small(b, u)
                                           for b, u in MANIFEST["bdt"]["cases"]))
    return worst, 1.0


# ---------------------------------------------------------------- p-adic laws

def _suite_padic(seed):
    """Group laws, Monna round trips and shift round trips; counts failures."""
    failures = 0
    trials = MANIFEST["padic"]["trials"]
    for t in range(trials):
        p = (2, 3, 5, 7)[t % 4]
        P = 12
        a, b, c = (PAdicNumber(p, tuple(integers(0, p, P, seed, t, i))) for i in range(3))
        failures += (a + b) != (b + a)
        failures += ((a + b) + c) != (a + (b + c))
        failures += (a + (-a)) != PAdicNumber.zero(p, P)
        failures += (a - b) + b != a
        failures += monna_inverse(monna_map_fraction(a), p, P) != a
        failures += monna_inverse(monna_map(a), p, P) != a
        sigma = Shift((b,))
        x = UnitPoint((Fraction(int(integers(0, p**P, 1, seed, t, 3)[0]), p**P),), (p,))
        failures += unshift_point(shift_point(x, sigma), sigma) != x
    return float(failures), 0.0


def check_measure_preservation(p, sigma, n):
    """Kolmogorov-Smirnov distance, times sqrt(n), of a shifted equispaced grid."""
    grid = [Fraction(2 * i + 1, 2 * n) for i in range(n)]
    shifted = np.sort([float(shift_point(UnitPoint((x,), (p,)), sigma).coords[0]) for x in grid])
    i = np.arange(1, n + 1)
    D = max(np.max(i / n - shifted), np.max(shifted - (i - 1) / n))
    return float(D * math.sqrt(n))


def _suite_measure(seed):
    cfg = MANIFEST["measure"]
    worst = max(check_measure_preservation(p, sample_shift((p,), seed=seed), cfg["samples"])
                for p in (2, 3, 5))
    return worst, cfg["critical"]


def _suite_halton_table(seed):
    """The first points for bases (2, 3) against hand-written values."""
    expected = [(0, 0), (Fraction(1, 2), Fraction(1, 3)), (Fraction(1, 4), Fraction(2, 3)),
                (Fraction(3, 4), Fraction(1, 9)), (Fraction(1, 8), Fraction(4, 9))]
    pts = halton_block(HaltonSpec((2, 3)), len(expected)).points
    return float(np.max(np.abs(pts - np.array(expected, dtype=np.float64)))), 0.0


CHECKS = {
    "sin_sum": _suite_sin_sum,
    "tau": _suite_tau,
    "khat0": _suite_khat0,
    "gram": _suite_gram,
    "le2": _suite_le2,
    "errl2disc": _suite_errl2disc,
    "single_point": _suite_single_point,
    "shift_kernel": _suite_shift_kernel,
    "char_sum": _suite_char_sum,
    "bdt": _suite_bdt,
    "padic": _suite_padic,
    "measure": _suite_measure,
    "halton_table": _suite_halton_table,
}


def run_check(name, seed=0):
    if name not in CHECKS:
        raise DomainError(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")
    measured, tol = CHECKS[name](seed)
    return CheckResult(name, bool(measured <= tol), float(measured), float(tol))


def run_suite(only=None, seed=0, threads=None):
    """Run the named checks (all by default) and return results in suite order."""
    names = list(CHECKS) if not only else list(only)
    for n in names:
        if n not in CHECKS:
            raise DomainError(f"unknown check {n!r}; choose from {', '.join(CHECKS)}")
    return parallel_map(lambda n: run_check(n, seed), names, threads)
