"""Primality checks and small prime tables."""

import math

import numpy as np

from .exceptions import InvalidBaseError


def is_prime(n):
    """Deterministic trial division; bases used in practice are small."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def check_prime(p):
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool) or not is_prime(int(p)):
        raise InvalidBaseError(f"base must be a prime integer, got {p!r}")
    return int(p)


def check_bases(bases):
    """Validate a vector of pairwise distinct primes and return it as a tuple."""
    bases = tuple(check_prime(p) for p in bases)
    if not bases:
        raise InvalidBaseError("at least one base is required")
    if len(set(bases)) != len(bases):
        raise InvalidBaseError(f"bases must be pairwise distinct, got {bases}")
    return bases


def first_primes(count):
    """The first ``count`` primes, by a sieve of Eratosthenes."""
    if count <= 0:
        return []
    # p_n < n (log n + log log n) for n >= 6
    if count < 6:
        limit = 15
    else:
        limit = int(count * (math.log(count) + math.log(math.log(count)))) + 3
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    primes = np.flatnonzero(sieve)[:count]
    return [int(p) for p in primes]
