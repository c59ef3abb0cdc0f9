"""L2-discrepancies of point sets.

The weighted L2-discrepancy sums, over nonempty coordinate subsets u, the
weight ``gamma_u = prod_{j in u} gamma_j`` times the squared L2 norm of the
local discrepancy of the projection onto u.  It coincides with the worst-case
error in the anchored Sobolev space, which gives the fast closed form.  A
per-subset Warnock evaluation and a midpoint-rule quadrature of the local
discrepancy serve as independent cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (_expand, clamp_nonnegative, fit_loglog, pairwise_min_product_sum,
                     replicate_prefix_values, summarize, wce_sq_sobolev)
from .exceptions import DomainError, ResourceError
from .halton import as_array

#: Largest dimension accepted by the subset-enumeration route.
MAX_SUBSET_DIM = 20

#: Default number of cells per axis for the quadrature oracle.
QUADRATURE_GRID = 2048

CLOSED_FORM, SUBSET, QUADRATURE = "closed_form", "subset", "quadrature"


@dataclass(frozen=True)
class DiscrepancyResult:
    """A squared L2-discrepancy together with how it was obtained."""

    l2_sq: float
    method: str
    weights: str = "unweighted"
    grid: Optional[int] = None

    def __post_init__(self):
        if self.l2_sq < 0:
            raise DomainError("squared discrepancy must be nonnegative")

    @property
    def l2(self):
        return math.sqrt(self.l2_sq)


def _check_unit(x):
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError("points must lie in [0, 1]^s")
    return x


def local_discrepancy(points, t):
    """``#{n : x_n in [0, t)} / N - prod_j t_j`` with a half-open box."""
    x = as_array(points)
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if t.shape != (x.shape[1],):
        raise DomainError(f"corner has {t.size} coordinates, points have {x.shape[1]}")
    if np.any(t < 0) or np.any(t > 1):
        raise DomainError("box corner must lie in [0, 1]^s")
    inside = np.all(x < t[None, :], axis=1)
    return float(np.count_nonzero(inside)) / x.shape[0] - float(np.prod(t))


def unweighted_l2_sq(points):
    """Classical L2 star discrepancy squared (Warnock's formula).

    ``3^-s - (2/N) sum_n prod_j (1 - x_nj^2) / 2
    + N^-2 sum_{m,n} prod_j (1 - max(x_mj, x_nj))``.
    """
    x = _check_unit(as_array(points))
    N, s = x.shape
    first = 3.0**-s
    second = math.fsum(np.prod((1.0 - x * x) / 2.0, axis=1))
    third = pairwise_min_product_sum(x, np.zeros(s), np.ones(s))
    return clamp_nonnegative(first - 2.0 * second / N + third / (N * N))


def _subset_sum(x, gamma):
    """Warnock's formula on every projection, weighted and summed.

    Subsets are visited depth first so each one extends its parent's
    running products by a single coordinate.
    """
    N, s = x.shape
    half = (1.0 - x * x) / 2.0
    comp = [1.0 - np.maximum(x[:, j, None], x[None, :, j]) for j in range(s)]
    terms = []

    def visit(start, weight, size, single, pair):
        for j in range(start, s):
            w = weight * gamma[j]
            sj = single * half[:, j]
            pj = pair * comp[j]
            k = size + 1
            terms.append(w * (3.0**-k - 2.0 * math.fsum(sj) / N
                              + math.fsum(pj.ravel()) / (N * N)))
            visit(j + 1, w, k, sj, pj)

    visit(0, 1.0, 0, np.ones(N), np.ones((N, N)))
    return math.fsum(terms)


def weighted_l2_sq(points, gamma, method=CLOSED_FORM):
    """Weighted L2-discrepancy squared with product weights.

    ``method="closed_form"`` uses the anchored Sobolev worst-case error;
    ``method="subset"`` evaluates Warnock's formula per projection
    (2^s subsets, limited to ``s <= 20``).
    """
    x = _check_unit(as_array(points))
    s = x.shape[1]
    gamma = _expand(gamma, s)
    if method == CLOSED_FORM:
        return wce_sq_sobolev(x, gamma)
    if method == SUBSET:
        if s > MAX_SUBSET_DIM:
            raise ResourceError(f"subset enumeration limited to s <= {MAX_SUBSET_DIM}")
        return clamp_nonnegative(_subset_sum(x, gamma))
    raise DomainError(f"unknown method {method!r}")


def _projection_counts(x, mids):
    """Counts ``#{n : x_n < t}`` at every midpoint corner t of the grid.

    A point is inside ``[0, t)`` exactly for the grid indices at or above
    ``searchsorted(mids, x, 'right')``, so the counts are a cumulative
    histogram of those first indices.
    """
    G = mids.size
    N, d = x.shape
    first = np.searchsorted(mids, x, side="right")
    hist = np.zeros((G + 1,) * d, dtype=np.int64)
    np.add.at(hist, tuple(first[:, j] for j in range(d)), 1)
    for axis in range(d):
        hist = np.cumsum(hist, axis=axis)
    return hist[(slice(0, G),) * d]


def quadrature_l2_sq(points, gamma=None, grid=QUADRATURE_GRID):
    """Midpoint-rule oracle for the (weighted) L2-discrepancy, ``s <= 2``.

    ``gamma=None`` integrates the full-dimensional local discrepancy only,
    i.e. the classical star discrepancy; otherwise every nonempty projection
    is integrated and weighted.
    """
    x = _check_unit(as_array(points))
    N, s = x.shape
    if s > 2:
        raise ResourceError("the quadrature oracle is limited to s <= 2")
    G = int(grid)
    if G < 1:
        raise DomainError("grid must be positive")
    mids = (np.arange(G) + 0.5) / G
    if gamma is None:
        subsets = [tuple(range(s))]
        weights = [1.0]
    else:
        gamma = _expand(gamma, s)
        subsets = [(0,), (1,), (0, 1)][: (1 if s == 1 else 3)]
        weights = [math.prod(gamma[j] for j in u) for u in subsets]
    total = []
    for u, w in zip(subsets, weights):
        counts = _projection_counts(x[:, list(u)], mids)
        vol = mids
        for _ in range(len(u) - 1):
            vol = np.multiply.outer(vol, mids)
        delta = counts / N - vol
        total.append(w * float(np.mean(delta * delta)))
    return math.fsum(total)


def discrepancy(points, gamma=None, method=CLOSED_FORM, grid=QUADRATURE_GRID):
    """Dispatch to one of the routes and wrap the value in a result."""
    if method == QUADRATURE:
        value = quadrature_l2_sq(points, gamma, grid)
    elif gamma is None:
        if method != CLOSED_FORM:
            raise DomainError("the subset route needs weights")
        value = unweighted_l2_sq(points)
    else:
        value = weighted_l2_sq(points, gamma, method)
    if gamma is None:
        label = "unweighted"
    else:
        label = "gamma=" + ";".join(format(float(g), ".17g") for g in np.atleast_1d(gamma))
    return DiscrepancyResult(value, method, label, grid if method == QUADRATURE else None)


@dataclass
class RmsRecord:
    N: int
    mean: float
    stderr: float
    rms: float
    ratio: float
    min_value: float
    best_replicate: int

    CSV_HEADER = ("N", "l2_sq_mean", "l2_sq_stderr", "rms", "ratio",
                  "l2_sq_min", "best_replicate")

    def csv_row(self):
        return [self.N, self.mean, self.stderr, self.rms, self.ratio,
                self.min_value, self.best_replicate]


@dataclass
class RmsExperiment:
    records: list
    slope: float
    intercept: float
    r2: float
    seed: int


def log_ratio(N, rms, s):
    """``N * rms / (log N)^(s/2)``; the rate is bounded iff this ratio is."""
    return N * rms / math.log(N) ** (s / 2.0)


def rms_l2_experiment(spec, Ns, M, seed, threads=None, gamma=None):
    """Monte Carlo RMS L2-discrepancy over M random shifts for each N.

    Every shift produces one block of ``max(Ns)`` points whose prefixes give
    the smaller rules.  The log-log slope is fitted to ``sqrt(mean)``.
    """
    Ns = [int(n) for n in Ns]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise DomainError("the N grid must be strictly increasing")
    if Ns[0] < 2:
        raise DomainError("N must be at least 2 for the log ratio")
    if M < 2:
        raise DomainError("at least two replicates are required")
    if gamma is None:
        fn = unweighted_l2_sq
    else:
        g = _expand(gamma, spec.dim)
        fn = lambda pts: weighted_l2_sq(pts, g)  # noqa: E731
    values = replicate_prefix_values(spec, Ns, M, seed, fn, threads)
    records = []
    for N, row in zip(Ns, values):
        res = summarize(row)
        rms = math.sqrt(res.mean)
        records.append(RmsRecord(N, res.mean, res.stderr, rms, log_ratio(N, rms, spec.dim),
                                 res.best_value, res.best_replicate))
    slope, intercept, r2 = fit_loglog(Ns, [r.rms for r in records])
    return RmsExperiment(records, slope, intercept, r2, seed)
