"""Worst-case errors of Halton-based QMC rules.

Squared worst-case errors for a kernel K follow

    e^2 = int int K - (2/N) sum_n int K(x_n, y) dy + (1/N^2) sum_{m,n} K(x_m, x_n).

For the anchored Sobolev kernel the two integrals are
``A = prod_j (1 + gamma_j / 3)`` and ``B(x) = prod_j (1 + gamma_j (1 - x_j^2) / 2)``.
For shift-invariant kernels both integrals equal r(0), which leaves the
series ``sum_{k != 0} r(k) |S_N(k) / N|^2`` over Halton character sums.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import DomainError, NumericalConsistencyError, ResourceError
from .functions import IndexBox, char_sum_halton
from .halton import HaltonSpec, as_array, halton_block
from .kernels import WeightedSpace, kernel_by_difference, korobov_tail_multi, r_tail_multi
from .padic import sample_shift, shared_precision
from .primes import check_bases

#: Rows per block in the O(N^2) pairwise sums; fixed so results never depend
#: on how the work is scheduled.
ROW_BLOCK = 256

#: Values this far below zero are rounding noise and get clamped.
CLAMP_TOL = 1e-12

#: Above this many points the O(N^2) exact path is refused by the CLI.
EXACT_MAX_N = 2**15

#: Largest box enumerated term by term in ``method="enumerate"``.
ENUMERATE_MAX = 200_000


@dataclass
class ErrorReport:
    N: int
    space: str
    s: int
    e_sq: Optional[float] = None
    rms_estimate: Optional[tuple] = None  # (mean, standard error, M)
    series_value: Optional[tuple] = None  # (partial sum, tail bound)
    theory_bound: Optional[float] = None
    seed: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.e_sq is not None and self.e_sq < 0:
            raise NumericalConsistencyError("negative squared error")
        if self.series_value is not None and self.series_value[1] < 0:
            raise NumericalConsistencyError("negative tail bound")
        if self.rms_estimate is not None and self.rms_estimate[1] < 0:
            raise NumericalConsistencyError("negative standard error")

    CSV_HEADER = ("space", "s", "N", "M", "e_sq_mean", "e_sq_stderr",
                  "series_value", "series_tail", "theory_bound", "seed")

    def csv_row(self):
        mean = stderr = M = None
        if self.rms_estimate is not None:
            mean, stderr, M = self.rms_estimate
        elif self.e_sq is not None:
            mean = self.e_sq
        series, tail = self.series_value if self.series_value is not None else (None, None)
        return [self.space, self.s, self.N, M, mean, stderr, series, tail,
                self.theory_bound, self.seed]

    def as_text(self):
        lines = [f"space: {self.space}", f"s: {self.s}", f"N: {self.N}"]
        if self.e_sq is not None:
            lines.append(f"e_sq: {self.e_sq:.17g}")
        if self.rms_estimate is not None:
            m, se, M = self.rms_estimate
            lines.append(f"rms_estimate: mean={m:.17g} stderr={se:.17g} M={M}")
        if self.series_value is not None:
            v, t = self.series_value
            lines.append(f"series: value={v:.17g} tail_bound={t:.17g}")
        if self.theory_bound is not None:
            lines.append(f"theory_bound: {self.theory_bound:.17g}")
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        return "\n".join(lines)


def clamp_nonnegative(value, tol=CLAMP_TOL):
    if value < -tol:
        raise NumericalConsistencyError(f"squared error {value!r} is negative beyond rounding")
    return max(value, 0.0)


def pairwise_min_product_sum(x, const, weight):
    """``sum_{m,n} prod_j (const_j + weight_j (1 - max(x_mj, x_nj)))``.

    One dimension uses the sorted identity
    ``sum_{m,n} max(x_m, x_n) = sum_i x_(i) (2 i + 1)``.
    """
    x = np.asarray(x, dtype=np.float64)
    N, s = x.shape
    if s == 1:
        xs = np.sort(x[:, 0])
        sum_max = math.fsum(xs * (2.0 * np.arange(N) + 1.0))
        return const[0] * N * N + weight[0] * (N * N - sum_max)
    partial = []
    for lo in range(0, N, ROW_BLOCK):
        blk = x[lo:lo + ROW_BLOCK]
        prod = np.ones((blk.shape[0], N))
        for j in range(s):
            prod *= const[j] + weight[j] * (1.0 - np.maximum(blk[:, j, None], x[None, :, j]))
        partial.append(float(prod.sum()))
    return math.fsum(partial)


def sobolev_mean_A(gamma):
    """``int int K`` for the anchored Sobolev kernel."""
    return math.prod(1.0 + g / 3.0 for g in gamma)


def sobolev_mean_B(x, gamma):
    """``int K(x, y) dy`` for each row of x."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    return np.prod(1.0 + np.asarray(gamma) * (1.0 - x * x) / 2.0, axis=1)


def wce_sq_sobolev(points, gamma):
    """Squared worst-case error of the QMC rule on ``points`` (anchor one).

    Points may include coordinates equal to 1.  Values within 1e-12 below
    zero are clamped; anything more negative raises.
    """
    x = as_array(points)
    N, s = x.shape
    gamma = _expand(gamma, s)
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError("points must lie in [0, 1]^s")
    A = sobolev_mean_A(gamma)
    B = math.fsum(sobolev_mean_B(x, gamma))
    C = pairwise_min_product_sum(x, np.ones(s), np.asarray(gamma))
    return clamp_nonnegative(A - 2.0 * B / N + C / (N * N))


def _expand(gamma, s):
    if np.isscalar(gamma):
        return [float(gamma)] * s
    gamma = [float(g) for g in gamma]
    if len(gamma) < s:
        raise DomainError(f"{len(gamma)} weights for dimension {s}")
    return gamma[:s]


def resolve_threads(threads=None):
    if threads is None:
        env = os.environ.get("QMC_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def parallel_map(fn, items, threads=None):
    """Ordered map; the result never depends on the worker count."""
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class MonteCarloResult:
    mean: float
    stderr: float
    M: int
    values: np.ndarray
    best_replicate: int

    @property
    def best_value(self):
        return float(self.values[self.best_replicate])


def summarize(values):
    """Mean, unbiased standard error and arg-min of per-replicate values."""
    values = np.asarray(values, dtype=np.float64)
    M = len(values)
    mean = math.fsum(values) / M
    var = math.fsum((values - mean) ** 2) / (M - 1) if M > 1 else 0.0
    return MonteCarloResult(mean, math.sqrt(var / M), M, values, int(np.argmin(values)))


def replicate_prefix_values(spec, Ns, M, seed, fn, threads=None):
    """``fn(prefix)`` for each N in ``Ns`` and each of M sampled shifts.

    Returns an ``(len(Ns), M)`` array.  One block of ``max(Ns)`` points is
    generated per shift and reused for every prefix (open-type rule).
    """
    bases = spec.bases
    P = shared_precision(bases)
    Nmax = max(Ns)

    def one(r):
        sh = sample_shift(bases, P, seed, r)
        pts = halton_block(HaltonSpec(bases, spec.start_index, sh), Nmax).points
        return [fn(pts[:N]) for N in Ns]

    rows = parallel_map(one, range(M), threads)
    return np.array(rows, dtype=np.float64).T


def rms_wce_monte_carlo(spec, gamma, N, M, seed, threads=None):
    """Mean and standard error of e^2 over M random p-adic shifts."""
    if M < 2:
        raise DomainError("at least two replicates are required")
    gamma = _expand(gamma, spec.dim)
    vals = replicate_prefix_values(spec, [N], M, seed, lambda x: wce_sq_sobolev(x, gamma), threads)
    return summarize(vals[0])


def default_truncation(bases, N):
    """``ceil(2 log_p N) + 1`` per coordinate, at least 1."""
    out = []
    for p in bases:
        t = 0
        while p**t < N * N:
            t += 1
        out.append(t + 1)
    return tuple(out)


def _as_space(spec_or_bases, gamma, alpha=None):
    bases = spec_or_bases.bases if isinstance(spec_or_bases, HaltonSpec) else check_bases(spec_or_bases)
    gamma = _expand(gamma, len(bases))
    if alpha is not None:
        alpha = _expand(alpha, len(bases))
    return WeightedSpace(bases, tuple(gamma), None if alpha is None else tuple(alpha))


def series_by_difference(space, N, g):
    """``sum_{k in box, k != 0} r(k) |S_N(k) / N|^2`` via index differences.

    ``|S_N(k)|^2 = sum_{m,n} e(phi(k) (m - n))`` turns the box sum into
    ``N^-2 sum_d (N - |d|) prod_j F_j(d)`` minus the k = 0 term, where
    ``F_j`` is the truncated one-dimensional shift-invariant kernel at integer
    difference d.  The product minus ``prod_j r_j(0)`` is formed by
    telescoping so the zero frequency cancels exactly.
    ``g=None`` sums the full series.
    """
    N = int(N)
    if N < 1:
        raise DomainError("N must be at least 1")
    d = np.arange(-(N - 1), N, dtype=np.int64)
    count = (N - np.abs(d)).astype(np.float64)
    P = np.zeros(d.shape)
    r0_prefix = 1.0
    for j in range(space.dim):
        c = space.coefficients(j)
        F = kernel_by_difference(c, d, None if g is None else g[j])
        P = P * F + r0_prefix * (F - c.r0)
        r0_prefix *= c.r0
    return math.fsum(count * P) / (N * N)


def series_by_enumeration(space, N, g, start_index=0):
    """The same partial sum term by term over the punctured box."""
    box = IndexBox(g, space.bases, "punctured")
    if box.size > ENUMERATE_MAX:
        raise ResourceError(f"box of {box.size} indices is too large to enumerate")
    coeffs = [space.coefficients(j) for j in range(space.dim)]
    terms = []
    for k in box:
        r = math.prod(c(kj) for c, kj in zip(coeffs, k))
        S = char_sum_halton(space.bases, k, N, start_index)
        terms.append(r * abs(S) ** 2)
    return math.fsum(terms) / (N * N)


def rms_wce_series(spec, gamma, N, g=None, method="difference"):
    """Squared RMS worst-case error as a certified interval.

    Returns ``(partial, tail)`` with ``partial <= E[e^2] <= partial + tail``.
    ``g`` defaults to :func:`default_truncation`.
    """
    space = _as_space(spec, gamma)
    if g is None:
        g = default_truncation(space.bases, N)
    g = tuple(g) if not isinstance(g, int) else (g,) * space.dim
    if method == "enumerate":
        start = spec.start_index if isinstance(spec, HaltonSpec) else 0
        partial = series_by_enumeration(space, N, g, start)
    else:
        partial = series_by_difference(space, N, g)
    return clamp_nonnegative(partial), r_tail_multi(space.bases, space.gamma, g)


def rms_wce_sq_exact(spec, gamma, N):
    """The full (untruncated) squared RMS worst-case error."""
    return clamp_nonnegative(series_by_difference(_as_space(spec, gamma), N, None))


def theory_bound_sobolev(bases, gamma, N):
    """Upper bound on the squared RMS error of shifted Halton rules."""
    if N < 2:
        raise DomainError("the bound needs N >= 2")
    bases = check_bases(bases)
    gamma = _expand(gamma, len(bases))
    L = math.log(N)
    first = math.prod(1.0 + g * L * p * p / math.log(p) for p, g in zip(bases, gamma))
    second = (math.prod(1.0 + g / 2.0 for g in gamma)
              * math.prod(1.0 + g * p / 6.0 for p, g in zip(bases, gamma)))
    return (first + second) / (N * N)


def theory_bound_korobov(bases, gamma, N):
    """Bound on e^2 of unshifted Halton rules in the Korobov-type space."""
    bases = check_bases(bases)
    gamma = _expand(gamma, len(bases))
    L = math.log(N) if N > 1 else 0.0
    first = math.prod(1.0 + 2.0 * g * p * p * L for p, g in zip(bases, gamma))
    second = (math.prod(1.0 + g * p for p, g in zip(bases, gamma))
              * math.prod(1.0 + g * p * p for p, g in zip(bases, gamma)))
    return (first + second) / (N * N)


def theory_bound_korobov_sharp(bases, gamma, N):
    """The N^-2 bound, valid when every alpha_j > 2."""
    bases = check_bases(bases)
    gamma = _expand(gamma, len(bases))
    return (math.prod(1.0 + 2.0 * g * p * p for p, g in zip(bases, gamma)) - 1.0) / (N * N)


def korobov_constant(bases, alpha, gamma):
    """``-1 + prod_j (1 + gamma_j p_j^a_j (p_j - 1) / (p_j^a_j - p_j))``."""
    bases = check_bases(bases)
    s = len(bases)
    alpha, gamma = _expand(alpha, s), _expand(gamma, s)
    return -1.0 + math.prod(1.0 + g * p**a * (p - 1) / (p**a - p)
                            for p, a, g in zip(bases, alpha, gamma))


@dataclass
class KorobovReport:
    partial: float
    tail: float
    bound: float
    sharp_bound: Optional[float]


def wce_sq_korobov(spec, alpha, gamma, N, g=None):
    """Squared worst-case error of the unshifted Halton rule, Korobov-type space."""
    space = _as_space(spec, gamma, alpha)
    if g is None:
        g = default_truncation(space.bases, N)
    g = tuple(g) if not isinstance(g, int) else (g,) * space.dim
    partial = clamp_nonnegative(series_by_difference(space, N, g))
    tail = korobov_tail_multi(space.bases, space.alpha, space.gamma, g)
    sharp = (theory_bound_korobov_sharp(space.bases, space.gamma, N)
             if all(a > 2 for a in space.alpha) else None)
    return KorobovReport(partial, tail, theory_bound_korobov(space.bases, space.gamma, N), sharp)


def wce_sq_korobov_exact(spec, alpha, gamma, N):
    return clamp_nonnegative(series_by_difference(_as_space(spec, gamma, alpha), N, None))


def weight_condition_partial_sums(gamma, J, bases=None, checkpoints=None):
    """Partial sums of the three weight series up to J.

    ``prime_power``: sum gamma_j p_j^2 / log p_j;  ``sqrt_weight``: sum gamma_j^(1/2) j log j;
    ``index_log``: sum gamma_j j^2 log j.  ``gamma`` is a callable of j
    (1-based) or an array.  ``bases`` defaults to the first J primes.
    Returns a dict with the checkpoints, partial sums at each checkpoint and
    the last increment of every series.
    """
    from .primes import first_primes

    J = int(J)
    if J < 1:
        raise DomainError("J must be at least 1")
    j = np.arange(1, J + 1, dtype=np.float64)
    if callable(gamma):
        g = np.asarray(gamma(j), dtype=np.float64)
    else:
        g = np.asarray(gamma, dtype=np.float64)[:J]
    p = np.asarray(bases if bases is not None else first_primes(J), dtype=np.float64)[:J]
    logj = np.log(j)
    series = {
        "prime_power": g * p * p / np.log(p),
        "sqrt_weight": np.sqrt(g) * j * logj,
        "index_log": g * j * j * logj,
    }
    if checkpoints is None:
        checkpoints = sorted({int(v) for v in np.unique(np.geomspace(1, J, 13).round()) if v >= 1} | {J})
    out = {"checkpoints": list(checkpoints)}
    for name, terms in series.items():
        cs = np.cumsum(terms)
        out[name] = [float(cs[c - 1]) for c in checkpoints]
        out[name + "_last_increment"] = float(terms[-1])
    return out


def fit_loglog(x, y):
    """Least-squares slope, intercept and r^2 of log(y) against log(x)."""
    lx, ly = np.log(np.asarray(x, dtype=np.float64)), np.log(np.asarray(y, dtype=np.float64))
    if len(lx) < 2:
        raise DomainError("need at least two points to fit")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
