"""Zipf classification and stable-law functionals of first-order families.

Expectations ``E_n[.]`` under the stable distribution of the size-``n`` model
are estimated by sampling the exact exponential-gap law (see
:func:`atlaszipf.families.sample_stable_gaps`). Every functional used here is
a weighted sum of the rank weights ``w_k = X_(k) / (X_(1)+...+X_(n))``:

* completeness:  ``G_n w_n``
* conservation:  ``sum_k w_k (g_k + sigma2_k/2) + G_n w_n``
  (expected relative drift of the top-``n`` total per unit time)
* top weight:    ``w_1``

Limits in ``n`` are judged from trends over a geometric schedule of sizes.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ParameterError, TuningError
from .families import (_draw_block, _gap_means, _require_valid, is_simple,
                       make_e1_family, slope_parameter, stable_block_rows)
from .streams import map_blocks, pairwise_reduce

__all__ = [
    "E1Tuning",
    "ExpectationEstimate",
    "Proposition2Report",
    "Tolerances",
    "TrendResult",
    "Verdict",
    "ZipfClassification",
    "classify",
    "completeness_estimate",
    "conservation_estimate",
    "e1_functional",
    "proposition2_check",
    "stable_expectations",
    "top_weight",
    "trend_to_zero",
    "tune_e1_rho",
    "weight_moments",
]

DEFAULT_MC = 100_000


class Verdict(str, Enum):
    ZIPFIAN = "Zipfian"
    QUASI_ZIPFIAN = "QuasiZipfian"
    NON_ZIPFIAN = "NonZipfian"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Tolerances:
    zipf: float = 0.05   # on |s_k - 1|
    mono: float = 0.01   # largest allowed drop s_k - s_{k+1}


@dataclass(frozen=True, eq=False)
class ZipfClassification:
    verdict: Verdict
    s_curve: np.ndarray
    s1: float
    max_monotonicity_violation: float
    max_zipf_deviation: float
    tail_limit: float
    checked_ranks: int
    tolerances: Tolerances

    @property
    def is_quasi_zipfian(self):
        return self.verdict in (Verdict.ZIPFIAN, Verdict.QUASI_ZIPFIAN)


def classify(family, depth, tol=Tolerances()):
    """Zipfian / quasi-Zipfian / non-Zipfian verdict from the slope parameters.

    Checks run over ranks ``1..max(depth, K)``. Past the explicit prefix the
    slope parameters are constant, so this covers every rank and the value
    at rank ``K`` is the exact limit.
    """
    _require_valid(family)
    depth = int(depth)
    if depth < 2:
        raise ParameterError("depth must be at least 2")
    K = family.K_explicit
    reach = max(depth, K)
    s = np.asarray(slope_parameter(family, np.arange(1, reach + 1)), dtype=float)
    drops = s[:-1] - s[1:]
    max_drop = float(max(0.0, drops.max())) if drops.size else 0.0
    max_dev = float(np.max(np.abs(s - 1.0)))
    tail = float(s[K - 1])
    if max_dev <= tol.zipf:
        verdict = Verdict.ZIPFIAN
    elif max_drop <= tol.mono and s[0] <= 1 + tol.zipf and tail >= 1 - tol.zipf:
        verdict = Verdict.QUASI_ZIPFIAN
    else:
        verdict = Verdict.NON_ZIPFIAN
    return ZipfClassification(verdict, s[:depth].copy(), float(s[0]), max_drop,
                              max_dev, tail, reach, tol)


@dataclass(frozen=True)
class ExpectationEstimate:
    n: int
    value: float
    std_error: float
    samples: int


@dataclass(frozen=True, eq=False)
class WeightMoments:
    """Sample mean and covariance of per-draw weighted sums ``Y = w @ C``."""

    n: int
    samples: int
    mean: np.ndarray
    cov: np.ndarray

    def estimate(self, coef, const=0.0):
        """Estimate of ``E[coef . Y] + const`` with its Monte-Carlo standard error."""
        a = np.asarray(coef, dtype=float)
        var = float(a @ self.cov @ a)
        se = np.sqrt(max(var, 0.0) / self.samples)
        return ExpectationEstimate(self.n, float(a @ self.mean) + const, float(se), self.samples)


def _combine(a, b):
    # Chan et al. pairwise update of (count, mean, co-moment matrix)
    na, ma, Ma = a
    nb, mb, Mb = b
    n = na + nb
    d = mb - ma
    mean = ma + d * (nb / n)
    M = Ma + Mb + np.outer(d, d) * (na * nb / n)
    return n, mean, M


def weight_moments(family, n, coefficients, mc=DEFAULT_MC, seed=0, workers=1):
    """Moments of ``sum_k w_k C[k, j]`` for each column ``j`` of ``coefficients`` (shape ``(n, m)``).

    Draws are split into fixed blocks with their own random streams and the
    block results are tree-reduced in block order, so the outcome is the
    same for any ``workers``.
    """
    n = int(n)
    mc = int(mc)
    if mc < 2:
        raise ParameterError("need at least two Monte-Carlo samples")
    means = _gap_means(family, n)
    C = np.asarray(coefficients, dtype=float)
    if C.ndim == 1:
        C = C[:, None]
    if C.shape[0] != n:
        raise ParameterError(f"coefficients need {n} rows")
    rows = stable_block_rows(n)
    nblocks = -(-mc // rows)

    def run(b):
        m = min(rows, mc - b * rows)
        logs = _draw_block(means, seed, b, rows)[:m]
        np.cumsum(logs, axis=1, out=logs)
        np.negative(logs, out=logs)
        np.exp(logs, out=logs)
        total = 1.0 + logs.sum(axis=1)
        y = (C[0] + logs @ C[1:]) / total[:, None]
        mean = y.mean(axis=0)
        d = y - mean
        return m, mean, d.T @ d

    count, mean, M = pairwise_reduce(map_blocks(run, nblocks, workers), _combine)
    return WeightMoments(n, count, mean, M / (count - 1))


def _functional_columns(family, n):
    g, s2 = family.rates(n)
    Gn = -float(family.partial_sum(n))
    comp = np.zeros(n)
    comp[-1] = Gn
    top = np.zeros(n)
    top[0] = 1.0
    return np.column_stack([g + 0.5 * s2 + comp, comp, top])


def stable_expectations(family, n, mc=DEFAULT_MC, seed=0, workers=1):
    """Conservation, completeness and top-weight estimates from one set of draws."""
    mom = weight_moments(family, n, _functional_columns(family, n), mc, seed, workers)
    eye = np.eye(3)
    return {
        "conservative": mom.estimate(eye[0]),
        "complete": mom.estimate(eye[1]),
        "topweight": mom.estimate(eye[2]),
    }


def completeness_estimate(family, n, mc=DEFAULT_MC, seed=0, workers=1):
    """Estimate of ``E_n[G_n X_(n) / X_[n]]``."""
    return stable_expectations(family, n, mc, seed, workers)["complete"]


def conservation_estimate(family, n, mc=DEFAULT_MC, seed=0, workers=1):
    """Estimate of the expected relative drift ``E_n[dX_[n] / X_[n]] / dt``."""
    return stable_expectations(family, n, mc, seed, workers)["conservative"]


def top_weight(family, n, mc=DEFAULT_MC, seed=0, workers=1):
    """Estimate of ``E_n[X_(1) / X_[n]]``."""
    return stable_expectations(family, n, mc, seed, workers)["topweight"]


@dataclass(frozen=True, eq=False)
class TrendResult:
    passes: bool
    reason: str
    estimates: tuple


def trend_to_zero(estimates, z=3.0, factor=1.5, atol=1e-3):
    """Judge whether estimates over increasing ``n`` tend to zero.

    Passes when the last value is within ``max(z * SE, atol)`` of zero, or
    when ``|value|`` falls at every step of the schedule by more than ``z``
    combined standard errors and by at least ``factor`` overall.
    """
    est = tuple(estimates)
    last = est[-1]
    if abs(last.value) <= max(z * last.std_error, atol):
        return TrendResult(True, "last value indistinguishable from zero", est)
    if len(est) < 2:
        return TrendResult(False, "single size and value not near zero", est)
    for a, b in zip(est, est[1:]):
        noise = z * np.hypot(a.std_error, b.std_error)
        if not abs(b.value) < abs(a.value) - noise:
            return TrendResult(False, f"|value| does not decrease from n={a.n} to n={b.n}", est)
    ratio = abs(est[0].value) / abs(last.value)
    if ratio < factor:
        return TrendResult(False, f"decay factor {ratio:.3g} below {factor:g}", est)
    return TrendResult(True, f"decreasing, decay factor {ratio:.3g}", est)


@dataclass(frozen=True, eq=False)
class Proposition2Report:
    conservative: TrendResult
    complete: TrendResult
    topweight: ExpectationEstimate
    topweight_ok: bool
    classification: ZipfClassification
    n_schedule: tuple

    @property
    def hypotheses_hold(self):
        return self.conservative.passes and self.complete.passes and self.topweight_ok

    @property
    def conclusion_holds(self):
        return self.classification.is_quasi_zipfian

    @property
    def consistent(self):
        return (not self.hypotheses_hold) or self.conclusion_holds


def proposition2_check(family, n_schedule=(100, 1000, 10000), mc=DEFAULT_MC, seed=0,
                       depth=None, tol=Tolerances(), z=3.0, factor=1.5, workers=1):
    """Evaluate conservation, completeness and top-weight hypotheses against the verdict.

    Needs a simple family. This is a numerical consistency harness: it
    reports which hypotheses hold along the schedule and whether the
    family is quasi-Zipfian.
    """
    simple, bad = is_simple(family)
    if not simple:
        raise ParameterError(f"family is not simple (first violation at rank {bad})")
    sched = tuple(int(n) for n in n_schedule)
    results = [stable_expectations(family, n, mc, seed, workers) for n in sched]
    cons = trend_to_zero([r["conservative"] for r in results], z, factor)
    comp = trend_to_zero([r["complete"] for r in results], z, factor)
    top = results[-1]["topweight"]
    top_ok = top.value <= 0.5 + z * top.std_error
    depth = max(2, family.K_explicit + 1) if depth is None else depth
    return Proposition2Report(cons, comp, top, bool(top_ok), classify(family, depth, tol), sched)


def _e1_columns(n):
    ranks = np.arange(1, n + 1)
    return np.column_stack([(ranks % 2 == 1), (ranks % 2 == 0)]).astype(float)


def e1_functional(moments, g, sigma2, rho2):
    """``sum_k E[w_k] sigma2_k / 2 - g`` for the alternating family, from odd/even weight moments."""
    return moments.estimate([0.5 * rho2, 0.5 * (2.0 * sigma2 - rho2)], const=-g)


@dataclass(frozen=True, eq=False)
class E1Tuning:
    rho2: float
    residual: ExpectationEstimate
    iterations: int
    bracket: tuple
    grid: tuple          # (rho2, F, SE) over the bracket
    monotone: bool
    truncation_bound: float
    family: object = field(repr=False)


def _truncation_bound(s, n):
    # mass of sum_{k>n} k^{-s} relative to the leading term
    if s <= 1:
        return float("inf")
    return float(n ** (1.0 - s) / (s - 1.0))


def tune_e1_rho(g, sigma2, n, mc=DEFAULT_MC, seed=0, workers=1, xtol=None, grid_points=9):
    """Find ``rho2`` in ``(0, 2 sigma2)`` making the alternating family conservative.

    The stable weights do not depend on ``rho2`` (adjacent variance rates
    always sum to ``2 sigma2``), so the odd- and even-rank weight totals are
    sampled once and the functional is an exactly linear function of
    ``rho2``. A bisection then locates its zero. Raises
    :class:`~atlaszipf.errors.TuningError` when the functional keeps one sign
    over the bracket.
    """
    n = int(n)
    if n % 2:
        raise ParameterError("n must be even")
    base = make_e1_family(g, sigma2, sigma2, K=n)
    mom = weight_moments(base, n, _e1_columns(n), mc, seed, workers)
    F = lambda r: e1_functional(mom, g, sigma2, r)  # noqa: E731

    width = 2.0 * sigma2
    eps = 1e-9 * width
    lo, hi = eps, width - eps
    grid_r = np.linspace(lo, hi, int(grid_points))
    grid = tuple((float(r), F(r).value, F(r).std_error) for r in grid_r)
    vals = np.array([v for _, v, _ in grid])
    monotone = bool(np.all(np.diff(vals) > 0) or np.all(np.diff(vals) < 0))
    f_lo, f_hi = F(lo).value, F(hi).value
    if np.sign(f_lo) == np.sign(f_hi):
        raise TuningError(
            f"no sign change of the conservation functional over ({lo:.3g}, {hi:.3g}): "
            f"F(lo)={f_lo:.6g} +/- {F(lo).std_error:.2g}, F(hi)={f_hi:.6g} +/- {F(hi).std_error:.2g}",
            evidence=grid)
    xtol = 1e-12 * width if xtol is None else xtol
    it = 0
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        f_mid = F(mid).value
        it += 1
        if f_mid == 0:
            lo = hi = mid
            break
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    rho = 0.5 * (lo + hi)
    return E1Tuning(rho, F(rho), it, (eps, width - eps), grid, monotone,
                    _truncation_bound(sigma2 / (2.0 * g), n),
                    make_e1_family(g, sigma2, rho, K=n))
