"""Rank-based model families and their closed-form stable quantities.

A first-order family is a sequence of per-rank log-growth rates ``g_k`` and
variance rates ``sigma2_k``. Only a finite prefix ``k = 1..K`` is stored;
ranks past the prefix follow the constant-extension rule used for
data-derived families::

    g_k      = (g_1 + ... + g_K) / K     for k > K
    sigma2_k = sigma2_K                  for k > K

Atlas families are the special case ``g_k = -g``, ``sigma2_k = sigma2``.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ParameterError
from .streams import block_generator, exponential_inverse_cdf

__all__ = [
    "AtlasParams",
    "FirstOrderFamily",
    "StableGapSample",
    "ValidationReport",
    "Violation",
    "is_simple",
    "make_atlas_family",
    "make_e1_family",
    "sample_stable",
    "sample_stable_gaps",
    "slope_bracket",
    "slope_parameter",
    "stable_block_rows",
    "theoretical_gap_variance",
    "theoretical_lambda",
    "theoretical_mean_gap",
    "validate_family",
]


def _as_ranks(k):
    ranks = np.asarray(k)
    if not np.issubdtype(ranks.dtype, np.integer):
        if not np.all(np.mod(ranks, 1) == 0):
            raise ParameterError("ranks must be integers")
        ranks = ranks.astype(np.int64)
    if np.any(ranks < 1):
        raise ParameterError("ranks start at 1")
    return ranks


def _readonly(values):
    arr = np.array(values, dtype=float).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FirstOrderFamily:
    """Per-rank growth and variance rates with a constant tail.

    Parameters
    ----------
    g : array_like
        Log-growth rates ``g_1..g_K`` (1/time).
    sigma2 : array_like
        Variance rates ``sigma2_1..sigma2_K`` (1/time).
    name : str, optional
        Free-form label carried into reports.
    """

    g: np.ndarray
    sigma2: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        g = _readonly(self.g)
        s2 = _readonly(self.sigma2)
        if g.size == 0:
            raise ParameterError("a family needs at least one explicit rank")
        if g.shape != s2.shape:
            raise ParameterError(
                f"g has {g.size} ranks but sigma2 has {s2.size}")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(s2))):
            raise ParameterError("family parameters must be finite")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "sigma2", s2)

    def __eq__(self, other):
        if not isinstance(other, FirstOrderFamily):
            return NotImplemented
        return (np.array_equal(self.g, other.g)
                and np.array_equal(self.sigma2, other.sigma2))

    __hash__ = None

    @property
    def K_explicit(self):
        return int(self.g.size)

    @property
    def tail_g(self):
        return float(np.sum(self.g) / self.K_explicit)

    @property
    def tail_sigma2(self):
        return float(self.sigma2[-1])

    def g_at(self, k):
        """Growth rate at rank(s) ``k`` including the tail rule."""
        ranks = _as_ranks(k)
        idx = np.minimum(ranks, self.K_explicit) - 1
        out = np.where(ranks <= self.K_explicit, self.g[idx], self.tail_g)
        return out if out.ndim else float(out)

    def sigma2_at(self, k):
        """Variance rate at rank(s) ``k`` including the tail rule."""
        ranks = _as_ranks(k)
        idx = np.minimum(ranks, self.K_explicit) - 1
        out = self.sigma2[idx]
        return out if out.ndim else float(out)

    def partial_sum(self, k):
        """``g_1 + ... + g_k``; closed form past the explicit prefix."""
        ranks = _as_ranks(k)
        csum = np.cumsum(self.g)
        idx = np.minimum(ranks, self.K_explicit) - 1
        out = csum[idx] + np.maximum(ranks - self.K_explicit, 0) * self.tail_g
        return out if out.ndim else float(out)

    def rates(self, n):
        """Arrays ``(g_1..g_n, sigma2_1..sigma2_n)`` for a model of size ``n``."""
        ranks = np.arange(1, int(n) + 1)
        return self.g_at(ranks), self.sigma2_at(ranks)

    @property
    def report(self):
        return validate_family(self)


@dataclass(frozen=True)
class AtlasParams:
    """Atlas model parameters: drift magnitude ``g`` and variance rate ``sigma2``."""

    g: float
    sigma2: float

    def __post_init__(self):
        if not (np.isfinite(self.g) and self.g > 0):
            raise ParameterError(f"Atlas g must be positive, got {self.g}")
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ParameterError(f"Atlas sigma2 must be positive, got {self.sigma2}")


class Violation(NamedTuple):
    kind: str    # "partial_sum" or "sigma2"
    k: int
    value: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()
    n: int = None

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return bool(self.violations)

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def summary(self):
        if self.ok:
            return "valid"
        return "; ".join(f"{v.kind} violated at k={v.k} ({v.value:.6g})"
                         for v in self.violations)


def validate_family(family, n=None):
    """List every violated family constraint.

    With ``n=None`` the infinite-family conditions are checked: every partial
    sum ``g_1+...+g_k`` is strictly negative and every ``sigma2_k`` positive.
    With a model size ``n`` only ranks ``k <= n`` are checked and the last
    partial sum may be zero, as for a single first-order model.
    """
    K = family.K_explicit
    found = []
    for k in np.flatnonzero(family.sigma2 <= 0) + 1:
        if n is None or k <= n:
            found.append(Violation("sigma2", int(k), float(family.sigma2[k - 1])))

    csum = np.cumsum(family.g)
    limit = K if n is None else min(K, int(n))
    for k in range(1, limit + 1):
        s = csum[k - 1]
        bad = s > 0 if (n is not None and k == n) else s >= 0
        if bad:
            found.append(Violation("partial_sum", k, float(s)))

    if n is None or n > K:
        k = _first_tail_violation(csum[-1], family.tail_g, K, n)
        if k is not None:
            found.append(Violation("partial_sum", k, float(csum[-1] + (k - K) * family.tail_g)))
    found.sort(key=lambda v: (v.k, v.kind))
    return ValidationReport(tuple(found), n)


def _first_tail_violation(s_K, tail, K, n):
    # past the prefix S_{K+j} = s_K + j*tail is linear in j
    if tail > 0:
        j = max(1, int(np.ceil(-s_K / tail)))
        while j > 1 and s_K + (j - 1) * tail >= 0:
            j -= 1
        while s_K + j * tail < 0:
            j += 1
    elif s_K + tail >= 0:
        j = 1
    else:
        return None
    k = K + j
    if n is None or k < n:
        return k
    if k == n and s_K + j * tail > 0:
        return k
    return None


def _require_valid(family, n=None):
    report = validate_family(family, n)
    if not report.ok:
        raise ParameterError(f"invalid first-order family: {report.summary()}")


def make_atlas_family(params):
    """Atlas family ``g_k = -g``, ``sigma2_k = sigma2`` for every rank."""
    if not isinstance(params, AtlasParams):
        params = AtlasParams(*params)
    return FirstOrderFamily([-params.g], [params.sigma2], name="atlas")


def make_e1_family(g, sigma2, rho2, K=2):
    """Constant-growth family whose variance rates alternate ``rho2``, ``2*sigma2 - rho2``.

    Adjacent variance rates always sum to ``2*sigma2`` so the slope
    parameters equal ``sigma2 / (2 g)`` at every rank.  ``K`` (even) is the
    number of explicit ranks; models of size ``n <= K`` see the exact pattern.
    """
    if not g > 0:
        raise ParameterError(f"g must be positive, got {g}")
    if not sigma2 > 2 * g:
        raise ParameterError(f"need sigma2 > 2g, got sigma2={sigma2}, g={g}")
    if not 0 < rho2 < 2 * sigma2:
        raise ParameterError(f"need 0 < rho2 < 2*sigma2, got rho2={rho2}")
    K = int(K)
    if K < 2 or K % 2:
        raise ParameterError(f"K must be a positive even integer, got {K}")
    s2 = np.empty(K)
    s2[0::2] = rho2
    s2[1::2] = 2 * sigma2 - rho2
    return FirstOrderFamily(np.full(K, -float(g)), s2, name="e1")


def theoretical_lambda(family, k):
    """Local-time rate ``lambda_{k,k+1} = -2 (g_1 + ... + g_k)``."""
    _require_valid(family)
    return -2.0 * family.partial_sum(k)


def theoretical_gap_variance(family, k):
    """Gap variance rate ``sigma2_k + sigma2_{k+1}``."""
    ranks = _as_ranks(k)
    return family.sigma2_at(ranks) + family.sigma2_at(ranks + 1)


def theoretical_mean_gap(family, k):
    """Stable mean of the log-gap at rank ``k``: variance rate over twice the local-time rate."""
    return theoretical_gap_variance(family, k) / (2.0 * theoretical_lambda(family, k))


def slope_parameter(family, k):
    """Slope parameter ``s_k = k (sigma2_k + sigma2_{k+1}) / (-4 (g_1 + ... + g_k))``."""
    _require_valid(family)
    ranks = _as_ranks(k)
    return ranks * theoretical_gap_variance(family, ranks) / (-4.0 * family.partial_sum(ranks))


def slope_bracket(s, k):
    """Bounds ``(-s (1 + 1/2k), -s)`` on the log-log tangent slope at rank ``k``."""
    if not s > 0:
        raise ParameterError("slope parameter must be positive")
    k = int(_as_ranks(k))
    return (-s * (1.0 + 1.0 / (2.0 * k)), -float(s))


def is_simple(family):
    """Return ``(simple, first_violation_rank)``; rank is ``None`` when simple.

    Simple means one constant ``g_k = -g < 0`` and nondecreasing variance rates.
    The tail rule preserves both properties, so checking the prefix suffices.
    """
    g = family.g
    if g[0] >= 0:
        return False, 1
    diff_g = np.flatnonzero(g != g[0])
    dec_s = np.flatnonzero(np.diff(family.sigma2) < 0) + 2
    nonpos = np.flatnonzero(family.sigma2 <= 0) + 1
    bad = [int(diff_g[0]) + 1] if diff_g.size else []
    bad += [int(dec_s[0])] if dec_s.size else []
    bad += [int(nonpos[0])] if nonpos.size else []
    if bad:
        return False, min(bad)
    return True, None


@dataclass(frozen=True)
class StableGapSample:
    """One draw of a ranked configuration from the stable law.

    ``log_values`` is nonincreasing with ``log_values[0] == 0``; ``gaps[k-1]``
    is the log-gap between ranks ``k`` and ``k+1``.
    """

    log_values: np.ndarray
    gaps: np.ndarray
    scale: float = 0.0


def stable_block_rows(n):
    """Samples per random block for models of size ``n`` (fixed given ``n``)."""
    return int(max(1, min(4096, (1 << 20) // max(n - 1, 1))))


def _gap_means(family, n):
    if int(n) < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    _require_valid(family)
    return theoretical_mean_gap(family, np.arange(1, int(n)))


def _draw_block(means, seed, block, rows):
    u = block_generator(seed, block).random((rows, means.size))
    return exponential_inverse_cdf(u, means)


def sample_stable_gaps(family, n, size, seed):
    """Draw ``size`` independent gap vectors of length ``n-1`` from the stable law."""
    means = _gap_means(family, n)
    rows = stable_block_rows(n)
    out = np.empty((int(size), means.size))
    for b, start in enumerate(range(0, int(size), rows)):
        m = min(rows, int(size) - start)
        out[start:start + m] = _draw_block(means, seed, b, rows)[:m]
    return out


def sample_stable(family, n, seed):
    """One stable configuration of the size-``n`` model, with rank 1 at log-value 0.

    Gaps are independent exponentials with means ``theoretical_mean_gap``.
    """
    gaps = sample_stable_gaps(family, n, 1, seed)[0]
    log_values = np.concatenate([[0.0], -np.cumsum(gaps)])
    return StableGapSample(log_values=log_values, gaps=gaps, scale=0.0)
