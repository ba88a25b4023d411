"""Rank-based estimators for time-dependent panel data.

A panel holds positive observations ``Z_i(tau)`` of entities ``i`` at
consecutive observation times ``tau = 1..T``. Entities may be missing at
some times (stored as NaN). At each time the present entities are ranked,
largest first, ties going to the lower entity index, and ``N`` is the
smallest number of entities present at any time.

Three time averages drive everything downstream, for ranks ``k = 1..N-1``:

* ``lambda_hat[k]``: twice the average relative mass flowing into the top
  ``k`` ranks from below, per observation interval; the discrete analogue of
  the local-time rate between ranks ``k`` and ``k+1``.
* ``sigma2_hat[k]``: average squared increment of the log-gap between ranks
  ``k`` and ``k+1``.
* ``mean_gap[k]``: average log-gap between ranks ``k`` and ``k+1``.

Rates are reported per unit time by dividing by the panel's observation
interval.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .families import FirstOrderFamily, theoretical_mean_gap, _require_valid

__all__ = [
    "DistributionCurve",
    "PanelSeries",
    "RankBasedDiagnostic",
    "RankGapAccumulator",
    "RankGapStats",
    "common_depth",
    "curve_slope",
    "detrend",
    "distribution_curve",
    "estimate_gap_variance",
    "estimate_lambda",
    "estimate_stats",
    "first_order_approx",
    "gaussian_kernel",
    "gaussian_smooth",
    "mean_gap",
    "predicted_curve",
    "rank_based_diagnostic",
]

KERNEL_HALF_WIDTH_SD = 3.16
_CHUNK_CELLS = 1 << 21


@dataclass(frozen=True, eq=False)
class PanelSeries:
    """Positive panel data, one row per observation time, one column per entity.

    Parameters
    ----------
    values : array_like, shape (T, M)
        Observations; NaN marks an entity absent at that time.
    entities : sequence, optional
        Stable entity keys, one per column (default ``0..M-1``). Column order
        is the tie-break order.
    times : array_like, optional
        Observation labels, one per row (default ``1..T``).
    interval : float
        Time elapsed between consecutive rows.
    """

    values: np.ndarray
    entities: tuple = None
    times: np.ndarray = None
    interval: float = 1.0
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise DomainError("panel values must be a nonempty (T, M) array")
        present = ~np.isnan(v)
        if np.any(v[present] <= 0) or not np.all(np.isfinite(v[present])):
            raise DomainError("panel values must be positive and finite")
        if not (np.isfinite(self.interval) and self.interval > 0):
            raise ParameterError("observation interval must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        ents = tuple(range(v.shape[1])) if self.entities is None else tuple(self.entities)
        if len(ents) != v.shape[1] or len(set(ents)) != len(ents):
            raise DomainError("entities must be unique, one per column")
        object.__setattr__(self, "entities", ents)
        times = np.arange(1, v.shape[0] + 1) if self.times is None else np.asarray(self.times)
        if times.shape != (v.shape[0],):
            raise DomainError("need one time label per row")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "interval", float(self.interval))

    @property
    def T(self):
        return self.values.shape[0]

    @property
    def counts(self):
        """Number of entities present at each time."""
        return np.sum(~np.isnan(self.values), axis=1)

    @property
    def is_ragged(self):
        return bool(np.any(np.isnan(self.values)))

    def scaled(self, factor):
        return PanelSeries(self.values * factor, self.entities, self.times, self.interval)


@dataclass(frozen=True, eq=False)
class RankGapStats:
    """Per-rank estimates for ``k = 1..N-1`` (rates per unit time).

    ``lambda_terms[k-1]`` counts the transitions that entered the flow
    average at rank ``k``; transitions where a top-``k`` entity vanished
    are dropped and tallied in ``dropped_terms``.
    """

    lambda_hat: np.ndarray
    sigma2_hat: np.ndarray
    mean_gap: np.ndarray
    mean_log_value: np.ndarray
    N: int
    T: int
    interval: float
    lambda_terms: np.ndarray
    dropped_terms: np.ndarray

    @property
    def ranks(self):
        return np.arange(1, self.N)

    @property
    def churn(self):
        return int(np.max(self.dropped_terms)) if self.dropped_terms.size else 0


class RankGapAccumulator:
    """Streaming form of the panel estimators.

    Feed consecutive row blocks with :meth:`update`; :meth:`result` returns
    the same :class:`RankGapStats` as running :func:`estimate_stats` on the
    concatenated panel.
    """

    def __init__(self, width, interval=1.0):
        self.width = int(width)
        self.interval = float(interval)
        m = self.width
        self._flow = np.zeros(m)
        self._flow_n = np.zeros(m, dtype=np.int64)
        self._qv = np.zeros(m)
        self._qv_n = np.zeros(m, dtype=np.int64)
        self._gap = np.zeros(m)
        self._logz = np.zeros(m)
        self._rows = 0
        self._min_count = m
        self._last = None

    def _prepare(self, z):
        present = ~np.isnan(z)
        key = np.where(present, -z, np.inf)
        order = np.argsort(key, axis=1, kind="stable")
        zs = np.take_along_axis(z, order, axis=1)
        zs = np.where(np.isnan(zs), 0.0, zs)
        with np.errstate(divide="ignore", invalid="ignore"):
            logz = np.where(zs > 0, np.log(np.where(zs > 0, zs, 1.0)), np.nan)
            gaps = np.log(zs[:, :-1] / zs[:, 1:])
        gaps = np.where((zs[:, :-1] > 0) & (zs[:, 1:] > 0), gaps, np.nan)
        return order, zs, logz, gaps, present.sum(axis=1)

    def update(self, block):
        z = np.asarray(block, dtype=float)
        if z.ndim != 2 or z.shape[1] != self.width:
            raise DomainError(f"expected rows of width {self.width}")
        if z.shape[0] == 0:
            return
        order, zs, logz, gaps, counts = self._prepare(z)
        self._rows += z.shape[0]
        self._min_count = min(self._min_count, int(counts.min()))
        self._gap[:-1] += np.nansum(gaps, axis=0)
        self._logz += np.nansum(logz, axis=0)

        if self._last is not None:
            l_z, l_order, l_zs, l_gaps = self._last
            z = np.vstack([l_z[None], z])
            order = np.vstack([l_order[None], order])
            zs = np.vstack([l_zs[None], zs])
            gaps = np.vstack([l_gaps[None], gaps])
        self._last = (z[-1], order[-1], zs[-1], gaps[-1])
        if z.shape[0] < 2:
            return

        # inflow into the top k between tau and tau+1, relative to Z_(k)(tau)
        cur_zs = zs[:-1]
        top_next = np.take_along_axis(z[1:], order[:-1], axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            inflow = np.cumsum(zs[1:], axis=1) - np.cumsum(top_next, axis=1)
            term = inflow / cur_zs
        ok = np.isfinite(term) & (cur_zs > 0)
        self._flow += np.where(ok, term, 0.0).sum(axis=0)
        self._flow_n += ok.sum(axis=0)

        dg = np.diff(gaps, axis=0)
        okg = np.isfinite(dg)
        self._qv[:-1] += np.where(okg, dg * dg, 0.0).sum(axis=0)
        self._qv_n[:-1] += okg.sum(axis=0)

    def result(self):
        T = self._rows
        if T < 2:
            raise DomainError("need at least two observation times")
        N = self._min_count
        if N < 2:
            raise DomainError(f"common depth N={N}; need at least two entities at every time")
        k = N - 1
        terms = self._flow_n[:k].copy()
        with np.errstate(invalid="ignore", divide="ignore"):
            lam = 2.0 * self._flow[:k] / terms / self.interval
            s2 = self._qv[:k] / self._qv_n[:k] / self.interval
        return RankGapStats(
            lambda_hat=lam,
            sigma2_hat=s2,
            mean_gap=self._gap[:k] / T,
            mean_log_value=self._logz[:N] / T,
            N=N,
            T=T,
            interval=self.interval,
            lambda_terms=terms,
            dropped_terms=(T - 1) - terms,
        )


def estimate_stats(panel):
    """All per-rank estimates of ``panel`` in one pass (cached on the panel)."""
    cached = panel._cache.get("stats")
    if cached is not None:
        return cached
    acc = RankGapAccumulator(panel.values.shape[1], panel.interval)
    rows = max(2, _CHUNK_CELLS // panel.values.shape[1])
    for start in range(0, panel.T, rows):
        acc.update(panel.values[start:start + rows])
    stats = acc.result()
    panel._cache["stats"] = stats
    return stats


def common_depth(panel):
    """Smallest number of entities present at any observation time."""
    if panel.T < 2:
        raise DomainError("need at least two observation times")
    return int(panel.counts.min())


def detrend(panel):
    """Rescale every time slice so its total equals the first slice's total."""
    totals = np.nansum(panel.values, axis=1)
    factors = totals[0] / totals
    factors[0] = 1.0
    return PanelSeries(panel.values * factors[:, None], panel.entities, panel.times,
                       panel.interval)


def _check_rank(stats, k):
    if int(k) != k or not 1 <= k <= stats.N - 1:
        raise DomainError(f"rank k={k} outside 1..{stats.N - 1}")
    return int(k) - 1


def estimate_lambda(panel, k):
    """Estimated local-time rate between ranks ``k`` and ``k+1``, per unit time."""
    stats = estimate_stats(panel)
    return float(stats.lambda_hat[_check_rank(stats, k)])


def estimate_gap_variance(panel, k):
    """Estimated variance rate of the log-gap at rank ``k``, per unit time."""
    stats = estimate_stats(panel)
    return float(stats.sigma2_hat[_check_rank(stats, k)])


def mean_gap(panel, k):
    """Time-averaged log-gap between ranks ``k`` and ``k+1``."""
    stats = estimate_stats(panel)
    return float(stats.mean_gap[_check_rank(stats, k)])


def gaussian_kernel(window):
    """Normalized Gaussian weights over ``2*(window//2)+1`` points.

    The support ends at +/-3.16 standard deviations, so the standard
    deviation is ``window / 6.32`` points.
    """
    window = int(window)
    if window < 1:
        raise ParameterError("smoothing window must be at least 1")
    half = window // 2
    sd = window / (2.0 * KERNEL_HALF_WIDTH_SD)
    x = np.arange(-half, half + 1, dtype=float)
    w = np.exp(-0.5 * (x / sd) ** 2)
    return w / w.sum()


def gaussian_smooth(series, window=100):
    """Convolve with a truncated Gaussian, reflecting the series at both ends.

    Output has the same length as the input.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ParameterError("series must be one-dimensional")
    if int(window) != window or not 1 <= window <= x.size:
        raise ParameterError(f"window must be in 1..{x.size}, got {window}")
    w = gaussian_kernel(window)
    half = w.size // 2
    if half == 0:
        return x.copy()
    # half-sample reflection: x[-1] = x[0], so symmetric inputs keep their mean
    padded = np.pad(x, half, mode="symmetric")
    return np.convolve(padded, w, mode="valid")


def first_order_approx(panel, smooth_window=None):
    """First-order family fitted to a panel (or to precomputed :class:`RankGapStats`).

    For ``k = 1..N-1``::

        g_k      = (lambda_hat[k-1] - lambda_hat[k]) / 2,    lambda_hat[0] = 0
        sigma2_k = (sigma2_hat[k-1] + sigma2_hat[k]) / 4,    sigma2_hat[0] = sigma2_hat[1]

    and the constant tail takes over from rank ``N``. With ``smooth_window``
    the ``g_k`` and ``sigma2_k`` sequences are Gaussian-smoothed (window
    capped at their length). The family is not forced to be valid; inspect
    ``family.report``.
    """
    stats = panel if isinstance(panel, RankGapStats) else estimate_stats(panel)
    if stats.N < 3:
        raise DomainError(f"need common depth N >= 3, got {stats.N}")
    lam = np.concatenate([[0.0], stats.lambda_hat])
    s2 = np.concatenate([stats.sigma2_hat[:1], stats.sigma2_hat])
    if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(s2))):
        raise DomainError("estimates are not finite at every rank")
    g = 0.5 * lam[:-1] - 0.5 * lam[1:]
    sigma2 = 0.25 * (s2[:-1] + s2[1:])
    if smooth_window:
        w = min(int(smooth_window), g.size)
        g = gaussian_smooth(g, w)
        sigma2 = gaussian_smooth(sigma2, w)
    return FirstOrderFamily(g, sigma2, name="first-order-approximation")


@dataclass(frozen=True)
class RankBasedDiagnostic:
    """Relative mismatch between observed mean gaps and ``sigma2_hat / (2 lambda_hat)``.

    Ranks with ``lambda_hat <= 0`` are excluded (NaN) and listed in ``flagged``.
    """

    relative_error: np.ndarray
    flagged: tuple
    median: float


def rank_based_diagnostic(panel):
    stats = estimate_stats(panel)
    lam, s2, mg = stats.lambda_hat, stats.sigma2_hat, stats.mean_gap
    flagged = tuple(int(k) for k in np.flatnonzero(~(lam > 0)) + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(mg - s2 / (2.0 * lam)) / mg
    rel = np.where(lam > 0, rel, np.nan)
    good = rel[np.isfinite(rel)]
    med = float(np.median(good)) if good.size else float("nan")
    return RankBasedDiagnostic(rel, flagged, med)


@dataclass(frozen=True, eq=False)
class DistributionCurve:
    """Points ``(log k, mean log value at rank k)`` for ``k = 1..depth``."""

    log_rank: np.ndarray
    mean_log_value: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.log_rank, dtype=float)
        y = np.asarray(self.mean_log_value, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ParameterError("curve coordinates must be matching 1-d arrays")
        object.__setattr__(self, "log_rank", x)
        object.__setattr__(self, "mean_log_value", y)

    def __len__(self):
        return self.log_rank.size

    @property
    def points(self):
        return list(zip(self.log_rank.tolist(), self.mean_log_value.tolist()))

    @property
    def ranks(self):
        return np.arange(1, len(self) + 1)


def distribution_curve(panel, depth):
    """Average over time of the ranked log-values, for ranks ``1..depth``."""
    stats = estimate_stats(panel)
    if int(depth) != depth or not 1 <= depth <= stats.N:
        raise ParameterError(f"depth must be in 1..{stats.N}, got {depth}")
    k = np.arange(1, int(depth) + 1)
    return DistributionCurve(np.log(k), stats.mean_log_value[:int(depth)].copy())


def predicted_curve(family, depth, anchor=0.0):
    """Stable distribution curve of ``family``: ``anchor`` minus the accumulated mean gaps."""
    _require_valid(family)
    depth = int(depth)
    if depth < 1:
        raise ParameterError("depth must be at least 1")
    gaps = theoretical_mean_gap(family, np.arange(1, depth)) if depth > 1 else np.empty(0)
    y = anchor - np.concatenate([[0.0], np.cumsum(gaps)])
    return DistributionCurve(np.log(np.arange(1, depth + 1)), y)


def curve_slope(curve, first, last):
    """Least-squares log-log slope of ``curve`` over ranks ``first..last``."""
    sel = slice(int(first) - 1, int(last))
    slope, _ = np.polyfit(curve.log_rank[sel], curve.mean_log_value[sel], 1)
    return float(slope)
