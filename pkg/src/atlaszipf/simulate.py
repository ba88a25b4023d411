"""Euler-Maruyama simulation of rank-based and random-growth systems.

All schemes work on log-values. Gaussian increments for time steps
``[c*STEP_BLOCK, (c+1)*STEP_BLOCK)`` come from stream block ``c`` of the
configured seed, so a run is reproducible independent of how its output is
consumed (whole, or block by block through :func:`iter_first_order`).
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, EstimationError, ParameterError, SimulationError
from .families import FirstOrderFamily, _require_valid, make_atlas_family
from .streams import block_generator

__all__ = [
    "STEP_BLOCK",
    "PathEnsemble",
    "RandomGrowthSpec",
    "SimulationConfig",
    "iter_first_order",
    "rank_permutation",
    "random_growth_to_family",
    "rank_occupancy",
    "ranked_paths",
    "simulate_atlas",
    "simulate_first_order",
    "simulate_random_growth",
    "simulated_stats",
    "stationarity_distance",
]

STEP_BLOCK = 8192


@dataclass(frozen=True)
class SimulationConfig:
    """Time grid, size and seed of a simulation.

    ``burn_in`` defaults to 20% of ``num_steps``; ``initial_log_values``
    defaults to all zeros.
    """

    n: int
    dt: float
    num_steps: int
    burn_in: int = None
    seed: int = 0
    initial_log_values: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"need n >= 2 processes, got {self.n}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if int(self.num_steps) != self.num_steps or self.num_steps < 1:
            raise ParameterError(f"num_steps must be a positive integer, got {self.num_steps}")
        burn = int(0.2 * self.num_steps) if self.burn_in is None else self.burn_in
        if int(burn) != burn or not 0 <= burn < self.num_steps:
            raise ParameterError(f"need 0 <= burn_in < num_steps, got {burn}")
        if self.seed < 0:
            raise ParameterError("seed must be non-negative")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "num_steps", int(self.num_steps))
        object.__setattr__(self, "burn_in", int(burn))
        init = self.initial_log_values
        init = np.zeros(self.n) if init is None else np.array(init, dtype=float)
        if init.shape != (self.n,) or not np.all(np.isfinite(init)):
            raise ParameterError("initial_log_values must be n finite numbers")
        init.setflags(write=False)
        object.__setattr__(self, "initial_log_values", init)

    @property
    def recorded_rows(self):
        return self.num_steps - self.burn_in + 1


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Recorded log-values, one row per time ``(burn_in + j) * dt``, one column per process."""

    log_values: np.ndarray
    config: SimulationConfig

    def __post_init__(self):
        self.log_values.setflags(write=False)

    @property
    def times(self):
        c = self.config
        return (c.burn_in + np.arange(self.log_values.shape[0])) * c.dt

    def to_panel(self, stride=1):
        """Export as a :class:`~atlaszipf.estimation.PanelSeries` of positive values.

        Log-values are shifted by one global constant before exponentiating;
        every estimator is invariant to that rescaling.
        """
        from .estimation import PanelSeries

        logs = self.log_values[::int(stride)]
        shift = float(np.max(logs))
        with np.errstate(over="raise", under="ignore"):
            values = np.exp(logs - shift)
        if np.any(values <= 0):
            raise DomainError("log-value range too wide to export without underflow")
        return PanelSeries(values, interval=self.config.dt * int(stride),
                           times=np.arange(values.shape[0]))


def _rank_drifts(family, n, dt):
    _require_valid(family, n)
    g, s2 = family.rates(n)
    drift = g.copy()
    drift[-1] += -family.partial_sum(n)
    return drift * dt, np.sqrt(s2) * np.sqrt(dt)


def iter_first_order(family, config):
    """Yield recorded log-value rows of a first-order simulation block by block.

    Concatenating the yielded arrays gives exactly
    ``simulate_first_order(family, config).log_values``.
    """
    if not isinstance(family, FirstOrderFamily):
        raise ParameterError("family must be a FirstOrderFamily")
    n = config.n
    drift_dt, vol_sqdt = _rank_drifts(family, n, config.dt)
    x = np.array(config.initial_log_values, dtype=float)
    order = np.argsort(-x, kind="stable").astype(np.int64)
    for c, start in enumerate(range(0, config.num_steps, STEP_BLOCK)):
        m = min(STEP_BLOCK, config.num_steps - start)
        xi = block_generator(config.seed, c).standard_normal((m, n))
        record_from = max(0, config.burn_in - start)
        out = np.empty((max(0, m - record_from), n))
        bad = _kernels.euler_rank_steps(x, order, drift_dt, vol_sqdt, xi, out, record_from)
        if bad >= 0:
            raise SimulationError(f"non-finite log-value at step {start + bad + 1}")
        if start + m == config.num_steps:
            out = np.vstack([out, x[None, :]])
        if out.shape[0]:
            yield out


def simulate_first_order(family, config):
    """Simulate the size-``n`` first-order model generated by ``family``.

    Each step ranks the current log-values, then moves the process at rank
    ``r`` by ``g_r dt`` (plus ``G_n dt`` at the bottom rank, with
    ``G_n = -(g_1+...+g_n)``) and ``sigma_r sqrt(dt)`` times a standard normal.
    """
    rows = np.empty((config.recorded_rows, config.n))
    pos = 0
    for block in iter_first_order(family, config):
        rows[pos:pos + block.shape[0]] = block
        pos += block.shape[0]
    return PathEnsemble(rows, config)


def simulated_stats(family, config):
    """Panel estimates of a first-order simulation without storing the paths.

    Streams :func:`iter_first_order` through a
    :class:`~atlaszipf.estimation.RankGapAccumulator`; the result equals
    ``estimate_stats(simulate_first_order(family, config).to_panel())`` up
    to the constant log shift, to which every estimate is invariant.
    """
    from .estimation import RankGapAccumulator

    acc = RankGapAccumulator(config.n, config.dt)
    shift = float(np.max(config.initial_log_values))
    for block in iter_first_order(family, config):
        with np.errstate(over="raise", under="ignore"):
            values = np.exp(block - shift)
        if np.any(values <= 0):
            raise DomainError("log-value range too wide to exponentiate")
        acc.update(values)
    return acc.result()


def simulate_atlas(params, config):
    """Atlas model: drift ``-g`` everywhere plus ``n g`` for the bottom-ranked process."""
    return simulate_first_order(make_atlas_family(params), config)


def rank_permutation(values):
    """1-based ranks: larger values rank first, ties go to the lower index."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DomainError("need a nonempty one-dimensional sequence")
    if not np.all(v > 0):
        raise DomainError("rank_permutation expects positive values")
    order = np.argsort(-v, kind="stable")
    ranks = np.empty(v.size, dtype=np.int64)
    ranks[order] = np.arange(1, v.size + 1)
    return ranks


def ranked_paths(ensemble):
    """Rows of ``ensemble.log_values`` sorted into nonincreasing order."""
    lv = ensemble.log_values if isinstance(ensemble, PathEnsemble) else np.asarray(ensemble)
    return np.sort(lv, axis=1)[:, ::-1]


def rank_occupancy(ensemble):
    """Fraction of recorded times each process (row) spends in each rank (column)."""
    lv = ensemble.log_values
    order = np.argsort(-lv, axis=1, kind="stable")
    n = lv.shape[1]
    occ = np.zeros((n, n))
    for r in range(n):
        occ[:, r] = np.bincount(order[:, r], minlength=n)
    return occ / lv.shape[0]


@dataclass(frozen=True, eq=False)
class RandomGrowthSpec:
    """Growth-rate and volatility functions tabulated over log-level.

    Between grid points both functions interpolate linearly in ``log x``;
    outside the grid they stay at the end values.
    """

    log_levels: np.ndarray
    mu_values: np.ndarray
    sigma_values: np.ndarray

    def __post_init__(self):
        grid = np.array(self.log_levels, dtype=float).ravel()
        mu = np.array(self.mu_values, dtype=float).ravel()
        sig = np.array(self.sigma_values, dtype=float).ravel()
        if not (grid.size == mu.size == sig.size) or grid.size == 0:
            raise ParameterError("tables must be nonempty and of equal length")
        if np.any(np.diff(grid) <= 0):
            raise ParameterError("log_levels must be strictly increasing")
        if not np.all(sig > 0):
            raise DomainError("volatility table must be positive")
        for name, arr in (("log_levels", grid), ("mu_values", mu), ("sigma_values", sig)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def constant(cls, mu, sigma):
        return cls([0.0], [mu], [sigma])

    def mu(self, log_x):
        return np.interp(log_x, self.log_levels, self.mu_values)

    def sigma(self, log_x):
        return np.interp(log_x, self.log_levels, self.sigma_values)


def simulate_random_growth(spec, n, config):
    """``n`` independent copies of ``dlog X = (mu - sigma^2/2) dt + sigma dW``."""
    if config.n != n:
        raise ParameterError(f"config is for {config.n} processes, asked for {n}")
    x = np.array(config.initial_log_values, dtype=float)
    rows = np.empty((config.recorded_rows, n))
    sqdt = np.sqrt(config.dt)
    for c, start in enumerate(range(0, config.num_steps, STEP_BLOCK)):
        m = min(STEP_BLOCK, config.num_steps - start)
        xi = block_generator(config.seed, c).standard_normal((m, n))
        for j in range(m):
            s = start + j
            if s >= config.burn_in:
                rows[s - config.burn_in] = x
            sig = spec.sigma(x)
            x = x + (spec.mu(x) - 0.5 * sig * sig) * config.dt + sig * sqdt * xi[j]
        if not np.all(np.isfinite(x)):
            raise SimulationError(f"non-finite log-value before step {start + m}")
    rows[-1] = x
    return PathEnsemble(rows, config)


def random_growth_to_family(spec, n, config):
    """Rank-based rates of a random-growth system, averaged along simulated paths.

    ``g_k`` is the time average of ``mu - sigma^2/2`` at the value occupying
    rank ``k``, recentred so ``g_1 + ... + g_n = 0``; ``sigma2_k`` is the time
    average of ``sigma^2`` there. The result is a valid model of size ``n``
    (``G_n = 0``), checked with ``validate_family(family, n)``.
    """
    ens = simulate_random_growth(spec, n, config)
    ranked = ranked_paths(ens)
    sig = spec.sigma(ranked)
    g = np.mean(spec.mu(ranked) - 0.5 * sig * sig, axis=0)
    s2 = np.mean(sig * sig, axis=0)
    g = g - np.mean(g)
    csum = np.cumsum(g[:-1])
    g[-1] = -csum[-1]
    bad = np.flatnonzero(csum >= 0)
    if bad.size:
        raise EstimationError(
            f"partial sum g_1+...+g_k is {csum[bad[0]]:.3g} >= 0 at k={bad[0] + 1}; "
            "the system is not rank-stable at this horizon")
    return FirstOrderFamily(g, s2, name="random-growth")


def stationarity_distance(ensemble, first=None, last=-1):
    """Kolmogorov-Smirnov distance between two recorded cross-sections."""
    from scipy.stats import ks_2samp

    lv = ensemble.log_values
    first = lv.shape[0] // 2 if first is None else first
    return float(ks_2samp(lv[first], lv[last]).statistic)
