"""Estimators that turn trajectories into the observable scaling claims.

Cost proxies
------------
The iteration-cost scale of a chain is not directly observable; two
independent proxies are used so estimator artifacts cannot masquerade as
scaling laws:

* ``iact``: integrated autocorrelation time of a bounded functional of the
  chain, via the initial-positive-sequence truncation rule;
* ``threshold_crossing_m``: the first iteration count after which the
  running ergodic average stays within a fixed epsilon of its reference.

The bounded test functional used throughout the experiments is
g(v) = min(v^2, 10): bounded, continuous, and with a quadrature-computable
reference expectation for both target families.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sp_fft

from .kernel import Trajectory


def bounded_square(v):
    """The experiment's bounded coordinate functional min(v^2, 10)."""
    return np.minimum(np.square(v), 10.0)


def degeneracy_statistic(traj: Trajectory, m_steps: int) -> float:
    """Best-case coordinate oscillation over steps 0..m_steps.

    Returns min over coordinates k of (max_i X_{i,k} - min_i X_{i,k}),
    i <= m_steps: small values mean at least one coordinate has barely
    moved.  Requires the kernel to have accumulated coordinate ranges at
    ``m_steps`` (a checkpoint passed to ``run_chain``).
    """
    if m_steps > traj.n_steps:
        raise ValueError(f"m_steps={m_steps} exceeds trajectory length {traj.n_steps}")
    if m_steps not in traj.coord_ranges:
        raise ValueError(
            f"no coordinate-range checkpoint at {m_steps}; "
            f"available: {sorted(traj.coord_ranges)}"
        )
    return float(traj.coord_ranges[m_steps].min())


def z_oscillation(traj: Trajectory, t_horizon: float, alpha_d: int) -> float:
    """max - min of Z = ||X||^2/d over steps 0..floor(t_horizon * alpha_d)."""
    last = int(math.floor(t_horizon * alpha_d))
    if last > traj.n_steps:
        raise ValueError(
            f"horizon needs {last} steps but trajectory has {traj.n_steps}"
        )
    seg = traj.z_series[: last + 1]
    return float(seg.max() - seg.min())


def ergodic_error(
    traj: Trajectory,
    f: Callable,
    coords: Sequence[int],
    reference: float,
) -> float:
    """|trajectory mean of f over the tracked coordinates - reference|.

    ``coords`` are column indices into the trajectory's tracked block;
    ``f`` must accept the corresponding arrays (vectorized).  The mean runs
    over all recorded states (steps 0, stride, 2*stride, ...).
    """
    cols = [traj.tracked[:, c] for c in coords]
    vals = np.asarray(f(*cols), dtype=float)
    return abs(float(vals.mean()) - reference)


def esjd(traj: Trajectory) -> float:
    """Expected squared jump distance: trajectory mean of ||xi_m||^2."""
    if traj.n_steps == 0:
        return 0.0
    return float(traj.xi_sq.mean())


def iact(series) -> float:
    """Integrated autocorrelation time via the initial-positive-sequence rule.

    Estimator (deterministic, fully specified):

    1. autocorrelations rho(k) from the FFT of the demeaned series,
       normalized by the series length (biased estimator);
    2. pair sums G_m = rho(2m) + rho(2m+1) for m = 0, 1, ...;
    3. truncate before the first nonpositive G_m with m >= 1 (G_0, which
       contains rho(0) = 1, is always included);
    4. tau = 2 * sum(G_0..G_{m*-1}) - 1.

    Returns NaN (with a warning) for a zero-variance series; requires at
    least 1000 points.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 1000:
        raise ValueError(f"iact needs a series of length >= 1000, got {n}")
    x = x - x.mean()
    var = float(x @ x) / n
    if var == 0.0:
        warnings.warn("iact: zero-variance series, estimator undefined", RuntimeWarning)
        return math.nan
    nfft = sp_fft.next_fast_len(2 * n)
    fx = sp_fft.rfft(x, nfft)
    acov = sp_fft.irfft(np.abs(fx) ** 2, nfft)[:n] / n
    rho = acov / acov[0]
    n_pairs = n // 2
    total = 0.0
    for m in range(n_pairs):
        g = rho[2 * m] + rho[2 * m + 1]
        if m >= 1 and g <= 0.0:
            break
        total += g
    return 2.0 * total - 1.0


def batch_means_se(series, n_batches: int | None = None) -> float:
    """Batch-means standard error of the series mean.

    Splits into ``n_batches`` (default: floor(sqrt(n)), clipped to [10, 64])
    equal batches, dropping the remainder.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n_batches is None:
        n_batches = int(np.clip(int(math.sqrt(n)), 10, 64))
    if n < 2 * n_batches:
        raise ValueError("series too short for batch means")
    size = n // n_batches
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def threshold_crossing_m(values, reference: float, eps: float) -> tuple[float, bool]:
    """First M after which the running mean stays within eps of reference.

    Returns (M, censored): censored is True when the error still exceeds
    eps at the end of the series, in which case M is the series length (a
    lower bound for the true crossing).
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    if n == 0:
        raise ValueError("empty series")
    running = np.cumsum(v) / np.arange(1, n + 1)
    bad = np.abs(running - reference) > eps
    if bad[-1]:
        return float(n), True
    if not bad.any():
        return 1.0, False
    return float(np.flatnonzero(bad).max() + 2), False


@dataclass(frozen=True)
class RateFit:
    """Least-squares exponent fit of cost ~ d^slope on log-log axes."""

    dims: np.ndarray
    log_d: np.ndarray
    log_cost: np.ndarray
    slope: float
    intercept: float
    residual_max: float
    half_width: float
    n_seeds: int


def _ls_slope(log_d: np.ndarray, log_cost: np.ndarray) -> tuple[float, float]:
    a = np.vstack([log_d, np.ones_like(log_d)]).T
    coef, *_ = np.linalg.lstsq(a, log_cost, rcond=None)
    return float(coef[0]), float(coef[1])


def fit_rate(points: Sequence[tuple[float, object]]) -> RateFit:
    """Fit the slope of log(cost) against log(d).

    ``points`` pairs each dimension with either a scalar cost or the
    per-seed list of costs; per-seed lists enable a delete-one-seed
    jackknife whose 1.96-sigma normal half-width is reported.  Costs enter
    as the median over seeds.  Requires at least 4 distinct dimensions and
    strictly positive, finite costs.
    """
    if len({d for d, _ in points}) < 4:
        raise ValueError("rate fit requires at least 4 distinct dimensions")
    dims = []
    cost_lists = []
    for d, c in points:
        arr = np.atleast_1d(np.asarray(c, dtype=float))
        if not np.isfinite(arr).all() or (arr <= 0).any():
            raise ValueError(f"costs must be positive and finite, got {arr} at d={d}")
        dims.append(float(d))
        cost_lists.append(arr)
    dims = np.asarray(dims)
    order = np.argsort(dims)
    dims = dims[order]
    cost_lists = [cost_lists[i] for i in order]

    log_d = np.log(dims)
    medians = np.array([np.median(c) for c in cost_lists])
    log_cost = np.log(medians)
    slope, intercept = _ls_slope(log_d, log_cost)
    residual_max = float(np.max(np.abs(log_cost - (slope * log_d + intercept))))

    seed_counts = {c.size for c in cost_lists}
    if len(seed_counts) == 1 and seed_counts.pop() >= 2:
        s = cost_lists[0].size
        jack = np.empty(s)
        for i in range(s):
            med_i = np.array([np.median(np.delete(c, i)) for c in cost_lists])
            jack[i], _ = _ls_slope(log_d, np.log(med_i))
        se = math.sqrt((s - 1) / s * float(np.sum((jack - jack.mean()) ** 2)))
        half_width = 1.96 * se
        n_seeds = s
    else:
        half_width = math.nan
        n_seeds = 1 if all(c.size == 1 for c in cost_lists) else 0

    return RateFit(
        dims=dims,
        log_d=log_d,
        log_cost=log_cost,
        slope=slope,
        intercept=intercept,
        residual_max=residual_max,
        half_width=half_width,
        n_seeds=n_seeds,
    )
