"""The random-walk Metropolis kernel and its trajectory recorder.

A step proposes x + w with w from the increment family, computes the
generic log-density difference, and accepts in the log domain:
accept iff log(u) < min{0, delta}.  No specialized acceptance formula is
used here; the radial form lives in ``analytic`` and the agreement of the
two is a tested property, not an assumption.

The squared norm ||x||^2 is updated incrementally via
||x + w||^2 = ||x||^2 + 2 <x, w> + ||w||^2 and resynchronized against a
full recomputation every ``RESYNC_INTERVAL`` steps; the worst relative
drift observed is recorded in the trajectory.

Randomness layout (fixed, documented): a chain with integer ``seed`` uses
the Philox stream from ``seeding.chain_generator(seed)``.  Draw order is:
the stationary start, then alternating blocks of proposals and uniforms.
Proposal blocks cover steps [j*B, min((j+1)*B, n)) with
B = max(64, min(1024, 2**19 // d)); each block draws the family's
variates first, then the block of acceptance uniforms.  One uniform is
consumed per step whether or not the threshold comparison needs it.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import _loops
from .errors import ChainDivergenceError
from .increments import Family, IncrementSpec, _coordinate_proposal_block, sample_increment, sample_increment_block
from .seeding import chain_generator
from .targets import TargetKind, TargetSpec, log_density_norm_sq, sample_stationary

RESYNC_INTERVAL = 4096

_DEBUG = bool(os.environ.get("RWM_LAB_DEBUG"))


def _block_size(d: int) -> int:
    return max(64, min(1024, (1 << 19) // max(d, 1)))


def _kind_code(target: TargetSpec) -> int:
    return _loops.KIND_GAUSSIAN if target.is_gaussian_law else _loops.KIND_STUDENT


@dataclass
class ChainState:
    """Current chain point with its cached log density and squared norm."""

    x: np.ndarray
    log_p: float
    norm_sq: float
    step_index: int = 0

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    @property
    def norm_sq_over_d(self) -> float:
        return self.norm_sq / self.dim


@dataclass(frozen=True)
class StepRecord:
    """Per-step statistics: acceptance, log ratio, S = <x, w> + ||w||^2/2."""

    accepted: bool
    log_ratio: float
    s_stat: float
    z_before: float
    tracked_coords: np.ndarray


def initial_state(target: TargetSpec, rng: np.random.Generator) -> ChainState:
    """Stationary start: X_0 ~ P^d."""
    x = sample_stationary(target, rng)
    r2 = float(x @ x)
    return ChainState(x=x, log_p=log_density_norm_sq(target, r2), norm_sq=r2)


def propose_and_accept(
    state: ChainState,
    target: TargetSpec,
    w: np.ndarray,
    log_u: float,
    tracked_ids: Sequence[int] = (),
) -> tuple[ChainState, StepRecord]:
    """Apply one forced proposal ``w`` with acceptance variate ``log_u``.

    This is the reference arithmetic the fast loops mirror; tests drive it
    directly with chosen (w, log u) pairs.
    """
    x = state.x
    dot = float(x @ w)
    wsq = float(w @ w)
    s = dot + 0.5 * wsq
    r2_new = state.norm_sq + 2.0 * s
    z_before = state.norm_sq_over_d

    if target.kind is TargetKind.SCALE_MIXTURE and r2_new <= 0.0:
        record = StepRecord(False, -math.inf, s, z_before, np.asarray(state.x)[list(tracked_ids)].copy())
        new_state = ChainState(x, state.log_p, state.norm_sq, state.step_index + 1)
        return new_state, record

    lp_new = log_density_norm_sq(target, r2_new)
    delta = lp_new - state.log_p
    accepted = log_u < min(0.0, delta)
    if accepted:
        x = x + w
        new_state = ChainState(x, lp_new, r2_new, state.step_index + 1)
    else:
        new_state = ChainState(x, state.log_p, state.norm_sq, state.step_index + 1)
    if _DEBUG:
        exact = log_density_norm_sq(target, float(new_state.x @ new_state.x))
        assert abs(new_state.log_p - exact) <= 1e-8 * max(1.0, abs(exact)), "log_p cache out of sync"
    record = StepRecord(
        accepted, delta, s, z_before, new_state.x[list(tracked_ids)].copy()
    )
    return new_state, record


def step(
    state: ChainState,
    target: TargetSpec,
    inc: IncrementSpec,
    rng: np.random.Generator,
    tracked_ids: Sequence[int] = (),
) -> tuple[ChainState, StepRecord]:
    """One Metropolis step: draw w ~ Gamma^d, then propose-and-accept."""
    w = sample_increment(inc, state.dim, rng)
    log_u = math.log(rng.random())
    return propose_and_accept(state, target, w, log_u, tracked_ids)


@dataclass
class Trajectory:
    """A completed chain run with per-step series and summary accumulators."""

    target: TargetSpec
    increment: IncrementSpec
    seed: int
    n_steps: int
    record_stride: int
    tracked_ids: np.ndarray
    z_series: np.ndarray
    accepted: np.ndarray
    xi_sq: np.ndarray
    s_stat: np.ndarray
    log_ratio: np.ndarray
    tracked: np.ndarray
    coord_ranges: dict = field(default_factory=dict)
    n_accepted: int = 0
    zero_proposal_rejects: int = 0
    max_r2_drift: float = 0.0

    @property
    def dim(self) -> int:
        return self.target.dim

    @property
    def accept_rate(self) -> float:
        return self.n_accepted / self.n_steps if self.n_steps else 1.0

    @property
    def sum_xi_sq(self) -> float:
        return float(self.xi_sq.sum())

    def tracked_series(self, column: int = 0) -> np.ndarray:
        """Recorded values of one tracked coordinate (steps 0, stride, ...)."""
        return self.tracked[:, column]

    def summary(self) -> dict:
        inc = self.increment
        t = self.target
        d = {
            "d": self.dim,
            "target_kind": "student_t" if t.nu is not None else "gaussian",
            "nu": t.nu,
            "family": inc.family.value,
            "l": inc.l,
            "gamma": inc.gamma,
            "df": inc.df,
            "alpha": inc.alpha,
            "p_move": inc.p_move,
            "seed": self.seed,
            "n_steps": self.n_steps,
            "n_accepted": self.n_accepted,
            "accept_rate": self.accept_rate,
            "sum_xi_sq": self.sum_xi_sq,
            "z_min": float(self.z_series.min()),
            "z_max": float(self.z_series.max()),
            "zero_proposal_rejects": self.zero_proposal_rejects,
            "max_r2_drift": self.max_r2_drift,
        }
        for c, cid in enumerate(self.tracked_ids):
            d[f"coord{int(cid)}_min"] = float(self.tracked[:, c].min())
            d[f"coord{int(cid)}_max"] = float(self.tracked[:, c].max())
        return d

    def records_jsonl(self) -> Iterator[str]:
        """One JSON line per recorded stride point (the kernel wire format)."""
        for row in range(self.tracked.shape[0]):
            m = row * self.record_stride
            rec = {
                "m": m,
                "z": float(self.z_series[m]),
                "tracked": [float(v) for v in self.tracked[row]],
            }
            if m >= 1:
                rec["accepted"] = bool(self.accepted[m - 1])
                rec["log_ratio"] = float(self.log_ratio[m - 1])
                rec["s_stat"] = float(self.s_stat[m - 1])
            yield json.dumps(rec, sort_keys=True)

    def last_records(self, count: int = 10) -> list[dict]:
        lo = max(0, self.n_steps - count)
        return [
            {
                "m": m + 1,
                "accepted": bool(self.accepted[m]),
                "log_ratio": float(self.log_ratio[m]),
                "s_stat": float(self.s_stat[m]),
                "z": float(self.z_series[m + 1]),
            }
            for m in range(lo, self.n_steps)
        ]


def _draw_dense_block(spec: IncrementSpec, d: int, b: int, rng) -> np.ndarray:
    return sample_increment_block(spec, d, b, rng)


def run_chain(
    target: TargetSpec,
    inc: IncrementSpec,
    n_steps: int,
    record_stride: int = 1,
    tracked_coord_ids: Sequence[int] = (0,),
    seed: int = 0,
    coord_range_checkpoints: Optional[Iterable[int]] = None,
) -> Trajectory:
    """Run a stationary-start chain; deterministic given the arguments.

    ``coord_range_checkpoints`` requests per-coordinate running min/max
    snapshots (for the degeneracy diagnostic) at those step counts; the
    O(d)-per-accept bookkeeping is only enabled when the set is nonempty.
    The realized path depends only on (target, inc, n_steps, seed), never
    on stride, tracked ids, or checkpoints.
    """
    d = target.dim
    n = int(n_steps)
    if n < 0:
        raise ValueError("n_steps must be >= 0")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    tracked_ids = np.asarray(list(tracked_coord_ids), dtype=np.int64)
    if tracked_ids.size and (tracked_ids.min() < 0 or tracked_ids.max() >= d):
        raise ValueError("tracked coordinate ids out of range")

    checkpoints = sorted(set(int(m) for m in coord_range_checkpoints or ()))
    if checkpoints and (checkpoints[0] < 0 or checkpoints[-1] > n):
        raise ValueError("coordinate-range checkpoints must lie in [0, n_steps]")
    track_ranges = bool(checkpoints)

    rng = chain_generator(seed)
    x = sample_stationary(target, rng)
    r2 = float(x @ x)
    lp = log_density_norm_sq(target, r2)
    kind = _kind_code(target)
    nu = float(target.nu) if target.nu is not None else 0.0

    n_records = n // record_stride + 1
    z_series = np.empty(n + 1)
    z_series[0] = r2 / d
    accepted = np.zeros(n, dtype=np.uint8)
    xi_sq = np.zeros(n)
    s_stat = np.zeros(n)
    log_ratio = np.zeros(n)
    tracked = np.empty((n_records, tracked_ids.size))
    if tracked_ids.size:
        tracked[0] = x[tracked_ids]

    if track_ranges:
        cmin = x.copy()
        cmax = x.copy()
    else:
        cmin = np.empty(1)
        cmax = np.empty(1)
    coord_ranges: dict[int, np.ndarray] = {}
    cp_iter = iter(checkpoints)
    next_cp = next(cp_iter, None)
    while next_cp == 0:
        coord_ranges[0] = np.zeros(d)
        next_cp = next(cp_iter, None)

    traj = Trajectory(
        target=target,
        increment=inc,
        seed=int(seed),
        n_steps=n,
        record_stride=record_stride,
        tracked_ids=tracked_ids,
        z_series=z_series,
        accepted=accepted,
        xi_sq=xi_sq,
        s_stat=s_stat,
        log_ratio=log_ratio,
        tracked=tracked,
        coord_ranges=coord_ranges,
    )

    sparse = inc.family is Family.COORDINATE_GAUSSIAN
    B = _block_size(d)
    n_acc_total = 0
    zero_total = 0
    max_drift = 0.0

    for block_start in range(0, n, B):
        b = min(B, n - block_start)
        if sparse:
            idx_block, val_block = _coordinate_proposal_block(inc, d, b, rng)
        else:
            w_block = _draw_dense_block(inc, d, b, rng)
        log_u = np.log(rng.random(b))

        lo = 0
        while lo < b:
            hi = b
            m_lo = block_start + lo
            next_resync = ((m_lo // RESYNC_INTERVAL) + 1) * RESYNC_INTERVAL
            hi = min(hi, next_resync - block_start)
            if next_cp is not None:
                hi = min(hi, next_cp - block_start)
            if sparse:
                r2, lp, n_acc, zr = _loops.sparse_loop(
                    x, r2, lp, kind, nu, idx_block, val_block, log_u, lo, hi,
                    block_start, z_series, accepted, xi_sq, s_stat, log_ratio,
                    tracked_ids, tracked, record_stride, cmin, cmax, track_ranges,
                )
            else:
                r2, lp, n_acc, zr = _loops.dense_loop(
                    x, r2, lp, kind, nu, w_block, log_u, lo, hi,
                    block_start, z_series, accepted, xi_sq, s_stat, log_ratio,
                    tracked_ids, tracked, record_stride, cmin, cmax, track_ranges,
                )
            n_acc_total += n_acc
            zero_total += zr
            m_now = block_start + hi
            while next_cp is not None and m_now == next_cp:
                coord_ranges[next_cp] = cmax - cmin
                next_cp = next(cp_iter, None)
            if m_now % RESYNC_INTERVAL == 0 or m_now == n:
                if not np.isfinite(x).all() or not math.isfinite(r2):
                    traj.n_accepted = n_acc_total
                    raise ChainDivergenceError(
                        f"non-finite chain state at step {m_now}",
                        last_records=traj.last_records(),
                    )
                r2_exact = float(x @ x)
                if r2_exact > 0:
                    max_drift = max(max_drift, abs(r2 - r2_exact) / r2_exact)
                r2 = r2_exact
                lp = log_density_norm_sq(target, r2)
            lo = hi

    traj.n_accepted = n_acc_total
    traj.zero_proposal_rejects = zero_total
    traj.max_r2_drift = max_drift
    if zero_total:
        warnings.warn(
            f"{zero_total} proposal(s) hit the origin under a scale-mixture target "
            "(probability-zero event); auto-rejected and counted",
            RuntimeWarning,
        )
    return traj
