"""Numba inner loops for the Metropolis chain.

These mirror the pure-Python ``kernel.propose_and_accept`` arithmetic
operation for operation: same incremental norm update, same generic
log-density difference, same log-domain acceptance comparison.  The test
suite feeds identical (w, log u) streams through both paths and requires
bitwise-equal states.

Proposals and uniforms are generated outside (numpy Philox blocks); the
loops only consume them, so all randomness stays in one documented stream.
"""

from __future__ import annotations

import numpy as np
from numba import njit

KIND_GAUSSIAN = 0
KIND_STUDENT = 1


@njit(cache=True)
def dense_loop(
    x,
    r2,
    lp,
    kind,
    nu,
    w_block,
    log_u,
    lo,
    hi,
    step_base,
    z_out,
    acc_out,
    xisq_out,
    s_out,
    lr_out,
    track_ids,
    track_out,
    stride,
    cmin,
    cmax,
    track_ranges,
):
    d = x.shape[0]
    dd = float(d)
    n_acc = 0
    zero_rejects = 0
    for i in range(lo, hi):
        m = step_base + i
        dot = 0.0
        wsq = 0.0
        for k in range(d):
            wk = w_block[i, k]
            dot += x[k] * wk
            wsq += wk * wk
        s = dot + 0.5 * wsq
        r2_new = r2 + 2.0 * s
        if kind == KIND_STUDENT and r2_new <= 0.0:
            # Proposal at (or, through rounding, past) the origin: a
            # probability-zero event; reject and count.
            acc_out[m] = 0
            xisq_out[m] = 0.0
            s_out[m] = s
            lr_out[m] = -np.inf
            z_out[m + 1] = r2 / dd
            zero_rejects += 1
        else:
            if kind == KIND_GAUSSIAN:
                lp_new = -0.5 * r2_new
            else:
                lp_new = -0.5 * (nu + dd) * np.log1p(r2_new / nu)
            delta = lp_new - lp
            thr = delta if delta < 0.0 else 0.0
            accepted = log_u[i] < thr
            if accepted:
                for k in range(d):
                    x[k] += w_block[i, k]
                r2 = r2_new
                lp = lp_new
                n_acc += 1
                xisq_out[m] = wsq
                if track_ranges:
                    for k in range(d):
                        if x[k] < cmin[k]:
                            cmin[k] = x[k]
                        if x[k] > cmax[k]:
                            cmax[k] = x[k]
            else:
                xisq_out[m] = 0.0
            acc_out[m] = 1 if accepted else 0
            s_out[m] = s
            lr_out[m] = delta
            z_out[m + 1] = r2 / dd
        if (m + 1) % stride == 0:
            row = (m + 1) // stride
            for t in range(track_ids.shape[0]):
                track_out[row, t] = x[track_ids[t]]
    return r2, lp, n_acc, zero_rejects


@njit(cache=True)
def sparse_loop(
    x,
    r2,
    lp,
    kind,
    nu,
    idx_block,
    val_block,
    log_u,
    lo,
    hi,
    step_base,
    z_out,
    acc_out,
    xisq_out,
    s_out,
    lr_out,
    track_ids,
    track_out,
    stride,
    cmin,
    cmax,
    track_ranges,
):
    """Single-coordinate proposals: O(1) work per step."""
    d = x.shape[0]
    dd = float(d)
    n_acc = 0
    zero_rejects = 0
    for i in range(lo, hi):
        m = step_base + i
        k = idx_block[i]
        v = val_block[i]
        dot = x[k] * v
        wsq = v * v
        s = dot + 0.5 * wsq
        r2_new = r2 + 2.0 * s
        if kind == KIND_STUDENT and r2_new <= 0.0:
            acc_out[m] = 0
            xisq_out[m] = 0.0
            s_out[m] = s
            lr_out[m] = -np.inf
            z_out[m + 1] = r2 / dd
            zero_rejects += 1
        else:
            if kind == KIND_GAUSSIAN:
                lp_new = -0.5 * r2_new
            else:
                lp_new = -0.5 * (nu + dd) * np.log1p(r2_new / nu)
            delta = lp_new - lp
            thr = delta if delta < 0.0 else 0.0
            accepted = log_u[i] < thr
            if accepted:
                x[k] += v
                r2 = r2_new
                lp = lp_new
                n_acc += 1
                xisq_out[m] = wsq
                if track_ranges:
                    if x[k] < cmin[k]:
                        cmin[k] = x[k]
                    if x[k] > cmax[k]:
                        cmax[k] = x[k]
            else:
                xisq_out[m] = 0.0
            acc_out[m] = 1 if accepted else 0
            s_out[m] = s
            lr_out[m] = delta
            z_out[m + 1] = r2 / dd
        if (m + 1) % stride == 0:
            row = (m + 1) // stride
            for t in range(track_ids.shape[0]):
                track_out[row, t] = x[track_ids[t]]
    return r2, lp, n_acc, zero_rejects
