"""Hot Monte Carlo kernels.

Each kernel has a numba-compiled implementation (scalar loops) and a
vectorized pure-numpy fallback with identical floating-point operation order,
so the two paths agree bit-for-bit on the stepping arithmetic.  The active
path is chosen at import time by ``sofrsim._accel`` (env flag
``SOFRSIM_PURE_NUMPY=1`` forces the fallback).
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import NUMBA_ENABLED, njit

# ---------------------------------------------------------------------------
# VAR path stepping: out[t+1] = out[t] + A out[t] + drift[t] + C z[t]
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _var_paths_jit(x0, amat, drifts, cfac, z, out):
    n, n_steps, d = z.shape
    for i in range(n):
        for k in range(d):
            out[i, 0, k] = x0[i, k]
        for t in range(n_steps):
            for k in range(d):
                acc = 0.0
                for j in range(d):
                    acc += amat[k, j] * out[i, t, j]
                e = 0.0
                for j in range(d):
                    e += cfac[k, j] * z[i, t, j]
                out[i, t + 1, k] = out[i, t, k] + ((acc + drifts[t, k]) + e)


def _var_paths_np(x0, amat, drifts, cfac, z, out):
    n, n_steps, d = z.shape
    out[:, 0, :] = x0
    for t in range(n_steps):
        prev = out[:, t, :]
        for k in range(d):
            acc = np.zeros(n)
            for j in range(d):
                acc = acc + amat[k, j] * prev[:, j]
            e = np.zeros(n)
            for j in range(d):
                e = e + cfac[k, j] * z[:, t, j]
            out[:, t + 1, k] = prev[:, k] + ((acc + drifts[t, k]) + e)


# ---------------------------------------------------------------------------
# Daily curve paths: step the curve factors, map to coefficients through the
# shifted-log chain, derive the overnight rate; record paths and snapshots.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _curve_paths_jit(
    x0,
    amat,
    drifts,
    cfac,
    z,
    floor_meet,
    meet_idx,
    shifts,
    w0,
    delta,
    xi_out,
    sofr_out,
    snap_slot,
    snap_out,
):
    n, n_steps, k_dim = z.shape
    record_xi = xi_out.shape[1] > 0
    record_sofr = sofr_out.shape[1] > 0
    cur = np.empty(k_dim)
    xi = np.empty(k_dim)
    for i in range(n):
        for k in range(k_dim):
            cur[k] = x0[i, k]
        for t in range(n_steps + 1):
            if t > 0:
                for k in range(k_dim):
                    acc = 0.0
                    for j in range(k_dim):
                        acc += amat[k, j] * cur[j]
                    e = 0.0
                    for j in range(k_dim):
                        e += cfac[k, j] * z[i, t - 1, j]
                    cur[k] = cur[k] + ((acc + drifts[t - 1, k]) + e)
            floor = floor_meet[i, meet_idx[t]]
            xi[0] = math.exp(cur[0]) + floor - shifts[0]
            for k in range(1, k_dim):
                xi[k] = math.exp(cur[k]) * (xi[k - 1] + shifts[k - 1]) - shifts[k]
            if record_xi:
                for k in range(k_dim):
                    xi_out[i, t, k] = xi[k]
            if record_sofr:
                f0 = 0.0
                for k in range(k_dim):
                    f0 += w0[k] * xi[k]
                sofr_out[i, t] = math.expm1(f0 * delta) / delta
            slot = snap_slot[t]
            if slot >= 0:
                for k in range(k_dim):
                    snap_out[slot, i, k] = xi[k]


def _curve_paths_np(
    x0,
    amat,
    drifts,
    cfac,
    z,
    floor_meet,
    meet_idx,
    shifts,
    w0,
    delta,
    xi_out,
    sofr_out,
    snap_slot,
    snap_out,
):
    n, n_steps, k_dim = z.shape
    record_xi = xi_out.shape[1] > 0
    record_sofr = sofr_out.shape[1] > 0
    cur = x0.copy()
    xi = np.empty((n, k_dim))
    for t in range(n_steps + 1):
        if t > 0:
            nxt = np.empty_like(cur)
            for k in range(k_dim):
                acc = np.zeros(n)
                for j in range(k_dim):
                    acc = acc + amat[k, j] * cur[:, j]
                e = np.zeros(n)
                for j in range(k_dim):
                    e = e + cfac[k, j] * z[:, t - 1, j]
                nxt[:, k] = cur[:, k] + ((acc + drifts[t - 1, k]) + e)
            cur = nxt
        floor = floor_meet[:, meet_idx[t]]
        xi[:, 0] = np.exp(cur[:, 0]) + floor - shifts[0]
        for k in range(1, k_dim):
            xi[:, k] = np.exp(cur[:, k]) * (xi[:, k - 1] + shifts[k - 1]) - shifts[k]
        if record_xi:
            xi_out[:, t, :] = xi
        if record_sofr:
            f0 = np.zeros(n)
            for k in range(k_dim):
                f0 = f0 + w0[k] * xi[:, k]
            sofr_out[:, t] = np.expm1(f0 * delta) / delta
        slot = snap_slot[t]
        if slot >= 0:
            snap_out[slot, :, :] = xi


var_paths = _var_paths_jit if NUMBA_ENABLED else _var_paths_np
curve_paths = _curve_paths_jit if NUMBA_ENABLED else _curve_paths_np
