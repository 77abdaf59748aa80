"""Numba-compiled kernels.

Loop twins of `_kernels_numpy` with identical call signatures. Voxel rows
are distributed over the numba thread pool with static scheduling, so for
a fixed thread count every run is bit-identical; the only cross-thread
reduction is an exact max. In-place kernels index arrays directly
(mutating through ravel() views silently drops writes under nopython
mode).
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_JIT = dict(cache=True, parallel=True, fastmath=False)


@njit(**_JIT)
def gradient(u):
    nx, ny, nz = u.shape
    g = np.zeros((3, nx, ny, nz))
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                if i + 1 < nx:
                    g[0, i, j, k] = u[i + 1, j, k] - u[i, j, k]
                if j + 1 < ny:
                    g[1, i, j, k] = u[i, j + 1, k] - u[i, j, k]
                if k + 1 < nz:
                    g[2, i, j, k] = u[i, j, k + 1] - u[i, j, k]
    return g


@njit(**_JIT)
def divergence(q):
    nx, ny, nz = q.shape[1], q.shape[2], q.shape[3]
    s = np.empty((nx, ny, nz))
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                acc = 0.0
                if i + 1 < nx:
                    acc += q[0, i, j, k]
                if i > 0:
                    acc -= q[0, i - 1, j, k]
                if j + 1 < ny:
                    acc += q[1, i, j, k]
                if j > 0:
                    acc -= q[1, i, j - 1, k]
                if k + 1 < nz:
                    acc += q[2, i, j, k]
                if k > 0:
                    acc -= q[2, i, j, k - 1]
                s[i, j, k] = acc
    return s


@njit(**_JIT)
def project(q, cap):
    nx, ny, nz = cap.shape
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                mag = np.sqrt(q[0, i, j, k] ** 2 + q[1, i, j, k] ** 2
                              + q[2, i, j, k] ** 2)
                if mag > cap[i, j, k]:
                    scale = cap[i, j, k] / mag
                    q[0, i, j, k] *= scale
                    q[1, i, j, k] *= scale
                    q[2, i, j, k] *= scale


@njit(**_JIT)
def chambolle_step(q, divq, p, rho, u, cap, tau, inv_c):
    nx, ny, nz = p.shape
    s = np.empty((nx, ny, nz))
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                s[i, j, k] = divq[i, j, k] + p[i, j, k] - rho[i, j, k] \
                    - u[i, j, k] * inv_c
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                if i + 1 < nx:
                    q[0, i, j, k] += tau * (s[i + 1, j, k] - s[i, j, k])
                if j + 1 < ny:
                    q[1, i, j, k] += tau * (s[i, j + 1, k] - s[i, j, k])
                if k + 1 < nz:
                    q[2, i, j, k] += tau * (s[i, j, k + 1] - s[i, j, k])
                mag = np.sqrt(q[0, i, j, k] ** 2 + q[1, i, j, k] ** 2
                              + q[2, i, j, k] ** 2)
                if mag > cap[i, j, k]:
                    scale = cap[i, j, k] / mag
                    q[0, i, j, k] *= scale
                    q[1, i, j, k] *= scale
                    q[2, i, j, k] *= scale
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                acc = 0.0
                if i + 1 < nx:
                    acc += q[0, i, j, k]
                if i > 0:
                    acc -= q[0, i - 1, j, k]
                if j + 1 < ny:
                    acc += q[1, i, j, k]
                if j > 0:
                    acc -= q[1, i, j - 1, k]
                if k + 1 < nz:
                    acc += q[2, i, j, k]
                if k > 0:
                    acc -= q[2, i, j, k - 1]
                divq[i, j, k] = acc


@njit(**_JIT)
def axpy(out, w, x):
    nx, ny, nz = out.shape
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                out[i, j, k] += w * x[i, j, k]


@njit(**_JIT)
def fill(out, value):
    nx, ny, nz = out.shape
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                out[i, j, k] = value


@njit(**_JIT)
def seed_sigma(sigma, rho, divq, u, inv_c):
    nx, ny, nz = sigma.shape
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                sigma[i, j, k] = rho[i, j, k] - divq[i, j, k] + u[i, j, k] * inv_c


@njit(**_JIT)
def leaf_flow(p, data, rho, divq, u, inv_c):
    nx, ny, nz = p.shape
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                p[i, j, k] = min(data[i, j, k],
                                 rho[i, j, k] - divq[i, j, k] + u[i, j, k] * inv_c)


@njit(**_JIT)
def scale_into(p, sigma, factor):
    nx, ny, nz = p.shape
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                p[i, j, k] = sigma[i, j, k] * factor


@njit(**_JIT)
def accumulate_parent_sigma(sigma_par, w, divq, p, rho, p_par, u, inv_c):
    nx, ny, nz = sigma_par.shape
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                sigma_par[i, j, k] += w * (divq[i, j, k] + p[i, j, k]
                                           - rho[i, j, k] + w * p_par[i, j, k]
                                           - u[i, j, k] * inv_c)


@njit(**_JIT)
def multiplier_step(u, divq, rho, p, c):
    nx, ny, nz = u.shape
    res = 0.0
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                g = divq[i, j, k] - rho[i, j, k] + p[i, j, k]
                u[i, j, k] -= c * g
                res = max(res, abs(g))
    return res
