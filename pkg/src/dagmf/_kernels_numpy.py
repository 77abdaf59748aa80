"""Pure-numpy reference kernels.

Same surface as `_kernels_numba`; selected via the DAGMF_BACKEND
environment variable (see `dagmf.kernels`). All scalar fields are 3D
float64 arrays, vector fields are (3, nx, ny, nz).
"""

from __future__ import annotations

import numpy as np


def gradient(u: np.ndarray) -> np.ndarray:
    """Forward differences with zero-flux (Neumann) boundary."""
    g = np.zeros((3,) + u.shape)
    for a in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        g[a][tuple(lo)] = u[tuple(hi)] - u[tuple(lo)]
    return g


def divergence(q: np.ndarray) -> np.ndarray:
    """Backward differences, boundary-truncated.

    The last flow component along each axis is ignored (treated as zero),
    which makes this the exact negative adjoint of `gradient`.
    """
    s = np.zeros(q.shape[1:])
    for a in range(3):
        t = q[a].copy()
        last = [slice(None)] * 3
        last[a] = slice(-1, None)
        t[tuple(last)] = 0.0
        s += t
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        s[tuple(hi)] -= t[tuple(lo)]
    return s


def project(q: np.ndarray, cap: np.ndarray) -> None:
    """Radially clamp |q| to cap, in place."""
    mag = np.sqrt(q[0] ** 2 + q[1] ** 2 + q[2] ** 2)
    over = mag > cap
    scale = np.ones_like(mag)
    np.divide(cap, mag, out=scale, where=over)
    q *= scale


def chambolle_step(q, divq, p, rho, u, cap, tau, inv_c) -> None:
    """One projected-ascent step on a label's spatial flow.

    Updates q in place and refreshes its divergence buffer.
    """
    s = divq + p - rho - u * inv_c
    q += tau * gradient(s)
    project(q, cap)
    divq[:] = divergence(q)


def axpy(out, w, x) -> None:
    out += w * x


def fill(out, value) -> None:
    out[:] = value


def seed_sigma(sigma, rho, divq, u, inv_c) -> None:
    sigma[:] = rho - divq + u * inv_c


def leaf_flow(p, data, rho, divq, u, inv_c) -> None:
    np.minimum(data, rho - divq + u * inv_c, out=p)


def scale_into(p, sigma, factor) -> None:
    np.multiply(sigma, factor, out=p)


def accumulate_parent_sigma(sigma_par, w, divq, p, rho, p_par, u, inv_c) -> None:
    sigma_par += w * (divq + p - rho + w * p_par - u * inv_c)


def multiplier_step(u, divq, rho, p, c) -> float:
    """u -= c * G with G = div q - rho + p; returns max |G|."""
    g = divq - rho + p
    u -= c * g
    return float(np.max(np.abs(g)))
