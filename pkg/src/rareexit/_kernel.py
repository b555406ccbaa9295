"""Numba kernel for controlled Euler-Maruyama trajectories.

Scalars travel in two flat arrays (``fp`` floats, ``ip`` ints) indexed by the
module constants below; time-only factors of the control are precomputed per
step in ``ta`` and ``tb``.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .rng import normal_block

# float slots
F_EPS, F_DT, F_X0, F_XSTART, F_LOWER, F_UPPER, F_L2, F_K1, F_DELTA, F_XHAT, \
    F_F1HAT, F_APLUS, F_AMINUS, F_QPX0, F_QPH = range(15)
N_FP = 15
# int slots
I_KIND, I_TWO, I_NSTEPS, I_NMOLL, I_QPMODE = range(5)
N_IP = 5
# kind codes
K_NONE, K_QP, K_HJB0, K_MLIN, K_MNL = range(5)
# status codes
ST_NOEXIT, ST_EXIT, ST_NONFINITE = 0, 1, 2


@njit(inline="always")
def _horner(coef, x):
    acc = 0.0
    for i in range(coef.shape[0] - 1, -1, -1):
        acc = acc * x + coef[i]
    return acc


@njit(inline="always")
def _qp(x, fp, ip, qp_coef, qp_val, qp_der):
    # quasipotential S(x0, x): exact polynomial or cubic Hermite table
    if ip[I_QPMODE] == 0:
        return _horner(qp_coef, x)
    h = fp[F_QPH]
    s = (x - fp[F_QPX0]) / h
    n = qp_val.shape[0] - 1
    if s <= 0.0:
        return qp_val[0] + qp_der[0] * (x - fp[F_QPX0])
    if s >= n:
        return qp_val[n] + qp_der[n] * (x - fp[F_QPX0] - n * h)
    j = int(s)
    u = s - j
    u2 = u * u
    u3 = u2 * u
    return ((2 * u3 - 3 * u2 + 1) * qp_val[j] + (u3 - 2 * u2 + u) * h * qp_der[j]
            + (-2 * u3 + 3 * u2) * qp_val[j + 1] + (u3 - u2) * h * qp_der[j + 1])


@njit(inline="always")
def _soft_grad(v0, g0, v1, g1, v2, g2, n, delta):
    # gradient of the soft minimum of up to three pieces
    m = v0
    if n > 1 and v1 < m:
        m = v1
    if n > 2 and v2 < m:
        m = v2
    if delta == 0.0:
        if v0 == m:
            return g0
        if n > 1 and v1 == m:
            return g1
        return g2
    w0 = np.exp(-(v0 - m) / delta)
    s = w0
    acc = w0 * g0
    if n > 1:
        w1 = np.exp(-(v1 - m) / delta)
        s += w1
        acc += w1 * g1
    if n > 2:
        w2 = np.exp(-(v2 - m) / delta)
        s += w2
        acc += w2 * g2
    return acc / s


@njit(inline="always")
def _u0_piece(y, A, E, k1):
    # value and gradient (in y) of one side of the eps = 0 solution
    if y >= A * E:
        return k1 * (A * A - y * y), -2.0 * k1 * y
    h = 1.0 - E * E
    g = A - y * E
    return k1 * g * g / h, -2.0 * k1 * E * g / h


@njit(inline="always")
def _lqr_grad(y, q, r, xhat, f1hat, v_out, g_out, two, delta):
    # soft-min gradient of the LQR pieces and the outer piece
    ws = q * y - xhat * r
    vp = ws * ws + f1hat
    gp = 2.0 * q * ws
    if not two:
        return _soft_grad(vp, gp, v_out, g_out, 0.0, 0.0, 2, delta)
    wm = q * y + xhat * r
    return _soft_grad(vp, gp, wm * wm + f1hat, 2.0 * q * wm, v_out, g_out, 3, delta)


@njit(nogil=True, cache=True)
def simulate(seed, cell, first, count, fp, ip, drift, diff, ta, tb,
             qp_coef, qp_val, qp_der, status, exit_step, side, log_lr):
    """Simulate trajectories ``first .. first+count-1`` into the output arrays.

    Output arrays are indexed from 0 for trajectory ``first``.
    """
    kind = ip[I_KIND]
    nmoll = ip[I_NMOLL]
    x0 = fp[F_X0]
    k1 = fp[F_K1]
    l2 = fp[F_L2]
    delta = fp[F_DELTA]
    xhat = fp[F_XHAT]
    f1hat = fp[F_F1HAT]
    a_plus = fp[F_APLUS]
    a_minus = fp[F_AMINUS]
    eps = fp[F_EPS]
    dt = fp[F_DT]
    sq_dt = np.sqrt(dt)
    sq_eps = np.sqrt(eps)
    sq_eps_dt = np.sqrt(eps * dt)
    lower = fp[F_LOWER]
    upper = fp[F_UPPER]
    two = ip[I_TWO] != 0
    nsteps = ip[I_NSTEPS]
    z0 = z1 = z2 = z3 = 0.0
    for j in range(count):
        traj = first + j
        x = fp[F_XSTART]
        llr = 0.0
        st = ST_NOEXIT
        k_exit = -1
        sd = 0
        for k in range(nsteps):
            r4 = k & 3
            if r4 == 0:
                z0, z1, z2, z3 = normal_block(seed, cell, traj, k >> 2)
                xi = z0
            elif r4 == 1:
                xi = z1
            elif r4 == 2:
                xi = z2
            else:
                xi = z3
            bx = _horner(drift, x)
            sx = _horner(diff, x)
            y = x - x0
            if kind == K_NONE:
                g = 0.0
            elif kind == K_QP:
                g = 2.0 * bx / (sx * sx)
            elif kind == K_HJB0:
                v0, g0 = _u0_piece(y, a_plus, ta[k], k1)
                if two:
                    v1, g1 = _u0_piece(-y, a_minus, ta[k], k1)
                    g = _soft_grad(v0, g0, v1, -g1, 0.0, 0.0, 2, delta)
                else:
                    g = g0
            elif kind == K_MLIN:
                g = -2.0 * k1 * y
                if k < nmoll:
                    g = _lqr_grad(y, ta[k], tb[k], xhat, f1hat, l2 - k1 * y * y, g, two, delta)
            else:
                g = 2.0 * bx / (sx * sx)
                if k < nmoll:
                    v_out = l2 - _qp(x, fp, ip, qp_coef, qp_val, qp_der)
                    g = _lqr_grad(y, ta[k], tb[k], xhat, f1hat, v_out, g, two, delta)
            u = -sx * g
            x = x + (bx + sx * u) * dt + sx * sq_eps_dt * xi
            llr += -(u * u) * dt / (2.0 * eps) - u * sq_dt * xi / sq_eps
            if not (np.isfinite(x) and np.isfinite(llr)):
                st = ST_NONFINITE
                k_exit = k + 1
                break
            if x >= upper:
                st = ST_EXIT
                k_exit = k + 1
                sd = 1
                break
            if two and x <= lower:
                st = ST_EXIT
                k_exit = k + 1
                sd = -1
                break
        status[j] = st
        exit_step[j] = k_exit
        side[j] = sd
        log_lr[j] = llr


@njit(cache=True)
def partial_sums(status, log_lr, shift, chunk):
    """Per-chunk sums of ``exp(l - shift)`` and ``exp(2 (l - shift))`` over exits."""
    n = status.shape[0]
    nc = (n + chunk - 1) // chunk
    s1 = np.zeros(nc)
    s2 = np.zeros(nc)
    for c in range(nc):
        a = 0.0
        b = 0.0
        for j in range(c * chunk, min(n, (c + 1) * chunk)):
            if status[j] == ST_EXIT:
                w = np.exp(log_lr[j] - shift)
                a += w
                b += w * w
        s1[c] = a
        s2[c] = b
    return s1, s2


def tree_sum(a: np.ndarray) -> float:
    """Pairwise sum in a fixed order."""
    a = np.asarray(a, dtype=float)
    while a.shape[0] > 1:
        if a.shape[0] % 2:
            a = np.append(a, 0.0)
        a = a[0::2] + a[1::2]
    return float(a[0]) if a.shape[0] else 0.0
