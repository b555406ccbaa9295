"""Counter-based normal variates (Philox4x64-10) usable inside numba kernels.

Every draw is a pure function of ``(seed, cell, trajectory, step)``, so results
do not depend on how trajectories are split across workers. The bit stream is
the standard Philox4x64-10 block cipher, identical to ``numpy.random.Philox``.
"""
from __future__ import annotations

import numpy as np
from numba import njit, uint64

__all__ = ["philox4x64", "normal_block", "normals", "uniform_from_bits"]

_M0 = uint64(0xD2E7470EE14C6C93)
_M1 = uint64(0xCA5A826395121157)
_W0 = uint64(0x9E3779B97F4A7C15)
_W1 = uint64(0xBB67AE8584CAA73B)
_LO32 = uint64(0xFFFFFFFF)
_S32 = uint64(32)
_S11 = uint64(11)
_TWO_PI = 2.0 * np.pi


@njit(inline="always")
def _mulhilo(a, b):
    lo = a * b
    a_lo = a & _LO32
    a_hi = a >> _S32
    b_lo = b & _LO32
    b_hi = b >> _S32
    t = a_lo * b_lo
    mid1 = a_hi * b_lo + (t >> _S32)
    mid2 = a_lo * b_hi + (mid1 & _LO32)
    hi = a_hi * b_hi + (mid1 >> _S32) + (mid2 >> _S32)
    return hi, lo


@njit(cache=True)
def philox4x64(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds on a 256-bit counter with a 128-bit key."""
    for i in range(10):
        if i > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@njit(inline="always")
def uniform_from_bits(u):
    """Map 64 random bits to a double in ``(0, 1]``."""
    return ((u >> _S11) + uint64(1)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def normal_block(seed, cell, traj, block):
    """Four standard normals for step block ``block`` of one trajectory (Box-Muller)."""
    b0, b1, b2, b3 = philox4x64(uint64(block), uint64(traj), uint64(0), uint64(0),
                                uint64(seed), uint64(cell))
    u0 = uniform_from_bits(b0)
    u1 = uniform_from_bits(b1)
    u2 = uniform_from_bits(b2)
    u3 = uniform_from_bits(b3)
    r0 = np.sqrt(-2.0 * np.log(u0))
    r1 = np.sqrt(-2.0 * np.log(u2))
    return (r0 * np.cos(_TWO_PI * u1), r0 * np.sin(_TWO_PI * u1),
            r1 * np.cos(_TWO_PI * u3), r1 * np.sin(_TWO_PI * u3))


@njit(cache=True)
def normals(seed, cell, traj, n):
    """The first ``n`` per-step normals of one trajectory."""
    out = np.empty(n)
    nb = (n + 3) // 4
    for b in range(nb):
        z0, z1, z2, z3 = normal_block(seed, cell, traj, b)
        j = 4 * b
        out[j] = z0
        if j + 1 < n:
            out[j + 1] = z1
        if j + 2 < n:
            out[j + 2] = z2
        if j + 3 < n:
            out[j + 3] = z3
    return out
