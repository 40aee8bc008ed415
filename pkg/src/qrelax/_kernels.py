"""In-place numba kernels for the hot loops of the simulator."""
import numba
import numpy as np


@numba.njit(cache=True)
def apply_1q_inplace(psi, q, m00, m01, m10, m11):
    step = 1 << q
    for base in range(0, psi.size, 2 * step):
        for i in range(base, base + step):
            a = psi[i]
            b = psi[i + step]
            psi[i] = m00 * a + m01 * b
            psi[i + step] = m10 * a + m11 * b


@numba.njit(cache=True)
def apply_rxx_inplace(psi, q0, q1, c, s):
    lo = min(q0, q1)
    mask = (1 << q0) | (1 << q1)
    ms = -1j * s
    for i in range(psi.size):
        # each {i, i ^ mask} orbit has exactly one member with bit ``lo`` clear
        if (i >> lo) & 1 == 0:
            j = i ^ mask
            a = psi[i]
            b = psi[j]
            psi[i] = c * a + ms * b
            psi[j] = c * b + ms * a


@numba.njit(cache=True)
def grouped_expectation(psi, flips, weights):
    total = 0j
    for g in range(flips.size):
        f = flips[g]
        w = weights[g]
        acc = 0j
        for i in range(psi.size):
            acc += np.conj(psi[i ^ f]) * w[i] * psi[i]
        total += acc
    return total


@numba.njit(cache=True)
def _parity(v):
    p = 0
    while v:
        p ^= 1
        v &= v - 1
    return p


@numba.njit(cache=True)
def term_expectation(psi, flips, signs, factors):
    """Same sum as ``grouped_expectation`` without the per-group weight tables."""
    total = 0j
    for t in range(flips.size):
        f = flips[t]
        m = signs[t]
        acc = 0j
        for i in range(psi.size):
            z = np.conj(psi[i ^ f]) * psi[i]
            if _parity(i & m):
                acc -= z
            else:
                acc += z
        total += factors[t] * acc
    return total


@numba.njit(cache=True)
def apply_cx_inplace(psi, control, target):
    c = 1 << control
    t = 1 << target
    for i in range(psi.size):
        if i & c and not i & t:
            a = psi[i]
            psi[i] = psi[i | t]
            psi[i | t] = a
