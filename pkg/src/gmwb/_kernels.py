"""Compiled inner loops."""
from __future__ import annotations

import numpy as np
from numba import njit

TIE_TOL = 1e-12


@njit(nogil=True, cache=True)
def dynamic_jump_kernel(vp, base, w, cash, allowed, j_lo, j_hi, out, act, record):
    """Maximise over withdrawals for guarantee levels ``j_lo <= j < j_hi``.

    ``vp[i, row, k]`` holds post-withdrawal values for level ``i``.  Candidate
    ``l`` moves level ``j`` to ``i = j - l``; ``base[row, l]`` and
    ``w[row, l, :]`` give the 4-tap stencil reading ``vp[i]`` at the reduced
    wealth and ``cash[l]`` the cash received.  Candidates are visited in
    increasing withdrawal order and a later one only wins if it is better by
    more than ``TIE_TOL``, so ties go to the smaller withdrawal.  If no
    candidate is allowed the surface passes through unchanged.
    """
    R = vp.shape[1]
    K1 = vp.shape[2]
    for j in range(j_lo, j_hi):
        found = False
        for l in range(j + 1):
            if not allowed[l]:
                continue
            i = j - l
            c = cash[l]
            for row in range(R):
                b = base[row, l]
                w0 = w[row, l, 0]
                w1 = w[row, l, 1]
                w2 = w[row, l, 2]
                w3 = w[row, l, 3]
                for k in range(K1):
                    v = c + w0 * vp[i, b, k] + w1 * vp[i, b + 1, k] + w2 * vp[i, b + 2, k] + w3 * vp[i, b + 3, k]
                    if not found or v > out[j, row, k] + TIE_TOL:
                        out[j, row, k] = v
                        if record:
                            act[j, row, k] = l
            found = True
        if not found:
            for row in range(R):
                for k in range(K1):
                    out[j, row, k] = vp[j, row, k]
                    if record:
                        act[j, row, k] = 0


@njit(nogil=True, cache=True)
def shift_kernel(vp, base, w, cash, out):
    """Apply one fixed withdrawal stencil to every surface in ``vp``."""
    S = vp.shape[0]
    R = vp.shape[1]
    K1 = vp.shape[2]
    for s in range(S):
        for row in range(R):
            b = base[row]
            for k in range(K1):
                out[s, row, k] = (
                    cash
                    + w[row, 0] * vp[s, b, k]
                    + w[row, 1] * vp[s, b + 1, k]
                    + w[row, 2] * vp[s, b + 2, k]
                    + w[row, 3] * vp[s, b + 3, k]
                )


def empty_actions(shape) -> np.ndarray:
    return np.zeros(shape, dtype=np.int32)
