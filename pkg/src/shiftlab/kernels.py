"""Compiled inner loops (numba) for sampling and run-length scans.

Every kernel takes plain arrays and releases the GIL so that seed loops can
fan out over threads.
"""
import numpy as np
from numba import njit

# uniforms are uint32 draws compared against cumulative thresholds scaled by 2**32
SCALE = 1 << 32


@njit(cache=True, nogil=True)
def walk(start, uniforms, cum, out, offset):
    """Markov walk: out[offset] = start, then one step per uniform.

    ``cum[s, j]`` is the scaled cumulative probability of moving from ``s``
    to a symbol ``<= j``; symbol ``j`` is taken when ``cum[s, j-1] <= u < cum[s, j]``.
    """
    s = start
    out[offset] = s
    for i in range(uniforms.shape[0]):
        u = uniforms[i]
        j = 0
        while u >= cum[s, j]:
            j += 1
        s = j
        out[offset + 1 + i] = s
    return s


@njit(cache=True, nogil=True)
def pick(u, cum_row):
    j = 0
    while u >= cum_row[j]:
        j += 1
    return j


@njit(cache=True, nogil=True)
def zero_runs(w):
    """z[i] = length of the run of zeros starting at index i."""
    n = w.shape[0]
    z = np.empty(n, dtype=np.int64)
    run = 0
    for i in range(n - 1, -1, -1):
        if w[i] == 0:
            run += 1
        else:
            run = 0
        z[i] = run
    return z


@njit(cache=True, nogil=True)
def checkpoint_maxima(w, checkpoints, out):
    """Fill ``out[c] = L[checkpoints[c]]`` for sorted checkpoints (each < len(w)).

    Returns the first index ``n >= 1`` whose run reaches the end of the word
    (from there on every ``L[N]`` is only a lower bound), or -1 if that index
    lies beyond the last checkpoint.
    """
    T = w.shape[0]
    ncp = checkpoints.shape[0]
    best = 0
    ci = 0
    i = 1
    while i < T and ci < ncp:
        if w[i] == 0:
            s = i
            j = i + 1
            while j < T and w[j] == 0:
                j += 1
            while ci < ncp and checkpoints[ci] < s:
                out[ci] = best
                ci += 1
            if ci == ncp:
                return -1
            if j == T:
                while ci < ncp:
                    out[ci] = max(best, T - s)
                    ci += 1
                return s
            if j - s > best:
                best = j - s
            i = j
        else:
            i += 1
    while ci < ncp:
        out[ci] = best
        ci += 1
    return -1


@njit(cache=True, nogil=True)
def first_failure(w, phi, n_start, n_stop, optimistic):
    """Scan ``N = 1..n_stop`` for the first ``N >= n_start`` with ``L[N] + 1 <= phi[N]``.

    Returns ``(status, N)``: status 0 survived, 1 failed at N (certain),
    2 ambiguous at N (a censored lower bound fails; strict mode only).
    """
    T = w.shape[0]
    best = 0
    censored = False
    for n in range(1, n_stop + 1):
        if not censored and w[n] == 0 and (n == 1 or w[n - 1] != 0):
            j = n + 1
            while j < T and w[j] == 0:
                j += 1
            if j == T:
                censored = True
            if j - n > best:
                best = j - n
        if n >= n_start and best + 1 <= phi[n]:
            if not censored:
                return 1, n
            if not optimistic:
                return 2, n
    return 0, 0


@njit(cache=True, nogil=True)
def walk_steps(start, uniforms, cums, out, offset):
    """Like :func:`walk` but step ``i`` uses its own threshold table ``cums[i]``."""
    s = start
    out[offset] = s
    for i in range(uniforms.shape[0]):
        u = uniforms[i]
        j = 0
        while u >= cums[i, s, j]:
            j += 1
        s = j
        out[offset + 1 + i] = s
    return s
