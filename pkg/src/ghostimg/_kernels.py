"""Compiled inner loops.

Patterns travel as packed little-endian words: pixel ``p`` of a pattern
is bit ``p & 63`` of word ``p >> 6``. Every loop below has a fixed
summation order so results never depend on how the caller splits work.
"""
import numba as nb
import numpy as np

_U1 = np.uint64(1)
_U63 = np.uint64(63)


@nb.njit(nogil=True, cache=True)
def lfsr_words(w, offsets, passes, count):
    """Leap a sequence-ordered 64-bit window ``count`` times.

    ``w`` holds s_t..s_{t+63} (bit 0 oldest). Returns the emitted words
    (each the window before its leap) and the final window.
    """
    out = np.empty(count, dtype=np.uint64)
    for k in range(count):
        out[k] = w
        new = np.uint64(0)
        for _ in range(passes):
            acc = np.uint64(0)
            for d in offsets:
                if d == 0:
                    acc ^= w
                else:
                    sd = np.uint64(d)
                    acc ^= (w >> sd) | (new << (np.uint64(64) - sd))
            new = acc
        w = new
    return out, w


@nb.njit(nogil=True, cache=True)
def lcg_words(x, a, c, n, npix, nwords):
    """Top bit of one LCG output per pixel, packed; returns words and final state."""
    out = np.zeros((n, nwords), dtype=np.uint64)
    for i in range(n):
        for p in range(npix):
            x = x * a + c
            out[i, p >> 6] |= (x >> _U63) << np.uint64(p & 63)
    return out, x


@nb.njit(nogil=True, cache=True)
def popcounts(words):
    n, nw = words.shape
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        total = 0
        for j in range(nw):
            v = words[i, j]
            while v:
                v &= v - _U1
                total += 1
        out[i] = total
    return out


@nb.njit(nogil=True, cache=True)
def masked_sums(words, weights, p_start, p_stop, out):
    """out[p] = sum_i weights[i] * I_i(p) for p in [p_start, p_stop).

    Conditional accumulate: a pixel adds the sample when its pattern bit
    is set. Summation over i is sequential per pixel.
    """
    n = words.shape[0]
    for j in range(p_start >> 6, (p_stop + 63) >> 6):
        base = j * 64
        lo = max(p_start - base, 0)
        m = min(p_stop - base, 64) - lo
        acc = np.zeros(m, dtype=out.dtype)
        shifts = np.arange(lo, lo + m).astype(np.uint64)
        for i in range(n):
            wgt = weights[i]
            w = words[i, j]
            for b in range(m):
                acc[b] += wgt * np.int64((w >> shifts[b]) & _U1)
        for b in range(m):
            out[base + lo + b] = acc[b]


@nb.njit(nogil=True, cache=True)
def bucket_sums(words, obj, npix):
    """S_i = sum of ``obj`` over the lit pixels of pattern i, pixel order."""
    n = words.shape[0]
    out = np.zeros(n, dtype=np.float64)
    for i in range(n):
        s = 0.0
        for p in range(npix):
            if (words[i, p >> 6] >> np.uint64(p & 63)) & _U1:
                s += obj[p]
        out[i] = s
    return out
