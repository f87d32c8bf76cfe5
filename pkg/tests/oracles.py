"""Brute-force reference implementations, independent of the package code paths."""
import numpy as np


def lfsr_bits(seed, taps=(64, 63, 61, 60), count=64):
    """Bit-list Fibonacci register: reg[p-1] is tap position p, output is position 64."""
    reg = [(seed >> (p - 1)) & 1 for p in range(1, 65)]
    out = []
    for _ in range(count):
        out.append(reg[63])
        fb = 0
        for t in taps:
            fb ^= reg[t - 1]
        reg = [fb] + reg[:-1]
    state = sum(b << i for i, b in enumerate(reg))
    return out, state


def lcg_top_bits(seed, count, a=6364136223846793005, c=1442695040888963407):
    x = seed
    out = []
    for _ in range(count):
        x = (a * x + c) % (1 << 64)
        out.append(x >> 63)
    return out


def ssim_loops(a, b, peak=255.0, win=8):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c1, c2 = (0.01 * peak) ** 2, (0.03 * peak) ** 2
    vals = []
    for i in range(a.shape[0] - win + 1):
        for j in range(a.shape[1] - win + 1):
            x = a[i:i + win, j:j + win].ravel()
            y = b[i:i + win, j:j + win].ravel()
            mx, my = x.mean(), y.mean()
            vx = ((x - mx) ** 2).mean()
            vy = ((y - my) ** 2).mean()
            cxy = ((x - mx) * (y - my)).mean()
            vals.append((2 * mx * my + c1) * (2 * cxy + c2)
                        / ((mx ** 2 + my ** 2 + c1) * (vx + vy + c2)))
    return float(np.mean(vals))


def correlations(P, s):
    """<S*I>, <I>, <R>, <R*I> by direct float summation over a 0/1 pattern matrix."""
    P = np.asarray(P, dtype=float)
    s = np.asarray(s, dtype=float)
    n = P.shape[0]
    r = P.sum(axis=1)
    return (P * s[:, None]).sum(0) / n, P.mean(0), r.mean(), (P * r[:, None]).sum(0) / n
