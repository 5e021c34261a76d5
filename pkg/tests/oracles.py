"""Independent reference implementations used only by the tests.

Everything here is written as literal loops over the defining sums so it
shares no code path with the package.
"""

import cmath
import itertools
import math

import numpy as np


def accf_loop(a, b, t):
    L = len(a)
    if t < 0:
        return accf_loop(b, a, -t).conjugate()
    return sum(a[n] * complex(b[n + t]).conjugate() for n in range(L - t))


def pccf_loop(a, b, t):
    L = len(a)
    return sum(a[n] * complex(b[(n + t) % L]).conjugate() for n in range(L))


def dft_loop(x):
    N = len(x)
    return np.array([sum(x[n] * cmath.exp(-2j * math.pi * k * n / N) for n in range(N)) / math.sqrt(N) for k in range(N)])


def zcz_maxima_loop(seqs, Z):
    """(max out-of-phase |PACF|, max |PCCF|) over the zone, normalised, by double loop."""
    K, L = len(seqs), len(seqs[0])
    e = [sum(abs(x) ** 2 for x in s) for s in seqs]
    auto = cross = 0.0
    for i in range(K):
        for j in range(K):
            for t in range(-(Z - 1), Z):
                v = abs(pccf_loop(seqs[i], seqs[j], t)) / math.sqrt(e[i] * e[j])
                if i == j and t != 0:
                    auto = max(auto, v)
                elif i != j:
                    cross = max(cross, v)
    return auto, cross


def grid_minimax_beta(N, holes, step=0.05):
    """Exhaustive minimum of max_t |F_N(t,:) beta| over a simplex grid (beta sums to N)."""
    avail = [k for k in range(N) if k not in holes]
    m = len(avail)
    units = round(1 / step)
    best = math.inf
    F = np.exp(-2j * np.pi * np.outer(np.arange(1, N), np.arange(N)) / N) / math.sqrt(N)
    comps = []
    # compositions of `units` into m non-negative parts (stars and bars)
    for bars in itertools.combinations(range(units + m - 1), m - 1):
        prev, parts = -1, []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(units + m - 2 - prev)
        comps.append(parts)
    comps = np.array(comps, dtype=float) * N / units
    beta = np.zeros((comps.shape[0], N))
    beta[:, avail] = comps
    vals = np.abs(beta @ F.T).max(axis=1)
    best = float(vals.min())
    return best


def rayleigh_qpsk_ber(ebn0_db):
    g = 10 ** (ebn0_db / 10)
    return 0.5 * (1 - math.sqrt(g / (1 + g)))
