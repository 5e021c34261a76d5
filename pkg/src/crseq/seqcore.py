"""Core sequence mathematics.

Sequences are plain 1-D ``complex128`` numpy arrays. Correlation conventions:

* aperiodic cross-correlation ``C_ab(t) = sum_n a[n] * conj(b[n + t])`` for
  ``0 <= t < L``, extended to negative shifts by ``C_ab(-t) = conj(C_ba(t))``;
* periodic cross-correlation ``R_ab(t) = sum_n a[n] * conj(b[(n + t) % L])``.

The DFT is the unitary one (``1/sqrt(N)`` in both directions), so that
``idft(dft(x)) == x`` and energy is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

#: Lengths at or below this use direct sums; longer inputs go through FFTs.
DIRECT_THRESHOLD = 64

#: Tolerance for identities that are exact in exact arithmetic.
EXACT_TOL = 1e-12
#: Tolerance for identities computed through FFTs.
FFT_TOL = 1e-10


def as_seq(x: Iterable[complex] | np.ndarray) -> np.ndarray:
    """Validate and convert to a finite, non-empty complex128 vector."""
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"sequence must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("sequence must have length >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sequence contains NaN or Inf samples")
    return arr


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = as_seq(a), as_seq(b)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} != {b.size}")
    return a, b


@dataclass(frozen=True)
class SpectrumMask:
    """Subcarrier marking vector; ``marking[k] == 1`` if subcarrier k is available.

    The hole set is derived from ``marking`` on demand, so the two can never
    disagree.
    """

    marking: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.marking)
        if m.ndim != 1 or m.size == 0:
            raise ValueError("marking must be a non-empty 1-D vector")
        if not np.all((m == 0) | (m == 1)):
            raise ValueError("marking entries must be 0 or 1")
        m = m.astype(np.int8)
        m.setflags(write=False)
        object.__setattr__(self, "marking", m)

    @classmethod
    def from_holes(cls, n: int, holes: Iterable[int]) -> "SpectrumMask":
        s = np.ones(n, dtype=np.int8)
        holes = list(holes)
        if any(h < 0 or h >= n for h in holes):
            raise ValueError(f"hole index outside [0, {n})")
        s[holes] = 0
        return cls(s)

    @classmethod
    def from_runs(cls, runs: Iterable[tuple[int, int]]) -> "SpectrumMask":
        """Build from ``(value, count)`` runs, e.g. ``[(1, 4), (0, 2), ...]``."""
        return cls(np.concatenate([np.full(c, v, dtype=np.int8) for v, c in runs]))

    @classmethod
    def full(cls, n: int) -> "SpectrumMask":
        return cls(np.ones(n, dtype=np.int8))

    @property
    def n(self) -> int:
        return int(self.marking.size)

    @property
    def holes(self) -> np.ndarray:
        return np.flatnonzero(self.marking == 0)

    @property
    def available(self) -> np.ndarray:
        return np.flatnonzero(self.marking == 1)

    @property
    def n_available(self) -> int:
        return int(self.marking.sum())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SpectrumMask) and np.array_equal(self.marking, other.marking)

    def __hash__(self) -> int:
        return hash(self.marking.tobytes())

    def __repr__(self) -> str:
        return f"SpectrumMask(n={self.n}, holes={self.holes.tolist()})"


# --------------------------------------------------------------------------
# transforms


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix with entries ``exp(-2j*pi*i*k/n) / sqrt(n)``."""
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def dft(x) -> np.ndarray:
    return np.fft.fft(as_seq(x), norm="ortho")


def idft(X) -> np.ndarray:
    return np.fft.ifft(as_seq(X), norm="ortho")


def cyclic_shift(x, tau: int) -> np.ndarray:
    """Left cyclic shift: ``[x[tau], ..., x[L-1], x[0], ..., x[tau-1]]``."""
    x = as_seq(x)
    return np.roll(x, -(int(tau) % x.size))


def kronecker(d, x) -> np.ndarray:
    """``u[l*N + n] = d[l] * x[n]``."""
    return np.kron(as_seq(d), as_seq(x))


# --------------------------------------------------------------------------
# correlations


def accf(a, b, tau: int) -> complex:
    """Aperiodic cross-correlation at a single shift ``-(L-1) <= tau <= L-1``."""
    a, b = _pair(a, b)
    L = a.size
    tau = int(tau)
    if abs(tau) >= L:
        raise ValueError(f"|tau| must be < {L}, got {tau}")
    if tau < 0:
        return complex(np.conj(accf(b, a, -tau)))
    return complex(np.sum(a[: L - tau] * np.conj(b[tau:])))


def pccf(a, b, tau: int) -> complex:
    """Periodic cross-correlation at shift ``tau`` (any integer, reduced mod L)."""
    a, b = _pair(a, b)
    return complex(np.sum(a * np.conj(np.roll(b, -(int(tau) % a.size)))))


def pccf_all(a, b, *, fast: bool | None = None) -> np.ndarray:
    """Periodic cross-correlation for all shifts ``0..L-1``."""
    a, b = _pair(a, b)
    L = a.size
    if fast is None:
        fast = L > DIRECT_THRESHOLD
    if fast:
        return np.conj(np.fft.ifft(np.conj(np.fft.fft(a)) * np.fft.fft(b)))
    idx = (np.arange(L)[:, None] + np.arange(L)[None, :]) % L
    return (a[None, :] * np.conj(b[idx])).sum(axis=1)


def accf_all(a, b, *, fast: bool | None = None) -> np.ndarray:
    """Aperiodic cross-correlation for all shifts, ordered ``-(L-1) .. L-1``.

    Entry ``L - 1 + t`` holds ``C_ab(t)``.
    """
    a, b = _pair(a, b)
    L = a.size
    if fast is None:
        fast = L > DIRECT_THRESHOLD
    if fast:
        m = 2 * L
        r = np.conj(np.fft.ifft(np.conj(np.fft.fft(a, m)) * np.fft.fft(b, m)))
        # r[t] = C(t) for t >= 0, r[m - t] = C(-t)
        return np.concatenate([r[m - L + 1 :], r[:L]])
    # np.correlate(b, a, "full")[k] = sum_n b[n + k - (L-1)] * conj(a[n]) = conj(C_ab(k - (L-1)))
    return np.conj(np.correlate(b, a, mode="full"))


def pacf(a) -> np.ndarray:
    return pccf_all(a, a)


def aacf(a) -> np.ndarray:
    """Aperiodic auto-correlation for shifts ``0..L-1``."""
    a = as_seq(a)
    return accf_all(a, a)[a.size - 1 :]


# --------------------------------------------------------------------------
# figures of merit


def papr(b) -> float:
    """Per-sample peak-to-average power ratio in dB."""
    p = np.abs(as_seq(b)) ** 2
    mean = p.mean()
    if mean == 0:
        raise ValueError("PAPR undefined for an all-zero sequence")
    return float(10 * np.log10(p.max() / mean))


def max_sidelobe(b, kind: Literal["periodic", "aperiodic"] = "aperiodic") -> float:
    """Largest out-of-phase correlation magnitude, normalised by the zero-shift value."""
    b = as_seq(b)
    if not np.any(b):
        raise ValueError("sidelobe level undefined for an all-zero sequence")
    if kind == "aperiodic":
        c = aacf(b)
    elif kind == "periodic":
        c = pacf(b)
    else:
        raise ValueError(f"unknown correlation kind {kind!r}")
    if c.size == 1:
        return 0.0
    return float(np.abs(c[1:]).max() / np.abs(c[0]))


def spectral_null(z, mask: SpectrumMask) -> np.ndarray:
    """Zero the DFT bins on the mask's holes: ``F^H Diag[S] F z``."""
    z = as_seq(z)
    if z.size != mask.n:
        raise ValueError(f"length mismatch: sequence {z.size}, mask {mask.n}")
    Z = dft(z)
    Z[mask.holes] = 0
    return idft(Z)


def hole_leakage(x, mask: SpectrumMask) -> float:
    """Energy of ``dft(x)`` on the holes relative to the total energy."""
    x = as_seq(x)
    if x.size != mask.n:
        raise ValueError(f"length mismatch: sequence {x.size}, mask {mask.n}")
    X = dft(x)
    total = float(np.vdot(X, X).real)
    if total == 0:
        return 0.0
    return float(np.sum(np.abs(X[mask.holes]) ** 2) / total)
