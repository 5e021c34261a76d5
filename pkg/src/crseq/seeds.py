"""Building blocks: binary ZCZ seed sets, Zadoff-Chu sequences and masked waveforms."""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .seqcore import SpectrumMask, as_seq, idft, pccf_all

#: "Zero" correlation tolerance, relative to the zero-shift energy.
ZERO_TOL = 1e-9

_EXAMPLE1 = [
    [1, 1, 1, 1, 1, -1, 1, -1, 1, 1, -1, -1, 1, -1, -1, 1],
    [1, -1, 1, -1, 1, 1, 1, 1, 1, -1, -1, 1, 1, 1, -1, -1],
]

_EXAMPLE2 = [
    [1, 1, -1, 1, 1, 1, -1, 1, -1, -1, -1, 1, -1, -1, -1, 1],
    [-1, -1, 1, -1, 1, 1, -1, 1, 1, 1, 1, -1, -1, -1, -1, 1],
    [1, -1, -1, -1, 1, -1, -1, -1, -1, 1, -1, -1, -1, 1, -1, -1],
    [-1, 1, 1, 1, 1, -1, -1, -1, 1, -1, 1, 1, -1, 1, -1, -1],
]

BUILTIN_SETS: dict[str, tuple[list[list[int]], int]] = {
    "example1": (_EXAMPLE1, 3),
    "example2": (_EXAMPLE2, 3),
}


class ZCZError(ValueError):
    """A sequence set does not have the zone it claims."""


@dataclass(frozen=True)
class ZCZReport:
    zone: int
    max_auto: float
    max_cross: float
    largest_zone: int
    largest_cross_zone: int
    passed: bool
    quasi_only: bool

    def as_dict(self) -> dict:
        return {
            "zone": self.zone,
            "max_auto": self.max_auto,
            "max_cross": self.max_cross,
            "largest_zone": self.largest_zone,
            "largest_cross_zone": self.largest_cross_zone,
            "passed": self.passed,
            "quasi_only": self.quasi_only,
        }


def _normalized_correlations(seqs: np.ndarray) -> np.ndarray:
    """``out[i, j, t] = |R_{s_i, s_j}(t)| / sqrt(E_i E_j)``."""
    X = np.fft.fft(seqs, axis=1)
    # R_ij(t) = conj(ifft(conj(X_i) X_j)(t))
    R = np.fft.ifft(np.conj(X)[:, None, :] * X[None, :, :], axis=2)
    energy = np.sum(np.abs(seqs) ** 2, axis=1)
    scale = np.sqrt(np.outer(energy, energy))
    scale[scale == 0] = 1.0
    return np.abs(R) / scale[:, :, None]


def _zone_from_profile(bad: np.ndarray, L: int) -> int:
    """Largest Z such that ``bad[t]`` is False for all ``|t| < Z`` (shifts taken mod L)."""
    # |t| < Z covers t and L - t
    folded = bad | bad[(-np.arange(L)) % L]
    hits = np.flatnonzero(folded)
    return int(hits[0]) if hits.size else L


def verify_zcz(sequences, Z: int, tol: float = ZERO_TOL) -> ZCZReport:
    """Check the two zero-correlation-zone conditions at width ``Z``.

    ``max_auto`` is the largest normalised out-of-phase auto-correlation over
    ``1 <= |t| < Z``; ``max_cross`` the largest normalised cross-correlation over
    ``0 <= |t| < Z``. ``largest_zone`` is the widest zone where both conditions
    hold, ``largest_cross_zone`` the widest where only the cross condition does.
    """
    seqs = np.atleast_2d(np.asarray(sequences, dtype=np.complex128))
    if seqs.shape[0] == 0 or seqs.shape[1] == 0:
        raise ValueError("empty sequence set")
    K, L = seqs.shape
    Z = int(Z)
    if Z < 1:
        raise ValueError("zone width must be >= 1")
    C = _normalized_correlations(seqs)

    auto = C[np.arange(K), np.arange(K)]  # (K, L)
    auto_bad = np.any(auto > tol, axis=0)
    auto_bad[0] = False
    if K > 1:
        off = ~np.eye(K, dtype=bool)
        cross = C[off]  # (K*(K-1), L)
        cross_bad = np.any(cross > tol, axis=0)
    else:
        cross = np.zeros((0, L))
        cross_bad = np.zeros(L, dtype=bool)

    in_zone = np.zeros(L, dtype=bool)
    t = np.arange(min(Z, L))
    in_zone[t] = True
    in_zone[(-t) % L] = True
    out_phase = in_zone.copy()
    out_phase[0] = False

    max_auto = float(auto[:, out_phase].max()) if out_phase.any() else 0.0
    max_cross = float(cross[:, in_zone].max()) if cross.size else 0.0
    auto_ok = max_auto <= tol
    cross_ok = max_cross <= tol

    largest_cross = _zone_from_profile(cross_bad, L)
    largest = min(_zone_from_profile(auto_bad, L), largest_cross)
    return ZCZReport(
        zone=Z,
        max_auto=max_auto,
        max_cross=max_cross,
        largest_zone=largest,
        largest_cross_zone=largest_cross,
        passed=bool(auto_ok and cross_ok),
        quasi_only=bool(cross_ok and not auto_ok),
    )


@dataclass(frozen=True)
class ZCZSeedSet:
    """A (K, L, Z) sequence family. ``verified`` is only ever set by :func:`make_seed_set`."""

    sequences: np.ndarray = field(repr=False)
    zone: int
    name: str = "custom"
    verified: bool = False

    def __post_init__(self) -> None:
        seqs = np.atleast_2d(np.asarray(self.sequences, dtype=np.complex128))
        if seqs.shape[0] < 1:
            raise ValueError("seed set needs at least one sequence")
        if not np.all(np.isfinite(seqs)):
            raise ValueError("seed set contains non-finite samples")
        if not 1 <= self.zone <= seqs.shape[1]:
            raise ValueError(f"zone {self.zone} outside [1, {seqs.shape[1]}]")
        seqs.setflags(write=False)
        object.__setattr__(self, "sequences", seqs)

    @property
    def K(self) -> int:
        return self.sequences.shape[0]

    @property
    def L(self) -> int:
        return self.sequences.shape[1]

    @property
    def Z(self) -> int:
        return self.zone

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.sequences).tobytes())
        h.update(str(self.zone).encode())
        return h.hexdigest()[:16]

    def __repr__(self) -> str:
        return f"ZCZSeedSet(name={self.name!r}, K={self.K}, L={self.L}, Z={self.Z}, verified={self.verified})"


def make_seed_set(sequences, Z: int, name: str = "custom") -> ZCZSeedSet:
    """Verify ``sequences`` at zone ``Z`` and return a verified seed set."""
    report = verify_zcz(sequences, Z)
    if not report.passed:
        raise ZCZError(
            f"set {name!r} fails zone {Z}: max auto {report.max_auto:.3g}, "
            f"max cross {report.max_cross:.3g} (largest zone {report.largest_zone})"
        )
    return ZCZSeedSet(np.asarray(sequences), Z, name=name, verified=True)


def builtin_zcz(name: str) -> ZCZSeedSet:
    """The two binary sets printed in the worked examples: ``example1`` (2,16,3), ``example2`` (4,16,3)."""
    try:
        seqs, Z = BUILTIN_SETS[name]
    except KeyError:
        raise KeyError(f"unknown built-in seed set {name!r}; choose from {sorted(BUILTIN_SETS)}") from None
    return make_seed_set(np.array(seqs, dtype=float), Z, name=name)


def zadoff_chu(N: int, u: int) -> np.ndarray:
    """``exp(-1j*pi*u*k**2/N)`` for k = 0..N-1 (even-length form, used for all N)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if u <= 0:
        raise ValueError("root u must be positive")
    if math.gcd(u, N) != 1:
        warnings.warn(f"root {u} is not coprime with length {N}", stacklevel=2)
    k = np.arange(N, dtype=float)
    # reduce k^2*u mod 2N before the exponential to keep phases accurate
    phase = np.mod(u * k * k, 2 * N)
    return np.exp(-1j * np.pi * phase / N)


def freq_shift_zcz(N: int, K: int, u: int = 1) -> ZCZSeedSet:
    """Polyphase ZCZ set from frequency shifts of one perfect Zadoff-Chu sequence.

    Sequence i is ``s[n] * exp(2j*pi*i*n/K)``. For K | N the achieved zone is N/K,
    which meets the polyphase bound K <= floor(L/Z) with equality.
    """
    if K < 1 or N % K:
        raise ValueError(f"K={K} must divide N={N}")
    if math.gcd(u, N) != 1:
        raise ValueError(f"root u={u} must be coprime with N={N}")
    s = zadoff_chu(N, u)
    n = np.arange(N)
    seqs = s[None, :] * np.exp(2j * np.pi * np.outer(np.arange(K), n) / K)
    report = verify_zcz(seqs, 1)
    Z = report.largest_zone
    if Z < N // K:
        raise ZCZError(f"frequency-shift set reached zone {Z} < N/K = {N // K}")
    return make_seed_set(seqs, Z, name=f"freq_shift(N={N},K={K},u={u})")


def zcz_bounds(K: int, L: int, Z: int, alphabet: Literal["binary", "polyphase"] = "polyphase") -> bool:
    """Set-size bound: ``K <= L // Z`` (polyphase) or ``K <= L // (2(Z-1))`` (binary, Z >= 3)."""
    if alphabet == "polyphase":
        return K <= L // Z
    if alphabet == "binary":
        if Z < 3:
            raise ValueError("binary bound needs Z >= 3")
        return K <= L // (2 * (Z - 1))
    raise ValueError(f"unknown alphabet {alphabet!r}")


@dataclass(frozen=True)
class FreqWaveform:
    """Frequency-domain CR waveform ``B`` with zeros on the mask holes, plus ``b = idft(B)``."""

    B: np.ndarray = field(repr=False)
    mask: SpectrumMask
    params: dict = field(default_factory=dict, compare=False)
    b: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        B = as_seq(self.B).copy()
        if B.size != self.mask.n:
            raise ValueError(f"length mismatch: waveform {B.size}, mask {self.mask.n}")
        B[self.mask.holes] = 0
        B.setflags(write=False)
        b = idft(B)
        b.setflags(write=False)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "b", b)

    @property
    def N(self) -> int:
        return self.B.size

    def normalized(self) -> "FreqWaveform":
        """Rescale so that ``||B||^2 = N``."""
        e = float(np.vdot(self.B, self.B).real)
        if e == 0:
            raise ValueError("cannot normalise an all-zero waveform")
        return FreqWaveform(self.B * np.sqrt(self.N / e), self.mask, dict(self.params))


def masked_waveform(gen, mask: SpectrumMask, params: dict | None = None) -> FreqWaveform:
    gen = as_seq(gen)
    if gen.size != mask.n:
        raise ValueError(f"length mismatch: generator {gen.size}, mask {mask.n}")
    return FreqWaveform(gen, mask, dict(params or {}))


def zc_waveforms(mask: SpectrumMask, roots: Sequence[int]) -> list[FreqWaveform]:
    """One masked Zadoff-Chu waveform per root."""
    return [masked_waveform(zadoff_chu(mask.n, u), mask, {"type": "zadoff_chu", "u": int(u)}) for u in roots]


def random_waveform(mask: SpectrumMask, rng: np.random.Generator) -> FreqWaveform:
    """Random unit-magnitude polyphase spectrum on the available subcarriers."""
    B = np.exp(2j * np.pi * rng.random(mask.n))
    return masked_waveform(B, mask, {"type": "random_polyphase"})
