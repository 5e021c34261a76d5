"""Kronecker time-frequency synthesis of quasi-ZCZ CR sequence sets.

Each user sequence is ``c_i = a_i (x) idft(B_i)``: the seed sequence ``a_i``
picks the sign/phase of each length-N time slot and the masked spectrum
``B_i`` fills every slot. Any two distinct sequences have zero periodic
cross-correlation for ``|t| <= N*Z - N`` whatever the mask is.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .seeds import ZERO_TOL, FreqWaveform, ZCZSeedSet
from .seqcore import SpectrumMask, aacf, pccf_all


class SynthesisError(ValueError):
    pass


@dataclass(frozen=True)
class QuasiZCZSet:
    """A (K, N*L, N*Z - N) quasi-ZCZ set together with what it was built from."""

    sequences: np.ndarray = field(repr=False)
    seed: ZCZSeedSet
    waveforms: tuple[FreqWaveform, ...]
    mask: SpectrumMask
    shared_waveform: bool = False

    @property
    def K(self) -> int:
        return self.sequences.shape[0]

    @property
    def N(self) -> int:
        return self.mask.n

    @property
    def L(self) -> int:
        return self.seed.L

    @property
    def length(self) -> int:
        return self.sequences.shape[1]

    @property
    def zccz_width(self) -> int:
        return self.N * self.seed.Z - self.N

    @property
    def params(self) -> tuple[int, int, int]:
        return (self.K, self.length, self.zccz_width)

    def __repr__(self) -> str:
        return f"QuasiZCZSet(K={self.K}, length={self.length}, zccz_width={self.zccz_width}, seed={self.seed.name!r})"


def synthesize(seed: ZCZSeedSet, waveforms: FreqWaveform | Sequence[FreqWaveform]) -> QuasiZCZSet:
    """Build ``c_i = a_i (x) idft(B_i)`` for every seed sequence.

    A single waveform is broadcast to all users. Out-of-zone correlations are
    uncontrolled in either case.
    """
    if not seed.verified:
        raise SynthesisError(f"seed set {seed.name!r} has not been verified")
    shared = isinstance(waveforms, FreqWaveform)
    wfs = (waveforms,) * seed.K if shared else tuple(waveforms)
    if len(wfs) == 1 and seed.K > 1:
        shared = True
        wfs = wfs * seed.K
    if len(wfs) != seed.K:
        raise SynthesisError(f"need {seed.K} waveforms, got {len(wfs)}")
    mask = wfs[0].mask
    if any(w.mask != mask for w in wfs[1:]):
        raise SynthesisError("all waveforms must share one spectrum mask")
    if seed.Z == 1:
        warnings.warn("seed zone Z=1 gives an empty zero cross-correlation zone", stacklevel=2)
    seqs = np.stack([np.kron(a, w.b) for a, w in zip(seed.sequences, wfs)])
    seqs.setflags(write=False)
    return QuasiZCZSet(seqs, seed, wfs, mask, shared_waveform=shared)


def _max_rel_cross(ci, cj, zone: int) -> float:
    R = pccf_all(ci, cj)
    t = np.arange(zone + 1)
    shifts = np.unique(np.concatenate([t, -t]) % ci.size)
    scale = np.sqrt(np.vdot(ci, ci).real * np.vdot(cj, cj).real) or 1.0
    return float(np.abs(R[shifts]).max() / scale)


@dataclass
class Theorem1Report:
    zccz_width: int
    max_cross: float | None
    max_auto_error: float
    max_leakage: float
    tol: float = ZERO_TOL
    cross_pass: bool | None = None
    auto_pass: bool = False
    leakage_pass: bool = False

    @property
    def passed(self) -> bool:
        return (self.cross_pass is not False) and self.auto_pass and self.leakage_pass

    def as_dict(self) -> dict:
        return {
            "zccz_width": self.zccz_width,
            "max_cross": self.max_cross,
            "max_auto_error": self.max_auto_error,
            "max_leakage": self.max_leakage,
            "cross_pass": self.cross_pass,
            "auto_pass": self.auto_pass,
            "leakage_pass": self.leakage_pass,
            "passed": self.passed,
        }


def verify_theorem1(qset: QuasiZCZSet, tol: float = ZERO_TOL, workers: int = 1) -> Theorem1Report:
    """Check the cross-, auto- and spectral properties of a synthesized set.

    * cross: ``|R_{c_i,c_j}(t)| = 0`` for ``i != j`` and ``|t| <= N*Z - N``
      (the zone is closed at the top: at ``|t| = N(Z-1)`` only ``R_a(Z-1)`` enters);
    * auto: ``R_{c_i}(t) = R_{a_i}(0) * C_{b_i}(t)`` for ``|t| < N`` and zero for
      ``N <= |t| <= N*Z - N``;
    * leakage: every length-N block of ``c_i`` has zero DFT on the mask holes.

    Errors are relative to ``R_{c_i}(0)`` (or ``sqrt(R_ci(0) R_cj(0))``).
    """
    seqs = qset.sequences
    K, NL = seqs.shape
    N = qset.N
    zone = qset.zccz_width

    max_cross = None
    if K > 1:
        pairs = list(combinations(range(K), 2))
        fn = lambda ij: _max_rel_cross(seqs[ij[0]], seqs[ij[1]], zone)  # noqa: E731
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                vals = list(pool.map(fn, pairs))
        else:
            vals = [fn(p) for p in pairs]
        max_cross = max(vals)

    max_auto = 0.0
    max_leak = 0.0
    for i in range(K):
        c = seqs[i]
        R = pccf_all(c, c)
        e0 = abs(R[0]) or 1.0
        a, b = qset.seed.sequences[i], qset.waveforms[i].b
        expected = np.zeros(zone + 1, dtype=complex)
        nlim = min(N, zone + 1)
        expected[:nlim] = np.vdot(a, a).real * aacf(b)[:nlim]
        got = R[: zone + 1]
        max_auto = max(max_auto, float(np.abs(got - expected).max() / e0))

        spec = block_spectra(c, N)
        block_e = np.sum(np.abs(c) ** 2) or 1.0
        leak = np.sum(np.abs(spec[:, qset.mask.holes]) ** 2) / block_e
        max_leak = max(max_leak, float(leak))

    return Theorem1Report(
        zccz_width=zone,
        max_cross=max_cross,
        max_auto_error=max_auto,
        max_leakage=max_leak,
        tol=tol,
        cross_pass=None if max_cross is None else max_cross <= tol,
        auto_pass=max_auto <= tol,
        leakage_pass=max_leak <= tol**2,
    )


def tf_lattice(i: int, qset: QuasiZCZSet) -> np.ndarray:
    """L x N time-frequency lattice of sequence ``i``: entry (l, m) is ``a_l * B_m``."""
    if not 0 <= i < qset.K:
        raise IndexError(f"sequence index {i} outside [0, {qset.K})")
    return np.outer(qset.seed.sequences[i], qset.waveforms[i].B)


def block_spectra(c, N: int) -> np.ndarray:
    """N-point DFT of each length-N block of ``c``, one block per row."""
    c = np.asarray(c, dtype=complex)
    return np.fft.fft(c.reshape(-1, N), axis=1, norm="ortho")
