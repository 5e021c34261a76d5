"""Quasi-synchronous CR-CDMA link simulation over multipath Rayleigh channels.

Every data symbol is spread by a length-M code and sent as one block behind a
cyclic prefix. Provided each path's total delay (user offset plus tap delay)
is at most the CP length, removing the CP leaves a circular convolution, so
the per-block model is

    r = sum_j sqrt(E_j) d_j (h_j (*) c_j) + n,     (*) = circular convolution

The Monte-Carlo engine works on that model in the frequency domain. An MRC
RAKE with one finger per path then reduces to ``sum_k conj(H_k C_k) R_k``. The
sample-level route (:func:`transmit`, :func:`apply_channel`, :func:`remove_cp`,
:func:`mrc_rake`) is kept for cross-checking.

Eb/N0 is referred to the desired user's average received energy per bit. CP
energy is not counted.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .optimize import max_workers
from .seqcore import SpectrumMask, pccf_all

_USER_KEY = 0
_NOISE_KEY = 1
_CODE_KEY = 2


# --------------------------------------------------------------------------
# channel


@dataclass(frozen=True)
class ChannelProfile:
    """Sample-spaced tapped-delay-line power profile."""

    delays: tuple[int, ...]
    powers: tuple[float, ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        d = tuple(int(x) for x in self.delays)
        p = tuple(float(x) for x in self.powers)
        if not d or len(d) != len(p):
            raise ValueError("need one power per delay and at least one tap")
        if d[0] != 0 or any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("delays must start at 0 and increase strictly")
        if any(x < 0 for x in p):
            raise ValueError("tap powers must be non-negative")
        if abs(sum(p) - 1.0) > 1e-9:
            raise ValueError(f"tap powers must sum to 1, got {sum(p)}")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "powers", p)

    @classmethod
    def normalized(cls, delays: Sequence[int], powers: Sequence[float], name: str = "custom") -> "ChannelProfile":
        p = np.asarray(powers, dtype=float)
        return cls(tuple(delays), tuple(p / p.sum()), name)

    @classmethod
    def from_db(cls, delays: Sequence[int], powers_db: Sequence[float], name: str = "custom") -> "ChannelProfile":
        return cls.normalized(delays, 10 ** (np.asarray(powers_db, dtype=float) / 10), name)

    @property
    def t_max(self) -> int:
        return self.delays[-1]

    @property
    def n_taps(self) -> int:
        return len(self.delays)

    def as_dict(self) -> dict:
        return {"name": self.name, "taps": [[d, p] for d, p in zip(self.delays, self.powers)]}


# Rural-area 6-path profile with 0.1 us spacing, sampled at 10 MHz.
COST207_RAX6 = ChannelProfile.from_db((0, 1, 2, 3, 4, 5), (0, -4, -8, -12, -16, -20), "cost207_rax6")
FLAT = ChannelProfile((0,), (1.0,), "flat")

PROFILES = {p.name: p for p in (COST207_RAX6, FLAT)}


def get_profile(name: str) -> ChannelProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(f"unknown channel profile {name!r}; known: {sorted(PROFILES)}") from None


def draw_channel(profile: ChannelProfile, rng: np.random.Generator, size: int | tuple[int, ...] = ()) -> np.ndarray:
    """Independent complex Gaussian taps, ``E|h_p|^2 = powers[p]``; last axis is the tap."""
    shape = (size,) if isinstance(size, int) else tuple(size)
    shape = shape + (profile.n_taps,)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return g * np.sqrt(np.asarray(profile.powers))


# --------------------------------------------------------------------------
# sample-level blocks


def transmit(d, c, cp_len: int) -> np.ndarray:
    """Serialise symbols ``d`` spread by ``c``, each block led by its last ``cp_len`` samples."""
    if cp_len < 0:
        raise ValueError("cp_len must be >= 0")
    c = np.asarray(c, dtype=complex)
    d = np.atleast_1d(np.asarray(d, dtype=complex))
    if cp_len > c.size:
        raise ValueError("cp_len longer than the block")
    blocks = d[:, None] * c[None, :]
    if cp_len:
        blocks = np.concatenate([blocks[:, c.size - cp_len :], blocks], axis=1)
    return blocks.reshape(-1)


def apply_channel(x, taps, delays) -> np.ndarray:
    """Linear multipath, output truncated to the input length."""
    x = np.asarray(x, dtype=complex)
    y = np.zeros_like(x)
    for h, dly in zip(np.atleast_1d(taps), np.atleast_1d(delays)):
        dly = int(dly)
        if dly < x.size:
            y[dly:] += h * x[: x.size - dly]
    return y


def remove_cp(y, block_len: int, cp_len: int) -> np.ndarray:
    """Split a stream into CP-stripped blocks, shape ``(n_blocks, block_len)``."""
    y = np.asarray(y)
    sym = block_len + cp_len
    n = y.size // sym
    return y[: n * sym].reshape(n, sym)[:, cp_len:]


def despread(r, c) -> complex:
    """``<r, c> = sum_n r[n] conj(c[n])``."""
    r = np.asarray(r, dtype=complex)
    c = np.asarray(c, dtype=complex)
    if r.shape[-1] != c.size:
        raise ValueError(f"length mismatch: {r.shape[-1]} != {c.size}")
    return r @ np.conj(c)


def mrc_rake(r, c, taps, delays) -> complex | np.ndarray:
    """Maximal-ratio RAKE with one finger per path.

    Finger p correlates ``r`` with ``c`` delayed (right-cyclically shifted) by
    ``delays[p]``. That delay is what a CP-protected path of that delay
    produces. Fingers are weighted by ``conj(h_p)`` and the sum is divided by
    ``sum|h_p|^2 * ||c||^2``, so a single noiseless path returns the data
    symbol exactly.
    """
    c = np.asarray(c, dtype=complex)
    taps = np.atleast_1d(np.asarray(taps, dtype=complex))
    z = 0
    for h, dly in zip(taps, np.atleast_1d(delays)):
        z = z + np.conj(h) * despread(r, np.roll(c, int(dly)))
    return z / (np.sum(np.abs(taps) ** 2) * np.vdot(c, c).real)


# --------------------------------------------------------------------------
# modulation and theory


def qpsk_modulate(bits: np.ndarray) -> np.ndarray:
    """Gray QPSK, unit energy: bit pair (b0, b1) -> ((1-2 b0) + 1j (1-2 b1)) / sqrt(2)."""
    bits = np.asarray(bits)
    if bits.shape[-1] != 2:
        raise ValueError("last axis must hold bit pairs")
    return ((1 - 2 * bits[..., 0]) + 1j * (1 - 2 * bits[..., 1])) / np.sqrt(2)


def qpsk_demodulate(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)
    return np.stack([(z.real < 0), (z.imag < 0)], axis=-1).astype(np.int8)


def qpsk_awgn_ber(ebn0_db) -> np.ndarray:
    g = 10 ** (np.asarray(ebn0_db, dtype=float) / 10)
    return 0.5 * erfc(np.sqrt(g))


def qpsk_rayleigh_ber(ebn0_db) -> np.ndarray:
    """Gray QPSK over flat Rayleigh fading with coherent detection."""
    g = 10 ** (np.asarray(ebn0_db, dtype=float) / 10)
    return 0.5 * (1 - np.sqrt(g / (1 + g)))


@dataclass(frozen=True)
class BERResult:
    ber: float
    bit_errors: int
    bits: int
    ci95: float

    @classmethod
    def from_counts(cls, errors: int, bits: int) -> "BERResult":
        if bits <= 0:
            raise ValueError("no bits simulated")
        p = errors / bits
        return cls(p, int(errors), int(bits), 1.96 * math.sqrt(p * (1 - p) / bits))


# --------------------------------------------------------------------------
# link configuration


@dataclass(frozen=True)
class LinkConfig:
    """One Monte-Carlo operating point.

    ``codes`` holds one spreading sequence per available user (time domain for
    CR-CDMA, frequency domain for MC-CDMA); user 0 is the desired user.
    ``nf_db`` is the interferer-to-desired energy ratio, one value for all
    interferers or one per interferer. Per-user timing offsets are uniform on
    ``[0, max_offset]``. When ``max_offset`` is None it defaults to
    ``min(cp_len, zone) - t_max``, which keeps every path inside both the CP and
    the zero cross-correlation zone.
    """

    codes: np.ndarray = field(repr=False)
    users: int
    cp_len: int
    ebn0_db: float
    nf_db: float | tuple[float, ...] = 0.0
    channel: ChannelProfile = COST207_RAX6
    n_bits: int = 100_000
    rng_seed: int = 0
    zone: int | None = None
    max_offset: int | None = None
    rx_codes: np.ndarray | None = field(default=None, repr=False)
    batch_symbols: int = 512
    workers: int | None = None
    noiseless: bool = False
    engine: str = "correlation"

    def __post_init__(self) -> None:
        codes = np.atleast_2d(np.asarray(self.codes, dtype=complex))
        object.__setattr__(self, "codes", codes)
        if self.rx_codes is not None:
            rx = np.atleast_2d(np.asarray(self.rx_codes, dtype=complex))
            if rx.shape != codes.shape:
                raise ValueError(f"receiver codes {rx.shape} do not match transmit codes {codes.shape}")
            object.__setattr__(self, "rx_codes", rx)
        if not 1 <= self.users <= codes.shape[0]:
            raise ValueError(f"users={self.users} outside [1, {codes.shape[0]}]")
        if self.cp_len < self.channel.t_max:
            raise ValueError(f"cp_len {self.cp_len} shorter than channel delay spread {self.channel.t_max}")
        if self.cp_len > self.block_len:
            raise ValueError("cp_len longer than the block")
        if self.n_bits < 2:
            raise ValueError("n_bits must be >= 2")
        if not math.isfinite(self.ebn0_db):
            raise ValueError("ebn0_db must be finite")
        nf = np.atleast_1d(np.asarray(self.nf_db, dtype=float))
        if not np.all(np.isfinite(nf)):
            raise ValueError("near-far factors must be finite")
        if nf.size not in (1, max(self.users - 1, 1)):
            raise ValueError(f"need 1 or {self.users - 1} near-far factors, got {nf.size}")
        if self.offset_bound < 0:
            raise ValueError("offset bound is negative: the zone or CP is shorter than the channel")
        if self.offset_bound + self.channel.t_max > self.cp_len:
            raise ValueError("max_offset + t_max exceeds the cyclic prefix")

    @property
    def block_len(self) -> int:
        return self.codes.shape[1]

    @property
    def offset_bound(self) -> int:
        if self.max_offset is not None:
            return int(self.max_offset)
        span = self.cp_len if self.zone is None else min(self.cp_len, self.zone)
        return span - self.channel.t_max

    def amplitudes(self) -> np.ndarray:
        nf = np.atleast_1d(np.asarray(self.nf_db, dtype=float))
        nf = np.broadcast_to(nf, (max(self.users - 1, 0),))
        return np.concatenate([[1.0], 10 ** (nf / 20)])

    @property
    def n0(self) -> float:
        """Noise power per complex sample for unit desired-symbol energy."""
        return 0.5 / 10 ** (self.ebn0_db / 10)

    def replace(self, **kw) -> "LinkConfig":
        return replace(self, **kw)


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


def _batches(cfg: LinkConfig) -> list[tuple[int, int]]:
    n_sym = math.ceil(cfg.n_bits / 2)
    out = []
    for b, start in enumerate(range(0, n_sym, cfg.batch_symbols)):
        out.append((b, min(cfg.batch_symbols, n_sym - start)))
    return out


def _user_draws(cfg: LinkConfig, batch: int, j: int, n: int):
    """Bits, taps and timing offset for user ``j``: one stream per (seed, batch, user)."""
    rng = _rng(cfg.rng_seed, batch, _USER_KEY, j)
    bits = rng.integers(0, 2, size=(n, 2), dtype=np.int8)
    taps = draw_channel(cfg.channel, rng, n)
    offset = rng.integers(0, cfg.offset_bound + 1, size=n)
    return bits, taps, offset


def freq_response(taps: np.ndarray, delays: Sequence[int], offsets: np.ndarray, M: int) -> np.ndarray:
    """``H[b, k] = sum_p taps[b, p] exp(-2j pi k (offsets[b] + delays[p]) / M)``."""
    n = taps.shape[0]
    imp = np.zeros((n, M), dtype=complex)
    pos = (np.asarray(offsets)[:, None] + np.asarray(delays)[None, :]) % M
    # delays are distinct, so each row's positions are too
    imp[np.arange(n)[:, None], pos] = taps
    return np.fft.fft(imp, axis=1)


def _unit(codes: np.ndarray) -> np.ndarray:
    return codes / np.linalg.norm(codes, axis=1, keepdims=True)


@dataclass
class _Batch:
    bits: np.ndarray  # desired user's bits (n, 2)
    H0: np.ndarray  # desired user's frequency response (n, M)
    desired: np.ndarray  # (n, M) desired-user received spectrum
    interference: np.ndarray  # (n, M)
    noise: np.ndarray  # (n, M)


def _cr_batch(cfg: LinkConfig, batch: int, n: int, freq_codes: np.ndarray) -> _Batch:
    M = cfg.block_len
    amps = cfg.amplitudes()
    desired = interference = None
    bits0 = H0 = None
    for j in range(cfg.users):
        bits, taps, offset = _user_draws(cfg, batch, j, n)
        H = freq_response(taps, cfg.channel.delays, offset, M)
        contrib = amps[j] * qpsk_modulate(bits)[:, None] * H * freq_codes[j][None, :]
        if j == 0:
            desired, bits0, H0 = contrib, bits, H
        elif interference is None:
            interference = contrib
        else:
            interference += contrib
    if interference is None:
        interference = np.zeros_like(desired)
    if cfg.noiseless:
        noise = np.zeros_like(desired)
    else:
        rng = _rng(cfg.rng_seed, batch, _NOISE_KEY)
        noise = np.sqrt(cfg.n0 / 2) * (rng.standard_normal((n, M)) + 1j * rng.standard_normal((n, M)))
    return _Batch(bits0, H0, desired, interference, noise)


def _run_batches(cfg: LinkConfig, fn) -> BERResult:
    batches = _batches(cfg)
    workers = max_workers() if cfg.workers is None else cfg.workers
    if workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(min(workers, len(batches))) as pool:
            errs = list(pool.map(lambda bn: fn(*bn), batches))
    else:
        errs = [fn(b, n) for b, n in batches]
    total_bits = 2 * sum(n for _, n in batches)
    return BERResult.from_counts(int(sum(errs)), total_bits)


def _cr_statistics_samples(cfg: LinkConfig, batch: int, n: int, parts: bool = False):
    tx = _unit(cfg.codes[: cfg.users])
    rx = _unit(cfg.codes[:1] if cfg.rx_codes is None else cfg.rx_codes[:1])[0]
    Ctx = np.fft.fft(tx, axis=1, norm="ortho")
    Crx = np.fft.fft(rx, norm="ortho")
    bt = _cr_batch(cfg, batch, n, Ctx)
    w = np.conj(bt.H0 * Crx[None, :])
    norm = np.sum(np.abs(bt.H0) ** 2 / cfg.block_len, axis=1)  # = sum_p |h_p|^2 (Parseval)
    z_d = np.sum(w * bt.desired, axis=1) / norm
    z_i = np.sum(w * bt.interference, axis=1) / norm
    z_n = np.sum(w * bt.noise, axis=1) / norm
    z = z_d + z_i + z_n
    if parts:
        return z, bt.bits, (z_d, z_i, z_n)
    return z, bt.bits


def _cr_statistics_corr(cfg: LinkConfig, batch: int, n: int, parts: bool = False):
    """Same statistic from correlation tables.

    Finger q of the RAKE sits at ``delta_0 + D_q``. A path of user j at
    ``delta_j + D_p`` contributes ``R_{c_j, c_rx}(delta_j + D_p - delta_0 - D_q)``.
    The noise term is ``sum_n n[n] conj(s[n])`` with ``s`` the finger-weighted
    reference, i.e. CN(0, N0 ||s||^2), and ``||s||^2`` again comes from the
    reference's periodic autocorrelation.
    """
    M = cfg.block_len
    tx = _unit(cfg.codes[: cfg.users])
    rx = _unit(cfg.codes[:1] if cfg.rx_codes is None else cfg.rx_codes[:1])[0]
    X = np.conj(np.fft.ifft(np.conj(np.fft.fft(tx, axis=1)) * np.fft.fft(rx)[None, :], axis=1))  # R_{c_j, c_rx}
    Rrx = pccf_all(rx, rx)
    delays = np.asarray(cfg.channel.delays)
    amps = cfg.amplitudes()

    bits0, g, off0 = _user_draws(cfg, batch, 0, n)
    fingers = off0[:, None] + delays[None, :]  # (n, P)
    norm = np.sum(np.abs(g) ** 2, axis=1)
    z_d = z_i = None
    for j in range(cfg.users):
        if j == 0:
            bits, h, off = bits0, g, off0
        else:
            bits, h, off = _user_draws(cfg, batch, j, n)
        paths = off[:, None] + delays[None, :]
        lag = (paths[:, None, :] - fingers[:, :, None]) % M  # (n, Q, P)
        coupling = np.einsum("nq,np,nqp->n", np.conj(g), h, X[j][lag])
        term = amps[j] * qpsk_modulate(bits) * coupling / norm
        if j == 0:
            z_d = term
        else:
            z_i = term if z_i is None else z_i + term
    if z_i is None:
        z_i = np.zeros_like(z_d)
    if cfg.noiseless:
        z_n = np.zeros_like(z_d)
    else:
        dd = (delays[:, None] - delays[None, :]) % M
        energy = np.einsum("nq,nr,qr->n", g, np.conj(g), Rrx[(-dd) % M]).real
        rng = _rng(cfg.rng_seed, batch, _NOISE_KEY)
        w = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(cfg.n0 * energy / 2)
        z_n = w / norm
    z = z_d + z_i + z_n
    if parts:
        return z, bits0, (z_d, z_i, z_n)
    return z, bits0


def cr_statistics(cfg: LinkConfig, batch: int, n: int, parts: bool = False, engine: str | None = None):
    """RAKE decision statistics of the desired user for one batch.

    ``engine="samples"`` builds every received spectrum sample;
    ``engine="correlation"`` evaluates the same sums from correlation tables
    and draws the noise term directly from its distribution. The two agree
    exactly without noise. With ``parts=True`` the desired, interference and
    noise contributions are also returned.
    """
    engine = engine or cfg.engine
    if engine == "samples":
        return _cr_statistics_samples(cfg, batch, n, parts)
    if engine == "correlation":
        return _cr_statistics_corr(cfg, batch, n, parts)
    raise ValueError(f"unknown engine {engine!r}")


def run_ber(cfg: LinkConfig) -> BERResult:
    """Desired-user BER of CR-CDMA with an MRC RAKE and perfect channel knowledge."""

    def batch_errors(b: int, n: int) -> int:
        z, bits = cr_statistics(cfg, b, n)
        return int(np.count_nonzero(qpsk_demodulate(z) != bits))

    return _run_batches(cfg, batch_errors)


def measured_ebn0_db(cfg: LinkConfig, n_symbols: int = 4096) -> float:
    """Eb/N0 estimated from the simulated desired-signal and noise samples."""
    tx = _unit(cfg.codes[:1])
    Ctx = np.fft.fft(tx, axis=1, norm="ortho")
    bt = _cr_batch(cfg.replace(users=1, noiseless=False), 0, n_symbols, Ctx)
    # unitary DFT: per-sample energies carry over from the spectra
    es = np.mean(np.sum(np.abs(bt.desired) ** 2, axis=1))
    n0 = np.mean(np.abs(bt.noise) ** 2)
    return float(10 * np.log10(es / 2 / n0))


def mui_leakage(cfg: LinkConfig, n_symbols: int = 64) -> float:
    """Largest noiseless interference term relative to the desired term."""
    _, _, (z_d, z_i, _) = cr_statistics(cfg.replace(noiseless=True), 0, n_symbols, parts=True)
    return float(np.max(np.abs(z_i)) / np.mean(np.abs(z_d)))


# --------------------------------------------------------------------------
# baselines


def mc_cdma_codes(kind: str, mask: SpectrumMask, K: int, rng_seed: int = 0, roots: Sequence[int] = (3, 5, 7, 9)) -> np.ndarray:
    """Frequency-domain MC-CDMA codes with the holes nulled: Zadoff-Chu or random polyphase."""
    from .seeds import zadoff_chu

    M = mask.n
    if kind == "zadoff_chu":
        if len(roots) < K:
            raise ValueError(f"need {K} roots, got {len(roots)}")
        codes = np.stack([zadoff_chu(M, int(u)) for u in roots[:K]])
    elif kind == "random":
        rng = _rng(rng_seed, _CODE_KEY)
        codes = np.exp(2j * np.pi * rng.random((K, M)))
    else:
        raise ValueError(f"unknown MC-CDMA code kind {kind!r}")
    return codes * mask.marking[None, :]


def mc_cdma_baseline(cfg: LinkConfig) -> BERResult:
    """MC-CDMA: frequency-domain spreading, one-tap MMSE equaliser, then despreading.

    ``cfg.codes`` are frequency-domain codes. The equaliser uses only the
    desired user's channel, so other users leak through. The despread noise
    term is drawn from its exact distribution, CN(0, N0 sum_k |C_k W_k|^2).
    """
    Cf = _unit(cfg.codes[: cfg.users])
    n_active = np.count_nonzero(np.abs(Cf[0]) > 0)
    sigma2 = 1.0 / n_active
    M = cfg.block_len
    amps = cfg.amplitudes()

    def batch_errors(b: int, n: int) -> int:
        bits0, h0, off0 = _user_draws(cfg, b, 0, n)
        H0 = freq_response(h0, cfg.channel.delays, off0, M)
        W = np.conj(H0) / (np.abs(H0) ** 2 + cfg.n0 / sigma2)
        V = np.conj(Cf[0])[None, :] * W
        z = qpsk_modulate(bits0) * np.sum(V * H0 * Cf[0][None, :], axis=1)
        for j in range(1, cfg.users):
            bits, h, off = _user_draws(cfg, b, j, n)
            H = freq_response(h, cfg.channel.delays, off, M)
            z = z + amps[j] * qpsk_modulate(bits) * np.sum(V * H * Cf[j][None, :], axis=1)
        if not cfg.noiseless:
            rng = _rng(cfg.rng_seed, b, _NOISE_KEY)
            var = cfg.n0 * np.sum(np.abs(V) ** 2, axis=1)
            z = z + (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(var / 2)
        return int(np.count_nonzero(qpsk_demodulate(z) != bits0))

    return _run_batches(cfg, batch_errors)


# --------------------------------------------------------------------------
# spectrum sensing mismatch


def eta(st: SpectrumMask, sr: SpectrumMask) -> float:
    """Cosine similarity of the transmitter and receiver marking vectors."""
    if st.n != sr.n:
        raise ValueError(f"length mismatch: {st.n} != {sr.n}")
    # integer counts keep identical masks at exactly 1.0
    a = st.marking.astype(np.int64)
    b = sr.marking.astype(np.int64)
    na, nb = int(a.sum()), int(b.sum())
    if na == 0 or nb == 0:
        raise ValueError("eta undefined for an all-zero marking vector")
    return int(a @ b) / math.sqrt(na * nb)


def mismatched_mask(st: SpectrumMask, target: float, rng: np.random.Generator) -> SpectrumMask:
    """A receiver mask whose eta against ``st`` is as close as possible to ``target``.

    Searches over (missed, extra) bit-flip counts: ``missed`` available bins
    the receiver thinks are occupied, ``extra`` holes it thinks are free.
    Ties go to fewer flips. The flipped bins are picked at random.
    """
    n_on = st.n_available
    n_off = st.n - n_on
    best = None
    for a in range(n_on):
        for b in range(n_off + 1):
            e = (n_on - a) / math.sqrt(n_on * (n_on - a + b))
            key = (abs(e - target), a + b)
            if best is None or key < best[0]:
                best = (key, a, b)
    _, a, b = best
    s = st.marking.astype(np.int8).copy()
    if a:
        s[rng.choice(st.available, a, replace=False)] = 0
    if b:
        s[rng.choice(st.holes, b, replace=False)] = 1
    return SpectrumMask(s)


@dataclass(frozen=True)
class OFDMConfig:
    """NC-OFDM link: QPSK on every subcarrier the transmitter believes free.

    ``mapping="sequential"``: both ends fill their own believed-free bins in
    increasing order, so one disagreement shifts every later symbol.
    ``mapping="aligned"``: the receiver knows which bin carries which symbol
    and only loses the symbols on bins it believes occupied.
    """

    st: SpectrumMask
    sr: SpectrumMask
    ebn0_db: float
    cp_len: int = 16
    channel: ChannelProfile = COST207_RAX6
    n_bits: int = 100_000
    rng_seed: int = 0
    batch_symbols: int = 512
    workers: int | None = None
    mapping: str = "sequential"

    def __post_init__(self) -> None:
        if self.mapping not in ("sequential", "aligned"):
            raise ValueError(f"unknown subcarrier mapping {self.mapping!r}")
        if self.st.n != self.sr.n:
            raise ValueError("transmitter and receiver masks differ in length")
        if self.cp_len < self.channel.t_max:
            raise ValueError("cp_len shorter than channel delay spread")
        if self.st.n_available == 0:
            raise ValueError("transmitter mask has no free subcarrier")


def _ofdm_routes(st: SpectrumMask, sr: SpectrumMask, mapping: str) -> tuple[np.ndarray, np.ndarray]:
    """Receiver bin for each data symbol; -1 where the receiver has none."""
    t, r = st.available, sr.available
    route = np.full(t.size, -1)
    if mapping == "sequential":
        m = min(t.size, r.size)
        route[:m] = r[:m]
    else:
        route[np.isin(t, r)] = t[np.isin(t, r)]
    return t, route


def ofdm_lost_fraction(st: SpectrumMask, sr: SpectrumMask, mapping: str = "sequential") -> float:
    """Fraction of transmitted data symbols the receiver reads from the wrong bin (or not at all)."""
    t, route = _ofdm_routes(st, sr, mapping)
    return float(np.count_nonzero(route != t)) / t.size


def ofdm_floor(st: SpectrumMask, sr: SpectrumMask, mapping: str = "sequential") -> float:
    """High-SNR BER floor: every misrouted symbol is a coin flip per bit."""
    return ofdm_lost_fraction(st, sr, mapping) / 2


def ncofdm_baseline(cfg: OFDMConfig) -> BERResult:
    """NC-OFDM over the per-block Rayleigh channel with one-tap coherent detection.

    Symbols the receiver reads from a wrong bin see independent data or pure
    noise; symbols it never reads are replaced by random guesses.
    """
    t_bins, route = _ofdm_routes(cfg.st, cfg.sr, cfg.mapping)
    n_data = t_bins.size
    read = route >= 0
    N = cfg.st.n
    n0 = 0.5 / 10 ** (cfg.ebn0_db / 10)  # unit energy per data subcarrier

    def batch_errors(b: int, n: int) -> int:
        rng = _rng(cfg.rng_seed, b, _USER_KEY, 0)
        bits = rng.integers(0, 2, size=(n, n_data, 2), dtype=np.int8)
        taps = draw_channel(cfg.channel, rng, n)
        H = freq_response(taps, cfg.channel.delays, np.zeros(n, dtype=int), N)
        X = np.zeros((n, N), dtype=complex)
        X[:, t_bins] = qpsk_modulate(bits)
        nrng = _rng(cfg.rng_seed, b, _NOISE_KEY)
        W = np.sqrt(n0 / 2) * (nrng.standard_normal((n, N)) + 1j * nrng.standard_normal((n, N)))
        Y = H * X + W
        dec = np.empty_like(bits)
        rb = route[read]
        dec[:, read] = qpsk_demodulate(np.conj(H[:, rb]) * Y[:, rb])
        if not read.all():
            dec[:, ~read] = nrng.integers(0, 2, size=(n, int((~read).sum()), 2), dtype=np.int8)
        return int(np.count_nonzero(dec != bits))

    n_sym = math.ceil(cfg.n_bits / (2 * n_data))
    batches = [(b, min(cfg.batch_symbols, n_sym - s)) for b, s in enumerate(range(0, n_sym, cfg.batch_symbols))]
    workers = max_workers() if cfg.workers is None else cfg.workers
    if workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(min(workers, len(batches))) as pool:
            errs = list(pool.map(lambda bn: batch_errors(*bn), batches))
    else:
        errs = [batch_errors(b, n) for b, n in batches]
    return BERResult.from_counts(int(sum(errs)), 2 * n_data * sum(n for _, n in batches))


def sensing_mismatch_run(cfg: LinkConfig, tx_codes: np.ndarray, rx_codes: np.ndarray) -> BERResult:
    """CR-CDMA BER when the receiver despreads with codes built on its own mask."""
    return run_ber(cfg.replace(codes=tx_codes, rx_codes=rx_codes))


def ebn0_at_ber(ebn0_db: Sequence[float], ber: Sequence[float], target: float = 1e-3) -> float:
    """Eb/N0 where a BER curve crosses ``target``, by log-linear interpolation."""
    x = np.asarray(ebn0_db, dtype=float)
    y = np.asarray(ber, dtype=float)
    for i in range(len(x) - 1):
        if y[i] >= target > y[i + 1] and y[i + 1] > 0:
            ly0, ly1 = np.log10(y[i]), np.log10(y[i + 1])
            return float(x[i] + (np.log10(target) - ly0) * (x[i + 1] - x[i]) / (ly1 - ly0))
    raise ValueError(f"BER curve does not cross {target}")
