"""Scenario files for the link simulator and the masks they refer to.

A scenario is a flat JSON object. Unknown keys are rejected so that a typo
cannot silently fall back to a default::

    {"id": "nearfar", "system": "cr_cdma", "mask": "two_holes",
     "seed": "example2", "users": 4, "ebn0_db": 10, "nf_db": 10,
     "channel": "cost207_rax6", "n_bits": 1000000, "rng_seed": 1}

``system`` is one of ``cr_cdma`` (quasi-ZCZ codes, MRC RAKE), ``mc_cdma``
(masked frequency-domain codes, MMSE equaliser) or ``ncofdm`` (QPSK per free
subcarrier). Masks are given by preset name, by inline ``{"S": [...]}`` or by
a path to a mask file.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .construct import QuasiZCZSet, synthesize
from .seeds import ZCZError, freq_shift_zcz, zc_waveforms
from .seqcore import SpectrumMask
from .serialize import LengthMismatchError, SchemaError, load_json, load_seed, mask_from_json
from .simulate import (
    PROFILES,
    ChannelProfile,
    LinkConfig,
    OFDMConfig,
    eta,
    mc_cdma_baseline,
    mc_cdma_codes,
    mismatched_mask,
    ncofdm_baseline,
    run_ber,
)

#: Band-edge fractions of the holes, scaled to any mask length.
BAND_PRESETS: dict[str, tuple[tuple[float, float], ...]] = {
    "full": (),
    # 2.5-3.75 MHz and 6.25-7.5 MHz of a 10 MHz band: two holes, 75 % free
    "two_holes": ((0.25, 0.375), (0.625, 0.75)),
    # four equal holes, 50 % free
    "four_holes": ((0.125, 0.25), (0.375, 0.5), (0.625, 0.75), (0.875, 1.0)),
}

#: Masks tied to one length, as (value, run length) pairs.
FIXED_MASKS: dict[str, tuple[tuple[int, int], ...]] = {
    "example1": ((1, 4), (0, 2), (1, 3), (0, 4), (1, 3)),
    "example2": ((1, 14), (0, 6), (1, 20), (0, 8), (1, 16)),
    "ieee80211a": ((0, 1), (1, 26), (0, 11), (1, 26)),  # DC and guard band nulled
}

SYSTEMS = ("cr_cdma", "mc_cdma", "ncofdm")
CSV_COLUMNS = ["scenario_id", "ebn0_db", "nf_db", "eta", "ber", "ci95", "bits"]

_MISMATCH_STREAM = 3


class InvariantError(RuntimeError):
    """A run violated a property that must hold by construction."""


def band_mask(n: int, holes: tuple[tuple[float, float], ...]) -> SpectrumMask:
    k = np.arange(n)
    s = np.ones(n, dtype=np.int8)
    for lo, hi in holes:
        s[(k >= lo * n) & (k < hi * n)] = 0
    return SpectrumMask(s)


def resolve_mask(spec: Any, n: int | None = None) -> SpectrumMask:
    """Turn a preset name, a mask file path or an inline ``{"S": ...}`` into a mask.

    Band presets need ``n``; every other form is checked against ``n`` when
    it is given.
    """
    if isinstance(spec, dict):
        mask = mask_from_json(spec)
    elif isinstance(spec, str) and spec in BAND_PRESETS:
        if n is None:
            raise SchemaError(f"mask preset {spec!r} needs a length")
        return band_mask(n, BAND_PRESETS[spec])
    elif isinstance(spec, str) and spec in FIXED_MASKS:
        mask = SpectrumMask.from_runs(FIXED_MASKS[spec])
    elif isinstance(spec, str) and Path(spec).exists():
        mask = mask_from_json(load_json(spec))
    else:
        known = sorted(BAND_PRESETS) + sorted(FIXED_MASKS)
        raise SchemaError(f"unknown mask {spec!r}: not a file and not one of {known}")
    if n is not None and mask.n != n:
        raise LengthMismatchError(f"mask has length {mask.n}, the waveform needs {n}")
    return mask


def default_roots(n: int, k: int) -> list[int]:
    """The first ``k`` Zadoff-Chu roots from 3 upward that are coprime with ``n`` and distinct mod 2n."""
    roots, seen, u = [], set(), 3
    while len(roots) < k:
        if math.gcd(u, n) == 1 and u % (2 * n) not in seen:
            roots.append(u)
            seen.add(u % (2 * n))
        u += 1
        if u > 4 * n + k + 3:
            raise SchemaError(f"cannot find {k} distinct roots for N={n}")
    return roots


def _channel(spec: Any) -> ChannelProfile:
    if isinstance(spec, str):
        if spec not in PROFILES:
            raise SchemaError(f"unknown channel {spec!r}; known: {sorted(PROFILES)}")
        return PROFILES[spec]
    if isinstance(spec, dict) and "taps" in spec:
        try:
            taps = [(int(d), float(p)) for d, p in spec["taps"]]
            return ChannelProfile.normalized([d for d, _ in taps], [p for _, p in taps], str(spec.get("name", "inline")))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"channel taps: {exc}") from None
    raise SchemaError("channel must be a profile name or {'taps': [[delay, power], ...]}")


@dataclass(frozen=True)
class Scenario:
    id: str = "scenario"
    system: str = "cr_cdma"
    mask: Any = "two_holes"
    seed: str = "example2"
    seed_params: dict = field(default_factory=dict)
    block_len: int = 1024
    zc_roots: tuple[int, ...] | None = None
    codes: str = "zadoff_chu"
    users: int = 1
    cp_len: int | None = None
    ebn0_db: float = 10.0
    nf_db: float = 0.0
    eta: float = 1.0
    channel: Any = "cost207_rax6"
    n_bits: int = 100_000
    rng_seed: int = 0
    engine: str = "correlation"
    max_offset: int | None = None
    ofdm_mapping: str = "sequential"

    def __post_init__(self) -> None:
        if self.system not in SYSTEMS:
            raise SchemaError(f"system must be one of {SYSTEMS}, got {self.system!r}")
        if self.codes not in ("zadoff_chu", "random"):
            raise SchemaError(f"codes must be zadoff_chu or random, got {self.codes!r}")
        if self.engine not in ("correlation", "samples"):
            raise SchemaError(f"engine must be correlation or samples, got {self.engine!r}")
        for name in ("block_len", "users", "n_bits", "rng_seed"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise SchemaError(f"{name} must be an integer, got {v!r}")
        if self.block_len < 1 or self.users < 1 or self.n_bits < 2:
            raise SchemaError("block_len, users and n_bits must be positive (n_bits >= 2)")
        for name in ("ebn0_db", "nf_db", "eta"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise SchemaError(f"{name} must be a finite number, got {v!r}")
        if self.ofdm_mapping not in ("sequential", "aligned"):
            raise SchemaError(f"ofdm_mapping must be sequential or aligned, got {self.ofdm_mapping!r}")
        if not 0 < self.eta <= 1:
            raise SchemaError(f"eta must lie in (0, 1], got {self.eta}")
        if self.eta < 1 and self.system == "mc_cdma":
            raise SchemaError("sensing mismatch (eta < 1) is modelled for cr_cdma and ncofdm only")
        if self.zc_roots is not None:
            object.__setattr__(self, "zc_roots", tuple(int(u) for u in self.zc_roots))

    @classmethod
    def from_dict(cls, doc: Any) -> "Scenario":
        if not isinstance(doc, dict):
            raise SchemaError("scenario must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise SchemaError(f"unknown scenario field(s): {', '.join(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise SchemaError(f"scenario: {exc}") from None

    def replace(self, **kw) -> "Scenario":
        return Scenario.from_dict({**asdict(self), **kw})

    @property
    def cp(self) -> int:
        if self.cp_len is not None:
            return int(self.cp_len)
        return self.block_len // 4

    @property
    def profile(self) -> ChannelProfile:
        return _channel(self.channel)


# --------------------------------------------------------------------------
# code construction


def _seed(sc: Scenario):
    if sc.seed == "freq_shift":
        p = {"N": 64, "K": 16, "u": 1, **sc.seed_params}
        try:
            return freq_shift_zcz(int(p["N"]), int(p["K"]), int(p["u"]))
        except (ValueError, ZCZError) as exc:
            raise SchemaError(f"freq_shift seed: {exc}") from None
    return load_seed(sc.seed)


def build_qset(sc: Scenario, mask: SpectrumMask | None = None) -> QuasiZCZSet:
    """Quasi-ZCZ set for a CR-CDMA scenario, built on ``mask`` (default: the scenario's)."""
    seed = _seed(sc)
    if sc.block_len % seed.L:
        raise SchemaError(f"block_len {sc.block_len} is not a multiple of the seed length {seed.L}")
    n = sc.block_len // seed.L
    if mask is None:
        mask = resolve_mask(sc.mask, n)
    roots = sc.zc_roots or tuple(default_roots(n, seed.K))
    if len(roots) < seed.K:
        raise SchemaError(f"need {seed.K} Zadoff-Chu roots, got {len(roots)}")
    return synthesize(seed, zc_waveforms(mask, roots[: seed.K]))


def receiver_mask(sc: Scenario, st: SpectrumMask) -> SpectrumMask:
    if sc.eta >= 1:
        return st
    rng = np.random.default_rng(np.random.SeedSequence([sc.rng_seed, _MISMATCH_STREAM]))
    return mismatched_mask(st, sc.eta, rng)


# --------------------------------------------------------------------------
# running


def link_config(sc: Scenario) -> tuple[LinkConfig, float]:
    """The LinkConfig of a CDMA scenario and the achieved eta."""
    try:
        if sc.system == "cr_cdma":
            q = build_qset(sc)
            sr = receiver_mask(sc, q.mask)
            rx = None if sr == q.mask else build_qset(sc, sr).sequences
            cfg = LinkConfig(
                codes=q.sequences,
                users=sc.users,
                cp_len=sc.cp,
                ebn0_db=float(sc.ebn0_db),
                nf_db=float(sc.nf_db),
                channel=sc.profile,
                n_bits=sc.n_bits,
                rng_seed=sc.rng_seed,
                zone=q.zccz_width,
                rx_codes=rx,
                engine=sc.engine,
                max_offset=sc.max_offset,
            )
            return cfg, eta(q.mask, sr)
        if sc.system == "mc_cdma":
            mask = resolve_mask(sc.mask, sc.block_len)
            codes = mc_cdma_codes(sc.codes, mask, sc.users, sc.rng_seed, sc.zc_roots or default_roots(sc.block_len, sc.users))
            cfg = LinkConfig(
                codes=codes,
                users=sc.users,
                cp_len=sc.cp,
                ebn0_db=float(sc.ebn0_db),
                nf_db=float(sc.nf_db),
                channel=sc.profile,
                n_bits=sc.n_bits,
                rng_seed=sc.rng_seed,
                max_offset=sc.max_offset,
            )
            return cfg, 1.0
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(f"scenario {sc.id!r}: {exc}") from None
    raise SchemaError(f"system {sc.system!r} has no CDMA link configuration")


def check_mui_free(cfg: LinkConfig, tol: float = 1e-9) -> float:
    """Largest noiseless interference term relative to the desired one; raises if above ``tol``."""
    from .simulate import mui_leakage

    if cfg.users < 2:
        return 0.0
    leak = mui_leakage(cfg)
    bound = tol * float(cfg.amplitudes().max())
    if leak > bound:
        raise InvariantError(f"multi-user interference {leak:.3g} inside the zone (bound {bound:.3g})")
    return leak


def run_scenario(sc: Scenario, check: bool = True) -> dict:
    """One CSV row for ``sc``."""
    if sc.system == "ncofdm":
        st = resolve_mask(sc.mask, sc.block_len)
        sr = receiver_mask(sc, st)
        try:
            cfg = OFDMConfig(
                st, sr, float(sc.ebn0_db), cp_len=sc.cp, channel=sc.profile,
                n_bits=sc.n_bits, rng_seed=sc.rng_seed, mapping=sc.ofdm_mapping,
            )
        except ValueError as exc:
            raise SchemaError(f"scenario {sc.id!r}: {exc}") from None
        res = ncofdm_baseline(cfg)
        eta_val = eta(st, sr)
        nf = 0.0
    else:
        cfg, eta_val = link_config(sc)
        if sc.system == "cr_cdma":
            if check:
                check_mui_free(cfg)
            res = run_ber(cfg)
        else:
            res = mc_cdma_baseline(cfg)
        nf = float(sc.nf_db)
    return {
        "scenario_id": sc.id,
        "ebn0_db": float(sc.ebn0_db),
        "nf_db": nf,
        "eta": round(eta_val, 6),
        "ber": res.ber,
        "ci95": res.ci95,
        "bits": res.bits,
    }


# --------------------------------------------------------------------------
# sweep axes

AXES = {"nf": "nf_db", "users": "users", "eta": "eta", "ebn0": "ebn0_db"}


def parse_axis(text: str) -> tuple[str, list]:
    """``nf=0:20:2`` (inclusive range) or ``eta=0.87,0.92,1`` into (field, values)."""
    if "=" not in text:
        raise SchemaError(f"axis {text!r} must look like name=start:stop:step or name=v1,v2,...")
    name, spec = text.split("=", 1)
    name = name.strip()
    if name not in AXES:
        raise SchemaError(f"unknown axis {name!r}; choose from {sorted(AXES)}")
    try:
        if ":" in spec:
            parts = [float(x) for x in spec.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError("need start:stop:step with step > 0")
            start, stop, step = parts
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + i * step, 10) for i in range(max(count, 0))]
        else:
            values = [float(x) for x in spec.split(",") if x.strip()]
    except ValueError as exc:
        raise SchemaError(f"axis {text!r}: {exc}") from None
    if not values:
        raise SchemaError(f"axis {text!r} is empty")
    field_name = AXES[name]
    if field_name == "users":
        if any(v != int(v) for v in values):
            raise SchemaError("users axis needs integers")
        values = [int(v) for v in values]
    return field_name, values


def _fmt(v) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def sweep_points(base: Scenario, axes: list[tuple[str, list]]) -> list[Scenario]:
    """Cartesian product of the axes, first axis slowest. Ids get an ``/axis=value`` suffix."""
    points = [base]
    for field_name, values in axes:
        short = next(k for k, v in AXES.items() if v == field_name)
        points = [p.replace(**{field_name: v, "id": f"{p.id}/{short}={_fmt(v)}"}) for p in points for v in values]
    return points
