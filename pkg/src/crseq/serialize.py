"""JSON and CSV formats for sequences, masks, seed sets, constructed sets and optimizer output.

Every reader validates its input and raises :class:`SchemaError` (or the more
specific :class:`LengthMismatchError`) before anything is computed. The CLI
maps them to distinct exit codes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .construct import QuasiZCZSet, synthesize
from .optimize import OptimizerConfig, OptResult
from .seeds import FreqWaveform, ZCZError, ZCZSeedSet, builtin_zcz, make_seed_set
from .seqcore import SpectrumMask, as_seq


class SchemaError(ValueError):
    """Malformed or inconsistent input document."""

    exit_code = 2


class LengthMismatchError(SchemaError):
    """A mask and a waveform disagree on N."""

    exit_code = 3


def _require(doc: Any, *keys: str, what: str) -> None:
    if not isinstance(doc, dict):
        raise SchemaError(f"{what}: expected a JSON object, got {type(doc).__name__}")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise SchemaError(f"{what}: missing field(s) {', '.join(missing)}")


def _floats(values: Any, what: str) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{what}: non-numeric entries ({exc})") from None
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise SchemaError(f"{what}: expected a flat list of finite numbers")
    return arr


# --------------------------------------------------------------------------
# sequences and masks


def seq_to_json(x) -> dict:
    x = as_seq(x)
    return {"n": int(x.size), "re": x.real.tolist(), "im": x.imag.tolist()}


def seq_from_json(doc: Any) -> np.ndarray:
    _require(doc, "n", "re", "im", what="sequence")
    re = _floats(doc["re"], "sequence.re")
    im = _floats(doc["im"], "sequence.im")
    if not (re.size == im.size == doc["n"]) or re.size == 0:
        raise SchemaError(f"sequence: n={doc['n']} but re/im have {re.size}/{im.size} entries")
    return re + 1j * im


def write_seq_csv(x, fh) -> None:
    x = as_seq(x)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["index", "re", "im"])
    for i, v in enumerate(x):
        w.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def read_seq_csv(fh) -> np.ndarray:
    rows = list(csv.DictReader(fh))
    if not rows or set(rows[0]) != {"index", "re", "im"}:
        raise SchemaError("sequence CSV needs columns index,re,im")
    rows.sort(key=lambda r: int(r["index"]))
    if [int(r["index"]) for r in rows] != list(range(len(rows))):
        raise SchemaError("sequence CSV indices must be 0..n-1")
    return np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])


def mask_to_json(mask: SpectrumMask) -> dict:
    return {"S": mask.marking.astype(int).tolist()}


def mask_from_json(doc: Any) -> SpectrumMask:
    _require(doc, "S", what="mask")
    s = doc["S"]
    if not isinstance(s, list) or not s or any(v not in (0, 1) or isinstance(v, bool) for v in s):
        raise SchemaError("mask: S must be a non-empty list of 0/1 integers")
    return SpectrumMask(np.array(s, dtype=np.int8))


# --------------------------------------------------------------------------
# seed sets and waveforms


def seed_to_json(seed: ZCZSeedSet) -> dict:
    seqs = seed.sequences
    real = bool(np.all(seqs.imag == 0))
    return {
        "name": seed.name,
        "K": seed.K,
        "L": seed.L,
        "Z": seed.Z,
        "digest": seed.digest(),
        "sequences": seqs.real.tolist() if real else [seq_to_json(s) for s in seqs],
    }


def seed_from_json(doc: Any) -> ZCZSeedSet:
    """Rebuild and re-verify a seed set. Verification failures raise :class:`ZCZError`."""
    _require(doc, "K", "L", "Z", "sequences", what="seed set")
    raw = doc["sequences"]
    if not isinstance(raw, list) or not raw:
        raise SchemaError("seed set: sequences must be a non-empty list")
    if all(isinstance(s, dict) for s in raw):
        seqs = [seq_from_json(s) for s in raw]
    else:
        seqs = [_floats(s, "seed set sequence") for s in raw]
    if len(seqs) != doc["K"] or any(s.size != doc["L"] for s in seqs):
        raise SchemaError(f"seed set: declared K={doc['K']}, L={doc['L']} do not match the sequences")
    try:
        Z = int(doc["Z"])
    except (TypeError, ValueError):
        raise SchemaError("seed set: Z must be an integer") from None
    if not 1 <= Z <= doc["L"]:
        raise SchemaError(f"seed set: Z={Z} outside [1, L]")
    return make_seed_set(np.stack(seqs), Z, name=str(doc.get("name", "custom")))


def waveform_to_json(wf: FreqWaveform) -> dict:
    return {"type": "waveform", "params": wf.params, "mask": mask_to_json(wf.mask), "B": seq_to_json(wf.B)}


def waveform_from_json(doc: Any, mask: SpectrumMask | None = None) -> FreqWaveform:
    """Read a waveform or an optimizer result. ``mask`` overrides the stored mask."""
    if isinstance(doc, dict) and doc.get("type") == "opt_result":
        _require(doc, "waveform", what="optimizer result")
        doc = doc["waveform"]
    _require(doc, "B", what="waveform")
    B = seq_from_json(doc["B"])
    if mask is None:
        _require(doc, "mask", what="waveform")
        mask = mask_from_json(doc["mask"])
    if mask.n != B.size:
        raise LengthMismatchError(f"mask has N={mask.n} but waveform has N={B.size}")
    leak = np.abs(B[mask.holes])
    if leak.size and leak.max() > 1e-12 * max(1.0, np.abs(B).max()):
        raise SchemaError("waveform carries energy on the mask holes")
    return FreqWaveform(B, mask, dict(doc.get("params", {})))


# --------------------------------------------------------------------------
# constructed sets


def qset_to_json(q: QuasiZCZSet) -> dict:
    return {
        "type": "quasi_zcz_set",
        "K": q.K,
        "N": q.N,
        "L": q.L,
        "Z": q.seed.Z,
        "length": q.length,
        "zccz_width": q.zccz_width,
        "mask": mask_to_json(q.mask),
        "seed": seed_to_json(q.seed),
        "shared_waveform": q.shared_waveform,
        "waveforms": [{"params": w.params, "B": seq_to_json(w.B)} for w in q.waveforms],
        "sequences": [seq_to_json(c) for c in q.sequences],
    }


def qset_from_json(doc: Any) -> QuasiZCZSet:
    """Rebuild from provenance and check the stored sequences against the rebuild."""
    _require(doc, "mask", "seed", "waveforms", "sequences", what="quasi-ZCZ set")
    mask = mask_from_json(doc["mask"])
    seed = seed_from_json(doc["seed"])
    if not isinstance(doc["waveforms"], list):
        raise SchemaError("quasi-ZCZ set: waveforms must be a list")
    wfs = [waveform_from_json({**w, "type": "waveform"}, mask) for w in doc["waveforms"]]
    q = synthesize(seed, wfs[0] if doc.get("shared_waveform") else wfs)
    stored = np.stack([seq_from_json(s) for s in doc["sequences"]])
    if stored.shape != q.sequences.shape or not np.allclose(stored, q.sequences, atol=1e-12, rtol=0):
        raise SchemaError("quasi-ZCZ set: stored sequences differ from the rebuild from provenance")
    return q


def lattice_to_csv(lattice: np.ndarray, fh) -> None:
    """L rows by N columns, each entry written as ``re+imj``."""
    w = csv.writer(fh, lineterminator="\n")
    for row in np.asarray(lattice):
        w.writerow([f"{float(v.real)!r}{float(v.imag):+}j" for v in row])


def lattice_from_csv(fh) -> np.ndarray:
    try:
        return np.array([[complex(x) for x in row] for row in csv.reader(fh)])
    except ValueError as exc:
        raise SchemaError(f"lattice CSV: {exc}") from None


# --------------------------------------------------------------------------
# optimizer output and golden vectors


def optresult_to_json(res: OptResult) -> dict:
    return {
        "type": "opt_result",
        **res.summary(),
        "objective": res.objective,
        "restart": res.restart,
        "config": asdict(res.config) if res.config else None,
        "waveform": waveform_to_json(res.waveform),
    }


def config_from_json(doc: Any) -> OptimizerConfig:
    if not isinstance(doc, dict):
        raise SchemaError("optimizer config must be an object")
    try:
        return OptimizerConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"optimizer config: {exc}") from None


def magphase_from_json(doc: Any) -> np.ndarray:
    """Time-domain sequence from magnitude and phase matrices read out row by row."""
    _require(doc, "magnitude", "phase", what="magnitude/phase file")

    def flat(m, what):
        if not isinstance(m, list) or not all(isinstance(r, list) for r in m):
            raise SchemaError(f"{what} must be a list of rows")
        return _floats([v for r in m for v in r], what)

    mag = flat(doc["magnitude"], "magnitude")
    ph = flat(doc["phase"], "phase")
    if mag.size != ph.size or mag.size == 0:
        raise SchemaError(f"magnitude has {mag.size} entries, phase has {ph.size}")
    if np.any(mag < 0):
        raise SchemaError("magnitudes must be non-negative")
    return mag * np.exp(1j * ph)


def golden_sequence(lam: float) -> np.ndarray:
    """The two published optimizer outputs (lambda 0.15 and 0.95), length 64."""
    name = {0.15: "golden_lambda015.json", 0.95: "golden_lambda095.json"}.get(round(float(lam), 2))
    if name is None:
        raise KeyError(f"no golden sequence for lambda={lam}; available: 0.15, 0.95")
    text = resources.files("crseq").joinpath("data", name).read_text()
    return magphase_from_json(json.loads(text))


# --------------------------------------------------------------------------
# files


def load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def dump_json(doc: Any) -> str:
    return json.dumps(doc, indent=1, sort_keys=False, allow_nan=False) + "\n"


def load_seed(spec: str) -> ZCZSeedSet:
    """A built-in seed name or a seed-set JSON file."""
    p = Path(spec)
    if not p.exists():
        try:
            return builtin_zcz(spec)
        except KeyError:
            raise SchemaError(f"{spec!r} is neither a seed file nor a built-in seed set") from None
    try:
        return seed_from_json(load_json(p))
    except ZCZError as exc:
        raise SchemaError(f"{spec}: {exc}") from None


def rows_to_csv(rows: Iterable[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


__all__ = [
    "SchemaError",
    "LengthMismatchError",
    "ZCZError",
    "seq_to_json",
    "seq_from_json",
    "write_seq_csv",
    "read_seq_csv",
    "mask_to_json",
    "mask_from_json",
    "seed_to_json",
    "seed_from_json",
    "waveform_to_json",
    "waveform_from_json",
    "qset_to_json",
    "qset_from_json",
    "lattice_to_csv",
    "lattice_from_csv",
    "optresult_to_json",
    "config_from_json",
    "magphase_from_json",
    "golden_sequence",
    "load_json",
    "dump_json",
    "load_seed",
    "rows_to_csv",
]
