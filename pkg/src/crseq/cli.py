"""Command-line front end: ``crseq {design,optimize,analyze,simulate,sweep}``.

Exit codes: 0 success, 1 verification failure or invariant violation,
2 malformed input, 3 mask/waveform length mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .construct import SynthesisError, synthesize, verify_theorem1
from .optimize import OptimizerConfig, optimize_waveform, pareto_sweep, solve_beta
from .scenario import CSV_COLUMNS, InvariantError, Scenario, parse_axis, resolve_mask, run_scenario, sweep_points
from .seeds import BUILTIN_SETS, ZCZError, builtin_zcz, verify_zcz, zc_waveforms
from .seqcore import SpectrumMask, accf_all, hole_leakage, max_sidelobe, papr, pccf_all, spectral_null
from .serialize import (
    SchemaError,
    dump_json,
    golden_sequence,
    load_json,
    load_seed,
    magphase_from_json,
    optresult_to_json,
    qset_from_json,
    qset_to_json,
    rows_to_csv,
    seed_from_json,
    seq_from_json,
    waveform_from_json,
)

OPT_COLUMNS = ["lambda", "papr_db", "max_aacf", "iterations", "converged"]


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise SchemaError(f"expected comma-separated integers, got {text!r}") from None


def _grid(text: str) -> list[float]:
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 10) for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise SchemaError(f"bad lambda grid {text!r}; use start:stop:step or v1,v2,...") from None


# --------------------------------------------------------------------------
# design


def cmd_design(args) -> int:
    mask = resolve_mask(args.mask)
    seed = load_seed(args.seed)
    if args.waveform:
        doc = load_json(args.waveform)
        wfs = [waveform_from_json(d, mask) for d in (doc if isinstance(doc, list) else [doc])]
        waveforms = wfs[0] if len(wfs) == 1 else wfs
    else:
        roots = _ints(args.zc_roots) if args.zc_roots else [3, 5, 7, 9][: seed.K]
        waveforms = zc_waveforms(mask, roots)
    try:
        q = synthesize(seed, waveforms)
    except SynthesisError as exc:
        raise SchemaError(str(exc)) from None
    report = verify_theorem1(q)
    if args.out:
        _write(dump_json(qset_to_json(q)), args.out)
    summary = {"K": q.K, "length": q.length, "zccz_width": q.zccz_width, "seed": q.seed.name, **report.as_dict()}
    sys.stdout.write(dump_json(summary))
    if not report.passed:
        print("verification failed", file=sys.stderr)
        return 1
    return 0


# --------------------------------------------------------------------------
# optimize


def cmd_optimize(args) -> int:
    mask = resolve_mask(args.mask)
    cfg = OptimizerConfig(
        lam=0.5,
        epsilon=args.epsilon,
        max_iter=args.max_iter,
        rng_seed=args.seed,
        beta_method=args.beta_method,
        beta_iters=args.beta_iters,
        n_restarts=args.restarts,
    )
    if args.lambda_grid:
        lams = _grid(args.lambda_grid)
        results = pareto_sweep(mask, lams, cfg)
    else:
        lam = 0.5 if args.lam is None else args.lam
        results = [optimize_waveform(mask, cfg.replace(lam=lam), solve_beta(mask, cfg.beta_method, cfg.beta_iters, cfg.beta_step))]
    text = rows_to_csv([r.summary() for r in results], OPT_COLUMNS)
    if args.out and args.out.endswith(".json"):
        if len(results) != 1:
            raise SchemaError("a JSON result file holds one waveform; use a .csv output for a lambda grid")
        _write(dump_json(optresult_to_json(results[0])), args.out)
        sys.stdout.write(text)
    else:
        _write(text, args.out)
    return 0


# --------------------------------------------------------------------------
# analyze


def _load_for_analysis(src: str):
    """Return (sequences, mask or None, zone or None, label, qset or None)."""
    if src in BUILTIN_SETS:
        seed = builtin_zcz(src)
        return seed.sequences, None, seed.Z, src, None
    if src.startswith("golden:"):
        try:
            return golden_sequence(float(src.split(":", 1)[1]))[None, :], None, None, src, None
        except KeyError as exc:
            raise SchemaError(str(exc.args[0])) from None
    doc = load_json(src)
    if isinstance(doc, dict):
        kind = doc.get("type")
        if kind == "quasi_zcz_set":
            q = qset_from_json(doc)
            return q.sequences, None, None, src, q
        if kind in ("waveform", "opt_result"):
            wf = waveform_from_json(doc)
            return wf.b[None, :], wf.mask, None, src, None
        if "magnitude" in doc and "phase" in doc:
            return magphase_from_json(doc)[None, :], None, None, src, None
        if {"K", "L", "Z", "sequences"} <= set(doc):
            try:
                seed = seed_from_json(doc)
            except ZCZError:
                # analyse it anyway; the zone report will show the failure
                seqs = np.stack([seq_from_json(s) if isinstance(s, dict) else np.asarray(s, float) for s in doc["sequences"]])
                return seqs, None, int(doc["Z"]), src, None
            return seed.sequences, None, seed.Z, src, None
        if {"n", "re", "im"} <= set(doc):
            return seq_from_json(doc)[None, :], None, None, src, None
        if isinstance(doc.get("sequences"), list):
            return np.stack([seq_from_json(s) for s in doc["sequences"]]), None, None, src, None
    raise SchemaError(f"{src}: not a recognised sequence, set, waveform or magnitude/phase file")


def cmd_analyze(args) -> int:
    seqs, mask, zone, label, q = _load_for_analysis(args.input)
    if args.mask:
        mask = resolve_mask(args.mask, seqs.shape[1] if args.null else None)
    if args.null:
        if mask is None:
            raise SchemaError("--null needs --mask")
        seqs = np.stack([spectral_null(s, mask) for s in seqs])
    if args.zone is not None:
        zone = args.zone
    per_seq = []
    for i, s in enumerate(seqs):
        row = {
            "index": i,
            "length": int(s.size),
            "papr_db": papr(s),
            "max_aacf": max_sidelobe(s, "aperiodic"),
            "max_pacf": max_sidelobe(s, "periodic"),
        }
        if mask is not None and mask.n == s.size:
            row["hole_leakage"] = hole_leakage(s, mask)
        per_seq.append(row)
    report: dict = {"source": label, "sequences": per_seq}
    status = 0
    if q is not None:
        t1 = verify_theorem1(q)
        report["theorem"] = {"K": q.K, "length": q.length, **t1.as_dict()}
        status = 0 if t1.passed else 1
    elif zone is not None:
        report["zcz"] = verify_zcz(seqs, zone).as_dict()
    _write(dump_json(report), args.out)
    if args.profiles:
        _write(_profiles_csv(seqs), args.profiles)
    return status


def _profiles_csv(seqs: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sequence", "shift", "magnitude", "pacf", "aacf", "pccf_with_first"])
    for i, s in enumerate(seqs):
        e = float(np.vdot(s, s).real)
        pac = np.abs(pccf_all(s, s)) / e
        aac = np.abs(accf_all(s, s)[s.size - 1 :]) / e
        e0 = float(np.vdot(seqs[0], seqs[0]).real)
        pcc = np.abs(pccf_all(seqs[0], s)) / np.sqrt(e * e0)
        for t in range(s.size):
            w.writerow([i, t, repr(float(abs(s[t]))), repr(float(pac[t])), repr(float(aac[t])), repr(float(pcc[t]))])
    return buf.getvalue()


# --------------------------------------------------------------------------
# simulate / sweep


def _manifest(args, command: str, base: Scenario, axes: list, n_rows: int) -> None:
    if not args.out:
        return
    doc = {
        "command": command,
        "scenario": asdict(base),
        "axes": [{"field": f, "values": v} for f, v in axes],
        "columns": CSV_COLUMNS,
        "rows": n_rows,
    }
    Path(args.out).with_suffix(".manifest.json").write_text(dump_json(doc))


def cmd_simulate(args) -> int:
    sc = Scenario.from_dict(load_json(args.scenario))
    row = run_scenario(sc, check=not args.no_check)
    _write(rows_to_csv([row], CSV_COLUMNS), args.out)
    _manifest(args, "simulate", sc, [], 1)
    return 0


def cmd_sweep(args) -> int:
    base = Scenario.from_dict(load_json(args.scenario))
    axes = [parse_axis(a) for a in args.axis]
    points = sweep_points(base, axes)
    rows = [run_scenario(p, check=not args.no_check) for p in points]
    _write(rows_to_csv(rows, CSV_COLUMNS), args.out)
    _manifest(args, "sweep", base, axes, len(rows))
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crseq", description="Quasi-ZCZ cognitive-radio sequence toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="synthesize a quasi-ZCZ set and verify its zone")
    d.add_argument("--mask", required=True, help="mask file or preset name")
    d.add_argument("--seed", default="example2", help="built-in seed name or seed-set JSON")
    g = d.add_mutually_exclusive_group()
    g.add_argument("--zc-roots", help="comma-separated Zadoff-Chu roots, one per user")
    g.add_argument("--waveform", help="waveform or optimizer-result JSON (one shared, or a list)")
    d.add_argument("--out", help="write the set JSON here")
    d.set_defaults(func=cmd_design)

    o = sub.add_parser("optimize", help="joint PAPR / aperiodic-sidelobe waveform optimisation")
    o.add_argument("--mask", required=True)
    lg = o.add_mutually_exclusive_group()
    lg.add_argument("--lambda", dest="lam", type=float, help="penalty factor in [0, 1]")
    lg.add_argument("--lambda-grid", help="start:stop:step or comma list")
    o.add_argument("--restarts", type=int, default=1)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--max-iter", type=int, default=10_000)
    o.add_argument("--epsilon", type=float, default=1e-5)
    o.add_argument("--beta-method", choices=["minimax", "flat"], default="minimax")
    o.add_argument("--beta-iters", type=int, default=5000)
    o.add_argument("--out", help=".json for one result, otherwise CSV")
    o.set_defaults(func=cmd_optimize)

    a = sub.add_parser("analyze", help="PAPR, sidelobe, leakage and zone report")
    a.add_argument("input", help="sequence/set/waveform JSON, a built-in seed name, or golden:0.15 / golden:0.95")
    a.add_argument("--mask", help="mask for leakage (and nulling)")
    a.add_argument("--null", action="store_true", help="apply spectral nulling with --mask first")
    a.add_argument("--zone", type=int, help="zone width to verify")
    a.add_argument("--out", help="report JSON (default stdout)")
    a.add_argument("--profiles", help="per-shift correlation profiles CSV")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="one Monte-Carlo operating point")
    s.add_argument("scenario")
    s.add_argument("--out")
    s.add_argument("--no-check", action="store_true", help="skip the MUI-free invariant check")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="Monte-Carlo sweep over one or more axes")
    w.add_argument("scenario")
    w.add_argument("--axis", action="append", required=True, help="nf=0:20:2, users=1,4,8,16, eta=..., ebn0=...")
    w.add_argument("--out")
    w.add_argument("--no-check", action="store_true")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (InvariantError, ZCZError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
