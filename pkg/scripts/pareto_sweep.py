"""PAPR versus aperiodic-sidelobe tradeoff over a penalty-factor grid."""

import argparse
from pathlib import Path

from crseq import OptimizerConfig, pareto_sweep
from crseq.scenario import resolve_mask
from crseq.serialize import rows_to_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mask", default="ieee80211a")
    ap.add_argument("--step", type=float, default=0.01, help="lambda grid spacing")
    ap.add_argument("--restarts", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/pareto.csv")
    args = ap.parse_args()

    n = round(1 / args.step)
    lams = [i / n for i in range(n + 1)]
    cfg = OptimizerConfig(n_restarts=args.restarts, rng_seed=args.seed)
    rows = [r.summary() for r in pareto_sweep(resolve_mask(args.mask), lams, cfg)]
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(rows_to_csv(rows, ["lambda", "papr_db", "max_aacf", "iterations", "converged"]))
    best_papr = min(rows, key=lambda r: r["papr_db"])
    best_aacf = min(rows, key=lambda r: r["max_aacf"])
    print(f"{len(rows)} points -> {args.out}")
    print(f"lowest PAPR {best_papr['papr_db']:.2f} dB at lambda {best_papr['lambda']}")
    print(f"lowest AACF {best_aacf['max_aacf']:.4f} at lambda {best_aacf['lambda']}")


if __name__ == "__main__":
    main()
