"""How often best-of-20 optimisation meets the quality targets across master seeds."""

import argparse

from crseq import OptimizerConfig, optimize_waveform, solve_beta
from crseq.scenario import resolve_mask

TARGETS = {0.15: lambda r: r.papr_db <= 1.5 and r.max_aacf <= 0.16, 0.95: lambda r: r.max_aacf <= 0.13}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=8)
    ap.add_argument("--restarts", type=int, default=20)
    args = ap.parse_args()

    mask = resolve_mask("example2")
    beta = solve_beta(mask)
    for lam, ok in TARGETS.items():
        passed = 0
        for s in range(args.seeds):
            r = optimize_waveform(mask, OptimizerConfig(lam=lam, n_restarts=args.restarts, rng_seed=s), beta)
            passed += ok(r)
            print(f"lambda {lam} seed {s}: PAPR {r.papr_db:.2f} dB, AACF {r.max_aacf:.4f}, target met: {ok(r)}")
        print(f"lambda {lam}: {passed}/{args.seeds} seeds meet the target")


if __name__ == "__main__":
    main()
