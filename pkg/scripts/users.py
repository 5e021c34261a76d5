"""BER versus number of active users with the 16-user frequency-shift seed."""

import argparse
from pathlib import Path

from crseq.scenario import CSV_COLUMNS, Scenario, run_scenario
from crseq.serialize import rows_to_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bits", type=int, default=200_000)
    ap.add_argument("--nf", type=float, default=10.0)
    ap.add_argument("--out", default="results/users.csv")
    args = ap.parse_args()

    cr = Scenario(id="cr_cdma", system="cr_cdma", mask="four_holes", seed="freq_shift",
                  nf_db=args.nf, n_bits=args.bits, rng_seed=1)
    mc = Scenario(id="mc_cdma_zc", system="mc_cdma", mask="four_holes", nf_db=args.nf, n_bits=args.bits, rng_seed=1)
    rows = []
    for k in (1, 2, 4, 8, 12, 16):
        for sc in (cr, mc):
            rows.append(run_scenario(sc.replace(users=k, id=f"{sc.id}/users={k}")))
            print(f"{rows[-1]['scenario_id']:>20}  BER {rows[-1]['ber']:.2e}")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(rows_to_csv(rows, CSV_COLUMNS))


if __name__ == "__main__":
    main()
