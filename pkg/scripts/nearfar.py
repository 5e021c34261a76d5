"""BER versus near-far factor for CR-CDMA and both MC-CDMA code families, plus the single-user reference."""

import argparse
from pathlib import Path

from crseq.scenario import CSV_COLUMNS, Scenario, run_scenario
from crseq.serialize import rows_to_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bits", type=int, default=200_000)
    ap.add_argument("--ebn0", type=float, default=10.0)
    ap.add_argument("--out", default="results/nearfar.csv")
    args = ap.parse_args()

    common = dict(mask="two_holes", ebn0_db=args.ebn0, n_bits=args.bits, rng_seed=1)
    systems = {
        "cr_cdma": Scenario(id="cr_cdma", system="cr_cdma", users=4, **common),
        "mc_cdma_zc": Scenario(id="mc_cdma_zc", system="mc_cdma", codes="zadoff_chu", users=4, **common),
        "mc_cdma_random": Scenario(id="mc_cdma_random", system="mc_cdma", codes="random", users=4, **common),
    }
    rows = [run_scenario(Scenario(id="single_user", users=1, **common))]
    for nf in range(0, 21, 2):
        for sc in systems.values():
            rows.append(run_scenario(sc.replace(nf_db=float(nf), id=f"{sc.id}/nf={nf}")))
            print(f"{rows[-1]['scenario_id']:>22}  BER {rows[-1]['ber']:.2e}")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(rows_to_csv(rows, CSV_COLUMNS))
    print(f"single user BER {rows[0]['ber']:.2e}; {len(rows)} rows -> {args.out}")


if __name__ == "__main__":
    main()
