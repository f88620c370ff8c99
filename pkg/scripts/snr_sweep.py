"""Average sum rate and SNR boost of BD vs the proposed scheme over an SNR grid.

    python3 scripts/snr_sweep.py                       # configs/snr_sweep.json
    python3 scripts/snr_sweep.py --trials 50 --jobs 4
"""

import argparse
from pathlib import Path

from bdboost.experiment import parse_config, run_sweep

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(ROOT / "configs" / "snr_sweep.json"))
    ap.add_argument("--trials")
    ap.add_argument("--jobs")
    args = ap.parse_args()
    spec = parse_config(args.config, trials=args.trials, jobs=args.jobs)
    _, agg = run_sweep(spec)
    by = {(a["snr_db"], a["scheme"]): a for a in agg}
    print(f"{'SNR dB':>7} {'BD bits':>9} {'prop bits':>10} {'gain':>7} {'boost dB':>9}")
    for snr in spec.snr_list_db:
        bd, pr = by.get((snr, "bd")), by.get((snr, "proposed"))
        if bd is None or pr is None:
            continue
        print(f"{snr:7g} {bd['sum_rate_bits_mean']:9.3f} {pr['sum_rate_bits_mean']:10.3f} "
              f"{pr['sum_rate_bits_mean'] - bd['sum_rate_bits_mean']:7.3f} "
              f"{pr['snr_boost_db_mean']:9.3f}")
    print(f"rows: {spec.out}\naggregate: {spec.aggregate}")


if __name__ == "__main__":
    main()
