"""Scan u_p for all primes up to Q; CSV of records plus a JSON summary.

    python3 scripts/run_uscan.py --Q 100000 --threads 8 --out-dir results/
"""

import argparse
import time
from pathlib import Path

from charsums.primroots import scan_primes


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--Q", type=int, default=10**5)
    ap.add_argument("--max-weight", type=int, default=62)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args()

    t0 = time.perf_counter()
    rep = scan_primes(args.Q, args.max_weight, threads=args.threads)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / f"uscan_{args.Q}.csv").write_text(rep.to_csv())
    (args.out_dir / f"uscan_{args.Q}_summary.json").write_text(rep.summary_json())
    print(rep.summary_json(), end="")
    print(f"{len(rep.records)} primes in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
