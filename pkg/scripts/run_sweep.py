"""Run a bound-ratio sweep from a YAML spec and write CSV plus a JSON summary.

    python3 scripts/run_sweep.py configs/thm3.yaml --out-dir results/
"""

import argparse
import json
import time
from pathlib import Path

import yaml

from charsums.bounds import SweepSpec, reports_to_csv, run_sweep, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", type=Path)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    ap.add_argument("--threads", type=int, default=None, help="override the config's worker count")
    args = ap.parse_args()

    raw = yaml.safe_load(args.config.read_text())
    if "p_range" in raw:
        raw["p_range"] = tuple(raw["p_range"])
    if args.threads:
        raw["threads"] = args.threads
    spec = SweepSpec(**raw)

    t0 = time.perf_counter()
    reports = run_sweep(spec)
    elapsed = time.perf_counter() - t0

    args.out_dir.mkdir(parents=True, exist_ok=True)
    stem = args.config.stem
    (args.out_dir / f"{stem}.csv").write_text(reports_to_csv(reports))
    summary = summarize(reports) if reports else {}
    summary["elapsed_s"] = round(elapsed, 2)
    (args.out_dir / f"{stem}_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    for name, s in summary.get("regimes", {}).items():
        print(f"{name:10s} n={s['n']:5d}  median={s['median']:.4g}  max={s['max']:.4g}")
    print(f"{len(reports)} reports in {elapsed:.1f}s -> {args.out_dir}/{stem}.csv")


if __name__ == "__main__":
    main()
