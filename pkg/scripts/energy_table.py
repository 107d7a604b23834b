"""Additive energy of every subgroup for primes in a range, with HBK and piecewise ratios.

    python3 scripts/energy_table.py --hi 10000 --out results/energy.csv
"""

import argparse
import csv
import sys

from charsums.bounds import hbk_energy_rhs, shkredov_energy_rhs
from charsums.congruences import additive_energy
from charsums.errors import RegimeError
from charsums.field import build_field_ctx, primes_in_range
from charsums.sums import Subgroup


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=int, default=3)
    ap.add_argument("--hi", type=int, default=10**4)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["p", "T", "energy", "E/T^2.5", "E/(T*p)", "piecewise_ratio", "regime"])
    worst = 0.0
    for p in primes_in_range(max(3, args.lo), args.hi):
        ctx = build_field_ctx(p)
        for T in ctx.divisors():
            E = additive_energy(Subgroup(ctx, T), "cosets").count
            try:
                rhs, regime = shkredov_energy_rhs(T, p)
                piece = repr(E / rhs)
                worst = max(worst, E / hbk_energy_rhs(T))
            except RegimeError:
                piece, regime = "", "T>p^(2/3)"
            w.writerow([p, T, E, repr(E / hbk_energy_rhs(T)), repr(E / (T * p)), piece, regime])
    if args.out:
        fh.close()
    print(f"max E/T^2.5 over T <= p^(2/3): {worst:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
