"""Primitive roots with few binary digits: u_p, the order of 2, three-bit search."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

from .errors import CeilingExceeded, ValidationError
from .field import FieldCtx, build_field_ctx, is_primitive_root, mult_order, primes_in_range

DEFAULT_CEILING = 10**7
UP_COLUMNS = ("p", "ell_p", "u_p", "witness", "three_bit_k", "three_bit_m", "three_bit_value", "three_bit_residue")


@dataclass(frozen=True)
class UpRecord:
    p: int
    ell_p: int | None
    u_p: int | None  # None: no primitive root within max_weight
    witness: int | None
    three_bit: tuple[int, int] | None = None  # (k, m)
    three_bit_residue: int | None = None

    def row(self) -> list[str]:
        k, m = self.three_bit if self.three_bit else ("", "")
        value = 2**m + 2**k + 1 if self.three_bit else ""
        residue = "" if self.three_bit_residue is None else self.three_bit_residue
        return [str(self.p), "" if self.ell_p is None else str(self.ell_p),
                "inf" if self.u_p is None else str(self.u_p),
                "" if self.witness is None else str(self.witness), str(k), str(m), str(value), str(residue)]


def same_popcount(w: int, limit: int) -> Iterator[int]:
    """Integers in [1, limit] with exactly w one-bits, increasing (Gosper's hack)."""
    n = (1 << w) - 1
    while n <= limit:
        yield n
        c = n & -n
        r = n + c
        n = (((r ^ n) >> 2) // c) | r


def compute_up(ctx: FieldCtx, max_weight: int = 62) -> UpRecord:
    """Fewest one-bits among primitive roots in [1, p-1]; first hit in popcount-then-value order."""
    if max_weight < 1:
        raise ValidationError("max_weight must be >= 1")
    p = ctx.p
    ell = mult_order(ctx, 2)
    for w in range(1, min(max_weight, (p - 1).bit_length()) + 1):
        for n in same_popcount(w, p - 1):
            if is_primitive_root(ctx, n):
                return UpRecord(p, ell, w, n)
    return UpRecord(p, ell, None, None)


def three_bit_search(ctx: FieldCtx) -> tuple[int, int] | None:
    """Smallest (m, k), 1 <= k < m <= ell_p, with 2^m + 2^k + 1 a primitive root mod p; returned as (k, m)."""
    p = ctx.p
    ell = mult_order(ctx, 2)
    pm = 2 % p
    for m in range(2, ell + 1):
        pm = pm * 2 % p
        pk = 1
        for k in range(1, m):
            pk = pk * 2 % p
            if is_primitive_root(ctx, (pm + pk + 1) % p):
                return k, m
    return None


def up_record(p: int, max_weight: int = 62, three_bit: bool = True) -> UpRecord:
    if p == 2:
        return UpRecord(2, None, 1, 1)
    ctx = build_field_ctx(p, "never")
    rec = compute_up(ctx, max_weight)
    if not three_bit:
        return rec
    tb = three_bit_search(ctx)
    residue = None if tb is None else (2 ** tb[1] + 2 ** tb[0] + 1) % p
    return UpRecord(rec.p, rec.ell_p, rec.u_p, rec.witness, tb, residue)


@dataclass
class ScanReport:
    Q: int
    max_weight: int
    records: list[UpRecord]
    distribution: dict[str, int] = field(default_factory=dict)
    exceptions: list[int] = field(default_factory=list)  # primes with u_p > 3
    small_ell: list[int] = field(default_factory=list)  # ell_p < p^(13/33)
    three_bit_absent: list[int] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(UP_COLUMNS)
        for r in self.records:
            w.writerow(r.row())
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "Q": self.Q,
            "max_weight": self.max_weight,
            "primes": len(self.records),
            "distribution": self.distribution,
            "exceptions_u_gt_3": self.exceptions,
            "small_ell_count": len(self.small_ell),
            "three_bit_absent": self.three_bit_absent,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2) + "\n"


def _scan_chunk(args) -> list[UpRecord]:
    primes, max_weight = args
    return [up_record(p, max_weight) for p in primes]


def scan_primes(Q: int, max_weight: int = 62, ceiling: int = DEFAULT_CEILING, threads: int = 1) -> ScanReport:
    if Q > ceiling:
        raise CeilingExceeded(f"Q={Q} above ceiling {ceiling}")
    primes = primes_in_range(2, Q)
    if threads > 1 and len(primes) > 1:
        # contiguous shards keep the merged list in prime order
        size = -(-len(primes) // threads)
        shards = [(primes[i : i + size], max_weight) for i in range(0, len(primes), size)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = [r for chunk in pool.map(_scan_chunk, shards) for r in chunk]
    else:
        records = _scan_chunk((primes, max_weight))
    rep = ScanReport(Q, max_weight, records)
    dist: Counter = Counter()
    for r in records:
        if r.p == 2:
            continue
        dist["inf" if r.u_p is None else str(r.u_p)] += 1
        if r.u_p is None or r.u_p > 3:
            rep.exceptions.append(r.p)
        if r.ell_p**33 < r.p**13:
            rep.small_ell.append(r.p)
        if r.three_bit is None:
            rep.three_bit_absent.append(r.p)
    rep.distribution = dict(sorted(dist.items()))
    return rep
