"""Command line: field-info, charsum, energy, counts, verify, uscan.

Exit codes: 0 success, 2 validation error, 3 compute error, 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import yaml

from . import oracles
from .bounds import (
    SweepSpec,
    hbk_energy_rhs,
    reports_to_csv,
    reports_to_json,
    run_sweep,
    shkredov_energy_rhs,
    summarize,
    thm3_rhs,
    thm_gg_rhs,
    weil_rhs,
    derive_rng,
)
from .characters import Character, RootSumHistogram
from .congruences import (
    SpacedSet,
    additive_energy,
    count_nig,
    count_poly_values_in_interval,
    count_q,
    count_symcong,
    count_w_quantity,
    u_histogram,
)
from .errors import CharSumError, OracleMismatch, RegimeError, ValidationError
from .field import build_field_ctx
from .primroots import DEFAULT_CEILING, UP_COLUMNS, scan_primes
from .sums import (
    Interval,
    Poly,
    Subgroup,
    sum_interval_subgroup,
    sum_poly_interval_subgroup,
    sum_subgroup_pair,
    sum_subgroup_shift,
)

CHARSUM_COLUMNS = ("kind", "p", "T", "H", "b", "k", "char_order", "a", "poly", "digest", "zero_terms",
                   "re", "im", "magnitude", "rhs_name", "rhs", "ratio")
COUNT_COLUMNS = ("quantity", "p", "params", "count", "main_term", "oracle", "flags", "notes")


# ----------------------------------------------------------------- output

def _table(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _json_rows(columns, rows) -> str:
    return json.dumps([dict(zip(columns, r)) for r in rows], indent=2) + "\n"


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _emit_rows(args, columns, rows) -> None:
    _emit(args, _json_rows(columns, rows) if args.format == "json" else _table(columns, rows))


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise ValidationError(f"bad range {text!r}; expected lo:hi") from None


# --------------------------------------------------------------- commands

def cmd_field_info(args) -> None:
    ctx = build_field_ctx(args.p, args.index_policy)
    info = {
        "p": ctx.p,
        "pm1_factors": [list(f) for f in ctx.pm1_factors],
        "g": ctx.g,
        "divisors": ctx.divisors(),
        "index_table": ctx.has_index,
    }
    if args.format == "json":
        _emit(args, json.dumps(info, indent=2) + "\n")
    else:
        lines = [f"{k}: {' '.join(map(str, v)) if isinstance(v, list) and k == 'divisors' else v}"
                 for k, v in info.items()]
        _emit(args, "\n".join(lines) + "\n")


def _character(ctx, args) -> Character:
    if args.k is not None:
        return Character(ctx, args.k % (ctx.p - 1))
    return Character.of_order(ctx, args.order)


def _shifts(args, p: int, label: str) -> list[int]:
    if args.a:
        return _ints(args.a)
    rng = derive_rng(args.seed, label)
    n = min(args.n_shifts, p - 1)
    return sorted(int(a) + 1 for a in rng.choice(p - 1, size=n, replace=False))


def _oracle_compare(fast: RootSumHistogram, slow: RootSumHistogram, what: str) -> None:
    diff = fast.first_difference(slow)
    if diff is not None:
        raise OracleMismatch(f"{what}: first differing {diff}")


def cmd_charsum(args) -> None:
    ctx = build_field_ctx(args.p)
    chi = _character(ctx, args)
    G = Subgroup(ctx, args.T if args.T else ctx.p - 1)
    p, T = ctx.p, G.T
    I = Interval(args.H, args.b) if args.kind in ("interval", "poly") else None
    f = Poly.parse(args.poly) if args.kind == "poly" else None
    rows = []
    for a in _shifts(args, p, f"charsum|{args.kind}|{p}|{T}"):
        if args.kind == "shift":
            h = sum_subgroup_shift(chi, a, G)
            rhs_name, rhs = "weil", weil_rhs(p)
            if args.oracle:
                d, tab = oracles.char_table(p, ctx.g, chi.k)
                slow = RootSumHistogram(*_as_hist(d, oracles.histogram(d, (tab[(a + l) % p] for l in G.elements.tolist()))))
                _oracle_compare(h, slow, "shift sum vs oracle")
        elif args.kind == "interval":
            h = sum_interval_subgroup(chi, a, I, G, args.algo)
            rhs_name, rhs = "thm3", thm3_rhs(I.H, T, p)
            if args.oracle:
                d, _ = oracles.char_table(p, ctx.g, chi.k)
                slow = oracles.interval_subgroup_sum(p, ctx.g, chi.k, a, I.H, I.b, G.elements.tolist())
                _oracle_compare(h, RootSumHistogram(*_as_hist(d, slow)), "interval sum vs oracle")
        elif args.kind == "poly":
            h = sum_poly_interval_subgroup(chi, f, I, G, args.algo)
            rhs_name, rhs = "trivial", float(I.H * T)
            if args.oracle:
                _oracle_compare(h, sum_poly_interval_subgroup(chi, f, I, G, "via_ru" if args.algo == "direct"
                                                              else "direct"), "poly sum routes")
        else:
            h = sum_subgroup_pair(chi, a, G, "via_f" if args.algo == "via_f" else "direct")
            try:
                rhs_name, rhs = "thm-gg", thm_gg_rhs(T, p).value
            except RegimeError:
                rhs_name, rhs = "T*sqrt(p)", T * weil_rhs(p)
            if args.oracle:
                d, _ = oracles.char_table(p, ctx.g, chi.k)
                slow = oracles.subgroup_pair_sum(p, ctx.g, chi.k, a, G.elements.tolist())
                _oracle_compare(h, RootSumHistogram(*_as_hist(d, slow)), "pair sum vs oracle")
        v = h.value
        rows.append([args.kind, p, T, I.H if I else "", I.b if I else "", chi.k, chi.d, a,
                     args.poly if f else "", h.digest(), h.zero_terms, repr(v.real), repr(v.imag),
                     repr(abs(v)), rhs_name, repr(rhs), repr(abs(v) / rhs)])
    _emit_rows(args, CHARSUM_COLUMNS, rows)


def _as_hist(d, pair):
    import numpy as np

    counts, zero = pair
    return d, np.array(counts, dtype=np.int64), zero


def cmd_energy(args) -> None:
    ctx = build_field_ctx(args.p)
    G = Subgroup(ctx, args.T)
    rep = additive_energy(G, args.algo)
    if args.oracle:
        if G.T <= 64:
            slow = additive_energy(G, "quadruple").count
        else:
            slow = additive_energy(G, "histogram" if args.algo != "histogram" else "cosets").count
        if slow != rep.count:
            raise OracleMismatch(f"energy {rep.count} vs oracle {slow}")
        rep.oracle = slow
    E, T, p = rep.count, G.T, ctx.p
    try:
        shk, regime = shkredov_energy_rhs(T, p)
    except RegimeError:
        shk, regime = float("nan"), "T>p^(2/3)"
    hbk = hbk_energy_rhs(T)
    cols = ("p", "T", "algo", "energy", "hbk_rhs", "hbk_ratio", "shkredov_rhs", "shkredov_ratio", "regime")
    _emit_rows(args, cols, [[p, T, args.algo, E, repr(hbk), repr(E / hbk), repr(shk), repr(E / shk), regime]])


def cmd_counts(args) -> None:
    ctx = build_field_ctx(args.p)
    p = ctx.p
    kind = args.kind
    oracle = None
    if kind in ("nig", "q"):
        G = Subgroup(ctx, args.T)
        I = Interval(args.H)
        rep = count_nig(I, G) if kind == "nig" else count_q(I, G)
        if args.oracle:
            els = G.elements.tolist()
            oracle = oracles.nig(p, I.H, els) if kind == "nig" else oracles.q_quantity(p, I.H, els)
    elif kind == "symcong":
        boxes = [tuple(int(v) for v in part.split(":")) for part in args.boxes.split(",")]
        if len(boxes) != 4:
            raise ValidationError("--boxes needs four b:h pairs")
        rep = count_symcong(p, *(Interval(h, b) for b, h in boxes))
        if args.oracle:
            oracle = oracles.symcong(p, boxes)
    elif kind == "w":
        I = Interval(args.H, args.b)
        S = _ints(args.S)
        rep = count_w_quantity(p, I, _ints(args.lset), S)
        if args.oracle:
            oracle = oracles.w_quantity(p, I.H, I.b, _ints(args.lset), S)
    elif kind == "u":
        G = Subgroup(ctx, args.T)
        I = Interval(args.H, args.b)
        f = Poly.parse(args.poly)
        rep = u_histogram(I, _ints(args.lset), G, f)
        if args.oracle:
            oracle = oracles.u_quantity(p, I.H, I.b, _ints(args.lset), G.elements.tolist(), f.coeffs)[1]
    elif kind == "poly-values":
        G = Subgroup(ctx, args.T)
        rep = count_poly_values_in_interval(Poly.parse(args.poly), G, args.b, Interval(args.H))
        if args.oracle:
            f = Poly.parse(args.poly)
            vals = f(G.elements, p).tolist()
            oracle = sum(1 for v in vals if 1 <= (v - args.b) % p <= args.H)
    else:
        raise ValidationError(f"unknown count kind {kind!r}")
    if oracle is not None:
        rep.oracle = oracle
        if oracle != rep.count:
            raise OracleMismatch(f"{rep.quantity}: {rep.count} vs oracle {oracle}")
    notes = {k: (v if isinstance(v, (int, float, bool, str)) else str(v)) for k, v in rep.notes.items()}
    row = [rep.quantity, p, json.dumps(rep.params, sort_keys=True), rep.count,
           "" if rep.main_term is None else repr(rep.main_term), "" if rep.oracle is None else rep.oracle,
           ";".join(rep.flags), json.dumps(notes, sort_keys=True)]
    _emit_rows(args, COUNT_COLUMNS, [row])


def cmd_verify(args) -> None:
    spec = SweepSpec(
        theorem=args.theorem,
        primes=_ints(args.primes) if args.primes else None,
        p_range=_range(args.p_range) if args.p_range else None,
        prime_count=args.prime_count,
        t_rules=args.t_rule or ["nearest:0.5"],
        h_rule=args.h_rule,
        char_orders=_ints(args.orders),
        n_shifts=args.n_shifts,
        seed=args.seed,
        nu=args.nu,
        poly=args.poly,
        threads=args.threads,
        oracle=args.oracle,
    )
    reports = run_sweep(spec)
    _emit(args, reports_to_json(reports) if args.format == "json" else reports_to_csv(reports))
    if args.summary and reports:
        Path(args.summary).write_text(json.dumps(summarize(reports), indent=2) + "\n", encoding="utf-8")


def cmd_uscan(args) -> None:
    rep = scan_primes(args.Q, args.max_weight, args.ceiling, args.threads)
    if args.format == "json":
        rows = [dict(zip(UP_COLUMNS, r.row())) for r in rep.records]
        _emit(args, json.dumps(rows, indent=2) + "\n")
    else:
        _emit(args, rep.to_csv())
    if args.summary:
        Path(args.summary).write_text(rep.summary_json(), encoding="utf-8")
    else:
        sys.stderr.write(rep.summary_json())


# ----------------------------------------------------------------- parser

def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--oracle", action="store_true", help="cross-check against brute force")
    common.add_argument("--config", default=None, help="YAML key-value file mirroring flags")
    return common


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = _common()
    parser = argparse.ArgumentParser(prog="charsums", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    s = sub.add_parser("field-info", parents=[common], help="factors, primitive root, divisors of p-1")
    s.add_argument("p", type=int)
    s.add_argument("--index-policy", choices=("auto", "always", "never"), default="auto")
    s.set_defaults(func=cmd_field_info)
    subs["field-info"] = s

    s = sub.add_parser("charsum", parents=[common], help="exact character sums")
    s.add_argument("--kind", choices=("shift", "interval", "poly", "pair"), required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--T", type=int, default=None, help="subgroup order (default p-1)")
    s.add_argument("--H", type=int, default=1)
    s.add_argument("--b", type=int, default=0)
    s.add_argument("--order", type=int, default=2, help="character order (canonical character)")
    s.add_argument("--k", type=int, default=None, help="character exponent, overrides --order")
    s.add_argument("--a", default=None, help="comma-separated shifts (default: seeded sample)")
    s.add_argument("--n-shifts", type=int, default=5)
    s.add_argument("--poly", default="0,1", help="coefficients low to high")
    s.add_argument("--algo", choices=("direct", "via_ru", "via_f"), default="direct")
    s.set_defaults(func=cmd_charsum)
    subs["charsum"] = s

    s = sub.add_parser("energy", parents=[common], help="additive energy of a subgroup")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--T", type=int, required=True)
    s.add_argument("--algo", choices=("histogram", "cosets", "quadruple"), default="histogram")
    s.set_defaults(func=cmd_energy)
    subs["energy"] = s

    s = sub.add_parser("counts", parents=[common], help="congruence solution counts")
    s.add_argument("--kind", choices=("nig", "q", "symcong", "w", "u", "poly-values"), required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--T", type=int, default=None)
    s.add_argument("--H", type=int, default=1)
    s.add_argument("--b", type=int, default=0)
    s.add_argument("--boxes", default=None, help="four b:h pairs, e.g. 1:5,1:5,2:5,3:5")
    s.add_argument("--lset", default="", help="comma-separated primes")
    s.add_argument("--S", default="", help="comma-separated residues")
    s.add_argument("--poly", default="0,1")
    s.set_defaults(func=cmd_counts)
    subs["counts"] = s

    s = sub.add_parser("verify", parents=[common], help="observed/bound ratio sweep")
    s.add_argument("theorem", help="weil | thm1 | thm2 | thm3 | thm-gg | hbk | shkredov | nig")
    s.add_argument("--p-range", default=None, help="lo:hi")
    s.add_argument("--primes", default=None, help="explicit comma-separated primes")
    s.add_argument("--prime-count", type=int, default=None, help="log-spaced sample size from the range")
    s.add_argument("--t-rule", action="append", default=None,
                   help="nearest:θ | window:lo:hi | largest-le:θ | explicit:T | full (repeatable)")
    s.add_argument("--h-rule", default="power:0.25", help="power:θ | explicit:H")
    s.add_argument("--orders", default="2", help="character orders")
    s.add_argument("--n-shifts", type=int, default=5)
    s.add_argument("--nu", type=int, default=2)
    s.add_argument("--poly", default="0,0,1")
    s.add_argument("--summary", default=None, help="write ratio summary JSON here")
    s.set_defaults(func=cmd_verify)
    subs["verify"] = s

    s = sub.add_parser("uscan", parents=[common], help="u_p scan over primes up to Q")
    s.add_argument("--Q", type=int, required=True)
    s.add_argument("--max-weight", type=int, default=62)
    s.add_argument("--ceiling", type=int, default=DEFAULT_CEILING)
    s.add_argument("--summary", default=None, help="summary JSON path (default stderr)")
    s.set_defaults(func=cmd_uscan)
    subs["uscan"] = s
    return parser, subs


def _load_config(path: str) -> dict:
    try:
        config = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    if not isinstance(config, dict):
        raise ValidationError("config must be a single key-value mapping")
    return {str(k).replace("-", "_"): v for k, v in config.items()}


def parse_args(argv=None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config and known.command in subs:
        config = _load_config(known.config)
        sub = subs[known.command]
        # config values become defaults, so explicit flags still win
        for action in sub._actions:
            if action.dest in config:
                action.required = False
        sub.set_defaults(**config)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        args.func(args)
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return 4
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CharSumError as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
