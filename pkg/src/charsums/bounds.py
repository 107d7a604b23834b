"""Bound right-hand sides and observed/bound ratio sweeps.

All RHS values drop p^o(1) factors and set implied constants to 1; the
reports carry raw ratios. Regime boundaries T <= p^(r/s) are decided by the
exact integer comparison T^s <= p^r, never by floats.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .characters import Character
from .congruences import additive_energy, count_nig, f_histogram
from .errors import OracleMismatch, RegimeError, ValidationError
from .field import build_field_ctx, divisors, factorize, is_prime, primes_in_range
from .sums import Interval, Poly, Subgroup, sum_interval_subgroup, sum_poly_interval_subgroup, \
    sum_subgroup_pair, sum_subgroup_shift

CSV_COLUMNS = ("theorem", "p", "T", "H", "char_order", "a", "observed", "rhs", "ratio", "regime")


@dataclass(frozen=True)
class BoundReport:
    theorem: str
    p: int
    T: int
    H: int
    char_order: int
    a: int
    observed: float
    rhs: float
    ratio: float
    regime: str

    def sort_key(self):
        return (self.theorem, self.p, self.T, self.H, self.char_order, self.a)

    def row(self) -> list[str]:
        return [self.theorem, str(self.p), str(self.T), str(self.H), str(self.char_order), str(self.a),
                repr(float(self.observed)), repr(float(self.rhs)), repr(float(self.ratio)), self.regime]


def _le_power(x: int, p: int, num: int, den: int) -> bool:
    """x <= p^(num/den), exactly."""
    return x**den <= p**num


# ------------------------------------------------------------- evaluators

def weil_rhs(p: int) -> float:
    return math.sqrt(p)


def hbk_energy_rhs(T: int) -> float:
    return float(T) ** 2.5


@dataclass(frozen=True)
class PiecewiseBound:
    value: float
    regime: str
    branches: tuple[float, float, float]
    trivial: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.value, self.regime))


def _branch(T: int, p: int) -> int:
    if not _le_power(T, p, 2, 3):
        raise RegimeError(f"T={T} exceeds p^(2/3) for p={p}")
    if _le_power(T, p, 1, 2):
        return 1
    if _le_power(T, p, 29, 48):
        return 2
    return 3


def shkredov_energy_rhs(T: int, p: int) -> PiecewiseBound:
    """Piecewise energy bound, valid for T <= p^(2/3)."""
    b = _branch(T, p)
    T_, p_ = float(T), float(p)
    branches = (T_ ** (32 / 13), T_ ** (31 / 13) * p_ ** (1 / 26), T_**3 * p_ ** (-1 / 3))
    return PiecewiseBound(branches[b - 1], f"branch{b}", branches, {"T^3": T_**3})


def thm_gg_rhs(T: int, p: int) -> PiecewiseBound:
    """Piecewise bound for sums over pairs from a subgroup, valid for T <= p^(2/3)."""
    b = _branch(T, p)
    T_, p_ = float(T), float(p)
    branches = (T_ ** (19 / 26) * p_**0.5, T_ ** (9 / 13) * p_ ** (27 / 52), T_ * p_ ** (1 / 3))
    regime = f"branch{b}"
    if T**33 < p**13:
        regime += ",below-nontrivial"
    return PiecewiseBound(branches[b - 1], regime, branches,
                          {"T*sqrt(p)": T_ * math.sqrt(p_), "T^2": T_**2})


@dataclass(frozen=True)
class NigBound:
    term1: float
    term2: float
    t: float

    @property
    def total(self) -> float:
        return self.term1 + self.term2


def nig_rhs(H: int, T: int, p: int, nu: int) -> NigBound:
    """H t^((2nu+1)/(2nu(nu+1))) p^(-1/(2(nu+1))) + H^2 t^(1/nu) p^(-1/nu), t = max(T, sqrt(p))."""
    if nu < 1:
        raise ValidationError("nu must be >= 1")
    t = max(float(T), math.sqrt(p))
    term1 = H * t ** ((2 * nu + 1) / (2 * nu * (nu + 1))) * p ** (-1 / (2 * (nu + 1)))
    term2 = H**2 * t ** (1 / nu) * p ** (-1 / nu)
    return NigBound(term1, term2, t)


def thm3_rhs(H: int, T: int, p: int) -> float:
    return H * T * p ** (-5 / 48)


# ------------------------------------------------------------------ sweeps

THEOREMS = ("weil", "thm1", "thm2", "thm3", "thm-gg", "hbk", "shkredov", "nig")


@dataclass
class SweepSpec:
    theorem: str
    primes: list[int] | None = None
    p_range: tuple[int, int] | None = None
    prime_count: int | None = None
    t_rules: list[str] = field(default_factory=lambda: ["nearest:0.5"])
    h_rule: str = "power:0.25"
    char_orders: list[int] = field(default_factory=lambda: [2])
    n_shifts: int = 5
    seed: int = 0
    nu: int = 2
    poly: str = "0,0,1"
    threads: int = 1
    oracle: bool = False

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ValidationError(f"unknown theorem tag {self.theorem!r}; choose from {THEOREMS}")
        for rule in self.t_rules:
            _parse_t_rule(rule)
        _parse_h_rule(self.h_rule)


def derive_rng(seed: int, label: str) -> np.random.Generator:
    """Independent stream per task label, stable across runs and worker layouts."""
    digest = hashlib.blake2b(f"{seed}|{label}".encode(), digest_size=8).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))


def _parse_t_rule(rule: str) -> tuple[str, list[float]]:
    name, _, rest = rule.partition(":")
    args = [float(x) for x in rest.split(":")] if rest else []
    arity = {"nearest": 1, "window": 2, "largest-le": 1, "explicit": 1, "full": 0}
    if name not in arity or len(args) != arity[name]:
        raise ValidationError(f"bad T rule {rule!r}")
    return name, args


def _parse_h_rule(rule: str) -> tuple[str, float]:
    name, _, rest = rule.partition(":")
    if name not in ("power", "explicit") or not rest:
        raise ValidationError(f"bad H rule {rule!r}")
    return name, float(rest)


def choose_T(rule: str, p: int, divs: Sequence[int]) -> int | None:
    name, args = _parse_t_rule(rule)
    logp = math.log(p)
    if name == "full":
        return p - 1
    if name == "explicit":
        T = int(args[0])
        return T if (p - 1) % T == 0 else None
    if name == "largest-le":
        ok = [d for d in divs if math.log(d) <= args[0] * logp]
        return max(ok) if ok else None
    if name == "nearest":
        target, pool = args[0] * logp, list(divs)
    else:
        lo, hi = args
        target = (lo + hi) / 2 * logp
        pool = [d for d in divs if lo * logp <= math.log(d) <= hi * logp]
    if not pool:
        return None
    return min(pool, key=lambda d: (abs(math.log(d) - target), d))


def choose_H(rule: str, p: int) -> int:
    name, val = _parse_h_rule(rule)
    H = int(val) if name == "explicit" else max(1, int(math.floor(p**val)))
    return min(H, p - 1)


def select_primes(spec: SweepSpec) -> list[int]:
    if spec.primes:
        return sorted(set(int(p) for p in spec.primes if p > 2 and is_prime(int(p))))
    if spec.p_range is None:
        return []
    lo, hi = spec.p_range
    lo = max(lo, 3)
    if hi < lo:
        return []
    if spec.prime_count is None:
        return primes_in_range(lo, hi)
    # log-spaced targets; from each, the first prime that every T rule accepts
    n = spec.prime_count
    edges = [lo * (hi / lo) ** (i / n) for i in range(n + 1)]
    chosen = []
    for i in range(n):
        q, stop = int(math.ceil(edges[i])), min(int(edges[i + 1]), hi)
        while q <= stop:
            if is_prime(q):
                divs = divisors(factorize(q - 1))
                if all(choose_T(r, q, divs) is not None for r in spec.t_rules):
                    chosen.append(q)
                    break
            q += 1
    return chosen


def _shifts(spec: SweepSpec, p: int, T: int, H: int) -> list[int]:
    rng = derive_rng(spec.seed, f"{spec.theorem}|{p}|{T}|{H}")
    n = min(spec.n_shifts, p - 1)
    return sorted(int(a) + 1 for a in rng.choice(p - 1, size=n, replace=False))


def _check(a_hist, b_hist, what: str):
    diff = a_hist.first_difference(b_hist)
    if diff is not None:
        raise OracleMismatch(f"{what}: {diff}")


def _regime_label(p: int, T: int, H: int) -> str:
    logp = math.log(p)
    return f"T=p^{math.log(T) / logp:.3f},H=p^{math.log(max(H, 1)) / logp:.3f}"


def _prime_task(spec: SweepSpec, p: int) -> list[BoundReport]:
    ctx = build_field_ctx(p)
    divs = ctx.divisors()
    Ts = sorted({T for T in (choose_T(r, p, divs) for r in spec.t_rules) if T is not None})
    H = choose_H(spec.h_rule, p)
    chars = [Character.of_order(ctx, d) for d in spec.char_orders if d > 1 and (p - 1) % d == 0]
    out: list[BoundReport] = []
    th = spec.theorem
    for T in Ts:
        G = Subgroup(ctx, T)
        if th in ("hbk", "shkredov"):
            E = additive_energy(G, "cosets").count
            if spec.oracle and T <= 4096:
                if additive_energy(G, "histogram").count != E:
                    raise OracleMismatch(f"energy mismatch at p={p}, T={T}")
            if th == "hbk":
                rhs, regime = hbk_energy_rhs(T), "T<=p^(2/3)" if _le_power(T, p, 2, 3) else "T>p^(2/3)"
            else:
                try:
                    rhs, regime = shkredov_energy_rhs(T, p)
                except RegimeError:
                    continue
            out.append(BoundReport(th, p, T, 0, 0, 0, float(E), rhs, E / rhs, regime))
            continue
        if th == "nig":
            I = Interval(H)
            n = count_nig(I, G).count
            rhs = nig_rhs(H, T, p, spec.nu).total
            out.append(BoundReport(th, p, T, H, 0, 0, float(n), rhs, n / rhs, f"nu={spec.nu}"))
            continue
        if th == "thm-gg" and not _le_power(T, p, 2, 3):
            continue
        shifts = _shifts(spec, p, T, H)
        ftab = f_histogram(G, "cosets") if th == "thm-gg" else None
        for chi in chars:
            for a in shifts:
                out.append(_char_report(spec, chi, G, H, a, ftab))
    return out


def _char_report(spec: SweepSpec, chi: Character, G: Subgroup, H: int, a: int, ftab) -> BoundReport:
    th, p, T = spec.theorem, G.p, G.T
    if th == "weil":
        h = sum_subgroup_shift(chi, a, G)
        rhs, regime, H = weil_rhs(p), "full-group" if T == p - 1 else "subgroup", 0
    elif th == "thm-gg":
        h = sum_subgroup_pair(chi, a, G, "via_f", f_table=ftab)
        if spec.oracle:
            _check(h, sum_subgroup_pair(chi, a, G, "direct"), f"T_chi p={p} T={T} a={a}")
        rhs, regime = thm_gg_rhs(T, p)
        H = 0
    elif th == "thm2":
        f = Poly.parse(spec.poly)
        h = sum_poly_interval_subgroup(chi, f, Interval(H), G)
        if spec.oracle:
            _check(h, sum_poly_interval_subgroup(chi, f, Interval(H), G, "via_ru"), f"poly sum p={p}")
        rhs, regime = float(H * T), _regime_label(p, T, H)
    else:
        h = sum_interval_subgroup(chi, a, Interval(H), G)
        if spec.oracle:
            _check(h, sum_interval_subgroup(chi, a, Interval(H), G, "via_ru"), f"S_chi p={p} T={T} a={a}")
        rhs = thm3_rhs(H, T, p) if th == "thm3" else float(H * T)
        regime = _regime_label(p, T, H)
    obs = h.magnitude
    return BoundReport(th, p, T, H, chi.d, a, obs, rhs, obs / rhs, regime)


def _run_chunk(args) -> list[BoundReport]:
    spec, primes = args
    return [r for p in primes for r in _prime_task(spec, p)]


def run_sweep(spec: SweepSpec) -> list[BoundReport]:
    """Deterministic list of reports sorted by (p, T, H, char order, a)."""
    primes = select_primes(spec)
    if spec.threads > 1 and len(primes) > 1:
        shards = [(spec, primes[i :: spec.threads]) for i in range(spec.threads)]
        with ProcessPoolExecutor(max_workers=spec.threads) as pool:
            reports = [r for chunk in pool.map(_run_chunk, shards) for r in chunk]
    else:
        reports = _run_chunk((spec, primes))
    return sorted(reports, key=BoundReport.sort_key)


def reports_to_csv(reports: Iterable[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def reports_to_json(reports: Iterable[BoundReport]) -> str:
    return json.dumps([asdict(r) for r in reports], indent=2) + "\n"


def summarize(reports: Sequence[BoundReport]) -> dict:
    """Per-regime count / median / max of ratios, plus the per-prime max over shifts."""
    by_regime: dict[str, list[float]] = {}
    per_prime: dict[tuple[int, int], float] = {}
    for r in reports:
        key = r.regime.split(",")[0] if r.theorem in ("thm-gg", "shkredov") else r.theorem
        by_regime.setdefault(key, []).append(r.ratio)
        per_prime[(r.p, r.T)] = max(per_prime.get((r.p, r.T), 0.0), r.ratio)
    return {
        "regimes": {k: {"n": len(v), "median": statistics.median(v), "max": max(v)}
                    for k, v in sorted(by_regime.items())},
        "per_prime_max": [{"p": p, "T": T, "max_ratio": v} for (p, T), v in sorted(per_prime.items())],
    }
