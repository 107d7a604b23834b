"""Exact character and exponential sums over subgroups and intervals.

Every character sum is returned as a `RootSumHistogram`. Where two routes to
the same sum exist (``direct`` double loop vs. a count-table route) they are
compared bin by bin, never through floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .characters import ZERO, Character, RootSumHistogram
from .errors import (
    AllCoefficientsZero,
    ConstantPolynomial,
    OracleMismatch,
    ValidationError,
    ZeroArgument,
    ZeroCoefficient,
)
from .field import FieldCtx, as_residues, geometric_powers, powmod_array, subgroup_log

DENSE_LIMIT = 1 << 24
CHUNK = 1 << 22


# ------------------------------------------------------------------ types

@dataclass(frozen=True, eq=False)
class Subgroup:
    ctx: FieldCtx
    T: int

    def __post_init__(self):
        if self.T < 1 or (self.ctx.p - 1) % self.T:
            raise ValidationError(f"T={self.T} does not divide p-1={self.ctx.p - 1}")

    @classmethod
    def full(cls, ctx: FieldCtx) -> "Subgroup":
        return cls(ctx, ctx.p - 1)

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def h(self) -> int:
        return pow(self.ctx.g, (self.ctx.p - 1) // self.T, self.ctx.p)

    @property
    def cofactor(self) -> int:
        return (self.ctx.p - 1) // self.T

    @cached_property
    def elements(self) -> np.ndarray:
        """h^0, h^1, ..., h^(T-1)."""
        return geometric_powers(self.h, self.T, self.ctx.p)

    def contains(self, xs) -> np.ndarray:
        xs = self.ctx.residues(xs)
        return (xs != 0) & (powmod_array(xs, self.T, self.ctx.p) == 1)

    def __repr__(self):
        return f"Subgroup(p={self.ctx.p}, T={self.T})"


@dataclass(frozen=True)
class Interval:
    """{b+1, ..., b+H}, reduced mod p when used."""

    H: int
    b: int = 0

    def __post_init__(self):
        if self.H < 1:
            raise ValidationError(f"interval length H={self.H} must be >= 1")
        if self.b < 0:
            raise ValidationError(f"interval shift b={self.b} must be >= 0")

    def check(self, p: int) -> None:
        if self.H >= p:
            raise ValidationError(f"interval length H={self.H} must be < p={p}")

    def residues(self, p: int) -> np.ndarray:
        self.check(p)
        return as_residues(np.arange(self.b + 1, self.b + self.H + 1, dtype=np.int64), p)


@dataclass(frozen=True)
class Poly:
    """Coefficients low to high: coeffs[i] is the coefficient of X^i."""

    coeffs: tuple[int, ...]

    @classmethod
    def linear(cls, a: int) -> "Poly":
        return cls((0, a))

    @classmethod
    def parse(cls, text: str) -> "Poly":
        return cls(tuple(int(c) for c in text.split(",")))

    def degree(self, p: int) -> int:
        nz = [i for i, c in enumerate(self.coeffs) if c % p]
        return nz[-1] if nz else -1

    def check(self, p: int) -> None:
        if self.degree(p) < 1:
            raise ConstantPolynomial(f"{self} is constant mod {p}")

    def __call__(self, xs, p: int) -> np.ndarray:
        xs = as_residues(xs, p)
        acc = np.zeros_like(xs)
        for c in reversed(self.coeffs):
            acc = (acc * xs + c % p) % p
        return acc


# ---------------------------------------------------------------- helpers

def _row_blocks(n_rows: int, row_len: int) -> Iterator[slice]:
    step = max(1, CHUNK // max(row_len, 1))
    for i in range(0, n_rows, step):
        yield slice(i, min(i + step, n_rows))


def _accumulate(chi: Character, chunks) -> RootSumHistogram:
    counts = np.zeros(chi.d, dtype=np.int64)
    zero = 0
    for args in chunks:
        h = RootSumHistogram.from_indices(chi.indices(args), chi.d)
        counts += h.counts
        zero += h.zero_terms
    return RootSumHistogram(chi.d, counts, zero)


def _outer_sums(xs: np.ndarray, ys: np.ndarray, p: int, shift: int = 0):
    """Chunks of (shift + x + y) mod p over all pairs."""
    for blk in _row_blocks(len(xs), len(ys)):
        yield ((xs[blk, None] + ys[None, :]) % p + shift) % p


def _from_count_table(chi: Character, keys: np.ndarray, weights: np.ndarray) -> RootSumHistogram:
    p = chi.ctx.p
    if p <= DENSE_LIMIT and len(keys) * 16 > p:
        idx = chi.table[keys.astype(np.int64)]
    else:
        idx = chi.indices(keys)
    return RootSumHistogram.from_weighted(idx, weights, chi.d)


def _window_counts(values: np.ndarray, I: Interval, p: int) -> tuple[np.ndarray, np.ndarray]:
    """r(u) = #{(x, v) : x in I, v in values (a multiset), x + v = u}.

    Dense route: cyclic sliding-window sums over the multiplicity array of
    ``values``. Sparse route (p > DENSE_LIMIT): enumerate and count.
    """
    if p <= DENSE_LIMIT:
        mult = np.bincount(values.astype(np.int64), minlength=p)
        prefix = np.concatenate([[0], np.cumsum(np.concatenate([mult, mult]))])
        u = np.arange(p, dtype=np.int64)
        start = (u - I.b - I.H) % p
        r = prefix[start + I.H] - prefix[start]
        keys = np.flatnonzero(r)
        return keys, r[keys]
    chunks = list(_outer_sums(I.residues(p), values, p))
    keys, counts = np.unique(np.concatenate(chunks), return_counts=True)
    return keys, counts


def _check_a(a: int, p: int) -> int:
    a = int(a)
    if a % p == 0:
        raise ZeroArgument(f"shift a={a} vanishes mod {p}")
    if not 1 <= a <= p - 1:
        raise ValidationError(f"shift a={a} outside [1, p-1]")
    return a


# ---------------------------------------------------------- character sums

def sum_subgroup_shift(chi: Character, a: int, G: Subgroup) -> RootSumHistogram:
    """sum_{lambda in G} chi(a + lambda)."""
    chi.require_nonprincipal()
    a = _check_a(a, G.p)
    return _accumulate(chi, [(G.elements + a) % G.p])


def sum_interval_subgroup(chi: Character, a: int, I: Interval, G: Subgroup,
                          algo: str = "direct") -> RootSumHistogram:
    """sum_{x in I} sum_{lambda in G} chi(x + a lambda)."""
    chi.require_nonprincipal()
    p = G.p
    a = _check_a(a, p)
    xs = I.residues(p)
    scaled = G.elements * a % p
    if algo == "direct":
        return _accumulate(chi, _outer_sums(xs, scaled, p))
    if algo == "via_ru":
        return _from_count_table(chi, *_window_counts(scaled, I, p))
    raise ValidationError(f"unknown algo {algo!r}")


def sum_poly_interval_subgroup(chi: Character, f: Poly, I: Interval, G: Subgroup,
                               algo: str = "direct") -> RootSumHistogram:
    """sum_{x in I} sum_{lambda in G} chi(x + f(lambda))."""
    chi.require_nonprincipal()
    p = G.p
    f.check(p)
    xs = I.residues(p)
    images = f(G.elements, p)
    if algo == "direct":
        return _accumulate(chi, _outer_sums(xs, images, p))
    if algo == "via_ru":
        return _from_count_table(chi, *_window_counts(images, I, p))
    raise ValidationError(f"unknown algo {algo!r}")


def sum_subgroup_pair(chi: Character, a: int, G: Subgroup, algo: str = "direct",
                      f_table=None) -> RootSumHistogram:
    """sum_{lambda, mu in G} chi(a + lambda + mu).

    ``via_f`` pairs the count table F(u) = #{(lambda, mu): lambda + mu = u}
    with chi(a + u); a precomputed table can be passed to reuse it across a.
    """
    chi.require_nonprincipal()
    p = G.p
    a = _check_a(a, p)
    if algo == "direct":
        return _accumulate(chi, _outer_sums(G.elements, G.elements, p, shift=a))
    if algo == "via_f":
        from .congruences import f_histogram

        table = f_table if f_table is not None else f_histogram(G)
        return _from_count_table(chi, (table.keys + a) % p, table.counts)
    raise ValidationError(f"unknown algo {algo!r}")


def fold_index_histogram(chi: Character, log_counts: np.ndarray, zero_terms: int) -> RootSumHistogram:
    """Collapse counts over ind_g (length p-1) to the value bins of chi."""
    n = chi.ctx.p - 1
    bins = (np.arange(n, dtype=np.int64) * chi.k % n) // (n // chi.d)
    return RootSumHistogram(chi.d, np.bincount(bins, weights=log_counts, minlength=chi.d)
                            .round().astype(np.int64), zero_terms)


def _index_histogram(ctx: FieldCtx, blocks) -> tuple[np.ndarray, int]:
    """Counts over ind_g(w) - lc mod p-1 for (w, lc) blocks; w = 0 counts as zero."""
    n = ctx.p - 1
    counts = np.zeros(n, dtype=np.int64)
    zero = 0
    for w, lc in blocks:
        lw = subgroup_log(ctx, w, n)
        nz = lw >= 0
        zero += int(nz.size - nz.sum())
        counts += np.bincount(((lw - lc) % n)[nz], minlength=n)
    return counts, zero


def w_interval_many(chars: Sequence[Character], a: int, I: Interval, G: Subgroup) -> list[RootSumHistogram]:
    """W = sum_{x in I} sum_{lambda, mu in G} conj(chi)(mu) chi(mu x + a lambda), by triple enumeration."""
    p = G.p
    a = _check_a(a, p)
    xs = I.residues(p)
    g_el = G.elements
    alam = g_el * a % p
    log_g = subgroup_log(G.ctx, g_el, p - 1)

    def blocks():
        for blk in _row_blocks(len(g_el), len(xs) * len(g_el)):
            mu = g_el[blk]
            w = ((mu[:, None, None] * xs[None, :, None]) % p + alam[None, None, :]) % p
            yield w.ravel(), np.broadcast_to(log_g[blk, None, None], w.shape).ravel()

    counts, zero = _index_histogram(G.ctx, blocks())
    return [fold_index_histogram(chi, counts, zero) for chi in chars]


def w_interval(chi: Character, a: int, I: Interval, G: Subgroup) -> RootSumHistogram:
    return w_interval_many([chi], a, I, G)[0]


def w_pair_many(chars: Sequence[Character], a: int, G: Subgroup) -> list[RootSumHistogram]:
    """W = sum_{lambda, mu, theta in G} conj(chi)(theta) chi(a theta + mu + lambda), by triple enumeration."""
    p = G.p
    a = _check_a(a, p)
    g_el = G.elements
    pairs = ((g_el[:, None] + g_el[None, :]) % p).ravel()
    log_g = subgroup_log(G.ctx, g_el, p - 1)

    def blocks():
        for blk in _row_blocks(len(g_el), len(pairs)):
            theta = g_el[blk]
            w = (theta[:, None] * a % p + pairs[None, :]) % p
            yield w.ravel(), np.broadcast_to(log_g[blk, None], w.shape).ravel()

    counts, zero = _index_histogram(G.ctx, blocks())
    return [fold_index_histogram(chi, counts, zero) for chi in chars]


def w_pair(chi: Character, a: int, G: Subgroup) -> RootSumHistogram:
    return w_pair_many([chi], a, G)[0]


# -------------------------------------------------------- exponential sums

def _phase_sum(values: np.ndarray, p: int) -> complex:
    angles = 2 * np.pi * values.astype(np.float64) / p
    return complex(np.cos(angles).sum(), np.sin(angles).sum())


def sparse_exp_sum(ctx: FieldCtx, terms: Sequence[tuple[int, int]]) -> complex:
    """sum_{x=1}^{p-1} e_p(a_1 x^k_1 + ... + a_r x^k_r)."""
    p = ctx.p
    if not terms or all(a % p == 0 for a, _ in terms):
        raise AllCoefficientsZero("need at least one nonzero coefficient")
    for _, k in terms:
        if k < 1:
            raise ValidationError(f"exponent {k} must be positive")
    xs = ctx.residues(np.arange(1, p, dtype=np.int64))
    acc = np.zeros_like(xs)
    for a, k in terms:
        acc = (acc + powmod_array(xs, k, p) * (a % p)) % p
    return _phase_sum(acc, p)


def subgroup_exp_sum(ctx: FieldCtx, a: int, f: Poly, G: Subgroup, check: bool = False) -> complex:
    """sum_{lambda in G} e_p(a f(lambda)).

    With ``check`` the value is compared against T/(p-1) times the full-group
    sum over x^((p-1)/T) and OracleMismatch raised beyond 1e-9 T.
    """
    p = ctx.p
    if a % p == 0:
        raise ZeroCoefficient("a must be nonzero mod p")
    f.check(p)
    value = _phase_sum(f(G.elements, p) * (a % p) % p, p)
    if check:
        other = subgroup_exp_sum_via_powers(ctx, a, f, G.T)
        if abs(value - other) > 1e-9 * G.T:
            raise OracleMismatch(f"subgroup sum {value} vs power substitution {other}")
    return value


def subgroup_exp_sum_via_powers(ctx: FieldCtx, a: int, f: Poly, T: int) -> complex:
    """T/(p-1) * sum_{x=1}^{p-1} e_p(a f(x^((p-1)/T)))."""
    p = ctx.p
    xs = ctx.residues(np.arange(1, p, dtype=np.int64))
    lam = powmod_array(xs, (p - 1) // T, p)
    return _phase_sum(f(lam, p) * (a % p) % p, p) * T / (p - 1)


# ------------------------------------------------------------------ moments

@dataclass(frozen=True)
class MomentReport:
    R: int
    nu: int
    value: float
    exact: int | None
    rhs: float
    ratio: float


def davenport_erdos_moment(chi: Character, R: int, nu: int) -> MomentReport:
    """sum_{v in F_p} |sum_{r=1}^R chi(v + r)|^(2 nu) against R^(2nu) sqrt(p) + R^nu p.

    Each inner sum is an exact per-bin window count; ``exact`` is filled in
    for real characters (d <= 2), where every inner sum is an integer.
    """
    chi.require_nonprincipal()
    p, d = chi.ctx.p, chi.d
    if not 1 <= R < p or nu < 1:
        raise ValidationError(f"need 1 <= R < p and nu >= 1 (R={R}, nu={nu})")
    table = chi.table
    ext = np.concatenate([table, table])
    exact = None
    if d <= 64:
        roots = np.exp(2j * np.pi * np.arange(d) / d)
        inner = np.zeros(p, dtype=np.complex128)
        int_inner = np.zeros(p, dtype=np.int64)
        for j in range(d):
            prefix = np.concatenate([[0], np.cumsum(ext == j)])
            cnt = prefix[np.arange(p) + R + 1] - prefix[np.arange(p) + 1]
            inner += cnt * roots[j]
            if d <= 2:
                int_inner += cnt * (1 if j == 0 else -1)
        if d <= 2:
            exact = sum(int(s) ** (2 * nu) for s in int_inner.tolist())
    else:
        vals = np.where(ext == ZERO, 0, np.exp(2j * np.pi * ext / d))
        prefix = np.concatenate([[0], np.cumsum(vals)])
        inner = prefix[np.arange(p) + R + 1] - prefix[np.arange(p) + 1]
    value = float(exact) if exact is not None else float(np.sum(np.abs(inner) ** (2 * nu)))
    rhs = R ** (2 * nu) * math.sqrt(p) + R**nu * p
    return MomentReport(R, nu, value, exact, rhs, value / rhs)


def shifted_second_moment(chi: Character, V: Sequence[int], alpha=None) -> MomentReport:
    """sum_{u in F_p} |sum_{v in V} alpha_v chi(u + v)|^2 against #V * p.

    With unit weights and a real character every inner sum is an integer and
    ``exact`` is filled in. ``R`` holds #V and ``nu`` is 1.
    """
    chi.require_nonprincipal()
    p, d = chi.ctx.p, chi.d
    vs = np.asarray(sorted({int(v) % p for v in V}), dtype=np.int64)
    if vs.size == 0:
        raise ValidationError("V must be nonempty")
    if alpha is None:
        w = np.ones(vs.size, dtype=np.complex128)
    else:
        w = np.asarray(alpha, dtype=np.complex128)
        if w.shape != vs.shape or np.any(np.abs(w) > 1 + 1e-12):
            raise ValidationError("alpha must match V in length and satisfy |alpha_v| <= 1")
    table = chi.table
    u = np.arange(p, dtype=np.int64)
    exact = None
    if d <= 2 and alpha is None:
        signs = np.where(table == ZERO, 0, np.where(table == 0, 1, -1)).astype(np.int64)
        inner_i = np.zeros(p, dtype=np.int64)
        for v in vs.tolist():
            inner_i += signs[(u + v) % p]
        exact = int(np.sum(inner_i * inner_i))
        value = float(exact)
    else:
        vals = np.where(table == ZERO, 0, np.exp(2j * np.pi * table / d))
        inner = np.zeros(p, dtype=np.complex128)
        for v, a in zip(vs.tolist(), w.tolist()):
            inner += a * vals[(u + v) % p]
        value = float(np.sum(np.abs(inner) ** 2))
    rhs = float(vs.size * p)
    return MomentReport(int(vs.size), 1, value, exact, rhs, value / rhs)
