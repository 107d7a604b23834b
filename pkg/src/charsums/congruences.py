"""Exact solution counts for the congruences and energies around the sums."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import OracleTooLarge, ValidationError
from .field import FieldCtx, as_residues, subgroup_log
from .sums import DENSE_LIMIT, Interval, Poly, Subgroup, _outer_sums, _row_blocks

QUADRUPLE_LIMIT = 256


@dataclass
class CountTable:
    """Sparse table u -> count over F_p; keys sorted, counts positive."""

    p: int
    keys: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_values(cls, p: int, chunks) -> "CountTable":
        if p <= DENSE_LIMIT:
            dense = np.zeros(p, dtype=np.int64)
            for c in chunks:
                dense += np.bincount(np.asarray(c, dtype=np.int64).ravel(), minlength=p)
            return cls.from_dense(dense)
        merged: dict[int, int] = {}
        for c in chunks:
            k, n = np.unique(np.ravel(c), return_counts=True)
            for key, cnt in zip(k.tolist(), n.tolist()):
                merged[key] = merged.get(key, 0) + cnt
        keys = np.array(sorted(merged), dtype=object if p >= 1 << 62 else np.int64)
        return cls(p, keys, np.array([merged[k] for k in keys.tolist()], dtype=np.int64))

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "CountTable":
        keys = np.flatnonzero(dense)
        return cls(len(dense), keys, dense[keys])

    def total(self) -> int:
        return int(sum(int(c) for c in self.counts.tolist())) if self.counts.dtype == object \
            else int(self.counts.sum())

    def square_sum(self) -> int:
        """Sum of squared counts, exact beyond 64 bits."""
        if self.counts.size == 0:
            return 0
        top = int(self.counts.max())
        if top * top * self.counts.size < 1 << 63:
            return int(np.sum(self.counts.astype(np.int64) ** 2))
        return sum(int(c) ** 2 for c in self.counts.tolist())

    def dot(self, other: "CountTable") -> int:
        """sum_u self(u) * other(u)."""
        common, i, j = np.intersect1d(self.keys, other.keys, return_indices=True)
        return sum(int(a) * int(b) for a, b in zip(self.counts[i].tolist(), other.counts[j].tolist()))

    def get(self, u: int) -> int:
        i = np.searchsorted(self.keys, u)
        return int(self.counts[i]) if i < len(self.keys) and self.keys[i] == u else 0

    def as_dict(self) -> dict[int, int]:
        return {int(k): int(c) for k, c in zip(self.keys.tolist(), self.counts.tolist())}


@dataclass
class CountReport:
    quantity: str
    count: int
    params: dict
    main_term: float | None = None
    oracle: int | None = None
    flags: list[str] = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    table: CountTable | None = field(default=None, repr=False)

    @property
    def verified(self) -> bool | None:
        return None if self.oracle is None else self.oracle == self.count


@dataclass(frozen=True)
class SpacedSet:
    elements: tuple[int, ...]
    h: int

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(sorted(set(int(s) for s in self.elements))))
        if not is_h_spaced(self.elements, self.h):
            raise ValidationError(f"set is not {self.h}-spaced")


def is_h_spaced(S, h: int) -> bool:
    """No s1, s2 in S with s1 + k = s2 for an integer 1 <= k <= h (gaps on representatives, not cyclic)."""
    vals = np.unique(np.asarray(list(S), dtype=np.int64))
    return bool(np.all(np.diff(vals) > h))


# ------------------------------------------------------------------- F(u)

def f_histogram(G: Subgroup, method: str = "cosets") -> CountTable:
    """F(u) = #{(lambda, mu) in G^2 : lambda + mu = u}.

    ``pairs`` enumerates all T^2 pair sums. ``cosets`` uses that F is constant
    on each coset uG: F(u) = #{nu in G : 1 + nu in uG} for u != 0 and
    F(0) = T * [-1 in G].
    """
    p = G.p
    if method == "pairs":
        return CountTable.from_values(p, _outer_sums(G.elements, G.elements, p))
    if method != "cosets":
        raise ValidationError(f"unknown method {method!r}")
    zero, cnt = _coset_profile(G)
    m = G.cofactor
    if p <= DENSE_LIMIT:
        dense = np.zeros(p, dtype=np.int64)
        dense[0] = G.T * zero
        dense[1:] = cnt[subgroup_log(G.ctx, np.arange(1, p), m)]
        return CountTable.from_dense(dense)
    # sparse: each coset c with cnt[c] > 0 contributes its T elements g^c * G
    keys, counts = [], []
    if zero:
        keys.append(np.zeros(1, dtype=np.int64))
        counts.append(np.array([G.T * zero]))
    for c in np.flatnonzero(cnt).tolist():
        coset = G.elements * pow(G.ctx.g, c, p) % p
        keys.append(coset)
        counts.append(np.full(G.T, cnt[c], dtype=np.int64))
    keys_arr = np.concatenate(keys) if keys else np.zeros(0, dtype=np.int64)
    order = np.argsort(keys_arr)
    return CountTable(p, keys_arr[order], np.concatenate(counts)[order] if counts else keys_arr)


def _coset_profile(G: Subgroup) -> tuple[int, np.ndarray]:
    """(#{nu in G : 1 + nu = 0}, counts of 1 + nu per coset of G)."""
    shifted = (G.elements + 1) % G.p
    logs = subgroup_log(G.ctx, shifted, G.cofactor)
    zero = int(np.sum(logs < 0))
    return zero, np.bincount(logs[logs >= 0], minlength=G.cofactor).astype(np.int64)


def additive_energy(G: Subgroup, algo: str = "histogram") -> CountReport:
    """E(G) = #{(l1, m1, l2, m2) in G^4 : l1 + m1 = l2 + m2}."""
    T, p = G.T, G.p
    if algo == "quadruple":
        if T > QUADRUPLE_LIMIT:
            raise OracleTooLarge(f"quadruple enumeration limited to T <= {QUADRUPLE_LIMIT}")
        s = (G.elements[:, None] + G.elements[None, :]) % p
        # one l1 slab at a time keeps memory at T^3
        count = sum(int(np.count_nonzero(s[i, :, None, None] == s[None, None, :, :])) for i in range(T))
    elif algo == "histogram":
        count = f_histogram(G, "pairs").square_sum()
    elif algo == "cosets":
        zero, cnt = _coset_profile(G)
        count = (T * zero) ** 2 + T * sum(int(c) ** 2 for c in cnt.tolist())
    else:
        raise ValidationError(f"unknown algo {algo!r}")
    return CountReport("E(G)", count, {"p": p, "T": T, "algo": algo})


# -------------------------------------------------------------- N(I,G), Q

def count_nig(I: Interval, G: Subgroup, method: str = "auto", budget: int = 1 << 26) -> CountReport:
    """N(I,G) = #{(x, y, lambda) in I x I x G : lambda x = y}."""
    p = G.p
    xs = I.residues(p)
    if method == "auto":
        method = "enumerate" if I.H * G.T <= budget else "pairs"
    count = 0
    if method == "enumerate":
        for vals in _products(xs, G.elements, p):
            count += int(np.count_nonzero((vals - I.b - 1) % p < I.H))
    elif method == "pairs":
        inv = _inverses(xs, p)
        for blk in _row_blocks(len(xs), len(xs)):
            ratios = xs[None, :] * inv[blk, None] % p
            count += int(np.count_nonzero(G.contains(ratios.ravel())))
    else:
        raise ValidationError(f"unknown method {method!r}")
    return CountReport("N(I,G)", count, {"p": p, "T": G.T, "H": I.H, "b": I.b, "method": method})


def count_q(I: Interval, G: Subgroup) -> CountReport:
    """Q = #{(x, y, lambda, mu) : lambda x = mu y} = sum_u R(u)^2, R(u) = #{(x, mu): mu x = u}."""
    p = G.p
    R = CountTable.from_values(p, _products(I.residues(p), G.elements, p))
    count = R.square_sum()
    n = count_nig(I, G).count
    rep = CountReport("Q", count, {"p": p, "T": G.T, "H": I.H, "b": I.b})
    rep.notes["N(I,G)"] = n
    rep.notes["Q==T*N"] = count == G.T * n
    return rep


def _products(xs: np.ndarray, ys: np.ndarray, p: int):
    for blk in _row_blocks(len(xs), len(ys)):
        yield (xs[blk, None] * ys[None, :] % p).ravel()


def _inverses(xs: np.ndarray, p: int) -> np.ndarray:
    from .field import powmod_array

    return powmod_array(as_residues(xs, p), p - 2, p)


# ----------------------------------------------------------- boxes, W, U

def count_symcong(p: int, J1: Interval, J2: Interval, J3: Interval, J4: Interval) -> CountReport:
    """#{x_i in J_i : x1 x2 = x3 x4 mod p}, matching product tables of J1xJ2 and J3xJ4."""
    boxes = (J1, J2, J3, J4)
    left = CountTable.from_values(p, _products(J1.residues(p), J2.residues(p), p))
    right = CountTable.from_values(p, _products(J3.residues(p), J4.residues(p), p))
    count = left.dot(right)
    hprod = math.prod(J.H for J in boxes)
    rep = CountReport("symcong", count, {"p": p, "J": [(J.b, J.H) for J in boxes]},
                      main_term=hprod / p)
    if any(J.b < 1 for J in boxes):
        rep.flags.append("b_i < 1 (outside the b_i >= 1 range)")
    if any(J.b + J.H >= p for J in boxes):
        rep.flags.append("b_i + h_i >= p (box wraps past p)")
    rep.notes["deviation"] = count - hprod / p
    rep.notes["error_scale"] = math.sqrt(hprod) * math.log(p) ** 2
    return rep


def _range_flags(H: int, L: float, p: int) -> list[str]:
    flags = []
    if not L < H:
        flags.append("L >= H")
    if not 2 * H * L < p:
        flags.append("2HL >= p")
    return flags


def _check_lset(Lset: Sequence[int], p: int) -> np.ndarray:
    ls = np.array(sorted(set(int(l) for l in Lset)), dtype=np.int64)
    if len(ls) != len(Lset):
        raise ValidationError("Lset entries must be distinct")
    if np.any(ls % p == 0):
        raise ValidationError("Lset may not contain multiples of p")
    return ls


def count_w_quantity(p: int, I: Interval, Lset: Sequence[int], S, L: float | None = None) -> CountReport:
    """W = #{(u1,u2,l1,l2,s1,s2) : (u1+s1)/l1 = (u2+s2)/l2 mod p} via squared bin counts."""
    elements = S.elements if isinstance(S, SpacedSet) else tuple(int(s) for s in S)
    H = I.H
    ls = _check_lset(Lset, p) if len(Lset) else np.zeros(0, dtype=np.int64)
    L = float(min(Lset)) if L is None and len(Lset) else (L or 0.0)
    rep = CountReport("W", 0, {"p": p, "H": H, "b": I.b, "L": L, "#L": len(ls), "#S": len(elements)})
    rep.flags += _range_flags(H, L, p)
    if not is_h_spaced(elements, H):
        rep.flags.append("S not H-spaced")
    if not elements or not len(ls):
        return rep
    us = (I.residues(p)[:, None] + as_residues(list(elements), p)[None, :]) % p
    table = CountTable.from_values(p, _products(us.ravel(), _inverses(ls, p), p))
    rep.count = table.square_sum()
    mass = len(elements) * H * L
    rhs = mass**2 / p + mass
    rep.notes.update(rhs=rhs, ratio=rep.count / rhs if rhs else math.inf)
    return rep


def u_histogram(I: Interval, Lset: Sequence[int], G: Subgroup, f: Poly, L: float | None = None) -> CountReport:
    """U(v) = #{(u, l, lambda) : (u + f(lambda))/l = v}; report count is U = sum_v U(v)^2."""
    p = G.p
    f.check(p)
    ls = _check_lset(Lset, p)
    L = float(min(Lset)) if L is None else L
    us = (I.residues(p)[:, None] + f(G.elements, p)[None, :]) % p
    table = CountTable.from_values(p, _products(us.ravel(), _inverses(ls, p), p))
    U = table.square_sum()
    rep = CountReport("U", U, {"p": p, "T": G.T, "H": I.H, "b": I.b, "L": L, "#L": len(ls)},
                      table=table)
    scale = I.H * L * G.T**2
    rep.notes.update(mass=table.total(), ratio=U / scale)
    rep.flags += _range_flags(I.H, L, p)
    return rep


def u_second_moment(I: Interval, Lset: Sequence[int], G: Subgroup, f: Poly) -> int:
    """U = sum_v U(v)^2 as an exact integer."""
    return u_histogram(I, Lset, G, f).count


def count_poly_values_in_interval(f: Poly, G: Subgroup, b: int, I: Interval) -> CountReport:
    """#{lambda in G : f(lambda) = b + x mod p for some x in I}."""
    p = G.p
    f.check(p)
    I.check(p)
    vals = (f(G.elements, p) - b - I.b - 1) % p
    count = int(np.count_nonzero(vals < I.H))
    main = I.H * G.T / p
    rep = CountReport("poly_in_interval", count, {"p": p, "T": G.T, "H": I.H, "b": b}, main_term=main)
    rep.notes["deviation"] = count - main
    return rep
