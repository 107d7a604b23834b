"""Multiplicative characters mod p and exact root-of-unity histograms."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import PrincipalCharacter, ValidationError
from .field import FieldCtx, divisors, subgroup_log

ZERO = -1  # value index standing for chi(0) = 0 in index arrays


@dataclass(frozen=True, eq=False)
class Character:
    """chi(g^i) = omega^(k*i) with omega = exp(2 pi i / (p-1))."""

    ctx: FieldCtx
    k: int

    def __post_init__(self):
        if not 0 <= self.k < self.ctx.p - 1:
            raise ValidationError(f"character exponent {self.k} outside [0, {self.ctx.p - 2}]")

    def __eq__(self, other):
        return isinstance(other, Character) and other.ctx.p == self.ctx.p and other.k == self.k

    def __hash__(self):
        return hash((self.ctx.p, self.k))

    def __repr__(self):
        return f"Character(p={self.ctx.p}, k={self.k}, d={self.d})"

    @property
    def d(self) -> int:
        return (self.ctx.p - 1) // math.gcd(self.k, self.ctx.p - 1)

    @property
    def is_principal(self) -> bool:
        return self.k == 0

    @property
    def _unit(self) -> int:
        # k = ((p-1)/d) * unit with gcd(unit, d) = 1
        return (self.k // ((self.ctx.p - 1) // self.d)) % self.d

    @classmethod
    def of_order(cls, ctx: FieldCtx, d: int) -> "Character":
        """The canonical character of order d, k = (p-1)/d."""
        if (ctx.p - 1) % d:
            raise ValidationError(f"no character of order {d} mod {ctx.p}")
        return cls(ctx, (ctx.p - 1) // d % (ctx.p - 1))

    @classmethod
    def legendre(cls, ctx: FieldCtx) -> "Character":
        return cls(ctx, (ctx.p - 1) // 2)

    def conj(self) -> "Character":
        return Character(self.ctx, -self.k % (self.ctx.p - 1))

    def require_nonprincipal(self) -> None:
        if self.is_principal:
            raise PrincipalCharacter("operation needs a nonprincipal character")

    def indices(self, xs) -> np.ndarray:
        """Value indices j (chi(x) = zeta_d^j) for an array of residues; ZERO where x = 0."""
        logs = subgroup_log(self.ctx, xs, self.d)
        return np.where(logs < 0, ZERO, logs * self._unit % self.d)

    def __call__(self, x: int) -> int | None:
        return char_eval(self, x)

    @cached_property
    def table(self) -> np.ndarray:
        """Value index of every residue 0..p-1."""
        return self.indices(np.arange(self.ctx.p))


def all_characters(ctx: FieldCtx, nonprincipal: bool = True) -> list[Character]:
    return [Character(ctx, k) for k in range(1 if nonprincipal else 0, ctx.p - 1)]


def canonical_characters(ctx: FieldCtx) -> list[Character]:
    """One character per order d > 1 of the group of characters."""
    return [Character.of_order(ctx, d) for d in divisors(ctx.pm1_factors) if d > 1]


def char_eval(chi: Character, x: int) -> int | None:
    """Value index in [0, d) or None for the zero argument."""
    j = int(chi.indices(np.array([int(x) % chi.ctx.p]))[0])
    return None if j == ZERO else j


# ------------------------------------------------------------- histograms

@lru_cache(maxsize=None)
def cyclotomic(n: int) -> tuple[int, ...]:
    """Integer coefficients (low to high) of the n-th cyclotomic polynomial."""
    num = [-1] + [0] * (n - 1) + [1]
    for e in divisors_of(n)[:-1]:
        num = _polydiv_exact(num, list(cyclotomic(e)))
    return tuple(num)


def divisors_of(n: int) -> list[int]:
    small = [i for i in range(1, math.isqrt(n) + 1) if n % i == 0]
    return sorted(set(small + [n // i for i in small]))


def _polydiv_exact(num: list[int], den: list[int]) -> list[int]:
    num = num[:]
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        out[i] = c
        if c:
            for j, dc in enumerate(den):
                num[i + j] -= c * dc
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


def reduce_cyclotomic(coeffs, d: int) -> tuple[int, ...]:
    """Canonical coordinates of sum coeffs[j] zeta_d^j in the power basis of Z[zeta_d]."""
    phi = cyclotomic(d)
    deg = len(phi) - 1
    rem = [int(c) for c in coeffs]
    for i in range(len(rem) - 1, deg - 1, -1):
        c = rem[i]
        if c:
            for j, pc in enumerate(phi):
                rem[i - deg + j] -= c * pc
    rem = rem[:deg] + [0] * (deg - len(rem))
    return tuple(rem)


@dataclass(frozen=True, eq=False)
class RootSumHistogram:
    """A character sum kept exactly: counts[j] terms equal to zeta_d^j, plus zero terms."""

    d: int
    counts: np.ndarray
    zero_terms: int = 0

    @classmethod
    def from_indices(cls, idx: np.ndarray, d: int) -> "RootSumHistogram":
        idx = np.asarray(idx).ravel()
        nz = idx[idx != ZERO]
        return cls(d, np.bincount(nz, minlength=d).astype(np.int64), int(idx.size - nz.size))

    @classmethod
    def from_weighted(cls, idx: np.ndarray, weights: np.ndarray, d: int) -> "RootSumHistogram":
        """Histogram where the term with value index idx[i] occurs weights[i] times."""
        idx = np.asarray(idx).ravel()
        weights = np.asarray(weights).ravel()
        zero = idx == ZERO
        counts = _weighted_bincount(idx[~zero], weights[~zero], d)
        return cls(d, counts, int(weights[zero].sum()))

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.zero_terms

    @property
    def value(self) -> complex:
        return histogram_to_complex(self)

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    def exact(self) -> tuple[int, ...]:
        """Exact element of Z[zeta_d]; equal tuples iff equal complex values."""
        return reduce_cyclotomic(self.counts.tolist(), self.d)

    def scaled(self, factor: int) -> "RootSumHistogram":
        return RootSumHistogram(self.d, self.counts * factor, self.zero_terms * factor)

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=8)
        h.update(f"{self.d}:{self.zero_terms}:".encode())
        h.update(",".join(map(str, self.counts.tolist())).encode())
        return h.hexdigest()

    def first_difference(self, other: "RootSumHistogram") -> str | None:
        if self.d != other.d:
            return f"orders differ: {self.d} vs {other.d}"
        diff = np.flatnonzero(self.counts != other.counts)
        if diff.size:
            j = int(diff[0])
            return f"bin {j}: {int(self.counts[j])} vs {int(other.counts[j])}"
        if self.zero_terms != other.zero_terms:
            return f"zero_terms: {self.zero_terms} vs {other.zero_terms}"
        return None

    def __eq__(self, other):
        return isinstance(other, RootSumHistogram) and self.first_difference(other) is None

    def __repr__(self):
        shown = self.counts.tolist() if self.d <= 12 else f"<{self.d} bins>"
        return f"RootSumHistogram(d={self.d}, counts={shown}, zero_terms={self.zero_terms})"


def _weighted_bincount(idx: np.ndarray, weights: np.ndarray, d: int) -> np.ndarray:
    if idx.size == 0:
        return np.zeros(d, dtype=np.int64)
    if weights.dtype != object and int(weights.sum()) < 1 << 53:
        # float accumulation of integers is exact below 2^53
        return np.rint(np.bincount(idx, weights=weights, minlength=d)).astype(np.int64)
    out = np.zeros(d, dtype=object)
    for j, w in zip(idx.tolist(), weights.tolist()):
        out[j] += int(w)
    return out


def histogram_to_complex(h: RootSumHistogram) -> complex:
    roots = np.exp(2j * np.pi * np.arange(h.d) / h.d)
    return complex(np.dot(h.counts.astype(np.float64), roots))


def gauss_sum(chi: Character) -> complex:
    """sum_{x=1}^{p-1} chi(x) e(x/p), each phase reduced exactly before the float step."""
    chi.require_nonprincipal()
    p, d = chi.ctx.p, chi.d
    xs = np.arange(1, p, dtype=np.int64)
    j = chi.indices(xs)
    if d * p < 1 << 62:
        num = (j * p + xs * d) % (d * p)
        angles = 2 * np.pi * num.astype(np.float64) / (d * p)
    else:
        angles = np.array([2 * math.pi * ((int(a) * p + int(x) * d) % (d * p)) / (d * p)
                           for a, x in zip(j, xs)])
    return complex(np.cos(angles).sum(), np.sin(angles).sum())
