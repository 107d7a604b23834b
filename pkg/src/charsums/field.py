"""Prime field contexts: primality, factoring p-1, primitive roots, discrete logs.

Residue arrays are ``int64`` while ``p < VEC_LIMIT`` (so a product of two
residues fits in 63 bits) and ``object`` arrays of Python ints above that.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CharSumError, CompositeModulus, FactorizationFailure, ValidationError, ZeroArgument

VEC_LIMIT = 1 << 31
INDEX_AUTO_LIMIT = 1 << 22
TRIAL_LIMIT = 10**6
DEFAULT_RHO_BUDGET = 1 << 24
# largest subgroup order for which a sorted table of its elements is built
ROOT_TABLE_LIMIT = 1 << 24

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


# ---------------------------------------------------------------- primality

def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int, budget: int, c: int) -> int | None:
    """One Pollard-Brent run with constant c; a nontrivial factor or None."""
    y, r, q, g = 2, 1, 1, 1
    m = 128
    steps = 0
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        steps += r
        r *= 2
        if steps > budget:
            return None
    if g == n:
        while True:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
            if g > 1:
                break
    return g if g != n else None


def _split(n: int, budget: int) -> int:
    remaining = budget
    for c in range(1, 64):
        f = _brent(n, remaining, c)
        if f is not None:
            return f
        remaining //= 2
        if remaining < 1024:
            break
    raise FactorizationFailure(f"could not split {n} within {budget} rho steps")


def factorize(n: int, rho_budget: int = DEFAULT_RHO_BUDGET) -> list[tuple[int, int]]:
    """Prime factorization as sorted (prime, exponent) pairs."""
    if n < 1:
        raise ValidationError(f"cannot factor {n}")
    found: dict[int, int] = {}
    for q in (2, 3):
        while n % q == 0:
            found[q] = found.get(q, 0) + 1
            n //= q
    q = 5
    step = 2
    while q <= TRIAL_LIMIT and q * q <= n:
        while n % q == 0:
            found[q] = found.get(q, 0) + 1
            n //= q
        q += step
        step = 6 - step
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            found[m] = found.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        f = _split(m, rho_budget)
        stack += [f, m // f]
    return sorted(found.items())


def divisors(factors: Sequence[tuple[int, int]]) -> list[int]:
    divs = [1]
    for q, e in factors:
        divs = [d * q**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def primes_in_range(lo: int, hi: int, segment: int = 1 << 20) -> list[int]:
    """All primes in [lo, hi] by a segmented sieve."""
    lo = max(lo, 2)
    if hi < lo:
        return []
    root = math.isqrt(hi)
    base = np.ones(root + 1, dtype=bool)
    base[:2] = False
    for i in range(2, math.isqrt(root) + 1):
        if base[i]:
            base[i * i :: i] = False
    base_primes = np.flatnonzero(base)
    out: list[int] = []
    start = lo
    while start <= hi:
        stop = min(start + segment, hi + 1)
        mask = np.ones(stop - start, dtype=bool)
        for q in base_primes:
            q = int(q)
            first = max(q * q, -(-start // q) * q)
            if first >= stop:
                continue
            mask[first - start :: q] = False
        out.extend((np.flatnonzero(mask) + start).tolist())
        start = stop
    return out


# ----------------------------------------------------- vectorized residues

def residue_dtype(p: int):
    return np.int64 if p < VEC_LIMIT else object


def as_residues(values, p: int) -> np.ndarray:
    if p < VEC_LIMIT:
        return np.mod(np.asarray(values, dtype=np.int64), p)
    arr = np.array([int(v) % p for v in np.ravel(values)], dtype=object)
    return arr.reshape(np.shape(values))


_pow3 = np.frompyfunc(pow, 3, 1)


def powmod_array(xs: np.ndarray, e: int, p: int) -> np.ndarray:
    """Elementwise xs**e mod p."""
    if xs.dtype == object:
        return _pow3(xs, e, p).astype(object)
    result = np.ones_like(xs)
    base = xs % p
    while e:
        if e & 1:
            result = result * base % p
        e >>= 1
        if e:
            base = base * base % p
    return result


def geometric_powers(base: int, n: int, p: int) -> np.ndarray:
    """[base^0, base^1, ..., base^(n-1)] mod p."""
    out = np.ones(1, dtype=residue_dtype(p))
    while len(out) < n:
        step = pow(base, len(out), p)
        out = np.concatenate([out, out[: n - len(out)] * step % p])
    return out[:n]


# ------------------------------------------------------------ field context

class IndexPolicy(enum.Enum):
    ALWAYS = "always"
    NEVER = "never"
    AUTO = "auto"


@dataclass(frozen=True)
class FieldCtx:
    p: int
    pm1_factors: tuple[tuple[int, int], ...]
    g: int
    index_table: np.ndarray | None = field(default=None, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def order(self) -> int:
        return self.p - 1

    @property
    def has_index(self) -> bool:
        return self.index_table is not None

    def divisors(self) -> list[int]:
        return divisors(self.pm1_factors)

    def residues(self, values) -> np.ndarray:
        return as_residues(values, self.p)


def _is_generator(x: int, p: int, factors: Iterable[tuple[int, int]]) -> bool:
    return all(pow(x, (p - 1) // q, p) != 1 for q, _ in factors)


def _index_table(p: int, g: int) -> np.ndarray:
    if p >= VEC_LIMIT:
        raise ValidationError(f"index table for p={p} does not fit in memory")
    powers = geometric_powers(g, p - 1, p)
    table = np.full(p, -1, dtype=np.int32)
    table[powers] = np.arange(p - 1, dtype=np.int32)
    return table


def build_field_ctx(
    p: int,
    index_policy: IndexPolicy | str = IndexPolicy.AUTO,
    rho_budget: int = DEFAULT_RHO_BUDGET,
) -> FieldCtx:
    p = int(p)
    policy = IndexPolicy(index_policy) if isinstance(index_policy, str) else index_policy
    if not 2 < p < 1 << 62:
        raise ValidationError(f"p={p} outside (2, 2^62)")
    if not is_prime(p):
        raise CompositeModulus(f"{p} is not prime")
    factors = tuple(factorize(p - 1, rho_budget))
    g = 2
    while not _is_generator(g, p, factors):
        g += 1
    build = policy is IndexPolicy.ALWAYS or (policy is IndexPolicy.AUTO and p <= INDEX_AUTO_LIMIT)
    return FieldCtx(p, factors, g, _index_table(p, g) if build else None)


# ------------------------------------------------------------ discrete logs

def _bsgs_table(ctx: FieldCtx, gamma: int, q: int) -> tuple[dict[int, int], int, int]:
    key = ("bsgs", gamma, q)
    hit = ctx._cache.get(key)
    if hit is None:
        m = math.isqrt(q - 1) + 1
        if m > ROOT_TABLE_LIMIT:
            raise CharSumError(f"baby-step table of size {m} exceeds desk budget")
        table = {}
        y = 1
        for j in range(m):
            table.setdefault(y, j)
            y = y * gamma % ctx.p
        hit = (table, m, pow(gamma, -m, ctx.p))
        ctx._cache[key] = hit
    return hit


def _dlog_prime_order(ctx: FieldCtx, gamma: int, y: int, q: int) -> int:
    table, m, giant = _bsgs_table(ctx, gamma, q)
    for i in range(m + 1):
        j = table.get(y)
        if j is not None:
            return (i * m + j) % q
        y = y * giant % ctx.p
    raise CharSumError(f"no discrete log found in subgroup of order {q}")


def _pohlig_hellman(ctx: FieldCtx, x: int) -> int:
    p, n = ctx.p, ctx.p - 1
    residue, modulus = 0, 1
    for q, e in ctx.pm1_factors:
        qe = q**e
        gq = pow(ctx.g, n // qe, p)
        xq = pow(x, n // qe, p)
        gamma = pow(gq, q ** (e - 1), p)
        gq_inv = pow(gq, -1, p)
        digits = 0
        for i in range(e):
            target = xq * pow(gq_inv, digits, p) % p
            h = pow(target, q ** (e - 1 - i), p)
            digits += _dlog_prime_order(ctx, gamma, h, q) * q**i
        # CRT merge
        t = (digits - residue) * pow(modulus, -1, qe) % qe
        residue += modulus * t
        modulus *= qe
    return residue % n


def dlog(ctx: FieldCtx, x: int) -> int:
    """Index of x with respect to ctx.g, in [0, p-2]."""
    x = int(x) % ctx.p
    if x == 0:
        raise ZeroArgument("discrete log of 0")
    if ctx.index_table is not None:
        return int(ctx.index_table[x])
    return _pohlig_hellman(ctx, x)


def dlog_pohlig_hellman(ctx: FieldCtx, x: int) -> int:
    """Pohlig-Hellman route regardless of any index table."""
    x = int(x) % ctx.p
    if x == 0:
        raise ZeroArgument("discrete log of 0")
    return _pohlig_hellman(ctx, x)


def mult_order(ctx: FieldCtx, x: int) -> int:
    x = int(x) % ctx.p
    if x == 0:
        raise ZeroArgument("order of 0")
    n = ctx.p - 1
    for q, e in ctx.pm1_factors:
        for _ in range(e):
            if pow(x, n // q, ctx.p) == 1:
                n //= q
            else:
                break
    return n


def is_primitive_root(ctx: FieldCtx, x: int) -> bool:
    x = int(x) % ctx.p
    return x != 0 and _is_generator(x, ctx.p, ctx.pm1_factors)


def _root_table(ctx: FieldCtx, n: int) -> tuple[np.ndarray, np.ndarray]:
    key = ("roots", n)
    hit = ctx._cache.get(key)
    if hit is None:
        base = pow(ctx.g, (ctx.p - 1) // n, ctx.p)
        roots = geometric_powers(base, n, ctx.p)
        order = np.argsort(roots, kind="stable")
        hit = (roots[order], order.astype(np.int64))
        ctx._cache[key] = hit
    return hit


def subgroup_log(ctx: FieldCtx, xs, n: int) -> np.ndarray:
    """ind_g(x) mod n for every x in xs (n must divide p-1); -1 where x == 0.

    Uses the index table when present; otherwise maps x to x^((p-1)/n), an
    element of the order-n subgroup, and looks it up in a sorted table of
    that subgroup. Falls back to scalar Pohlig-Hellman when neither fits.
    """
    p = ctx.p
    if (p - 1) % n:
        raise ValidationError(f"{n} does not divide p-1={p - 1}")
    xs = ctx.residues(xs)
    out = np.full(xs.shape, -1, dtype=np.int64)
    nz = xs != 0
    if n == 1:
        out[nz] = 0
        return out
    vals = xs[nz]
    if ctx.index_table is not None:
        out[nz] = ctx.index_table[vals.astype(np.int64)] % n
    elif n <= ROOT_TABLE_LIMIT and (p < VEC_LIMIT or n <= 1 << 16):
        roots, order = _root_table(ctx, n)
        y = powmod_array(vals, (p - 1) // n, p)
        if y.dtype == object:
            lookup = {int(r): int(o) for r, o in zip(roots, order)}
            out[nz] = np.array([lookup[int(v)] for v in y], dtype=np.int64)
        else:
            out[nz] = order[np.searchsorted(roots, y)]
    else:
        out[nz] = np.array([_pohlig_hellman(ctx, int(v)) % n for v in vals], dtype=np.int64)
    return out
