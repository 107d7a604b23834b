"""Brute-force reference computations in plain Python.

Nothing here touches index tables, discrete logs or numpy: a character value
is found by raising x to (p-1)/d and locating the result among the powers of
g^((p-1)/d). Loops are literal, so these are only for small p.
"""

from __future__ import annotations

from collections import Counter
from itertools import product


def char_table(p: int, g: int, k: int) -> tuple[int, list[int | None]]:
    """(d, [value index of chi_k(x) for x in 0..p-1]) with chi_k(g) = exp(2 pi i k/(p-1))."""
    from math import gcd

    n = p - 1
    d = n // gcd(k, n)
    m = n // d
    zeta = pow(g, m, p)
    where = {}
    y = 1
    for j in range(d):
        where[y] = j
        y = y * zeta % p
    unit = (k // m) % d
    table: list[int | None] = [None]
    for x in range(1, p):
        table.append(where[pow(x, m, p)] * unit % d)
    return d, table


def histogram(d: int, values) -> tuple[list[int], int]:
    counts = [0] * d
    zero = 0
    for j in values:
        if j is None:
            zero += 1
        else:
            counts[j] += 1
    return counts, zero


def subgroup(p: int, T: int) -> list[int]:
    """Elements of order dividing T, by exhaustive search."""
    return [x for x in range(1, p) if pow(x, T, p) == 1]


def interval_subgroup_sum(p, g, k, a, H, b, G):
    d, tab = char_table(p, g, k)
    return histogram(d, (tab[(x + a * lam) % p] for x in range(b + 1, b + H + 1) for lam in G))


def subgroup_pair_sum(p, g, k, a, G):
    d, tab = char_table(p, g, k)
    return histogram(d, (tab[(a + lam + mu) % p] for lam in G for mu in G))


def energy(p, G) -> int:
    return sum(1 for l1, m1, l2, m2 in product(G, repeat=4) if (l1 + m1 - l2 - m2) % p == 0)


def nig(p, H, G) -> int:
    Gs = set(G)
    return sum(1 for x in range(1, H + 1) for y in range(1, H + 1) for lam in Gs if lam * x % p == y)


def symcong(p, boxes) -> int:
    J = [range(b + 1, b + h + 1) for b, h in boxes]
    return sum(1 for x1, x2, x3, x4 in product(*J) if (x1 * x2 - x3 * x4) % p == 0)


def w_quantity(p, H, b, Lset, S) -> int:
    """Literal sextuple enumeration."""
    I = range(b + 1, b + H + 1)
    count = 0
    for u1, u2, l1, l2, s1, s2 in product(I, I, Lset, Lset, S, S):
        if ((u1 + s1) * l2 - (u2 + s2) * l1) % p == 0:
            count += 1
    return count


def u_quantity(p, H, b, Lset, G, coeffs) -> tuple[dict[int, int], int]:
    def f(x):
        return sum(c * pow(x, i, p) for i, c in enumerate(coeffs)) % p

    table: Counter = Counter()
    for u in range(b + 1, b + H + 1):
        for ell in Lset:
            for lam in G:
                table[(u + f(lam)) * pow(ell, p - 2, p) % p] += 1
    return dict(table), sum(c * c for c in table.values())


def q_quantity(p, H, G) -> int:
    I = range(1, H + 1)
    return sum(1 for x, y, lam, mu in product(I, I, G, G) if (lam * x - mu * y) % p == 0)


def primitive_roots(p: int) -> list[int]:
    return [x for x in range(1, p) if len({pow(x, e, p) for e in range(p - 1)}) == p - 1]
