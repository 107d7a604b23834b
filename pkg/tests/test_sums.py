import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from charsums import oracles
from charsums.characters import Character, RootSumHistogram, canonical_characters
from charsums.errors import ConstantPolynomial, PrincipalCharacter, ValidationError, ZeroArgument
from charsums.field import build_field_ctx, primes_in_range
from charsums.sums import (
    Interval,
    Poly,
    Subgroup,
    davenport_erdos_moment,
    shifted_second_moment,
    sparse_exp_sum,
    subgroup_exp_sum,
    subgroup_exp_sum_via_powers,
    sum_interval_subgroup,
    sum_poly_interval_subgroup,
    sum_subgroup_pair,
    sum_subgroup_shift,
    w_interval,
    w_pair,
)

PRIMES = primes_in_range(3, 212)


def hist(d, pair):
    counts, zero = pair
    return RootSumHistogram(d, np.array(counts, dtype=np.int64), zero)


@pytest.fixture(scope="module")
def p7():
    ctx = build_field_ctx(7)
    return ctx, Character.legendre(ctx)


@st.composite
def setting(draw, max_p=212):
    p = draw(st.sampled_from([q for q in PRIMES if q < max_p]))
    ctx = build_field_ctx(p)
    divs = ctx.divisors()
    T = draw(st.sampled_from(divs))
    d = draw(st.sampled_from([x for x in divs if x > 1]))
    a = draw(st.integers(1, p - 1))
    return ctx, Subgroup(ctx, T), Character.of_order(ctx, d), a


# ------------------------------------------------------------ domain types

def test_subgroup_and_interval(p7):
    ctx, _ = p7
    assert sorted(Subgroup(ctx, 3).elements.tolist()) == [1, 2, 4]
    assert Subgroup.full(ctx).T == 6
    with pytest.raises(ValidationError):
        Subgroup(ctx, 4)
    assert Interval(2, 3).residues(7).tolist() == [4, 5]
    with pytest.raises(ValidationError):
        Interval(0)
    with pytest.raises(ValidationError):
        Interval(7).check(7)


def test_poly_validation():
    assert Poly.parse("1, 0, 2").coeffs == (1, 0, 2)
    assert Poly.parse("0,1")(np.array([3, 5]), 7).tolist() == [3, 5]
    with pytest.raises(ConstantPolynomial):
        Poly.parse("3,7").check(7)  # 7X vanishes mod 7


# ---------------------------------------------------------------- examples

def test_shift_examples(p7):
    ctx, chi = p7
    assert sum_subgroup_shift(chi, 1, Subgroup(ctx, 3)).exact() == (-1,)
    assert sum_subgroup_shift(chi, 1, Subgroup(ctx, 6)).exact() == (-1,)
    assert sum_subgroup_shift(chi, 3, Subgroup(ctx, 2)).exact() == (2,)


def test_shift_rejects_zero_and_principal(p7):
    ctx, chi = p7
    with pytest.raises(ZeroArgument):
        sum_subgroup_shift(chi, 7, Subgroup(ctx, 3))
    with pytest.raises(PrincipalCharacter):
        sum_subgroup_shift(Character(ctx, 0), 1, Subgroup(ctx, 3))


@pytest.mark.parametrize("algo", ["direct", "via_ru"])
def test_interval_examples(p7, algo):
    ctx, chi = p7
    G3, G6 = Subgroup(ctx, 3), Subgroup(ctx, 6)
    assert sum_interval_subgroup(chi, 1, Interval(2), G3, algo).exact() == (-2,)
    full = sum_interval_subgroup(chi, 1, Interval(6), G6, algo)
    row = RootSumHistogram.from_indices(chi.indices(np.arange(1, 7)), 2)
    # each row x gives -chi(x) over the full group; negation swaps the two bins
    assert full.exact() == RootSumHistogram(2, row.counts[::-1].copy(), 0).exact()
    assert full.total == 36 and full.zero_terms == 6
    h = sum_interval_subgroup(chi, 3, Interval(1), Subgroup(ctx, 1), algo)
    assert h == RootSumHistogram.from_indices(chi.indices([4]), 2)


@pytest.mark.parametrize("algo", ["direct", "via_ru"])
def test_poly_examples(p7, algo):
    ctx, chi = p7
    G3 = Subgroup(ctx, 3)
    assert sum_poly_interval_subgroup(chi, Poly.parse("0,0,1"), Interval(2), G3, algo).exact() == (-2,)
    h = sum_poly_interval_subgroup(chi, Poly.parse("5,1"), Interval(1), Subgroup(ctx, 1), algo)
    assert h.zero_terms == 1 and h.counts.sum() == 0


@pytest.mark.parametrize("algo", ["direct", "via_f"])
def test_pair_examples(p7, algo):
    ctx, chi = p7
    assert sum_subgroup_pair(chi, 1, Subgroup(ctx, 3), algo).exact() == (-1,)
    assert sum_subgroup_pair(chi, 1, Subgroup(ctx, 1), algo).exact() == (-1,)


# -------------------------------------------------------------- properties

@given(setting())
@settings(max_examples=150, deadline=None)
def test_shift_oracle_and_weil(s):
    ctx, G, chi, a = s
    h = sum_subgroup_shift(chi, a, G)
    d, tab = oracles.char_table(ctx.p, ctx.g, chi.k)
    assert h == hist(d, oracles.histogram(d, (tab[(a + l) % ctx.p] for l in G.elements.tolist())))
    assert h.magnitude <= math.sqrt(ctx.p) + 1e-6


@given(st.sampled_from(primes_in_range(3, 500)), st.data())
@settings(max_examples=80, deadline=None)
def test_full_group_identity(p, data):
    ctx = build_field_ctx(p)
    chi = data.draw(st.sampled_from(canonical_characters(ctx)))
    a = data.draw(st.integers(1, p - 1))
    h = sum_subgroup_shift(chi, a, Subgroup.full(ctx))
    minus = RootSumHistogram(chi.d, np.zeros(chi.d, dtype=np.int64)).counts
    minus[chi(a)] = -1
    assert h.exact() == RootSumHistogram(chi.d, minus).exact()
    assert abs(h.magnitude - 1) < 1e-9


@given(setting(), st.sampled_from(["one", "two", "sqrt", "third"]), st.integers(0, 30))
@settings(max_examples=150, deadline=None)
def test_interval_algos_agree_with_oracle(s, hrule, b):
    ctx, G, chi, a = s
    p = ctx.p
    H = {"one": 1, "two": 2, "sqrt": math.isqrt(p), "third": max(1, p // 3)}[hrule]
    I = Interval(H, b % (p - H))
    direct = sum_interval_subgroup(chi, a, I, G, "direct")
    assert direct == sum_interval_subgroup(chi, a, I, G, "via_ru")
    if H * G.T <= 5000:
        slow = oracles.interval_subgroup_sum(p, ctx.g, chi.k, a, I.H, I.b, G.elements.tolist())
        assert direct == hist(chi.d, slow)
    assert direct.scaled(G.T) == w_interval(chi, a, I, G)


@given(setting())
@settings(max_examples=120, deadline=None)
def test_pair_algos_agree_with_oracle(s):
    ctx, G, chi, a = s
    direct = sum_subgroup_pair(chi, a, G, "direct")
    assert direct == sum_subgroup_pair(chi, a, G, "via_f")
    slow = oracles.subgroup_pair_sum(ctx.p, ctx.g, chi.k, a, G.elements.tolist())
    assert direct == hist(chi.d, slow)
    assert direct.scaled(G.T) == w_pair(chi, a, G)
    assert direct.magnitude <= G.T * math.sqrt(ctx.p) + 1e-6


@given(setting(), st.lists(st.integers(0, 50), min_size=2, max_size=4))
@settings(max_examples=80, deadline=None)
def test_poly_algos_agree(s, coeffs):
    ctx, G, chi, _ = s
    f = Poly(tuple(coeffs))
    if f.degree(ctx.p) < 1:
        return
    I = Interval(min(5, ctx.p - 1))
    assert sum_poly_interval_subgroup(chi, f, I, G, "direct") == sum_poly_interval_subgroup(chi, f, I, G, "via_ru")


def test_linear_poly_is_interval_sum():
    ctx = build_field_ctx(61)
    chi, G, I = Character.of_order(ctx, 3), Subgroup(ctx, 10), Interval(7, 4)
    assert sum_poly_interval_subgroup(chi, Poly.linear(9), I, G) == sum_interval_subgroup(chi, 9, I, G)


def test_large_prime_object_path():
    p = 2**31 + 11  # above the int64 vectorization limit
    ctx = build_field_ctx(p)
    G = Subgroup(ctx, 6)
    chi = Character.of_order(ctx, 2)
    h = sum_subgroup_shift(chi, 5, G)
    brute = [pow((5 + int(l)) % p, (p - 1) // 2, p) for l in G.elements.tolist()]
    assert h.exact() == (sum(1 if v == 1 else -1 for v in brute),)
    assert sum_interval_subgroup(chi, 5, Interval(3), G) == sum_interval_subgroup(chi, 5, Interval(3), G, "via_ru")


# ------------------------------------------------------ exponential sums

def test_sparse_exp_sum_examples():
    p = 7
    ctx = build_field_ctx(p)
    assert abs(sparse_exp_sum(ctx, [(1, 1)]) + 1) < 1e-9
    # x^(p-1) = 1 for every x != 0: p-1 equal phases
    assert abs(abs(sparse_exp_sum(ctx, [(1, p - 1)])) - (p - 1)) < 1e-9
    v = sparse_exp_sum(ctx, [(1, 1), (1, 2)])
    direct = sum(cmath.exp(2j * math.pi * (x + x * x) / p) for x in range(1, p))
    assert abs(v - direct) < 1e-9 and abs(v) <= 2 * math.sqrt(p)


def test_subgroup_exp_sum_examples():
    ctx = build_field_ctx(7)
    X = Poly.parse("0,1")
    assert abs(subgroup_exp_sum(ctx, 1, X, Subgroup.full(ctx)) + 1) < 1e-9
    want = sum(cmath.exp(2j * math.pi * x / 7) for x in (1, 2, 4))
    assert abs(subgroup_exp_sum(ctx, 1, X, Subgroup(ctx, 3)) - want) < 1e-9


@pytest.mark.parametrize("p", [q for q in primes_in_range(3, 100)])
def test_subgroup_exp_sum_substitution(p):
    ctx = build_field_ctx(p)
    f = Poly.parse("0,3,0,1")
    for T in ctx.divisors():
        G = Subgroup(ctx, T)
        lhs = subgroup_exp_sum(ctx, 2, f, G, check=True)
        assert abs(lhs - subgroup_exp_sum_via_powers(ctx, 2, f, T)) < 1e-9


# ----------------------------------------------------------------- moments

def test_moment_examples():
    ctx = build_field_ctx(7)
    chi = Character.legendre(ctx)
    assert davenport_erdos_moment(chi, 2, 1).exact == 10
    for nu in (1, 2, 3):
        assert davenport_erdos_moment(chi, 1, nu).exact == 6
    ctx = build_field_ctx(101)
    r = davenport_erdos_moment(Character.of_order(ctx, 5), 1, 2)
    assert abs(r.value - 100) < 1e-6


@given(st.sampled_from(primes_in_range(5, 120)), st.data())
@settings(max_examples=40, deadline=None)
def test_moment_matches_brute(p, data):
    ctx = build_field_ctx(p)
    chi = data.draw(st.sampled_from(canonical_characters(ctx)))
    R = data.draw(st.integers(1, min(6, p - 1)))
    nu = data.draw(st.integers(1, 3))
    d, tab = oracles.char_table(p, ctx.g, chi.k)
    z = [cmath.exp(2j * math.pi * j / d) for j in range(d)]
    brute = sum(abs(sum(0 if tab[(v + r) % p] is None else z[tab[(v + r) % p]] for r in range(1, R + 1))) ** (2 * nu)
                for v in range(p))
    rep = davenport_erdos_moment(chi, R, nu)
    assert abs(rep.value - brute) <= 1e-9 * max(1.0, brute)
    second = shifted_second_moment(chi, range(1, R + 1))
    if nu == 1:
        assert abs(second.value - brute) <= 1e-9 * max(1.0, brute)
