import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lmoments.arith import euler_phi, moebius, phi_star
from lmoments.characters import (
    build_group,
    character_pair_sums,
    character_sum_transform,
    enumerate_characters,
    eval_char,
    gauss_sum,
    orthogonality_check,
    primitive_even_pair_sum,
    primitive_pair_sum,
)
from lmoments.errors import InvalidInput


def legendre(a, p):
    r = pow(a, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


# ---- group structure


def test_group_examples():
    g8 = build_group(8)
    assert sorted(g8.orders) == [2, 2]
    assert sorted(n for n in range(8) if g8.dlog(n) is not None) == [1, 3, 5, 7]
    g5 = build_group(5)
    assert [(c.generator, c.order) for c in g5.components] == [(2, 4)]
    g101 = build_group(101)
    assert g101.orders == (100,)


@pytest.mark.parametrize("q", [1, 2, 4, 8, 9, 12, 16, 27, 60, 64, 97, 243, 360, 1024, 2021])
def test_group_invariants(q):
    g = build_group(q)
    assert math.prod(g.orders) == euler_phi(q)
    for c in g.components:
        assert pow(c.generator, c.order, c.prime_power) == 1
        for ell in {p for p in range(2, c.order + 1) if c.order % p == 0 and all(p % r for r in range(2, p))}:
            assert pow(c.generator, c.order // ell, c.prime_power) != 1
    # discrete logs invert exponentiation on every unit
    for n in range(q):
        d = g.dlog(n)
        assert (d is None) == (math.gcd(n, q) != 1)
        if d is None:
            continue
        two = [(c, e) for c, e in zip(g.components, d) if c.prime == 2]
        for c, e in zip(g.components, d):
            if c.prime != 2:
                assert pow(c.generator, e, c.prime_power) == n % c.prime_power
        if len(two) == 2:
            # 2^k with k >= 3: n = (-1)^a 5^b
            (_, a), (c5, b) = two
            assert (-1) ** a * pow(5, b, c5.prime_power) % c5.prime_power == n % c5.prime_power
        elif two:
            c, e = two[0]
            assert pow(c.generator, e, c.prime_power) == n % c.prime_power


def test_power_of_two_components():
    g = build_group(32)
    assert sorted(c.order for c in g.components) == [2, 8]
    assert {c.generator for c in g.components} == {31, 5} or {c.generator for c in g.components} == {5}


# ---- enumeration


def test_enumeration_examples():
    g5 = build_group(5)
    assert len(enumerate_characters(g5, "primitive")) == 3
    even = enumerate_characters(g5, "primitive_even")
    assert len(even) == 1
    assert [round(even[0](n).real) for n in range(5)] == [0, 1, -1, -1, 1]
    for q in (2, 6, 10, 30, 102):
        assert enumerate_characters(build_group(q), "primitive") == []


def test_enumeration_rejects_bad_filter():
    with pytest.raises(InvalidInput):
        enumerate_characters(build_group(5), "real")


def test_enumeration_is_lexicographic():
    g = build_group(24)
    exps = [chi.exponents for chi in enumerate_characters(g)]
    assert exps == sorted(exps) and len(exps) == euler_phi(24)


def test_primitive_counts_match_phi_star():
    for q in range(1, 501):
        chars = enumerate_characters(build_group(q), "all")
        prim = [c for c in chars if c.primitive]
        assert len(prim) == phi_star(q)
        ev = enumerate_characters(build_group(q), "primitive_even")
        od = enumerate_characters(build_group(q), "primitive_odd")
        assert len(ev) + len(od) == len(prim)


def test_parity_and_zeros():
    for q in (7, 15, 16, 45, 77):
        for chi in enumerate_characters(build_group(q)):
            v = chi.values()
            assert abs(v[q - 1] - (-1) ** chi.parity) < 1e-15
            for n in range(q):
                assert (abs(v[n]) == 0) == (math.gcd(n, q) != 1)


# ---- evaluation


def test_eval_examples():
    g = build_group(5)
    chi0 = g.principal()
    assert chi0(3) == 1 and chi0(10) == 0
    quad = next(c for c in enumerate_characters(g) if c.exponents == (2,))
    assert quad(2) == legendre(2, 5) == -1
    for chi in enumerate_characters(build_group(12)):
        assert chi(6) == 0 and chi(-4) == 0


def test_quadratic_matches_legendre():
    for p in (7, 11, 13, 101):
        g = build_group(p)
        quad = g.character(((p - 1) // 2,))
        for n in range(1, p):
            assert quad(n) == legendre(n, p)
            assert abs(quad(n) - quad.values()[n]) < 1e-15


def test_values_are_exact_roots_of_unity():
    for q in (9, 16, 35):
        g = build_group(q)
        L = g.exponent
        for chi in enumerate_characters(g):
            v = chi.values()
            units = np.gcd(np.arange(q), q) == 1
            assert np.max(np.abs(v[units] ** L - 1)) < 1e-13


@pytest.mark.parametrize("q", [3, 8, 12, 25, 36, 105, 128, 199, 200])
def test_multiplicative_rows(q):
    rng = random.Random(q)
    g = build_group(q)
    for chi in enumerate_characters(g):
        v = chi.values()
        for _ in range(100 if q <= 36 else 15):
            a, b = rng.randrange(q), rng.randrange(q)
            assert abs(v[a * b % q] - v[a] * v[b]) < 1e-13
        assert abs(eval_char(chi, 7 * q + 1) - v[1]) < 1e-15


def test_full_orthogonality():
    for q in range(1, 201):
        g = build_group(q)
        mat = np.array([chi.values() for chi in enumerate_characters(g)])
        gram = np.rint((mat.conj().T @ mat).real).astype(int)  # [n, m] = sum_chi chi(m) conj chi(n)
        units = np.gcd(np.arange(q), q) == 1
        expect = np.diag(units.astype(int)) * euler_phi(q)
        assert np.array_equal(gram, expect), q
        assert np.max(np.abs(mat.conj().T @ mat - expect)) < 1e-9


# ---- Gauss sums


def test_gauss_sum_examples():
    quad = enumerate_characters(build_group(5), "primitive_even")[0]
    assert abs(gauss_sum(quad) - math.sqrt(5)) < 1e-12
    for chi in enumerate_characters(build_group(7), "primitive"):
        assert abs(abs(gauss_sum(chi)) - math.sqrt(7)) < 1e-9
    for q in (1, 6, 12, 30, 31):
        assert abs(gauss_sum(build_group(q).principal()) - moebius(q)) < 1e-9


def test_gauss_sum_modulus():
    for q in range(3, 301):
        for chi in enumerate_characters(build_group(q), "primitive"):
            assert abs(abs(gauss_sum(chi)) - math.sqrt(q)) < 1e-9


# ---- orthogonality over primitive even characters


def test_orthogonality_examples():
    lhs, rhs = orthogonality_check(5, 1, 1)
    assert abs(lhs - 1) < 1e-12 and rhs == 1
    lhs, rhs = orthogonality_check(4, 1, 3)
    assert abs(lhs - float(rhs)) < 1e-12 and rhs.denominator == 1
    assert orthogonality_check(1, 1, 1) == (1, 1)
    with pytest.raises(InvalidInput):
        orthogonality_check(6, 2, 1)


def test_orthogonality_identity_sweep():
    rng = random.Random(7)
    for q in range(1, 201):
        if q % 4 == 2:
            continue
        pairs = [(m, n) for m in range(1, q + 1) for n in range(1, q + 1)
                 if math.gcd(m * n, q) == 1]
        for m, n in rng.sample(pairs, min(50, len(pairs))):
            lhs, rhs = orthogonality_check(q, m, n)
            assert rhs.denominator == 1
            assert round(lhs.real) == rhs and abs(lhs.imag) < 1e-9


def test_pair_sums_against_enumeration():
    for q in (1, 8, 12, 45, 64, 75, 99):
        g = build_group(q)
        allc = np.array([c.values() for c in enumerate_characters(g)])
        prim = [c.values() for c in enumerate_characters(g, "primitive")]
        even = [c.values() for c in enumerate_characters(g, "primitive_even")]
        ns = np.arange(-q, 2 * q)
        for m in (1, 2, 5, 7, -1):
            if math.gcd(m, q) != 1:
                continue
            got = character_pair_sums(q, ns, m)
            ref = np.rint((allc[:, ns % q] * allc[:, [m % q]].conj()).sum(axis=0).real)
            assert np.array_equal(got, ref)
            for n in range(1, q + 1):
                p_ref = sum(v[m % q] * np.conj(v[n % q]) for v in prim)
                assert abs(primitive_pair_sum(q, m, n) - p_ref) < 1e-9
                e_ref = sum(v[m % q] * np.conj(v[n % q]) for v in even)
                assert abs(float(primitive_even_pair_sum(q, m, n)) - e_ref) < 1e-9


def test_character_sum_transform():
    q = 45
    g = build_group(q)
    z = np.random.default_rng(1).normal(size=q) + 0j
    got = character_sum_transform(g, z)
    ref = np.array([np.dot(c.values(), z) for c in enumerate_characters(g)])
    assert np.max(np.abs(got - ref)) < 1e-11


# ---- conductors


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 400))
def test_conductor_and_induction(q):
    g = build_group(q)
    for chi in enumerate_characters(g)[:30]:
        f = chi.conductor
        assert q % f == 0
        assert chi.primitive == (f == q)
        prim = chi.induced_from_conductor()
        assert prim.primitive and prim.q == f and prim.parity == chi.parity
        for n in range(1, q):
            if math.gcd(n, q) == 1:
                assert abs(chi(n) - prim(n)) < 1e-12


def test_conductor_examples():
    g = build_group(45)
    cond = sorted({c.conductor for c in enumerate_characters(g)})
    assert cond == [1, 3, 5, 9, 15, 45]
    g16 = build_group(16)
    assert sorted({c.conductor for c in enumerate_characters(g16)}) == [1, 4, 8, 16]


# ---- cache


def test_dlog_cache_round_trip(tmp_path, monkeypatch):
    from lmoments import characters

    monkeypatch.setenv(characters.CACHE_ENV, str(tmp_path))
    characters._build_group.cache_clear()
    g = build_group(1009)
    files = list(tmp_path.glob("dlog_1009*"))
    assert len(files) == 1
    characters._build_group.cache_clear()
    again = build_group(1009)
    assert all(np.array_equal(a, b) for a, b in zip(g.dlog_tables, again.dlog_tables))
    # a corrupted blob is ignored and rebuilt
    files[0].write_bytes(b"garbage")
    characters._build_group.cache_clear()
    third = build_group(1009)
    assert all(np.array_equal(a, b) for a, b in zip(g.dlog_tables, third.dlog_tables))
    characters._build_group.cache_clear()
