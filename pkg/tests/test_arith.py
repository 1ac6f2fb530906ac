import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lmoments.arith import (
    Factorization,
    coprime_part,
    crt,
    divisor_count,
    divisors,
    euler_phi,
    factorize,
    inv_mod,
    moebius,
    phi_star,
    ramanujan_sum,
    sigma_alpha_beta,
    sigma_lambda,
    sieve_mu_phi,
    sqrt_mod_prime_power,
    unit_root_sum,
)
from lmoments.characters import build_group, enumerate_characters
from lmoments.errors import InvalidInput


def brute_phi(n):
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def brute_prime(n):
    return n > 1 and all(n % d for d in range(2, math.isqrt(n) + 1))


# ---- factorize


def test_factorize_examples():
    assert factorize(12).factors == ((2, 2), (3, 1))
    assert factorize(1).factors == ()
    assert factorize(999983).factors == ((999983, 1),)
    assert brute_prime(999983)


def test_factorize_zero_rejected():
    with pytest.raises(InvalidInput):
        factorize(0)


def test_factorize_large_semiprime():
    p, q = 1000000007, 998244353
    assert factorize(p * q).factors == ((q, 1), (p, 1))
    assert factorize(2**61 - 1).factors == ((2**61 - 1, 1),)


def test_factorization_rejects_noncanonical():
    with pytest.raises(InvalidInput):
        Factorization(12, ((3, 1), (2, 2)))
    with pytest.raises(InvalidInput):
        Factorization(10, ((2, 1), (3, 1)))


def test_factorize_round_trip_range():
    for n in range(1, 20001):
        f = factorize(n)
        assert math.prod(p**e for p, e in f.factors) == n
        assert all(brute_prime(p) for p in f.primes)


@given(st.integers(1, 10**6))
def test_factorize_round_trip(n):
    f = factorize(n)
    assert math.prod(p**e for p, e in f.factors) == n
    assert list(f.primes) == sorted(set(f.primes))


# ---- multiplicative functions


def test_phi_examples():
    assert euler_phi(1) == 1
    assert euler_phi(12) == 4
    for p in (2, 3, 101, 7919):
        assert euler_phi(p) == p - 1


def test_moebius_examples():
    assert moebius(1) == 1
    assert moebius(12) == 0
    assert moebius(30) == -1


def test_sigma_examples():
    assert sigma_lambda(6, 0) == 4
    assert sigma_lambda(6, 1) == 12
    assert sigma_lambda(4, -1) == pytest.approx(1.75, abs=1e-15)


def test_functions_match_brute_force():
    mu, phi = sieve_mu_phi(500)
    for n in range(1, 501):
        assert euler_phi(n) == brute_phi(n) == phi[n]
        assert moebius(n) == mu[n]
        assert divisor_count(n) == len(divisors(n)) == sum(1 for d in range(1, n + 1) if n % d == 0)


@settings(max_examples=200)
@given(st.integers(1, 3000), st.integers(1, 3000))
def test_multiplicativity(m, n):
    if math.gcd(m, n) != 1:
        return
    assert euler_phi(m * n) == euler_phi(m) * euler_phi(n)
    assert moebius(m * n) == moebius(m) * moebius(n)
    assert divisor_count(m * n) == divisor_count(m) * divisor_count(n)
    lam = complex(0.3, -1.7)
    assert abs(sigma_lambda(m * n, lam) - sigma_lambda(m, lam) * sigma_lambda(n, lam)) <= 1e-12 * abs(
        sigma_lambda(m * n, lam)
    )


@given(st.integers(1, 10**5), st.complex_numbers(max_magnitude=2), st.complex_numbers(max_magnitude=2))
def test_sigma_alpha_beta_identity(n, a, b):
    direct = sum(d ** (-a) * (n // d) ** (-b) for d in divisors(n))
    assert abs(sigma_alpha_beta(n, a, b) - direct) <= 1e-12 * max(1.0, abs(direct))
    assert abs(sigma_alpha_beta(n, a, b) - n ** (-a) * sigma_lambda(n, a - b)) <= 1e-12 * max(1.0, abs(direct))


# ---- q_k


def test_coprime_part_examples():
    assert coprime_part(12, 2) == 3
    assert coprime_part(12, 5) == 12
    assert coprime_part(12, 6) == 1


@given(st.integers(1, 10**5), st.integers(-1000, 1000))
def test_coprime_part_properties(q, k):
    qk = coprime_part(q, k)
    assert q % qk == 0
    assert math.gcd(qk, k) == 1
    for p in factorize(q).primes:
        if k % p:
            assert qk % p == 0 and (q // qk) % p
    # maximality: the cofactor is built only from primes dividing k
    assert all(k % p == 0 for p in factorize(q // qk).primes)


# ---- square roots


def test_sqrt_examples():
    assert set(sqrt_mod_prime_power(4, 3, 2)) == {2, 7}
    assert set(sqrt_mod_prime_power(2, 7, 1)) == {3, 4}
    assert sqrt_mod_prime_power(3, 7, 1) is None
    assert {x for x in range(7) if x * x % 7 == 2} == {3, 4}
    assert not [x for x in range(7) if x * x % 7 == 3]


def test_sqrt_errors():
    with pytest.raises(InvalidInput):
        sqrt_mod_prime_power(1, 2, 3)
    with pytest.raises(InvalidInput):
        sqrt_mod_prime_power(9, 3, 2)


@given(st.sampled_from([3, 5, 7, 11, 13, 101, 1009]), st.integers(1, 5), st.integers(1, 10**9))
def test_sqrt_squares_back(p, j, a):
    if a % p == 0:
        return
    q = p**j
    res = sqrt_mod_prime_power(a, p, j)
    is_qr = pow(a, (p - 1) // 2, p) == 1
    assert (res is not None) == is_qr
    if res:
        l1, l2 = res
        assert l1 * l1 % q == a % q and l2 * l2 % q == a % q
        assert (l1 + l2) % q == 0


# ---- phi*


def test_phi_star_examples():
    for q in (2, 6, 10, 14, 102):
        assert phi_star(q) == 0
    assert phi_star(8) == 2 == len(enumerate_characters(build_group(8), "primitive"))
    assert phi_star(3) == 1 == len(enumerate_characters(build_group(3), "primitive"))


def test_phi_star_nonnegative_and_divisor_sum():
    for q in range(1, 3001):
        val = sum(moebius(q // d) * euler_phi(d) for d in divisors(q))
        assert phi_star(q) == val >= 0


def test_phi_star_counts_primitive_characters():
    for q in range(1, 501):
        assert phi_star(q) == len(enumerate_characters(build_group(q), "primitive")), q


# ---- Ramanujan sums and helpers


def test_ramanujan_examples():
    assert ramanujan_sum(12, 0) == 4
    assert ramanujan_sum(5, 1) == -1
    assert ramanujan_sum(6, 4) == -1
    oracle = sum(np.exp(2j * np.pi * 4 * x / 6) for x in range(6) if math.gcd(x, 6) == 1)
    assert abs(oracle - (-1)) < 1e-12


@given(st.integers(1, 300), st.integers(-1000, 1000))
def test_ramanujan_against_exponential_sum(q, n):
    oracle = sum(np.exp(2j * np.pi * n * x / q) for x in range(1, q + 1) if math.gcd(x, q) == 1)
    assert abs(ramanujan_sum(q, n) - oracle) < 1e-9


def test_unit_root_sum():
    assert unit_root_sum(0, 7) == 7
    assert unit_root_sum(3, 7) == 0
    assert list(unit_root_sum(np.array([0, 1, 6, 12]), 6)) == [6, 0, 6, 6]
    with pytest.raises(InvalidInput):
        unit_root_sum(1, 0)


@given(st.integers(-10**6, 10**6), st.integers(2, 10**4))
def test_inverse_and_crt(a, m):
    if math.gcd(a, m) != 1:
        with pytest.raises(InvalidInput):
            inv_mod(a, m)
        return
    assert a * inv_mod(a, m) % m == 1
    x = crt([a % m, 1], [m, m + 1])
    assert x % m == a % m and x % (m + 1) == 1


def test_exact_rational_identity_small():
    # sum_{d | q} phi(d)/d mu(q/d) = mu(q)/q
    for q in range(1, 200):
        assert sum(Fraction(euler_phi(d), d) * moebius(q // d) for d in divisors(q)) == Fraction(moebius(q), q)
