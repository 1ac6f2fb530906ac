"""Exact integer arithmetic: factorization, multiplicative functions, CRT,
modular inverses and square roots modulo prime powers.

Everything here is pure and works on Python ints, so results are exact.
A few sieve helpers return numpy arrays for the bulk harnesses in
:mod:`lmoments.sums`.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidInput

MAX_FACTOR_INPUT = 2**62
_TRIAL_LIMIT = 10**6
# Deterministic Miller-Rabin witnesses, valid for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class Factorization:
    """Canonical prime factorization of a positive integer."""

    value: int
    factors: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise InvalidInput(f"non-canonical factor list {self.factors}")
            last = p
            prod *= p**e
        if prod != self.value:
            raise InvalidInput(f"factors {self.factors} do not multiply to {self.value}")

    def __int__(self) -> int:
        return self.value

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def prime_powers(self) -> Tuple[int, ...]:
        return tuple(p**e for p, e in self.factors)

    def radical(self) -> int:
        """Largest square-free divisor (q* in the usual notation)."""
        return math.prod(self.primes)


@dataclass(frozen=True)
class ModResidue:
    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1 or not 0 <= self.value < self.modulus:
            raise InvalidInput(f"residue {self.value} not in [0, {self.modulus})")


IntLike = Union[int, Factorization]


def as_factorization(q: IntLike) -> Factorization:
    if isinstance(q, Factorization):
        return q
    return factorize(int(q))


# ---------------------------------------------------------------- primality


@lru_cache(maxsize=1)
def _small_primes() -> Tuple[int, ...]:
    return tuple(int(p) for p in primes_up_to(_TRIAL_LIMIT))


def primes_up_to(n: int) -> np.ndarray:
    """Sieve of Eratosthenes; primes <= n as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin with fixed bases; deterministic for n < 2^64."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int, seed: int) -> int:
    """Brent's variant of Pollard rho; returns a nontrivial factor of composite n."""
    if n % 2 == 0:
        return 2
    rng = random.Random(seed)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
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
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split(n: int, out: dict) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _brent(n, seed=n)
    _split(d, out)
    _split(n // d, out)


@lru_cache(maxsize=65536)
def factorize(n: int) -> Factorization:
    """Factor ``1 <= n <= 2^62``: trial division by primes below 10^6, then Brent-Pollard rho."""
    n = int(n)
    if n < 1 or n > MAX_FACTOR_INPUT:
        raise InvalidInput(f"factorize needs 1 <= n <= 2^62, got {n}")
    found: dict = {}
    m = n
    for p in _small_primes():
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    if m > 1:
        if m <= _TRIAL_LIMIT**2 or is_probable_prime(m):
            found[m] = found.get(m, 0) + 1
        else:
            _split(m, found)
    return Factorization(n, tuple(sorted(found.items())))


# ------------------------------------------------------ multiplicative functions


def euler_phi(f: IntLike) -> int:
    f = as_factorization(f)
    return math.prod(p ** (e - 1) * (p - 1) for p, e in f.factors)


def moebius(f: IntLike) -> int:
    f = as_factorization(f)
    if any(e > 1 for _, e in f.factors):
        return 0
    return -1 if len(f.factors) % 2 else 1


def divisor_count(f: IntLike) -> int:
    f = as_factorization(f)
    return math.prod(e + 1 for _, e in f.factors)


def divisors(f: IntLike) -> list:
    """Sorted list of positive divisors."""
    f = as_factorization(f)
    ds = [1]
    for p, e in f.factors:
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def sigma_lambda(n: IntLike, lam: complex = 0) -> Union[int, complex]:
    """sum_{d | n} d^lam, built from the factorization as a product of geometric sums.

    Returns the exact integer when ``lam`` is a non-negative int (so lam = 0 gives d(n)).
    """
    f = as_factorization(n)
    if isinstance(lam, int) and lam >= 0:
        return math.prod(sum(p ** (k * lam) for k in range(e + 1)) for p, e in f.factors)
    lam = complex(lam)
    out = 1 + 0j
    for p, e in f.factors:
        r = complex(p) ** lam
        # direct partial sum: the closed form (r^(e+1)-1)/(r-1) is 0/0 when r = 1
        term, acc = 1 + 0j, 1 + 0j
        for _ in range(e):
            term *= r
            acc += term
        out *= acc
    return out


def sigma_alpha_beta(n: int, alpha: complex, beta: complex) -> complex:
    """sigma_{alpha,beta}(n) = sum_{ad = n} a^{-alpha} d^{-beta}."""
    return complex(n) ** (-complex(alpha)) * complex(sigma_lambda(n, complex(alpha - beta)))


def coprime_part(q: IntLike, k: int) -> int:
    """Largest divisor of q coprime with k (q_k)."""
    f = as_factorization(q)
    return math.prod(p**e for p, e in f.factors if k % p != 0)


def phi_star(q: IntLike) -> int:
    """Number of primitive characters mod q: sum_{d|q} mu(q/d) phi(d)."""
    f = as_factorization(q)
    out = 1
    for p, e in f.factors:
        out *= (p - 2) if e == 1 else p ** (e - 2) * (p - 1) ** 2
    return out


def ramanujan_sum(q: IntLike, n: int) -> int:
    """c_q(n) = mu(q/g) phi(q) / phi(q/g) with g = gcd(n, q)."""
    f = as_factorization(q)
    g = math.gcd(n, f.value)
    h = f.value // g
    return moebius(h) * euler_phi(f) // euler_phi(h)


def unit_root_sum(k, N: int):
    """sum_{j mod N} e(jk/N), evaluated exactly as a geometric series: N if N | k, else 0.

    ``k`` may be an integer array; the result then has the same shape.
    """
    if N < 1:
        raise InvalidInput(f"N must be positive, got {N}")
    if isinstance(k, (int, np.integer)):
        return N if k % N == 0 else 0
    k = np.asarray(k, dtype=np.int64)
    return np.where(k % N == 0, N, 0)


# ----------------------------------------------------------- modular helpers


def inv_mod(a: int, m: int) -> int:
    if m == 1:
        return 0
    try:
        return pow(a, -1, m)
    except ValueError:
        raise InvalidInput(f"{a} is not invertible mod {m}") from None


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> int:
    """The x mod m1*m2 with x = r1 (m1), x = r2 (m2); moduli coprime."""
    if math.gcd(m1, m2) != 1:
        raise InvalidInput(f"CRT moduli {m1}, {m2} are not coprime")
    return (r1 + m1 * ((r2 - r1) * inv_mod(m1, m2) % m2)) % (m1 * m2)


def crt(residues: Sequence[int], moduli: Sequence[int]) -> int:
    x, m = 0, 1
    for r, mi in zip(residues, moduli):
        x = crt_pair(x, m, r % mi, mi)
        m *= mi
    return x


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise InvalidInput(f"Jacobi symbol needs odd positive modulus, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _tonelli_shanks(a: int, p: int) -> Optional[int]:
    a %= p
    if legendre(a, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def sqrt_mod_prime_power(a: int, p: int, j: int) -> Optional[Tuple[int, int]]:
    """Both square roots of a modulo p^j (p odd, p not dividing a), or None.

    Tonelli-Shanks modulo p, then Hensel lifting one power at a time.
    """
    if p % 2 == 0 or p < 3 or not is_probable_prime(p):
        raise InvalidInput(f"sqrt_mod_prime_power needs an odd prime, got p={p}")
    if j < 1:
        raise InvalidInput(f"exponent must be positive, got j={j}")
    if a % p == 0:
        raise InvalidInput(f"p={p} divides a={a}")
    x = _tonelli_shanks(a, p)
    if x is None:
        return None
    pk = p
    for _ in range(1, j):
        pk *= p
        x = (x - (x * x - a) * inv_mod(2 * x, pk)) % pk
    return tuple(sorted((x, pk - x)))


def primitive_root(p: int, k: int = 1) -> int:
    """Smallest primitive root modulo p^k (p odd prime)."""
    phi = (p - 1) * p ** (k - 1)
    qs = factorize(phi).primes
    m = p**k
    g = 2
    while True:
        if g % p and all(pow(g, phi // r, m) != 1 for r in qs):
            return g
        g += 1


# ------------------------------------------------------------ sieve helpers


def sieve_mu_phi(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Arrays mu[0..n], phi[0..n] (index 0 unused)."""
    mu = np.ones(n + 1, dtype=np.int64)
    phi = np.arange(n + 1, dtype=np.int64)
    for p in primes_up_to(n):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
        phi[p::p] -= phi[p::p] // p
    mu[0] = 0
    return mu, phi


def coprime_mask(n: int, q: IntLike) -> np.ndarray:
    """Boolean mask over 0..n of gcd(k, q) == 1."""
    mask = np.ones(n + 1, dtype=bool)
    mask[0] = as_factorization(q).value == 1
    for p in as_factorization(q).primes:
        mask[::p] = False
    return mask


def iter_coprime(q: int, upto: int) -> Iterator[int]:
    for k in range(1, upto + 1):
        if math.gcd(k, q) == 1:
            yield k
