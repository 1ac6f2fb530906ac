"""Ramanujan, Kloosterman and Gauss sums.

``kloosterman`` evaluates S(m, n; q) either from the definition or by
splitting q into prime powers (twisted multiplicativity) and using the
exact prime-power formulas: vanishing when (m, q) != (n, q), extraction of
gcd(m, n, q), and the closed form when m = l^2 n (mod p^j), p odd, j >= 2.
Powers of 2 and first powers of primes are summed directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from .arith import (
    IntLike,
    ModResidue,
    as_factorization,
    divisor_count,
    inv_mod,
    jacobi,
    ramanujan_sum,
    sqrt_mod_prime_power,
)
from .errors import BudgetExceeded, InvalidInput

__all__ = [
    "KloostermanResult",
    "ramanujan_sum",
    "kloosterman",
    "kloosterman_naive",
    "naive_batch",
    "naive_grid",
    "fast_batch",
    "weil_ratio",
    "t_sum",
    "gauss_partial_sum",
    "cf_denominator",
    "reciprocity_split",
]

TWO_PI = 2 * math.pi


@dataclass
class KloostermanResult:
    value: float
    method: str
    modulus_factor_trace: List[Tuple[int, str]] = field(default_factory=list)

    def __float__(self):
        return float(self.value)


# ------------------------------------------------------------------ naive


def _units(q: int) -> np.ndarray:
    d = np.arange(q, dtype=np.int64)
    return d[np.gcd(d, q) == 1] if q > 1 else np.zeros(1, dtype=np.int64)


@lru_cache(maxsize=256)
def _inverse_table(q: int) -> np.ndarray:
    """inv[d] = d^{-1} mod q for units d, -1 elsewhere."""
    inv = np.full(q, -1, dtype=np.int64)
    if q == 1:
        inv[0] = 0
        return inv
    for d in _units(q):
        inv[d] = pow(int(d), -1, q)
    return inv


def kloosterman_naive(m: int, n: int, q: int) -> float:
    """The definition: sum over units d of e((m dbar + n d)/q)."""
    if q < 1:
        raise InvalidInput(f"modulus must be positive, got {q}")
    if q == 1:
        return 1.0
    d = _units(q)
    inv = _inverse_table(q)[d]
    k = (m % q * inv + n % q * d) % q  # exact residues, then a single phase each
    return float(np.cos(TWO_PI * k / q).sum())


def naive_batch(m, n, q: int, chunk: int = 1 << 22) -> np.ndarray:
    """Definitional sums for many (m, n) with one modulus, chunked to bound memory."""
    m = np.asarray(m, dtype=np.int64) % q
    n = np.asarray(n, dtype=np.int64) % q
    if q == 1:
        return np.ones(m.shape)
    d = _units(q)
    inv = _inverse_table(q)[d]
    out = np.empty(m.shape)
    rows = max(1, chunk // d.size)
    mf, nf, of = m.ravel(), n.ravel(), out.reshape(-1)
    for i in range(0, mf.size, rows):
        k = (np.outer(mf[i : i + rows], inv) + np.outer(nf[i : i + rows], d)) % q
        of[i : i + rows] = np.cos(TWO_PI * k / q).sum(axis=1)
    return out


def naive_grid(q: int) -> np.ndarray:
    """Array S[m, n] for all residues, by one FFT per row of e(m dbar / q)."""
    if q > 6000:
        raise BudgetExceeded(f"naive_grid needs q <= 6000 (q^2 memory), got {q}")
    d = _units(q)
    inv = _inverse_table(q)[d]
    a = np.zeros((q, q), dtype=complex)
    mm = np.arange(q)[:, None]
    a[:, d] = np.exp(2j * np.pi * ((mm * inv[None, :]) % q) / q)
    # sum_d a[m, d] e(n d / q) = q * ifft(a[m, :])[n]
    return (np.fft.ifft(a, axis=1) * q).real


# ----------------------------------------------------------- fast (scalar)


def _closed_form(m: int, n: int, p: int, j: int) -> float:
    """S(m, n; p^j) for p odd, j >= 2, p not dividing mn."""
    q = p**j
    r = m * inv_mod(n, q) % q
    roots = sqrt_mod_prime_power(r, p, j)
    if roots is None:
        return 0.0
    l = roots[0]
    x = l * n % q
    sym = jacobi(x, q)
    theta = TWO_PI * (2 * x % q) / q
    if q % 4 == 1:
        return sym * math.sqrt(q) * 2 * math.cos(theta)
    # eps = i: i e(t) - i e(-t) = -2 sin(2 pi t)
    return -sym * math.sqrt(q) * 2 * math.sin(theta)


def _prime_power(m: int, n: int, p: int, j: int) -> Tuple[float, str]:
    q = p**j
    m %= q
    n %= q
    if p == 2 or j == 1:
        return kloosterman_naive(m, n, q), "naive"
    if m == 0 and n == 0:
        return float(q // p * (p - 1)), "ramanujan"
    if m == 0:
        return float(ramanujan_sum(q, n)), "ramanujan"
    if n == 0:
        return float(ramanujan_sum(q, m)), "ramanujan"
    gm, gn = math.gcd(m, q), math.gcd(n, q)
    if gm != gn:
        return 0.0, "vanishing"
    if gm > 1:
        k = round(math.log(gm, p))
        inner, how = _prime_power(m // gm, n // gm, p, j - k)
        return gm * inner, "gcd_extract+" + how
    return _closed_form(m, n, p, j), "closed_form"


def kloosterman(m: int, n: int, q: IntLike, method: str = "fast") -> KloostermanResult:
    """S(m, n; q) with a record of how each prime-power factor was evaluated."""
    f = as_factorization(q)
    if method == "naive":
        return KloostermanResult(kloosterman_naive(m, n, f.value), "naive", [(f.value, "naive")])
    if method != "fast":
        raise InvalidInput(f"method must be 'naive' or 'fast', got {method!r}")
    value = 1.0
    trace = []
    for p, j in f.factors:
        qi = p**j
        rest = f.value // qi
        twist = inv_mod(rest, qi) ** 2 % qi
        v, how = _prime_power(m * twist, n, p, j)
        value *= v
        trace.append((qi, how))
    if not trace:
        return KloostermanResult(1.0, "naive", [])
    naive = sum(how == "naive" for _, how in trace)
    label = "crt_closed_form" if naive == 0 else ("naive" if naive == len(trace) and len(trace) == 1 else "mixed")
    return KloostermanResult(value, label, trace)


# ------------------------------------------------------------ fast (batch)


@lru_cache(maxsize=256)
def _sqrt_table(q: int) -> np.ndarray:
    """root[r] = some l with l^2 = r (mod q), -1 when r is not a square unit."""
    root = np.full(q, -1, dtype=np.int64)
    u = _units(q)
    root[(u * u) % q] = u
    return root


@lru_cache(maxsize=256)
def _legendre_table(p: int) -> np.ndarray:
    leg = -np.ones(p, dtype=np.int64)
    leg[0] = 0
    u = np.arange(1, p)
    leg[(u * u) % p] = 1
    return leg


def _closed_form_batch(m: np.ndarray, n: np.ndarray, p: int, j: int) -> np.ndarray:
    q = p**j
    inv = _inverse_table(q)
    r = m * inv[n] % q
    l = _sqrt_table(q)[r]
    ok = l >= 0
    x = l * n % q
    sym = _legendre_table(p)[x % p] ** j
    theta = TWO_PI * (2 * x % q) / q
    shape = 2 * np.cos(theta) if q % 4 == 1 else -2 * np.sin(theta)
    return np.where(ok, sym * math.sqrt(q) * shape, 0.0)


def _prime_power_batch(m: np.ndarray, n: np.ndarray, p: int, j: int) -> np.ndarray:
    q = p**j
    m, n = m % q, n % q
    if p == 2 or j == 1:
        return naive_batch(m, n, q)
    out = np.zeros(m.shape)
    gm, gn = np.gcd(m, q), np.gcd(n, q)  # gcd(0, q) = q
    phi = q // p * (p - 1)

    def ram(g):
        k = j - np.round(np.log(g) / math.log(p)).astype(np.int64)
        return np.where(k == 0, phi, np.where(k == 1, -(p ** (j - 1)), 0))

    z_m, z_n = m == 0, n == 0
    out[z_m & z_n] = phi
    sel = z_m & ~z_n
    out[sel] = ram(gn[sel])
    sel = z_n & ~z_m
    out[sel] = ram(gm[sel])
    live = ~z_m & ~z_n & (gm == gn)
    for k in range(j):
        g = p**k
        sel = live & (gm == g)
        if not sel.any():
            continue
        mk, nk = m[sel] // g, n[sel] // g
        if j - k == 1:
            out[sel] = g * naive_batch(mk, nk, p)
        else:
            out[sel] = g * _closed_form_batch(mk, nk, p, j - k)
    return out


def fast_batch(m, n, q: IntLike) -> np.ndarray:
    """Vectorized fast path for many (m, n) with one modulus (q <= 10^6)."""
    f = as_factorization(q)
    if f.value > 10**6:
        raise BudgetExceeded(f"fast_batch tables need q <= 10^6, got {f.value}")
    m = np.asarray(m, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    out = np.ones(np.broadcast(m, n).shape)
    for p, j in f.factors:
        qi = p**j
        twist = pow(f.value // qi, -2, qi) if qi > 1 else 0
        out = out * _prime_power_batch(m % qi * twist % qi, n % qi, p, j)
    return out


def weil_ratio(value, m, n, q: IntLike):
    """|S| / (gcd(m, n, q)^{1/2} q^{1/2} d(q))."""
    f = as_factorization(q)
    g = np.gcd(np.gcd(np.asarray(m), np.asarray(n)), f.value)
    return np.abs(value) / (np.sqrt(g) * math.sqrt(f.value) * divisor_count(f))


# ------------------------------------------------------------------ T-sum


def t_sum(x: int, y: int, z: int, q: IntLike) -> complex:
    """Sum over units a, b with abar - bbar = z (mod q) of e((a x + b y)/q)."""
    f = as_factorization(q)
    qv = f.value
    if qv > 10**6:
        raise BudgetExceeded(f"t_sum evaluates directly and needs q <= 10^6, got {qv}")
    if qv == 1:
        return 1 + 0j
    inv = _inverse_table(qv)
    a = _units(qv)
    bbar = (inv[a] - z) % qv
    ok = np.gcd(bbar, qv) == 1
    a, b = a[ok], inv[bbar[ok]]
    k = (a * (x % qv) + b * (y % qv)) % qv
    return complex(np.exp(2j * np.pi * k / qv).sum())


# ------------------------------------------------------------- Gauss sums


def cf_denominator(x, n_max: int) -> Tuple[int, int]:
    """Last continued-fraction convergent a/q of x with q <= n_max.

    The next convergent has denominator > n_max, so |x - a/q| < 1/(q n_max).
    """
    fx = Fraction(x)
    h0, h1, k0, k1 = 0, 1, 1, 0
    rest = fx
    while True:
        a = math.floor(rest)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > n_max:
            return h0, k0
        frac = rest - a
        if frac == 0:
            return h1, k1
        rest = 1 / frac


def _frac_phase(x: Fraction, k: np.ndarray) -> np.ndarray:
    """(x * k) mod 1 for integer arrays k, exact whenever the reduced denominator allows it."""
    num, den = x.numerator, x.denominator
    if den < 2**31:
        return ((num % den) * (k % den) % den) / den
    shift = den.bit_length() - 1
    if den == 1 << shift and shift <= 64:
        # uint64 products wrap modulo 2^64, a multiple of the denominator
        with np.errstate(over="ignore"):
            r = (np.uint64(num % den) * k.astype(np.uint64)) & np.uint64(den - 1)
        return r.astype(float) / float(den)
    return np.mod(float(x) * k.astype(float), 1.0)


def gauss_partial_sum(alpha, beta, N: int, chunk: int = 1 << 20) -> Tuple[complex, float]:
    """sum_{n <= N} e(alpha n^2 + beta n) and the bound 2N q^{-1/2} + q^{1/2} log q.

    ``alpha`` and ``beta`` may be floats or Fractions; phases are reduced mod 1
    in exact integer arithmetic where the denominator permits.
    """
    if N < 1 or N > 10**7:
        raise InvalidInput(f"gauss_partial_sum needs 1 <= N <= 10^7, got {N}")
    fa, fb = Fraction(alpha), Fraction(beta)
    total = 0j
    for start in range(1, N + 1, chunk):
        n = np.arange(start, min(N, start + chunk - 1) + 1, dtype=np.int64)
        ph = _frac_phase(fa, n * n) + _frac_phase(fb, n)
        total += np.exp(2j * np.pi * ph).sum()
    _, q = cf_denominator(2 * fa, 2 * N)
    bound = 2 * N / math.sqrt(q) + math.sqrt(q) * math.log(q)
    return complex(total), bound


# ------------------------------------------------------------- reciprocity


def reciprocity_split(x: int, a: int, b: int) -> Tuple[ModResidue, ModResidue]:
    """Residues u mod a and v mod b with e(x/(ab)) = e(u/a) e(v/b).

    u = (x mod a) * bbar mod a and v = (x mod b) * abar mod b.
    """
    if a < 1 or b < 1 or math.gcd(a, b) != 1:
        raise InvalidInput(f"reciprocity_split needs coprime positive a, b; got {a}, {b}")
    u = (x % a) * inv_mod(b, a) % a
    v = (x % b) * inv_mod(a, b) % b
    return ModResidue(u, a), ModResidue(v, b)
