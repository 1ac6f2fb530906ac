"""Estermann D-functions with additive twist, optional character and coprimality filters.

Every value in the continued region is assembled from one Hurwitz table per
(s, modulus):

    D(s, lam, h/M, chi) = M^{lam - 2s} sum_{u,v mod M} chi(uv) e(uvh/M) zeta(s, u/M) zeta(s - lam, v/M).

The periodic zeta F(s, u/M) = sum_n e(nu/M) n^{-s} is a discrete Fourier
transform of the same table.  Functional-equation right-hand sides are built
from these pieces and compared with the left-hand side; an independent
"direct" evaluator sums the Dirichlet series by residue classes for Re s > 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np

from .arith import IntLike, as_factorization, divisors, euler_phi, inv_mod, moebius
from .characters import DirichletCharacter, build_group, enumerate_characters
from .errors import BudgetExceeded, InvalidInput, NumericalInstability, PoleError
from .special import DEFAULT_PRECISION, PrecisionConfig, hurwitz_zeta, log_gamma, riemann_zeta, zeta_q

VALUE_MAX_MODULUS = 200
FE_MAX_MODULUS = 60
MIN_POLE_GAP = 0.05
_TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class EstermannPoint:
    """Arguments of D(s, lam, h/(lq), chi); ``r`` is set only for the coprime-pair variant."""

    s: complex
    lam: complex
    h: int
    l: int
    q: int = 1
    character: Optional[DirichletCharacter] = None
    r: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "lam", complex(self.lam))
        if self.l < 1 or self.q < 1:
            raise InvalidInput("l and q must be positive")
        if self.character is not None and self.character.q != self.q:
            raise InvalidInput(f"character modulus {self.character.q} differs from q = {self.q}")

    @property
    def modulus(self) -> int:
        return self.l * self.q

    def at(self, s: complex) -> "EstermannPoint":
        return EstermannPoint(s, self.lam, self.h, self.l, self.q, self.character, self.r)


# ------------------------------------------------------------ kernels


@lru_cache(maxsize=512)
def _hurwitz_row(s: complex, M: int, prec: PrecisionConfig) -> np.ndarray:
    """zeta(s, w/M) for w = 1..M."""
    row = hurwitz_zeta(s, np.arange(1, M + 1) / M, prec)
    row.setflags(write=False)
    return row


@lru_cache(maxsize=512)
def _phase_matrix(h: int, M: int) -> np.ndarray:
    u = np.arange(1, M + 1, dtype=np.int64)
    E = np.exp(2j * np.pi * (np.outer(u, u) * (h % M) % M) / M)
    E.setflags(write=False)
    return E


def _tile(values: np.ndarray, M: int) -> np.ndarray:
    """Periodic extension of ``values`` (indexed 0..len-1) to n = 1..M."""
    return values[np.arange(1, M + 1) % len(values)]


def _unit_mask(k: int, M: int) -> np.ndarray:
    return (np.gcd(np.arange(1, M + 1), k) == 1).astype(float)


def _d_core(s: complex, lam: complex, h: int, M: int, chi: Optional[np.ndarray],
            prec: PrecisionConfig) -> complex:
    s, lam = complex(s), complex(lam)
    if s == 1 or s - lam == 1:
        raise PoleError(f"D has a pole at s = {s}")
    a = _hurwitz_row(s, M, prec)
    b = _hurwitz_row(s - lam, M, prec)
    if chi is not None:
        a, b = a * chi, b * chi
    return complex(M ** (lam - 2 * s) * (a @ _phase_matrix(h, M) @ b))


def _char_vector(pt: EstermannPoint) -> Optional[np.ndarray]:
    if pt.character is None:
        return None
    return _tile(pt.character.values(), pt.modulus)


def estermann_value(pt: EstermannPoint, prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """D(s, lam, h/(lq), chi) through the Hurwitz double sum; valid for every s off the poles."""
    if pt.modulus > VALUE_MAX_MODULUS:
        raise BudgetExceeded(f"lq = {pt.modulus} exceeds {VALUE_MAX_MODULUS}")
    return _d_core(pt.s, pt.lam, pt.h, pt.modulus, _char_vector(pt), prec)


@lru_cache(maxsize=512)
def _periodic_zeta_row(s: complex, M: int, prec: PrecisionConfig) -> np.ndarray:
    """F(s, u/M) for u = 0..M-1."""
    if s == 1:
        raise PoleError("periodic zeta at s = 1 includes the pole of zeta(s)")
    row = _hurwitz_row(s, M, prec)
    w = np.arange(1, M + 1)
    E = np.exp(2j * np.pi * np.outer(np.arange(M), w) / M)
    out = M ** (-s) * (E @ row)
    out.setflags(write=False)
    return out


def periodic_zeta(s: complex, u: int, M: int, prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """F(s, u/M) = sum_{n >= 1} e(nu/M) n^{-s}, continued in s."""
    return complex(_periodic_zeta_row(complex(s), M, prec)[u % M])


def a_sums(s: complex, lam: complex, h: int, M: int, chi: Optional[np.ndarray] = None,
           prec: PrecisionConfig = DEFAULT_PRECISION) -> Tuple[complex, complex]:
    """The pair sum_{u,v} chi(uv) e(uvh/M) F(s, u/M) F(s+lam, +-v/M)."""
    s, lam = complex(s), complex(lam)
    idx = np.arange(1, M + 1) % M
    f1 = _periodic_zeta_row(s, M, prec)[idx]
    f2 = _periodic_zeta_row(s + lam, M, prec)
    plus, minus = f2[idx], f2[(-idx) % M]
    if chi is not None:
        f1, plus, minus = f1 * chi, plus * chi, minus * chi
    E = _phase_matrix(h, M)
    left = f1 @ E
    return complex(left @ plus), complex(left @ minus)


# ------------------------------------------------------------ direct series


def _class_sums(s: complex, M: int, n_terms: int) -> Tuple[np.ndarray, float]:
    """sum_{n = w (mod M)} n^{-s} for w = 1..M, with a midpoint-rule tail.

    Returns the sums and a bound for the tail correction error.
    """
    s = complex(s)
    if s.real <= 1:
        raise InvalidInput("direct class sums need Re s > 1")
    K = max(2, -(-n_terms // M))
    n = np.arange(1, K * M + 1, dtype=float).reshape(K, M)
    head = np.sum(n ** (-s), axis=0)
    edge = (K - 0.5) * M + np.arange(1, M + 1)
    tail = edge ** (1 - s) / (M * (s - 1))
    err = abs(s * (s + 1)) * M * float(np.min(edge)) ** (-s.real - 1) / (24 * (s.real + 1))
    return head + tail, err


def direct_series(s: complex, lam: complex, coef: np.ndarray, n_terms: int = 200_000) -> complex:
    """sum_{a,b >= 1} coef[a mod M, b mod M] a^{lam-s} b^{-s} for Re s, Re(s-lam) > 1.

    ``coef`` is an (M, M) array indexed by residues 1..M (row = class of a).
    """
    M = coef.shape[0]
    za, _ = _class_sums(complex(s) - complex(lam), M, n_terms)
    zb, _ = _class_sums(complex(s), M, n_terms)
    return complex(za @ coef @ zb)


def _require_direct(s: complex, lam: complex) -> None:
    if min(s.real, (s - lam).real) <= 1.25:
        raise InvalidInput("direct series needs Re s and Re(s - lam) above 1.25")


def estermann_direct(pt: EstermannPoint, n_terms: int = 200_000) -> complex:
    """The defining Dirichlet series, summed by residue classes (Re s > 1.25 only)."""
    _require_direct(pt.s, pt.lam)
    M = pt.modulus
    coef = np.array(_phase_matrix(pt.h, M))
    chi = _char_vector(pt)
    if chi is not None:
        coef = coef * np.outer(chi, chi)
    return direct_series(pt.s, pt.lam, coef, n_terms)


# ------------------------------------------------------------ functional equations


def _gamma(z: complex) -> complex:
    return complex(np.exp(log_gamma(z)))


def _inv_or_zero(h: int, l: int) -> int:
    return 0 if l == 1 else inv_mod(h, l)


def classical_fe_rhs(s: complex, lam: complex, h: int, l: int,
                     value: Optional[Callable[[complex, complex, int, int], complex]] = None,
                     prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """Right side of the classical functional equation for D(1/2 + s, lam, h/l)."""
    s, lam = complex(s), complex(lam)
    if math.gcd(h, l) != 1:
        raise InvalidInput(f"gcd(h, l) = {math.gcd(h, l)} != 1")
    if value is None:
        def value(s_, lam_, h_, l_):
            return _d_core(s_, lam_, h_, l_, None, prec)
    hb = _inv_or_zero(h, l)
    pre = 2 * _TWO_PI ** (-1 - lam + 2 * s) * _gamma(0.5 - s) * _gamma(0.5 + lam - s) * l ** (lam - 2 * s)
    minus = value(0.5 - s, -lam, -hb, l)
    plus = value(0.5 - s, -lam, hb, l)
    return complex(pre * (minus * np.sin(np.pi * (s - lam / 2)) + plus * np.cos(np.pi * lam / 2)))


def classical_fe_twice(s: complex, lam: complex, h: int, l: int,
                       prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """D(1/2 + s, lam, h/l) after applying the functional equation twice."""
    def once(s_, lam_, h_, l_):
        return classical_fe_rhs(complex(s_) - 0.5, lam_, h_, l_, prec=prec)
    return classical_fe_rhs(s, lam, h, l, value=once, prec=prec)


def character_fe_rhs(s: complex, lam: complex, h: int, M: int, chi: Optional[np.ndarray] = None,
                     prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """Right side of the functional equation of D(s, lam, h/M, chi) through the F-pair sums."""
    s, lam = complex(s), complex(lam)
    a1, a2 = a_sums(1 - s, lam, h, M, chi, prec)
    pre = 2 * _TWO_PI ** (-2 - lam + 2 * s) * M ** (lam - 2 * s) * _gamma(1 - s) * _gamma(1 + lam - s)
    return complex(pre * (-np.cos(np.pi * (2 * s - lam) / 2) * a1 + np.cos(np.pi * lam / 2) * a2))


def squarefree_fe_rhs(s: complex, lam: complex, h: int, l: int, q: IntLike,
                      prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """Right side for D(s, lam, h/(lq), chi_0) with q square-free and q, l, h pairwise coprime.

    Runs over factorizations q = q1 q2 q3 and reduced residues r mod q2, each term a
    classical D at 1 - s with numerator the inverse of the CRT residue x_r.
    """
    s, lam = complex(s), complex(lam)
    f = as_factorization(q)
    qv = f.value
    if moebius(f) == 0:
        raise InvalidInput(f"q = {qv} is not square-free")
    if math.gcd(h, l * qv) != 1 or math.gcd(l, qv) != 1:
        raise InvalidInput("q, l, h must be pairwise coprime")
    c_minus = -np.cos(np.pi * (2 * s - lam) / 2)
    c_plus = np.cos(np.pi * lam / 2)
    total = 0j
    for q1 in divisors(qv):
        for q2 in divisors(qv // q1):
            q3 = qv // (q1 * q2)
            mu = moebius(q2 * q3)
            if mu == 0:
                continue
            lq1, N = l * q1, l * q1 * q2
            base = h * _inv_or_zero(q3 % lq1, lq1) % lq1 if lq1 > 1 else 0
            acc = 0j
            for r in range(q2):
                if math.gcd(r, q2) != 1:
                    continue
                x = _crt2(r, q2, base, lq1)
                xb = _inv_or_zero(x, N)
                acc += c_minus * _d_core(1 - s, -lam, -xb, N, None, prec)
                acc += c_plus * _d_core(1 - s, -lam, xb, N, None, prec)
            total += mu / (q2 * q3) * N ** (1 + lam - 2 * s) * acc
    pre = 2 * _TWO_PI ** (-2 - lam + 2 * s) * _gamma(1 - s) * _gamma(1 + lam - s)
    return complex(pre * total)


def _crt2(r1: int, m1: int, r2: int, m2: int) -> int:
    if m1 == 1:
        return r2 % m2
    if m2 == 1:
        return r1 % m1
    return (r1 + m1 * ((r2 - r1) * inv_mod(m1, m2) % m2)) % (m1 * m2)


FE_MODES = ("classical", "character", "squarefree")


def _through_removable(f: Callable[[complex], complex], s: complex, radius: float = 1e-3,
                       nodes: int = 16) -> complex:
    """f(s), or its circle mean when single terms of f sit on poles that cancel in the sum."""
    try:
        return f(s)
    except PoleError:
        theta = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
        return complex(np.mean([f(s + radius * np.exp(1j * t)) for t in theta]))


def estermann_fe_residual(pt: EstermannPoint, mode: str = "classical",
                          prec: PrecisionConfig = DEFAULT_PRECISION) -> float:
    """|LHS - RHS| of a functional equation at ``pt``.

    ``classical``: pt.s is the offset, LHS = D(1/2 + s, lam, h/l) with q = 1.
    ``character``: LHS = D(s, lam, h/(lq), chi) against the F-pair form.
    ``squarefree``: LHS = D(s, lam, h/(lq), chi_0) against the q1 q2 q3 expansion.
    """
    if mode not in FE_MODES:
        raise InvalidInput(f"unknown mode {mode!r}; expected one of {FE_MODES}")
    M = pt.modulus
    if M > FE_MAX_MODULUS:
        raise BudgetExceeded(f"lq = {M} exceeds {FE_MAX_MODULUS} for functional-equation checks")
    if mode == "classical":
        if pt.q != 1 or pt.character is not None:
            raise InvalidInput("classical mode needs q = 1 and no character")
        lhs = _d_core(0.5 + pt.s, pt.lam, pt.h, pt.l, None, prec)
        rhs = _through_removable(lambda z: classical_fe_rhs(z, pt.lam, pt.h, pt.l, prec=prec), pt.s)
    elif mode == "character":
        chi = _char_vector(pt)
        lhs = _d_core(pt.s, pt.lam, pt.h, M, chi, prec)
        rhs = _through_removable(lambda z: character_fe_rhs(z, pt.lam, pt.h, M, chi, prec), pt.s)
    else:
        chi = _tile(_principal_values(pt.q), M)
        lhs = _d_core(pt.s, pt.lam, pt.h, M, chi, prec)
        rhs = _through_removable(lambda z: squarefree_fe_rhs(z, pt.lam, pt.h, pt.l, pt.q, prec), pt.s)
    return abs(lhs - rhs)


def _principal_values(q: int) -> np.ndarray:
    return (np.gcd(np.arange(q), q) == 1).astype(complex)


# ------------------------------------------------------------ residues


def contour_residue(f: Callable[[complex], complex], s0: complex, radius: float = 0.01,
                    nodes: int = 64) -> complex:
    """(1/2 pi i) times the integral of f over the circle |s - s0| = radius (trapezoid rule)."""
    theta = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    z = radius * np.exp(1j * theta)
    return complex(np.mean([f(s0 + w) * w for w in z]))


def _check_pole(lam: complex, s0: complex) -> complex:
    lam, s0 = complex(lam), complex(s0)
    if abs(lam) < MIN_POLE_GAP:
        raise NumericalInstability(f"|lam| = {abs(lam):.3g} < {MIN_POLE_GAP}: poles too close")
    if abs(s0 - 1) > 1e-12 and abs(s0 - 1 - lam) > 1e-12:
        raise InvalidInput("s0 must be 1 or 1 + lam")
    return s0


def residue_at(pt: EstermannPoint, s0: complex, radius: float = 0.01, nodes: int = 64,
               prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """Contour residue of s -> D(s, ...) (or the coprime-pair variant when pt.r is set)."""
    s0 = _check_pole(pt.lam, s0)
    if radius >= abs(pt.lam) / 2:
        raise NumericalInstability("circle would enclose both poles")
    if pt.r is None:
        return contour_residue(lambda s: estermann_value(pt.at(s), prec), s0, radius, nodes)
    return contour_residue(lambda s: dq_value(s, pt.lam, pt.h, pt.l, pt.r, pt.q, prec=prec),
                           s0, radius, nodes)


def residue_closed_form(pt: EstermannPoint, s0: complex, prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """Closed-form residue at s0 in {1, 1 + lam} for the classical, principal and coprime-pair cases."""
    s0 = _check_pole(pt.lam, s0)
    sign = 1 if abs(s0 - 1) <= 1e-12 else -1
    lam = pt.lam
    lpow = pt.l ** (-1 + sign * lam)
    arg = 1 - sign * lam
    if pt.r is not None:
        f = as_factorization(pt.q)
        qs = f.radical()
        qr = qs // math.gcd(qs, pt.r)
        dens = sum(moebius(b) / euler_phi(b) for b in divisors(qr))
        return complex(euler_phi(f) / f.value * dens * lpow * zeta_q(arg, f, prec))
    if pt.character is None:
        if pt.q != 1:
            raise InvalidInput("closed form needs q = 1 or a principal character")
        return complex(lpow * riemann_zeta(arg, prec))
    if not pt.character.is_principal() or moebius(pt.q) == 0:
        raise InvalidInput("closed form needs a principal character with square-free q")
    return complex(moebius(pt.q) * lpow / pt.q * zeta_q(arg, pt.q, prec))


# ------------------------------------------------------------ D_q


def _check_dq(h: int, l: int, q: int) -> None:
    if l < 1 or q < 1:
        raise InvalidInput("l and q must be positive")
    if math.gcd(h, l) != 1:
        raise InvalidInput(f"gcd(h, l) = {math.gcd(h, l)} != 1")
    if math.gcd(l, q) != 1:
        raise InvalidInput(f"gcd(l, q) = {math.gcd(l, q)} != 1")
    if l * q > FE_MAX_MODULUS:
        raise BudgetExceeded(f"lq = {l * q} exceeds {FE_MAX_MODULUS}")


def _dq_coef(h: int, l: int, r: int, q: int) -> np.ndarray:
    M = l * q
    u = np.arange(1, M + 1, dtype=np.int64)
    n = np.outer(u, u)
    ok = (np.gcd(n, q) == 1) & (np.gcd(n + r, q) == 1)
    return ok * np.exp(2j * np.pi * (n * h % l) / l)


def dq_value(s: complex, lam: complex, h: int, l: int, r: int, q: IntLike, method: str = "characters",
             n_terms: int = 200_000, prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """sum over (n,q) = (n+r,q) = 1 of sigma_lam(n) n^{-s} e(nh/l).

    ``characters`` expands the coprimality conditions over characters mod b | q and is
    valid wherever D is; ``direct`` sums the series and needs Re s > 1.25.
    """
    s, lam = complex(s), complex(lam)
    qv = as_factorization(q).value
    _check_dq(h, l, qv)
    M = l * qv
    if method == "direct":
        _require_direct(s, lam)
        return direct_series(s, lam, _dq_coef(h, l, r, qv), n_terms)
    if method != "characters":
        raise InvalidInput(f"unknown method {method!r}")
    chi0 = _tile(_principal_values(qv), M)
    total = 0j
    for b in divisors(qv):
        mu = moebius(b)
        if mu == 0 or math.gcd(b, r) != 1:
            continue
        for chi in enumerate_characters(build_group(b)):
            vals = chi.values()
            weight = np.conj(vals[(-r) % b])
            total += mu / euler_phi(b) * weight * _d_core(s, lam, h * qv, M, chi0 * _tile(vals, M), prec)
    return complex(total)


def dq_fe_rhs(s: complex, lam: complex, h: int, l: int, r: int, q: IntLike,
              prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """Right side of the functional equation for the coprime-pair sum at 1/2 + s.

    Uses the square-free kernel q*; each lattice point (a, b, a1, b1) contributes
    D(1/2 - s, -lam, +-hbar_ij / (l a1 b1), chi'_0) with chi'_0 principal mod a1 b1.
    """
    s, lam = complex(s), complex(lam)
    qs = as_factorization(q).radical()
    _check_dq(h, l, qs)
    if math.gcd(h, qs) != 1:
        raise InvalidInput("need gcd(l, qh) = 1")
    qr = qs // math.gcd(qs, r)
    c_minus = np.sin(np.pi * (s - lam / 2))
    c_plus = np.cos(np.pi * lam / 2)
    total = 0j
    for a in divisors(qs):
        for b in divisors(qr):
            mu = moebius(a * b)
            if mu == 0:
                continue
            inner = 0j
            for a1 in divisors(a):
                for b1 in divisors(b):
                    N = l * a1 * b1
                    if N > FE_MAX_MODULUS:
                        raise BudgetExceeded(f"l a1 b1 = {N} exceeds {FE_MAX_MODULUS}")
                    chi = _unit_mask(a1 * b1, N)
                    for i in range(a1):
                        if math.gcd(i, a1) != 1:
                            continue
                        for j in range(b1):
                            if math.gcd(j, b1) != 1:
                                continue
                            hij = (h * a1 * b1 + j * l * a1 + i * l * b1) % N
                            hb = _inv_or_zero(hij, N)
                            term = (c_minus * _d_core(0.5 - s, -lam, -hb, N, chi, prec)
                                    + c_plus * _d_core(0.5 - s, -lam, hb, N, chi, prec))
                            inner += np.exp(2j * np.pi * j * r / b1) * N ** (lam - 2 * s) * term
            total += mu / (a * b) * inner
    pre = 2 * _TWO_PI ** (-1 - lam + 2 * s) * _gamma(0.5 - s) * _gamma(0.5 + lam - s)
    return complex(pre * total)


def dq_unfolded_rhs(s: complex, lam: complex, h: int, l: int, r: int, q: IntLike,
                    prec: PrecisionConfig = DEFAULT_PRECISION) -> float:
    """Right side at 1/2 + s before the divisor-lattice rewrite.

    The character sum is folded back into the coprimality filter on uv, leaving
    sum_{(uv,q) = (uv+r,q) = 1} e(uvh/l) F(1/2 - s, u/lq) F(1/2 - s + lam, +-v/lq).
    """
    s, lam = complex(s), complex(lam)
    qv = as_factorization(q).value
    _check_dq(h, l, qv)
    M, S = l * qv, 0.5 + s
    coef = _dq_coef(h, l, r, qv)
    idx = np.arange(1, M + 1) % M
    f1 = _periodic_zeta_row(1 - S, M, prec)[idx]
    f2 = _periodic_zeta_row(1 - S + lam, M, prec)
    left = f1 @ coef
    j1, j2 = left @ f2[idx], left @ f2[(-idx) % M]
    pre = 2 * _TWO_PI ** (-2 - lam + 2 * S) * M ** (lam - 2 * S) * _gamma(1 - S) * _gamma(1 + lam - S)
    return complex(pre * (-np.cos(np.pi * (2 * S - lam) / 2) * j1 + np.cos(np.pi * lam / 2) * j2))


DQ_FORMS = ("lattice", "unfolded")


def dq_fe_residual(s: complex, lam: complex, h: int, l: int, r: int, q: IntLike, form: str = "lattice",
                   prec: PrecisionConfig = DEFAULT_PRECISION) -> float:
    """|D_q(1/2 + s) - RHS| for the divisor-lattice form or the unfolded form of the right side."""
    if form not in DQ_FORMS:
        raise InvalidInput(f"unknown form {form!r}; expected one of {DQ_FORMS}")
    rhs_fn = dq_fe_rhs if form == "lattice" else dq_unfolded_rhs
    lhs = dq_value(0.5 + complex(s), lam, h, l, r, q, prec=prec)
    return abs(lhs - _through_removable(lambda z: rhs_fn(z, lam, h, l, r, q, prec), complex(s)))


# ------------------------------------------------------------ unfolding identity


def unfolding_residual(s: complex, lam: complex, h: int, l: int, q: int = 1, principal: bool = False,
                       n_terms: int = 200_000, prec: PrecisionConfig = DEFAULT_PRECISION) -> float:
    """Check D(s, -lam, -hbar/(lq)[, chi_0]) against (1/lq) sum_{u,v} e(uvh/lq) F(s,u/lq) F(s+lam,v/lq).

    The F factors are summed directly (optionally over integers prime to q); needs Re s > 1.25.
    """
    s, lam = complex(s), complex(lam)
    M = l * q
    if math.gcd(h, M) != 1:
        raise InvalidInput(f"gcd(h, lq) = {math.gcd(h, M)} != 1")
    if min(s.real, (s + lam).real) <= 1.25:
        raise InvalidInput("unfolding check needs Re s and Re(s + lam) above 1.25")
    mask = _unit_mask(q, M) if principal else np.ones(M)
    E = np.exp(2j * np.pi * np.outer(np.arange(1, M + 1), np.arange(1, M + 1)) / M)

    def f_row(z):
        z_cls, _ = _class_sums(z, M, n_terms)
        return E @ (z_cls * mask)

    rhs = f_row(s) @ _phase_matrix(h, M) @ f_row(s + lam) / M
    chi = mask if principal else None
    lhs = _d_core(s, -lam, -_inv_or_zero(h, M), M, chi, prec)
    return abs(lhs - complex(rhs))
