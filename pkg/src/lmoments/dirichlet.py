"""Central L-values, the shifted fourth moment and its six-term main term.

L-values go through the Hurwitz route L(s, chi) = q^{-s} sum_a chi(a) zeta(s, a/q),
so one Hurwitz table per (q, s) serves every character at once.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import digamma

from .arith import IntLike, as_factorization, phi_star
from .characters import (
    CharacterGroup,
    DirichletCharacter,
    build_group,
    character_sum_transform,
    enumerate_characters,
)
from .errors import InvalidInput, NoPrimitiveCharacters, NumericalInstability, PoleError, ShiftDegeneracy
from .special import (
    DEFAULT_PRECISION,
    ZERO_SHIFTS,
    PrecisionConfig,
    ShiftTuple,
    VWeight,
    diagonal_zeros,
    hurwitz_zeta,
    riemann_zeta,
    x_product,
    zeta_q,
)

MODES = ("even", "odd", "all_primitive")
MOMENT_MAX_Q = 10**4


@dataclass
class MomentReport:
    modulus: int
    parity_mode: str
    shifts: ShiftTuple
    moment_value: complex
    main_term: complex
    relative_deviation: float
    character_count: int
    wall_time: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shifts"] = [_cjson(v) for v in self.shifts.as_tuple()]
        d["moment_value"] = _cjson(self.moment_value)
        d["main_term"] = _cjson(self.main_term)
        return d


def _cjson(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


# ------------------------------------------------------------------ L-values


@lru_cache(maxsize=256)
def _hurwitz_row(q: int, s: complex, prec: PrecisionConfig) -> np.ndarray:
    """zeta(s, a/q) indexed by a mod q (slot 0 holds a = q).

    At s = 1 the row holds the finite part -psi(a/q); the pole cancels in any
    character sum with sum_a chi(a) = 0.
    """
    a = np.arange(1, q + 1) / q
    row = -digamma(a) + 0j if s == 1 else hurwitz_zeta(s, a, prec)
    out = np.empty(q, dtype=complex)
    out[1:] = row[:-1]
    out[0] = row[-1]
    out.setflags(write=False)
    return out


def all_l_values(group: CharacterGroup, s: complex, prec: PrecisionConfig = DEFAULT_PRECISION) -> np.ndarray:
    """L(s, chi) for every character of ``group`` in enumeration order."""
    s = complex(s)
    q = group.q
    if q == 1:
        return np.array([riemann_zeta(s, prec)])
    row = _hurwitz_row(q, s, prec)
    out = character_sum_transform(group, row) * np.exp(-s * math.log(q))
    if s == 1:
        out[0] = complex("nan")  # the principal character has its pole here
    return out


def l_value(chi: DirichletCharacter, s: complex, prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    s = complex(s)
    q = chi.q
    if q == 1:
        return riemann_zeta(s, prec)
    if chi.is_principal() and s == 1:
        raise PoleError("principal L-function has a pole at s = 1")
    row = _hurwitz_row(q, s, prec)
    return complex(np.dot(chi.values(), row) * np.exp(-s * math.log(q)))


def conj_index(group: CharacterGroup) -> np.ndarray:
    """Position of conj(chi) for each chi in enumeration order."""
    if not group.orders:
        return np.zeros(1, dtype=np.int64)
    orders = np.array(group.orders)
    idx = np.array(list(np.ndindex(*group.orders)), dtype=np.int64).reshape(-1, len(orders))
    return np.ravel_multi_index(tuple(((-idx) % orders).T), group.orders)


def _character_flags(group: CharacterGroup) -> Tuple[np.ndarray, np.ndarray]:
    chars = enumerate_characters(group)
    prim = np.array([c.primitive for c in chars])
    par = np.array([c.parity for c in chars])
    return prim, par


def _check_moment_q(q: int, max_q: int) -> None:
    if q % 4 == 2:
        raise NoPrimitiveCharacters(f"no primitive characters modulo q = {q} (q = 2 mod 4)")
    if q > max_q:
        raise InvalidInput(f"moment needs q <= {max_q}, got q = {q}")


def _mode_mask(prim, par, mode: str):
    if mode == "even":
        return prim & (par == 0), 2.0
    if mode == "odd":
        return prim & (par == 1), 2.0
    if mode == "all_primitive":
        return prim, 1.0
    raise InvalidInput(f"unknown mode {mode!r}; expected one of {MODES}")


def moment_terms(q: IntLike, shifts: ShiftTuple = ZERO_SHIFTS, prec: PrecisionConfig = DEFAULT_PRECISION):
    """Per-character products L(1/2+a,chi)L(1/2+b,chi)L(1/2+c,conj chi)L(1/2+d,conj chi)."""
    f = as_factorization(q)
    group = build_group(f)
    a, b, c, d = shifts.as_tuple()
    ci = conj_index(group)
    la = all_l_values(group, 0.5 + a, prec)
    lb = la if b == a else all_l_values(group, 0.5 + b, prec)
    lc = all_l_values(group, 0.5 + c, prec)[ci]
    ld = lc if d == c else all_l_values(group, 0.5 + d, prec)[ci]
    return group, la * lb * lc * ld


def shifted_moment(q: IntLike, shifts: ShiftTuple = ZERO_SHIFTS, mode: str = "even",
                   prec: PrecisionConfig = DEFAULT_PRECISION, max_q: int = MOMENT_MAX_Q) -> complex:
    """Normalized average of the four-fold L-product over primitive characters."""
    return _moment(q, shifts, mode, prec, max_q)[0]


def _moment(q, shifts, mode, prec, max_q):
    f = as_factorization(q)
    _check_moment_q(f.value, max_q)
    group, prods = moment_terms(f, shifts, prec)
    prim, par = _character_flags(group)
    mask, weight = _mode_mask(prim, par, mode)
    total = np.sum(prods[mask])  # numpy uses pairwise summation: order-stable
    return complex(weight * total / phi_star(f)), int(mask.sum())


def moment_report(q: IntLike, shifts: ShiftTuple = ZERO_SHIFTS, mode: str = "all_primitive",
                  prec: PrecisionConfig = DEFAULT_PRECISION, max_q: int = MOMENT_MAX_Q) -> MomentReport:
    """Moment and main term side by side; zero shifts use the shift -> 0 limit."""
    t0 = time.perf_counter()
    f = as_factorization(q)
    value, count = _moment(f, shifts, mode, prec, max_q)
    if shifts == ZERO_SHIFTS:
        main = main_term_limit(f, mode, prec=prec).value
    else:
        main = _mode_main_term(f, shifts, mode, prec)
    dev = abs(value - main) / abs(main)
    return MomentReport(f.value, mode, shifts, value, main, dev, count, time.perf_counter() - t0)


# ---------------------------------------------------------------- main terms


def z_block(shifts: Sequence[complex], q: IntLike, prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """Z_q(a,b,c,d) = zeta_q(1+a+c) zeta_q(1+a+d) zeta_q(1+b+c) zeta_q(1+b+d) / zeta_q(2+a+b+c+d)."""
    a, b, c, d = (complex(v) for v in shifts)
    num = 1 + 0j
    for v in (a + c, a + d, b + c, b + d):
        if abs(v) < 1e-14:
            raise ShiftDegeneracy(f"zeta_q(1 + {v}) sits on the pole")
        num *= zeta_q(1 + v, q, prec)
    return num / zeta_q(2 + a + b + c + d, q, prec)


def main_term_terms(q: IntLike, shifts: ShiftTuple, parity: int,
                    prec: PrecisionConfig = DEFAULT_PRECISION) -> Tuple[complex, ...]:
    """The six products of the conjectured main term, in the order they are usually written."""
    f = as_factorization(q)
    a, b, c, d = shifts.as_tuple()
    return (
        z_block((a, b, c, d), f, prec),
        x_product((a, b, c, d), f, parity) * z_block((-c, -d, -a, -b), f, prec),
        x_product((a, c), f, parity) * z_block((b, -c, d, -a), f, prec),
        x_product((b, c), f, parity) * z_block((a, -c, d, -b), f, prec),
        x_product((a, d), f, parity) * z_block((b, -d, c, -a), f, prec),
        x_product((b, d), f, parity) * z_block((a, -d, c, -b), f, prec),
    )


def main_term_rhs(q: IntLike, shifts: ShiftTuple, parity: int = 0,
                  prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    if parity not in (0, 1):
        raise InvalidInput(f"parity must be 0 or 1, got {parity}")
    return complex(sum(main_term_terms(q, shifts, parity, prec)))


def _mode_main_term(f, shifts, mode, prec):
    if mode == "even":
        return main_term_rhs(f, shifts, 0, prec)
    if mode == "odd":
        return main_term_rhs(f, shifts, 1, prec)
    if mode == "all_primitive":
        return 0.5 * (main_term_rhs(f, shifts, 0, prec) + main_term_rhs(f, shifts, 1, prec))
    raise InvalidInput(f"unknown mode {mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class LimitResult:
    value: complex
    error: float
    radius: float
    nodes: int

    def __complex__(self):
        return complex(self.value)


def _circle_mean(fn, radius: float, nodes: int) -> Tuple[complex, complex]:
    """Mean of fn over ``nodes`` equispaced points on |eps| = radius, and over every other point."""
    theta = 2 * math.pi * (np.arange(nodes) + 0.5) / nodes
    vals = np.array([fn(radius * np.exp(1j * t)) for t in theta])
    return complex(vals.mean()), complex(vals[::2].mean())


def main_term_limit(q: IntLike, mode: str = "all_primitive", pattern: Sequence[complex] = (1j, 2j, 3j, 5j),
                    nodes: int = 32, prec: PrecisionConfig = DEFAULT_PRECISION,
                    rel_tol: float = 1e-4) -> LimitResult:
    """Value of the six-term main term at zero shifts.

    The sum is holomorphic in eps along shifts = eps * pattern, with a removable
    singularity at eps = 0, so its value there is the mean over a small circle.
    Two node counts and two radii give the error estimate.
    """
    f = as_factorization(q)
    if f.value % 4 == 2:
        raise NoPrimitiveCharacters(f"no primitive characters modulo q = {f.value} (q = 2 mod 4)")
    if mode not in MODES:
        raise InvalidInput(f"unknown mode {mode!r}; expected one of {MODES}")
    logq = max(math.log(f.value), 1.0)
    radius = min(0.2 / logq, 0.02)

    def fn(eps):
        return _mode_main_term(f, ShiftTuple.ray(eps, pattern), mode, prec)

    full, half = _circle_mean(fn, radius, nodes)
    small, _ = _circle_mean(fn, radius / 2, nodes)
    err = max(abs(full - half), abs(full - small))
    if not err <= rel_tol * abs(full):
        raise NumericalInstability(f"main-term limit did not settle: estimate {err:.3g} vs value {abs(full):.3g}")
    return LimitResult(full, err, radius, nodes)


def leading_ratio(q: IntLike, value: complex) -> float:
    """value * 2 pi^2 / ((log q)^4 prod_{p|q} (1-1/p)^3/(1+1/p))."""
    f = as_factorization(q)
    euler = math.prod((1 - 1 / p) ** 3 / (1 + 1 / p) for p in f.primes)
    return complex(value).real * 2 * math.pi**2 / (math.log(f.value) ** 4 * euler)


# ------------------------------------------------------------- diagonal term


def sigma_table(n_max: int, lam: complex) -> np.ndarray:
    """sigma_lam(n) for n = 0..n_max (slot 0 unused)."""
    out = np.zeros(n_max + 1, dtype=complex)
    lam = complex(lam)
    for d in range(1, n_max + 1):
        out[d::d] += np.exp(lam * math.log(d))
    return out


def sigma_ab_table(n_max: int, alpha: complex, beta: complex) -> np.ndarray:
    """sigma_{alpha,beta}(n) = n^{-alpha} sigma_{alpha-beta}(n)."""
    n = np.arange(n_max + 1, dtype=float)
    n[0] = 1.0
    out = sigma_table(n_max, alpha - beta) * np.exp(-complex(alpha) * np.log(n))
    out[0] = 0
    return out


@dataclass(frozen=True)
class DiagonalResult:
    a_d: complex
    z_q: complex
    n_max: int
    v_cutoff: float

    @property
    def gap(self) -> float:
        return abs(self.a_d - self.z_q)


def diagonal_check(q: IntLike, shifts: ShiftTuple, tol: float = 1e-13,
                   prec: PrecisionConfig = DEFAULT_PRECISION, v_override=None,
                   max_q: int = 5000, pole_zeros: bool = True) -> DiagonalResult:
    """Diagonal sum of the moment against Z_q.

    G carries zeros at +-(alpha+gamma)/2 etc. so that the zeta poles of the
    n-sum do not leave residues of size 1; the sum is cut where |V| < tol.
    ``v_override(n, x)`` may replace the weight values (used for sanity re-runs).
    """
    f = as_factorization(q)
    if f.value > max_q:
        raise InvalidInput(f"diagonal_check needs q <= {max_q}, got {f.value}")
    a, b, c, d = shifts.as_tuple()
    zq = z_block((a, b, c, d), f, prec)
    V = VWeight(shifts, 0, zeros=diagonal_zeros(shifts) if pole_zeros else (), prec=prec)
    cut = V.cutoff(tol)
    n_max = int(f.value * math.sqrt(cut)) + 1
    n = np.arange(1, n_max + 1)
    coprime = np.gcd(n, f.value) == 1
    s1 = sigma_table(n_max, a - b)[1:]
    s2 = sigma_table(n_max, c - d)[1:]
    x = (n / f.value) ** 2.0
    v = V.bulk(x)
    if v_override is not None:
        v = v_override(n, x, v)
    terms = s1 * s2 * np.exp(-(1 + a + c) * np.log(n)) * v
    # the prefactor (1/phi*(q)) sum_{d|q} phi(d) mu(q/d) is exactly 1
    ad = complex(np.sum(terms[coprime]))
    return DiagonalResult(ad, zq, n_max, cut)


# ------------------------------------------------------------------ AFE check


def afe_sides(chi: DirichletCharacter, shifts: ShiftTuple, tol: float = 1e-12, n_max: Optional[int] = None,
              prec: PrecisionConfig = DEFAULT_PRECISION) -> Tuple[complex, complex, int]:
    """Both sides of the approximate functional equation for the four-fold product.

    Each double sum is a Dirichlet convolution over N = mn, truncated at
    ``n_max`` (default: where |V| and the dual weight drop below ``tol``).
    """
    if not chi.primitive:
        raise InvalidInput("afe_residual needs a primitive character")
    q = chi.q
    par = chi.parity
    a, b, c, d = shifts.as_tuple()
    lhs = (
        l_value(chi, 0.5 + a, prec) * l_value(chi, 0.5 + b, prec)
        * np.conj(l_value(chi, 0.5 + np.conj(c), prec)) * np.conj(l_value(chi, 0.5 + np.conj(d), prec))
    )
    dual = shifts.dual()
    V1 = VWeight(shifts, par, prec=prec)
    V2 = VWeight(dual, par, prec=prec)
    xfac = x_product((a, b, c, d), q, par)
    if n_max is None:
        n_max = int(q * q * max(V1.cutoff(tol, 1e-3), V2.cutoff(tol / max(abs(xfac), 1e-300), 1e-3))) + 1
    vals = chi.values()
    n = np.arange(n_max + 1)
    chin = vals[n % q]
    chin[0] = 0

    def conv(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        out = np.zeros(n_max + 1, dtype=complex)
        for m in range(1, n_max + 1):
            if x[m] != 0:
                k = n_max // m
                out[m : m * k + 1 : m] += x[m] * y[1 : k + 1]
        return out

    A1 = sigma_ab_table(n_max, a, b) * chin
    B1 = sigma_ab_table(n_max, c, d) * np.conj(chin)
    A2 = sigma_ab_table(n_max, -c, -d) * chin
    B2 = sigma_ab_table(n_max, -a, -b) * np.conj(chin)
    N = np.arange(1, n_max + 1)
    xN = N / (q * q)
    w = N ** -0.5
    rhs1 = np.sum(conv(A1, B1)[1:] * w * V1.bulk(xN))
    rhs2 = xfac * np.sum(conv(A2, B2)[1:] * w * V2.bulk(xN))
    return complex(lhs), complex(rhs1 + rhs2), n_max


def afe_residual(chi: DirichletCharacter, shifts: ShiftTuple, tol: float = 1e-12, n_max: Optional[int] = None,
                 prec: PrecisionConfig = DEFAULT_PRECISION) -> float:
    lhs, rhs, _ = afe_sides(chi, shifts, tol, n_max, prec)
    return abs(lhs - rhs)
