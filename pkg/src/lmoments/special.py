"""Complex special functions in binary64.

Hurwitz and Riemann zeta by Euler-Maclaurin summation, zeta with Euler
factors removed, the root-number factor X, the Gamma weight g and the
smoothing weight V defined by a vertical-line integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy.special import bernoulli, loggamma

from .arith import IntLike, as_factorization
from .errors import InvalidInput, NumericalInstability, PoleError

MAX_SHIFT = 0.4


@dataclass(frozen=True)
class PrecisionConfig:
    target_abs_error: float = 1e-12
    euler_maclaurin_shift: int = 15
    bernoulli_terms: int = 12
    quadrature_nodes: int = 2001
    contour_height: float = 30.0

    def __post_init__(self):
        if not self.target_abs_error > 0:
            raise InvalidInput("target_abs_error must be positive")
        if self.euler_maclaurin_shift < 10:
            raise InvalidInput("euler_maclaurin_shift must be >= 10")
        if not 6 <= self.bernoulli_terms <= 20:
            raise InvalidInput("bernoulli_terms must lie in [6, 20]")
        if self.quadrature_nodes < 3 or self.contour_height <= 0:
            raise InvalidInput("quadrature needs >= 3 nodes and a positive height")

    def tightened(self) -> "PrecisionConfig":
        """A stricter copy, used for self-consistency re-runs."""
        return PrecisionConfig(
            self.target_abs_error / 100,
            2 * self.euler_maclaurin_shift,
            min(20, self.bernoulli_terms + 4),
            2 * self.quadrature_nodes - 1,
            2 * self.contour_height,
        )


DEFAULT_PRECISION = PrecisionConfig()


@dataclass(frozen=True)
class ShiftTuple:
    """The four shifts (alpha, beta, gamma, delta)."""

    alpha: complex = 0j
    beta: complex = 0j
    gamma: complex = 0j
    delta: complex = 0j

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            v = complex(getattr(self, name))
            if abs(v) > MAX_SHIFT:
                raise InvalidInput(f"|{name}| = {abs(v):.3g} exceeds {MAX_SHIFT}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_seq(cls, vals: Sequence[complex]) -> "ShiftTuple":
        if len(vals) != 4:
            raise InvalidInput(f"need four shifts, got {len(vals)}")
        return cls(*vals)

    @classmethod
    def ray(cls, eps: complex, pattern: Sequence[complex] = (1j, 2j, 3j, 5j)) -> "ShiftTuple":
        return cls(*(eps * p for p in pattern))

    def as_tuple(self) -> Tuple[complex, complex, complex, complex]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def dual(self) -> "ShiftTuple":
        """(-gamma, -delta, -alpha, -beta): the shifts of the second AFE sum."""
        return ShiftTuple(-self.gamma, -self.delta, -self.alpha, -self.beta)

    def conj(self) -> "ShiftTuple":
        return ShiftTuple(*(v.conjugate() for v in self.as_tuple()))

    def pole_sums(self) -> Tuple[complex, ...]:
        a, b, c, d = self.as_tuple()
        return (a + c, a + d, b + c, b + d)

    def min_separation(self) -> float:
        v = self.as_tuple()
        return min(abs(v[i] - v[j]) for i in range(4) for j in range(i + 1, 4))


ZERO_SHIFTS = ShiftTuple()


# ------------------------------------------------------------------ Gamma


def log_gamma(s):
    """Principal-branch log Gamma (continuous off the negative real axis); vectorized."""
    arr = np.asarray(s, dtype=complex)
    bad = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))
    if np.any(bad):
        raise PoleError(f"log_gamma pole at {arr[bad].ravel()[0]}")
    out = loggamma(arr)
    return out if out.ndim else complex(out)


def gamma_ratio(num: Iterable[complex], den: Iterable[complex]):
    """prod Gamma(num) / prod Gamma(den), computed through log_gamma."""
    acc = 0
    for z in num:
        acc = acc + log_gamma(z)
    for z in den:
        acc = acc - log_gamma(z)
    return np.exp(acc)


# ------------------------------------------------------------------ zeta


def _em_coeffs(m: int) -> np.ndarray:
    b = bernoulli(2 * m + 2)
    return np.array([b[2 * k] / math.factorial(2 * k) for k in range(1, m + 2)])


_EM_CACHE = {}


def _bern(m: int) -> np.ndarray:
    if m not in _EM_CACHE:
        _EM_CACHE[m] = _em_coeffs(m)
    return _EM_CACHE[m]


def _hurwitz_em(s: complex, x: np.ndarray, n: int, m: int, wide: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """Euler-Maclaurin value and the size of the first omitted correction.

    With ``wide`` the arithmetic runs in extended precision where the platform
    has it: left of Re s = 0 the head and tail grow like N^{1 - Re s} and cancel.
    """
    rt, ct = (np.longdouble, np.clongdouble) if wide else (float, complex)
    s = ct(s)
    x = x.astype(rt)
    k = np.arange(n, dtype=rt)
    base = k[None, :] + x[:, None]
    head = np.exp(-s * np.log(base)).sum(axis=1)
    big = n + x
    lb = np.log(big)
    tail = np.exp((1 - s) * lb) / (s - 1) + np.exp(-s * lb) / 2
    coeffs = _bern(m).astype(rt)
    poch = s  # (s)_{2k-1}
    corr = np.zeros(x.shape, dtype=ct)
    last = None
    for j in range(m + 1):
        term = coeffs[j] * poch * np.exp(-(s + 2 * j + 1) * lb)
        if j < m:
            corr += term
        else:
            last = np.abs(term)
        poch *= (s + 2 * j + 1) * (s + 2 * j + 2)
    return (head + tail + corr).astype(complex), last.astype(float)


def hurwitz_zeta(s: complex, x, prec: PrecisionConfig = DEFAULT_PRECISION):
    """zeta(s, x) = sum_{n>=0} (n+x)^{-s}, continued to s != 1; ``x`` may be an array."""
    s = complex(s)
    if s == 1:
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    if abs(s.imag) > 1e4:
        raise InvalidInput(f"|Im s| = {abs(s.imag):.3g} exceeds 1e4")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa <= 0):
        raise InvalidInput("hurwitz_zeta needs x > 0")
    n = max(prec.euler_maclaurin_shift, math.ceil(abs(s.imag)), math.ceil(abs(s)) + 2)
    for _ in range(8):
        val, err = _hurwitz_em(s, xa, n, prec.bernoulli_terms, wide=s.real < 0)
        # the remainder is bounded by |next term| * |s + 2M + 1| / (Re s + 2M + 1)
        m2 = 2 * prec.bernoulli_terms + 1
        factor = abs(s + m2) / max(s.real + m2, 1.0)
        if np.all(err * factor <= prec.target_abs_error * np.maximum(1.0, np.abs(val))):
            break
        n *= 2
    else:
        raise NumericalInstability(f"Euler-Maclaurin did not converge at s={s}")
    if np.ndim(x) == 0:
        return complex(val[0])
    return val


def riemann_zeta(s: complex, prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    return hurwitz_zeta(s, 1.0, prec)


def zeta_q(s: complex, q: IntLike, prec: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """zeta(s) * prod_{p | q} (1 - p^{-s})."""
    s = complex(s)
    if s == 1:
        raise PoleError("zeta_q has a pole at s = 1")
    out = riemann_zeta(s, prec)
    for p in as_factorization(q).primes:
        out *= 1 - complex(p) ** (-s)
    return out


# ------------------------------------------------------------ X, g, V


def x_factor(alpha: complex, q: IntLike, parity: int) -> complex:
    """(q/pi)^{-alpha} Gamma((1/2 - alpha + a)/2) / Gamma((1/2 + alpha + a)/2)."""
    if parity not in (0, 1):
        raise InvalidInput(f"parity must be 0 or 1, got {parity}")
    alpha = complex(alpha)
    qv = int(as_factorization(q).value)
    lg = log_gamma((0.5 - alpha + parity) / 2) - log_gamma((0.5 + alpha + parity) / 2)
    return complex(np.exp(-alpha * math.log(qv / math.pi) + lg))


def x_product(shifts: Iterable[complex], q: IntLike, parity: int) -> complex:
    """X_{a,b,...} = prod X_a."""
    out = 1 + 0j
    for a in shifts:
        out *= x_factor(a, q, parity)
    return out


def g_weight(s, shifts: ShiftTuple, parity: int):
    """pi^{-2s} prod_j Gamma((1/2 + shift_j + s + a)/2) / Gamma((1/2 + shift_j + a)/2)."""
    if parity not in (0, 1):
        raise InvalidInput(f"parity must be 0 or 1, got {parity}")
    s = np.asarray(s, dtype=complex)
    acc = -2 * s * math.log(math.pi)
    for v in shifts.as_tuple():
        acc = acc + log_gamma((0.5 + v + s + parity) / 2) - log_gamma((0.5 + v + parity) / 2)
    out = np.exp(acc)
    return out if out.ndim else complex(out)


def g_function(s, zeros: Sequence[complex] = ()):
    """G(s) = P(s) exp(s^2) with P(s) = prod (1 - s^2/z^2); P = 1 when ``zeros`` is empty."""
    s = np.asarray(s, dtype=complex)
    out = np.exp(s * s)
    for z in zeros:
        z = complex(z)
        if z == 0:
            raise InvalidInput("P cannot vanish at s = 0 (needs P(0) = 1)")
        out = out * (1 - s * s / (z * z))
    return out


def diagonal_zeros(shifts: ShiftTuple) -> Tuple[complex, ...]:
    """Zeros of P at +-(alpha+gamma)/2 etc., which cancel the zeta poles of the diagonal sum."""
    return tuple(v / 2 for v in shifts.pole_sums() if v != 0)


SMALL_X_LINE = 0.25


@dataclass
class VWeight:
    """V(x) = (1/2 pi i) int_{(c)} G(s) g(s) x^{-s} ds / s by a trapezoid rule in t.

    Node weights are built once; evaluation over an array of x is a matrix product.
    """

    shifts: ShiftTuple = ZERO_SHIFTS
    parity: int = 0
    c: float = 1.0
    zeros: Tuple[complex, ...] = ()
    prec: PrecisionConfig = DEFAULT_PRECISION
    chunk: int = 2048
    _s: np.ndarray = field(init=False, repr=False)
    _w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.c <= 0:
            raise InvalidInput("the contour must lie right of s = 0")
        self._s, self._w = self._nodes(self.c)
        # for x < 1 the factor x^{-c} inflates the integrand and its rounding
        # error; a line nearer s = 0 keeps it small while staying resolved
        self._s_lo, self._w_lo = self._nodes(min(self.c, SMALL_X_LINE))
        self._tables = {}

    def _nodes(self, c: float):
        h = self.prec.contour_height
        t, dt = np.linspace(-h, h, self.prec.quadrature_nodes, retstep=True)
        s = c + 1j * t
        w = g_function(s, self.zeros) * g_weight(s, self.shifts, self.parity) / s
        w = w * dt / (2 * math.pi)
        w[0] *= 0.5
        w[-1] *= 0.5
        keep = np.abs(w) > 1e-24 * np.abs(w).max()  # exp(s^2) makes the far nodes irrelevant
        return s[keep], w[keep]

    def __call__(self, x):
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xa <= 0):
            raise InvalidInput("V needs x > 0")
        lx = np.log(xa)
        out = np.empty(lx.shape, dtype=complex)
        small = lx < 0
        for mask, s, w in ((small, self._s_lo, self._w_lo), (~small, self._s, self._w)):
            idx = np.flatnonzero(mask)
            for i in range(0, idx.size, self.chunk):
                sel = idx[i : i + self.chunk]
                out[sel] = np.exp(-np.outer(lx[sel], s)) @ w
        return complex(out[0]) if np.ndim(x) == 0 else out

    def bulk(self, x, step: float = 0.01, order: int = 12):
        """V(x) by Lagrange interpolation in log x on a memoized uniform table.

        The integrand is Gaussian in Im s, so V(e^u) is very smooth in u; a
        12-point stencil at step 0.01 reproduces direct quadrature to ~1e-15.
        """
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xa <= 0):
            raise InvalidInput("V needs x > 0")
        u = np.log(xa)
        half = order // 2
        lo = math.floor(u.min() / step) - half - 1
        hi = math.ceil(u.max() / step) + half + 1
        key = (step, order)
        tab = self._tables.get(key)
        if tab is None or lo < tab[0] or hi > tab[0] + tab[1].size - 1:
            if tab is not None:
                lo, hi = min(lo, tab[0]), max(hi, tab[0] + tab[1].size - 1)
            grid = np.exp(np.arange(lo, hi + 1) * step)
            tab = (lo, self(grid))
            self._tables[key] = tab
        start, vals = tab
        pos = u / step - start
        base = np.floor(pos).astype(np.int64) - (half - 1)
        theta = pos - base  # node offsets are 0..order-1
        out = np.zeros(u.shape, dtype=complex)
        nodes = np.arange(order)
        for j in range(order):
            wj = np.ones_like(theta)
            for k in nodes[nodes != j]:
                wj *= (theta - k) / (j - k)
            out += wj * vals[base + j]
        return complex(out[0]) if np.ndim(x) == 0 else out

    def cutoff(self, tol: float = 1e-13, start: float = 1.0) -> float:
        """Smallest x on a geometric grid past which |V| stays below ``tol``."""
        grid = start * 1.1 ** np.arange(0, 400)
        vals = np.abs(self(grid))
        above = np.flatnonzero(vals >= tol)
        if above.size == 0:
            return start
        if above[-1] == grid.size - 1:
            raise NumericalInstability("V does not decay on the probed range")
        return float(grid[above[-1] + 1])


def v_weight(x, shifts: ShiftTuple = ZERO_SHIFTS, parity: int = 0, c: float = 1.0,
             prec: PrecisionConfig = DEFAULT_PRECISION, zeros: Tuple[complex, ...] = ()):
    return VWeight(shifts, parity, c, tuple(zeros), prec)(x)
