"""Dirichlet characters modulo q.

The unit group is split into cyclic components, one per odd prime power and
one or two for the power of 2. A character is an exponent vector over those
components; values come from discrete-log tables built once per modulus.
"""

from __future__ import annotations

import hashlib
import io
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .arith import (
    Factorization,
    IntLike,
    as_factorization,
    crt,
    divisors,
    euler_phi,
    moebius,
    primitive_root,
    unit_root_sum,
)
from .errors import InvalidInput

CACHE_ENV = "LMOMENTS_CACHE_DIR"
_CACHE_VERSION = b"LMDLOG1"
FILTERS = ("all", "primitive", "primitive_even", "primitive_odd")


@dataclass(frozen=True)
class Component:
    prime: int
    prime_power: int
    generator: int
    order: int


@dataclass(frozen=True, eq=False)
class CharacterGroup:
    modulus: Factorization
    components: Tuple[Component, ...]
    dlog_tables: Tuple[np.ndarray, ...] = field(repr=False)

    @property
    def q(self) -> int:
        return self.modulus.value

    @property
    def orders(self) -> Tuple[int, ...]:
        return tuple(c.order for c in self.components)

    @property
    def size(self) -> int:
        return math.prod(self.orders)

    @property
    def exponent(self) -> int:
        return math.lcm(1, *self.orders)

    def dlog(self, n: int) -> Optional[Tuple[int, ...]]:
        """Exponent vector of n over the generators, or None when gcd(n, q) > 1."""
        if math.gcd(n, self.q) != 1:
            return None
        return tuple(int(t[n % c.prime_power]) for c, t in zip(self.components, self.dlog_tables))

    @property
    def dlog_matrix(self) -> np.ndarray:
        """Array of shape (q, r): row n holds dlog(n), or -1 entries for non-units."""
        return _dlog_matrix(self)

    def character(self, exponents: Sequence[int]) -> "DirichletCharacter":
        return _make_character(self, tuple(int(e) % o for e, o in zip(exponents, self.orders)))

    def principal(self) -> "DirichletCharacter":
        return self.character((0,) * len(self.components))


def _component_tables(p: int, k: int) -> List[Tuple[Component, np.ndarray]]:
    pk = p**k
    if p != 2:
        g = primitive_root(p, k)
        order = pk // p * (p - 1)
        table = np.full(pk, -1, dtype=np.int64)
        x = 1
        for e in range(order):
            table[x] = e
            x = x * g % pk
        return [(Component(p, pk, g, order), table)]
    if k == 1:
        return []
    sign = np.full(pk, -1, dtype=np.int64)
    odd = np.arange(1, pk, 2)
    sign[odd] = (odd % 4 == 3).astype(np.int64)
    out = [(Component(2, pk, pk - 1, 2), sign)]
    if k >= 3:
        order = pk // 4
        table = np.full(pk, -1, dtype=np.int64)
        x = 1
        for e in range(order):
            table[x] = e
            table[pk - x] = e
            x = x * 5 % pk
        out.append((Component(2, pk, 5, order), table))
    return out


def _cache_path(q: int, cache_dir: Optional[str]) -> Optional[Path]:
    root = cache_dir or os.environ.get(CACHE_ENV)
    return Path(root) / f"dlog_{q}.bin" if root else None


def _cache_load(path: Path, count: int) -> Optional[List[np.ndarray]]:
    try:
        blob = path.read_bytes()
    except OSError:
        return None
    head, digest, body = blob[:7], blob[7:39], blob[39:]
    if head != _CACHE_VERSION or hashlib.sha256(body).digest() != digest:
        return None
    try:
        with np.load(io.BytesIO(body)) as z:
            arrays = [z[f"t{i}"] for i in range(count)]
    except (OSError, KeyError, ValueError):
        return None
    return arrays


def _cache_store(path: Path, tables: Sequence[np.ndarray]) -> None:
    buf = io.BytesIO()
    np.savez(buf, **{f"t{i}": t for i, t in enumerate(tables)})
    body = buf.getvalue()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(_CACHE_VERSION + hashlib.sha256(body).digest() + body)
        tmp.replace(path)
    except OSError:
        pass  # the cache is best-effort


def build_group(q: IntLike, cache_dir: Optional[str] = None) -> CharacterGroup:
    """Generators and discrete-log tables for (Z/qZ)^*."""
    f = as_factorization(q)
    return _build_group(f, cache_dir)


@lru_cache(maxsize=64)
def _build_group(f: Factorization, cache_dir: Optional[str]) -> CharacterGroup:
    comps = [c for p, k in f.factors for c, _ in _component_meta(p, k)]
    path = _cache_path(f.value, cache_dir)
    tables = _cache_load(path, len(comps)) if path is not None else None
    if tables is None or any(a.shape != (c.prime_power,) for a, c in zip(tables, comps)):
        tables = [t for p, k in f.factors for _, t in _component_tables(p, k)]
        if path is not None:
            _cache_store(path, tables)
    return CharacterGroup(f, tuple(comps), tuple(tables))


def _component_meta(p: int, k: int) -> List[Tuple[Component, None]]:
    """Components without their tables."""
    pk = p**k
    if p != 2:
        return [(Component(p, pk, primitive_root(p, k), pk // p * (p - 1)), None)]
    out = [] if k == 1 else [(Component(2, pk, pk - 1, 2), None)]
    if k >= 3:
        out.append((Component(2, pk, 5, pk // 4), None))
    return out


@lru_cache(maxsize=64)
def _dlog_matrix(group: CharacterGroup) -> np.ndarray:
    q = group.q
    n = np.arange(q)
    cols = [t[n % c.prime_power] for c, t in zip(group.components, group.dlog_tables)]
    mat = np.stack(cols, axis=1) if cols else np.zeros((q, 0), dtype=np.int64)
    unit = np.gcd(n, q) == 1
    mat[~unit] = -1
    return mat


# ----------------------------------------------------------------- characters


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    group: CharacterGroup = field(repr=False)
    exponents: Tuple[int, ...]
    conductor: int
    parity: int
    primitive: bool

    @property
    def q(self) -> int:
        return self.group.q

    def __eq__(self, other):
        return (
            isinstance(other, DirichletCharacter)
            and other.q == self.q
            and other.exponents == self.exponents
        )

    def __hash__(self):
        return hash((self.q, self.exponents))

    def phase_numerators(self) -> np.ndarray:
        """k(n) with chi(n) = e(k(n)/L), L the group exponent; -1 marks non-units."""
        L = self.group.exponent
        mat = self.group.dlog_matrix
        w = np.array([e * (L // o) for e, o in zip(self.exponents, self.group.orders)], dtype=np.int64)
        k = (mat @ w) % L if mat.shape[1] else np.zeros(self.q, dtype=np.int64)
        k[mat[:, 0] < 0 if mat.shape[1] else np.gcd(np.arange(self.q), self.q) != 1] = -1
        return k

    def values(self) -> np.ndarray:
        """chi(n) for n = 0..q-1."""
        return _values(self)

    def __call__(self, n: int) -> complex:
        return eval_char(self, n)

    def conj(self) -> "DirichletCharacter":
        return self.group.character(tuple(-e for e in self.exponents))

    def is_principal(self) -> bool:
        return not any(self.exponents)

    def induced_from_conductor(self) -> "DirichletCharacter":
        """The primitive character modulo the conductor that induces this one."""
        f = self.conductor
        sub = build_group(f)
        q = self.q
        qf = as_factorization(q)
        exps = []
        for c in sub.components:
            # n = generator on the c.prime part of q and 1 on every other prime power
            full = c.prime ** dict(qf.factors)[c.prime]
            gen = -1 if (c.prime == 2 and c.generator == c.prime_power - 1) else c.generator
            res, mods = [gen % full], [full]
            for p, e in qf.factors:
                if p != c.prime:
                    res.append(1)
                    mods.append(p**e)
            n = crt(res, mods)
            val = eval_char(self, n)
            k = round(np.angle(val) / (2 * math.pi) * c.order) % c.order
            exps.append(k)
        chi = sub.character(exps)
        vals, ref = self.values(), chi.values()
        units = np.flatnonzero(np.gcd(np.arange(q), q) == 1)
        if not np.allclose(vals[units], ref[units % f], atol=1e-12):
            raise AssertionError("induced character does not match on units")
        return chi


@lru_cache(maxsize=4096)
def _values(chi: DirichletCharacter) -> np.ndarray:
    L = chi.group.exponent
    k = chi.phase_numerators()
    roots = np.array([_root(Fraction(j, L)) for j in range(L)])
    out = np.where(k >= 0, roots[np.maximum(k, 0)], 0)
    out.setflags(write=False)
    return out


def _local_conductor_exponent(group: CharacterGroup, exps: Tuple[int, ...]) -> int:
    """The conductor of the character with exponent vector ``exps``."""
    cond = 1
    i = 0
    for p, k in group.modulus.factors:
        if p != 2:
            e = exps[i]
            i += 1
            if e == 0:
                continue
            c = 1
            while e % p ** (k - c) != 0:
                c += 1
            cond *= p**c
            continue
        if k == 1:
            continue
        ea = exps[i]
        eb = exps[i + 1] if k >= 3 else 0
        i += 2 if k >= 3 else 1
        if ea == 0 and eb == 0:
            continue
        c = 2
        while eb % 2 ** (k - c) != 0:
            c += 1
        cond *= 2**c
    return cond


def _make_character(group: CharacterGroup, exps: Tuple[int, ...]) -> DirichletCharacter:
    cond = _local_conductor_exponent(group, exps)
    q = group.q
    # chi(-1): only components of even order see -1
    parity = 0
    if q > 2:
        d = group.dlog(q - 1)
        tot = sum(Fraction(e * x, o) for e, x, o in zip(exps, d, group.orders))
        parity = 0 if tot.denominator == 1 else 1
    return DirichletCharacter(group, exps, cond, parity, cond == q)


def enumerate_characters(group: CharacterGroup, filter: str = "all") -> List[DirichletCharacter]:
    """Characters in lexicographic order of exponent vectors, optionally filtered."""
    if filter not in FILTERS:
        raise InvalidInput(f"unknown filter {filter!r}; expected one of {FILTERS}")
    out = []
    for exps in np.ndindex(*group.orders) if group.orders else [()]:
        chi = _make_character(group, tuple(int(e) for e in exps))
        if filter == "all":
            out.append(chi)
        elif chi.primitive and (
            filter == "primitive"
            or (filter == "primitive_even" and chi.parity == 0)
            or (filter == "primitive_odd" and chi.parity == 1)
        ):
            out.append(chi)
    return out


def eval_char(chi: DirichletCharacter, n: int) -> complex:
    d = chi.group.dlog(n)
    if d is None:
        return 0j
    tot = sum(Fraction(e * x, o) for e, x, o in zip(chi.exponents, d, chi.group.orders)) % 1
    return _root(tot)


_QUARTER = {Fraction(0): 1 + 0j, Fraction(1, 4): 1j, Fraction(1, 2): -1 + 0j, Fraction(3, 4): -1j}


def _root(t: Fraction) -> complex:
    """e(t), exact at the quarter turns so real characters come out real."""
    if t in _QUARTER:
        return _QUARTER[t]
    return complex(np.exp(2j * np.pi * float(t)))


def character_sum_transform(group: CharacterGroup, z: np.ndarray) -> np.ndarray:
    """sum_a chi(a) z[a] for every character chi at once, in enumeration order.

    Indexing z by the discrete-log vector turns the character sum into a
    multidimensional DFT over the component orders.
    """
    z = np.asarray(z)
    if z.shape[0] != group.q:
        raise InvalidInput("z must be indexed by residues 0..q-1")
    if not group.orders:
        return np.array([z[0] if group.q == 1 else z[1 % group.q]], dtype=complex).reshape(1, *z.shape[1:])
    mat = group.dlog_matrix
    units = mat[:, 0] >= 0
    t = np.zeros(group.orders + z.shape[1:], dtype=complex)
    t[tuple(mat[units].T)] = z[units]
    axes = tuple(range(len(group.orders)))
    out = np.fft.ifftn(t, axes=axes) * group.size
    return out.reshape((group.size,) + z.shape[1:])


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum_{x mod q} chi(x) e(x/q)."""
    q = chi.q
    return complex(np.dot(chi.values(), np.exp(2j * np.pi * np.arange(q) / q)))


def _local_groups(group: CharacterGroup):
    """Component indices grouped by prime, with the exponent of that prime in q."""
    out = {}
    for i, c in enumerate(group.components):
        out.setdefault(c.prime, []).append(i)
    f = as_factorization(group.q)
    return [(p, k, out.get(p, [])) for p, k in f.factors]


def character_pair_sums(q: IntLike, ns, m: int) -> np.ndarray:
    """Exact sum over all chi mod q of chi(n) conj chi(m), for every n in ``ns``.

    Each character is an exponent vector, so the sum factors into complete sums of
    roots of unity over the components.
    """
    group = build_group(q)
    ns = np.asarray(ns, dtype=np.int64)
    qv = group.q
    out = np.zeros(ns.shape, dtype=np.int64)
    dm = group.dlog(m)
    if dm is None:
        return out
    if not group.components:
        return np.ones(ns.shape, dtype=np.int64) * (np.gcd(ns, qv) == 1)
    mat = group.dlog_matrix[ns % qv]
    unit = mat[:, 0] >= 0
    acc = np.ones(ns.shape, dtype=np.int64)
    for i, o in enumerate(group.orders):
        acc = acc * unit_root_sum(mat[:, i] - dm[i], o)
    out[unit] = acc[unit]
    return out


def primitive_pair_sum(q: IntLike, m: int, n: int) -> int:
    """Exact sum over primitive chi mod q of chi(m) conj chi(n).

    Primitive characters are products of primitive local characters, and a local
    character mod p^k is imprimitive exactly when its exponent lies in the subgroup
    coming from p^(k-1); both sums are complete root-of-unity sums.
    """
    group = build_group(q)
    dm, dn = group.dlog(m), group.dlog(n)
    if dm is None or dn is None:
        return 0
    total = 1
    for p, k, idx in _local_groups(group):
        delta = {i: dm[i] - dn[i] for i in idx}
        orders = {i: group.orders[i] for i in idx}
        if p != 2:
            (i,) = idx
            o = orders[i]
            sub = o if k == 1 else p
            local = unit_root_sum(delta[i], o) - unit_root_sum(delta[i], o // sub)
        elif k == 1:
            local = 0
        elif k == 2:
            (i,) = idx
            local = unit_root_sum(delta[i], 2) - 1
        else:
            i_sign, i_five = idx
            o5 = orders[i_five]
            local = unit_root_sum(delta[i_sign], 2) * (
                unit_root_sum(delta[i_five], o5) - unit_root_sum(delta[i_five], o5 // 2)
            )
        total *= local
        if total == 0:
            break
    return total


def primitive_even_pair_sum(q: IntLike, m: int, n: int) -> Fraction:
    """Exact sum over primitive even chi of chi(m) conj chi(n), as (P(m,n) + P(-m,n)) / 2."""
    return Fraction(primitive_pair_sum(q, m, n) + primitive_pair_sum(q, -m, n), 2)


def _lemma_rhs(q: Factorization, m: int, n: int) -> Fraction:
    def part(k: int) -> int:
        g = math.gcd(q.value, k)
        return sum(euler_phi(d) * moebius(q.value // d) for d in divisors(g))

    return Fraction(part(m - n) + part(m + n), 2)


def orthogonality_check(q: IntLike, m: int, n: int) -> Tuple[complex, Fraction]:
    """Sum over primitive even chi of chi(m) conj chi(n), and its divisor-sum closed form."""
    f = as_factorization(q)
    if math.gcd(m * n, f.value) != 1:
        raise InvalidInput(f"orthogonality formula needs gcd(mn, q) = 1, got m={m}, n={n}, q={f.value}")
    group = build_group(f)
    lhs = 0j
    for chi in enumerate_characters(group, "primitive_even"):
        v = chi.values()
        lhs += v[m % f.value] * np.conj(v[n % f.value])
    return lhs, _lemma_rhs(f, m, n)
