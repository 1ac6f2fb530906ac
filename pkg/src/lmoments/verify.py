"""Acceptance checks shared by the CLI (``verify-all``) and the test suite.

Each check returns a CheckResult whose rows and summary hold only computed
values (never timings), so that a report is a pure function of the seed.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .arith import as_factorization, is_probable_prime, primes_up_to
from .characters import build_group, enumerate_characters
from .dirichlet import afe_residual, diagonal_check, leading_ratio, main_term_limit, moment_report
from .estermann import (
    EstermannPoint,
    dq_fe_residual,
    estermann_fe_residual,
    residue_at,
    residue_closed_form,
)
from .kloosterman import fast_batch, naive_batch, naive_grid, weil_ratio
from .special import ShiftTuple
from .sums import exact_suite, sweep

PINS_FILE = "pins.json"
ANALYTIC_TOL = 1e-6
REGRESSION_SLACK = 0.05


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    summary: Dict[str, object] = field(default_factory=dict)
    rows: List[Dict[str, object]] = field(default_factory=list)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"criterion {self.criterion:2d} {verdict}  {self.name}"

    def to_dict(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "passed": self.passed,
                "summary": self.summary, "rows": self.rows}


def pmap(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Order-preserving map, threaded when ``threads`` > 1."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as ex:
        return list(ex.map(fn, items))


def load_pins() -> dict:
    return json.loads(resources.files(__package__).joinpath("data", PINS_FILE).read_text())


def primes_from(start: int, count: int = 5) -> List[int]:
    out, n = [], start
    while len(out) < count:
        if is_probable_prime(n):
            out.append(n)
        n += 1
    return out


# ------------------------------------------------------------ 1 and 3: Kloosterman


def exhaustive_moduli(limit: int = 3000) -> List[int]:
    """Odd prime powers p^j <= limit with j >= 2 (the closed-form cases)."""
    out = []
    for p in primes_up_to(int(math.isqrt(limit)) + 1):
        p = int(p)
        if p == 2:
            continue
        q = p * p
        while q <= limit:
            out.append(q)
            q *= p
    return sorted(out)


def predicted_zero(m: np.ndarray, n: np.ndarray, q: int) -> np.ndarray:
    """True where some prime-power factor p^j (j >= 2) has q != (m,p^j) != (n,p^j) != q."""
    out = np.zeros(np.broadcast(m, n).shape, dtype=bool)
    for p, j in as_factorization(q).factors:
        if j < 2:
            continue
        qi = p**j
        gm, gn = np.gcd(m, qi), np.gcd(n, qi)
        out |= (gm != qi) & (gn != qi) & (gm != gn)
    return out


@dataclass
class _KStats:
    q: int
    kind: str
    max_diff_over_sqrt_q: float
    max_weil_ratio: float
    zero_cases: int
    max_zero_over_sqrt_q: float

    def row(self) -> dict:
        return dict(q=self.q, kind=self.kind, diff=self.max_diff_over_sqrt_q, weil=self.max_weil_ratio,
                    zero_cases=self.zero_cases, zero=self.max_zero_over_sqrt_q)


def _kloosterman_block(q: int, m: np.ndarray, n: np.ndarray, naive: np.ndarray, kind: str) -> _KStats:
    fast = fast_batch(m, n, q)
    sq = math.sqrt(q)
    zero = predicted_zero(m, n, q)
    return _KStats(
        q, kind,
        float(np.max(np.abs(fast - naive))) / sq,
        float(np.max(weil_ratio(naive, m, n, q))),
        int(zero.sum()),
        float(np.max(np.abs(naive[zero]), initial=0.0)) / sq,
    )


def _random_block(args) -> _KStats:
    q, m, n = args
    return _kloosterman_block(q, m, n, naive_batch(m, n, q), "random")


def _exhaustive_block(q: int) -> _KStats:
    mm, nn = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    return _kloosterman_block(q, mm, nn, naive_grid(q), "exhaustive")


def kloosterman_sweep(seed: int, q_max: int = 2000, per_q: int = 100, pp_limit: int = 3000,
                      threads: int = 1) -> List[_KStats]:
    rng = np.random.default_rng(seed)
    jobs = [(q, rng.integers(-10**6, 10**6, per_q), rng.integers(-10**6, 10**6, per_q))
            for q in range(1, q_max + 1)]
    out = pmap(_random_block, jobs, threads)
    out += pmap(_exhaustive_block, exhaustive_moduli(pp_limit), threads)
    return out


def check_kloosterman(stats: List[_KStats]) -> CheckResult:
    worst = max(s.max_diff_over_sqrt_q for s in stats)
    ex = [s for s in stats if s.kind == "exhaustive"]
    return CheckResult(
        1, "fast Kloosterman evaluator agrees with the definition", worst < 1e-8,
        dict(max_diff_over_sqrt_q=worst, random_moduli=len(stats) - len(ex),
             exhaustive_moduli=[s.q for s in ex]),
        [s.row() for s in ex],
    )


def check_weil(stats: List[_KStats]) -> CheckResult:
    weil = max(s.max_weil_ratio for s in stats)
    zero = max(s.max_zero_over_sqrt_q for s in stats)
    cases = sum(s.zero_cases for s in stats)
    return CheckResult(
        3, "Weil bound and vanishing structure hold", weil <= 1 + 1e-9 and zero < 1e-9,
        dict(max_weil_ratio=weil, zero_cases=cases, max_zero_over_sqrt_q=zero),
    )


# ------------------------------------------------------------ 2: exact identities


def check_exact(seed: int, q_max: int = 2000) -> CheckResult:
    fails = exact_suite(q_max, seed)
    return CheckResult(2, f"exact identities for q <= {q_max}", not any(fails.values()),
                       dict(q_max=q_max, failures=fails))


# ------------------------------------------------------------ 4: Estermann / D_q

S_OFF = complex(0.2, 0.1)
FAMILIES = ("classical", "character", "squarefree", "dq", "residue")
# the unfolded D_q right side is reported next to the stated one but does not decide the verdict
INFORMATIONAL = ("dq_unfolded",)
LAM = complex(0.3, 0.0)


def estermann_grid() -> Dict[str, list]:
    """Families of (label, thunk) pairs; each thunk returns an absolute residual."""
    fam: Dict[str, list] = {k: [] for k in FAMILIES + INFORMATIONAL}
    for l in (1, 2, 3, 5, 7, 12):
        for h in (1, 5):
            if math.gcd(h, l) == 1:
                pt = EstermannPoint(S_OFF, LAM, h, l)
                fam["classical"].append(((l, h), lambda pt=pt: estermann_fe_residual(pt, "classical")))
    for q in (3, 4, 5):
        for chi in enumerate_characters(build_group(q)):
            for l in (1, 2, 7):
                if math.gcd(l, q) == 1:
                    pt = EstermannPoint(S_OFF, LAM, 1, l, q, chi)
                    fam["character"].append(((q, l, chi.exponents), lambda pt=pt: estermann_fe_residual(pt, "character")))
    for q in (2, 3, 5, 6, 10, 15):
        for l in (1, 7):
            if math.gcd(l, q) == 1 and l * q <= 60:
                pt = EstermannPoint(S_OFF, LAM, 1, l, q)
                fam["squarefree"].append(((q, l), lambda pt=pt: estermann_fe_residual(pt, "squarefree")))
    for q in (2, 3, 5, 6):
        for l in (1, 7):
            for r in (0, 1, 2):
                if math.gcd(l, q) == 1 and l * q <= 60:
                    fam["dq"].append(((q, l, r), lambda q=q, l=l, r=r: dq_fe_residual(S_OFF, LAM, 1, l, r, q)))
                    fam["dq_unfolded"].append(
                        ((q, l, r), lambda q=q, l=l, r=r: dq_fe_residual(S_OFF, LAM, 1, l, r, q, "unfolded")))
    lam = complex(0.4, 0.0)
    res_pts = [EstermannPoint(2, lam, 1, 5), EstermannPoint(2, lam, 2, 7)]
    g6 = build_group(6)
    res_pts += [EstermannPoint(2, lam, 1, 5, 6, enumerate_characters(g6)[0])]
    res_pts += [EstermannPoint(2, lam, 1, 5, 6, r=2), EstermannPoint(2, lam, 1, 1, 3, r=1)]
    for pt in res_pts:
        for s0 in (1, 1 + lam):
            fam["residue"].append(((pt.l, pt.q, pt.r, s0.real if isinstance(s0, complex) else s0),
                                   lambda pt=pt, s0=s0: abs(residue_at(pt, s0) - residue_closed_form(pt, s0))))
    return fam


def check_estermann(threads: int = 1) -> CheckResult:
    fam = estermann_grid()
    summary, rows, ok = {}, [], True
    for name, items in fam.items():
        vals = pmap(lambda it: float(it[1]()), items, threads)
        worst = max(vals)
        summary[name] = worst
        if name in FAMILIES:
            ok &= worst < ANALYTIC_TOL
        rows += [dict(family=name, point=str(lbl), residual=v) for (lbl, _), v in zip(items, vals)]
    return CheckResult(4, "Estermann and D_q functional equations and residues", ok, summary, rows)


# ------------------------------------------------------------ 5: AFE

AFE_SHIFTS = ShiftTuple(0.01j, 0.02j, 0.03j, 0.05j)


def afe_characters(q: int):
    prim = enumerate_characters(build_group(q), "primitive")
    even = next(c for c in prim if c.parity == 0)
    odd = next(c for c in prim if c.parity == 1)
    return even, odd


def check_afe(threads: int = 1) -> CheckResult:
    jobs = [(q, chi) for q in (5, 7, 8) for chi in afe_characters(q)]
    vals = pmap(lambda j: afe_residual(j[1], AFE_SHIFTS), jobs, threads)
    rows = [dict(q=q, parity=chi.parity, exponents=list(chi.exponents), residual=float(v))
            for (q, chi), v in zip(jobs, vals)]
    worst = float(max(vals))
    return CheckResult(5, "approximate functional equation", worst < ANALYTIC_TOL,
                       dict(max_residual=worst), rows)


# ------------------------------------------------------------ 6: diagonal

DIAGONAL_SHIFTS = ShiftTuple(0.2, 0.25, 0.3, 0.35)
DIAGONAL_MODULI = (101, 401, 1601)


def diagonal_values(threads: int = 1) -> List[dict]:
    res = pmap(lambda q: diagonal_check(q, DIAGONAL_SHIFTS), DIAGONAL_MODULI, threads)
    return [dict(q=q, gap=r.gap, z_q=abs(r.z_q), relative=r.gap / abs(r.z_q))
            for q, r in zip(DIAGONAL_MODULI, res)]


def check_diagonal(threads: int = 1, pins: Optional[dict] = None) -> CheckResult:
    rows = diagonal_values(threads)
    gaps = [r["gap"] for r in rows]
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    last = rows[-1]["relative"]
    pinned = _matches(gaps, (pins or load_pins())["diagonal_gaps"], 1e-6)
    return CheckResult(6, "diagonal term approaches Z_q", decreasing and last < 0.05 and pinned,
                       dict(decreasing=decreasing, relative_at_1601=last, matches_pins=pinned), rows)


def _matches(values: Sequence[float], pinned: Sequence[float], rel: float) -> bool:
    return len(values) == len(pinned) and all(abs(v - p) <= rel * abs(p) for v, p in zip(values, pinned))


# ------------------------------------------------------------ 7: fourth moment


def moment_deviations(centre: int, threads: int = 1) -> List[dict]:
    primes = primes_from(centre)
    reps = pmap(lambda q: moment_report(q, mode="all_primitive"), primes, threads)
    return [dict(q=r.modulus, moment=r.moment_value.real, main_term=r.main_term.real,
                 deviation=r.relative_deviation) for r in reps]


def check_moment(threads: int = 1, pins: Optional[dict] = None) -> CheckResult:
    small = moment_deviations(100, threads)
    large = moment_deviations(4000, threads)
    m_small = float(np.median([r["deviation"] for r in small]))
    m_large = float(np.median([r["deviation"] for r in large]))
    pinned = _matches([m_small, m_large], (pins or load_pins())["moment_medians"], 1e-6)
    ok = m_large < 0.25 and m_large < m_small and pinned
    return CheckResult(7, "fourth moment against its main term", ok,
                       dict(median_near_100=m_small, median_near_4000=m_large, matches_pins=pinned),
                       small + large)


# ------------------------------------------------------------ 8: leading coefficient

LEADING_MODULI = (10**3 + 9, 10**6 + 33, 10**9 + 7)


def check_leading(threads: int = 1) -> CheckResult:
    vals = pmap(lambda q: leading_ratio(q, main_term_limit(q).value), LEADING_MODULI, threads)
    errs = [abs(v - 1) for v in vals]
    ok = all(b < a for a, b in zip(errs, errs[1:]))
    return CheckResult(8, "leading coefficient of the main term", ok, dict(abs_ratio_minus_one=errs),
                       [dict(q=q, ratio=v) for q, v in zip(LEADING_MODULI, vals)])


# ------------------------------------------------------------ 9: sweeps

LADDER_PROPOSITIONS = ("proDS", "prok1k2")


def sweep_reports(threads: int = 1) -> dict:
    return {p: sweep(p, threads=threads) for p in ("proDS", "prok1k2", "tsum")}


def check_sweeps(threads: int = 1, pins: Optional[dict] = None) -> CheckResult:
    pins = (pins or load_pins())["sweep_ladders"]
    ok = True
    summary = {}
    for name, rep in sweep_reports(threads).items():
        ladder = rep.ladder()
        finite = all(math.isfinite(r) for r in rep.ratio)
        pinned = {int(k): v for k, v in pins[name].items()}
        regress = all(ladder[q] <= pinned[q] * (1 + REGRESSION_SLACK) for q in ladder)
        qs = sorted(ladder)
        trend = name not in LADDER_PROPOSITIONS or all(
            ladder[b] <= ladder[a] * (1 + REGRESSION_SLACK) for a, b in zip(qs, qs[1:]))
        ok &= finite and regress and trend
        summary[name] = dict(max_ratio=rep.max_ratio, ladder={str(q): ladder[q] for q in qs},
                             finite=finite, within_pins=regress, non_increasing=trend,
                             epsilon_convention=rep.epsilon_convention)
    return CheckResult(9, "bound sweeps", ok, summary)


# ------------------------------------------------------------ driver

CRITERIA = tuple(range(1, 11))


def run_checks(seed: int = 42, threads: int = 1, only: Optional[Iterable[int]] = None) -> List[CheckResult]:
    """Criteria 1-9 (criterion 10 compares whole reports and lives with the CLI)."""
    only = set(only or range(1, 10))
    out: List[CheckResult] = []
    if only & {1, 3}:
        stats = kloosterman_sweep(seed, threads=threads)
        if 1 in only:
            out.append(check_kloosterman(stats))
        if 3 in only:
            out.append(check_weil(stats))
    table = {2: lambda: check_exact(seed), 4: lambda: check_estermann(threads),
             5: lambda: check_afe(threads), 6: lambda: check_diagonal(threads),
             7: lambda: check_moment(threads), 8: lambda: check_leading(threads),
             9: lambda: check_sweeps(threads)}
    for k in sorted(only & set(table)):
        out.append(table[k]())
    return sorted(out, key=lambda c: c.criterion)
