"""Command-line front end.

Every command writes one report {"version", "command", "config", "rows", "summary"}
to stdout.  Exit codes: 0 when all checks pass, 1 when some check fails,
2 on invalid input (the message names the violated precondition).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .arith import factorize
from .characters import CACHE_ENV, build_group, enumerate_characters
from .dirichlet import MODES, l_value, main_term_limit, main_term_rhs, moment_report
from .errors import InvalidInput, LMomentsError
from .estermann import (
    DQ_FORMS,
    EstermannPoint,
    dq_fe_residual,
    estermann_direct,
    estermann_value,
    residue_at,
    residue_closed_form,
)
from .kloosterman import kloosterman
from .special import DEFAULT_PRECISION, ZERO_SHIFTS, PrecisionConfig, ShiftTuple
from .sums import DEFAULT_BUDGET, identity_suite, sweep
from .verify import ANALYTIC_TOL, CheckResult, run_checks, estermann_grid

SCHEMA_VERSION = 1
COMMANDS = ("factor", "char-table", "lvalue", "moment", "main-term", "kloosterman", "estermann-check",
            "dq-check", "sweep", "identities", "verify-all")
IDENTITY_TOL = 1e-8


@dataclass
class RunConfig:
    command: str
    params: Dict[str, object] = field(default_factory=dict)
    precision: PrecisionConfig = DEFAULT_PRECISION
    threads: int = 1
    seed: int = 0
    output_format: str = "json"
    cache_dir: Optional[str] = None
    work_budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidInput(f"unknown command {self.command!r}")
        if self.threads < 1:
            raise InvalidInput(f"threads must be >= 1, got {self.threads}")
        if self.work_budget <= 0:
            raise InvalidInput("work budget must be positive")
        if self.output_format not in ("json", "csv", "human"):
            raise InvalidInput(f"unknown output format {self.output_format!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidInput(f"unknown config keys: {sorted(extra)}")
        d = dict(d)
        if isinstance(d.get("precision"), dict):
            d["precision"] = PrecisionConfig(**d["precision"])
        return cls(**d)

    def echo(self) -> dict:
        """Config as it appears in reports; threads and cache location do not change results."""
        return {"command": self.command, "params": self.params, "seed": self.seed,
                "precision": asdict(self.precision), "work_budget": self.work_budget}


# ------------------------------------------------------------ encoding


def _plain(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_plain(report), indent=2) + "\n"
    rows = _plain(report["rows"])
    if fmt == "csv":
        cols: List[str] = []
        for r in rows:
            cols += [k for k in r if k not in cols]
        buf = io.StringIO()
        w = csv.DictWriter(buf, cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
        return buf.getvalue()
    lines = [f"{report['command']}:"]
    lines += ["  " + ", ".join(f"{k}={v}" for k, v in r.items()) for r in rows]
    lines += [f"  {k}: {v}" for k, v in _plain(report["summary"]).items()]
    return "\n".join(lines) + "\n"


def _shifts(text: Optional[str]) -> ShiftTuple:
    if not text:
        return ZERO_SHIFTS
    try:
        vals = [complex(t.strip().replace("i", "j")) for t in text.split(",")]
    except ValueError:
        raise InvalidInput(f"cannot parse shifts {text!r}; expected four comma-separated complex numbers")
    return ShiftTuple.from_seq(vals)


def _complex(text: str) -> complex:
    try:
        return complex(str(text).replace("i", "j").replace(" ", ""))
    except ValueError:
        raise InvalidInput(f"cannot parse {text!r} as a complex number")


# ------------------------------------------------------------ commands


def cmd_factor(cfg: RunConfig) -> dict:
    rows = []
    for n in cfg.params["n"]:
        f = factorize(int(n))
        rows.append(dict(n=f.value, factors=[list(pe) for pe in f.factors]))
    return dict(rows=rows, summary={"count": len(rows)})


def cmd_char_table(cfg: RunConfig) -> dict:
    q = int(cfg.params["q"])
    chars = enumerate_characters(build_group(q, cfg.cache_dir), cfg.params.get("filter", "all"))
    rows = [dict(index=i, exponents=list(c.exponents), conductor=c.conductor, parity=c.parity,
                 primitive=c.primitive) for i, c in enumerate(chars)]
    return dict(rows=rows, summary={"count": len(rows), "primitive": sum(c.primitive for c in chars)})


def cmd_lvalue(cfg: RunConfig) -> dict:
    q, idx = int(cfg.params["q"]), int(cfg.params["index"])
    chars = enumerate_characters(build_group(q, cfg.cache_dir))
    if not 0 <= idx < len(chars):
        raise InvalidInput(f"character index must lie in [0, {len(chars)}), got {idx}")
    s = _complex(cfg.params["s"])
    v = l_value(chars[idx], s, cfg.precision)
    return dict(rows=[dict(q=q, index=idx, exponents=list(chars[idx].exponents), s=s, value=v)],
                summary={"abs": abs(v)})


def cmd_moment(cfg: RunConfig) -> dict:
    rep = moment_report(int(cfg.params["q"]), _shifts(cfg.params.get("shifts")),
                        cfg.params.get("mode", "all_primitive"), cfg.precision)
    row = rep.to_dict()
    row.pop("wall_time")
    return dict(rows=[row], summary={"relative_deviation": rep.relative_deviation})


def cmd_main_term(cfg: RunConfig) -> dict:
    q, mode = int(cfg.params["q"]), cfg.params.get("mode", "all_primitive")
    if cfg.params.get("limit") or not cfg.params.get("shifts"):
        res = main_term_limit(q, mode, prec=cfg.precision)
        row = dict(q=q, mode=mode, value=res.value, error=res.error, radius=res.radius)
    else:
        sh = _shifts(cfg.params["shifts"])
        if mode == "all_primitive":
            value = 0.5 * (main_term_rhs(q, sh, 0, cfg.precision) + main_term_rhs(q, sh, 1, cfg.precision))
        elif mode in MODES:
            value = main_term_rhs(q, sh, 0 if mode == "even" else 1, cfg.precision)
        else:
            raise InvalidInput(f"unknown mode {mode!r}; expected one of {MODES}")
        row = dict(q=q, mode=mode, shifts=list(sh.as_tuple()), value=value)
    return dict(rows=[row], summary={"value": row["value"]})


def cmd_kloosterman(cfg: RunConfig) -> dict:
    m, n, q = (int(cfg.params[k]) for k in ("m", "n", "q"))
    res = kloosterman(m, n, q, cfg.params.get("method", "fast"))
    row = dict(m=m, n=n, q=q, value=res.value, method=res.method,
               trace=[list(t) for t in res.modulus_factor_trace])
    return dict(rows=[row], summary={"value": res.value, "method": res.method})


def _verdict(rows: List[dict], key: str, tol: float) -> dict:
    worst = max((r[key] for r in rows), default=0.0)
    fails = [r for r in rows if not r[key] < tol]
    return {"pass": len(rows) - len(fails), "fail": len(fails), "max_residual": worst, "tolerance": tol}


def cmd_estermann_check(cfg: RunConfig) -> dict:
    rows = []
    fam = estermann_grid()
    for name in ("classical", "character", "squarefree", "residue"):
        for label, thunk in fam[name]:
            rows.append(dict(check=name, point=str(label), residual=float(thunk())))
    pt = EstermannPoint(3.0, 0.5, 1, 5)
    rows.append(dict(check="direct_series", point=str((3.0, 0.5, 1, 5)),
                     residual=abs(estermann_value(pt, cfg.precision) - estermann_direct(pt))))
    return dict(rows=rows, summary=_verdict(rows, "residual", ANALYTIC_TOL))


def cmd_dq_check(cfg: RunConfig) -> dict:
    form = cfg.params.get("form", "lattice")
    if form not in DQ_FORMS:
        raise InvalidInput(f"unknown form {form!r}; expected one of {DQ_FORMS}")
    s = _complex(cfg.params.get("s", "0.2+0.1i"))
    lam = _complex(cfg.params.get("lam", "0.3"))
    rows = []
    for q in cfg.params.get("moduli", [2, 3, 5, 6]):
        for l in (1, 7):
            if math.gcd(l, q) != 1 or l * q > 60:
                continue
            for r in (0, 1, 2):
                rows.append(dict(q=q, l=l, r=r, form=form,
                                 residual=dq_fe_residual(s, lam, 1, l, r, q, form, cfg.precision)))
    for q, r in ((6, 2), (3, 1), (5, 0)):
        pt = EstermannPoint(2, 0.4, 1, 1, q, r=r)
        for s0 in (1, 1.4):
            rows.append(dict(q=q, l=1, r=r, form="residue", residual=abs(residue_at(pt, s0) - residue_closed_form(pt, s0))))
    return dict(rows=rows, summary=_verdict(rows, "residual", ANALYTIC_TOL))


def cmd_sweep(cfg: RunConfig) -> dict:
    prop = cfg.params["proposition"]
    grid = cfg.params.get("grid")
    rep = sweep(prop, grid if grid else None, threads=cfg.threads, budget=cfg.work_budget)
    rows = [dict(point=list(p), observed=o, bound=b, ratio=r)
            for p, o, b, r in zip(rep.grid, rep.observed, rep.bound, rep.ratio)]
    finite = all(math.isfinite(r) for r in rep.ratio)
    return dict(rows=rows, summary={"pass": int(finite), "fail": int(not finite), "max_ratio": rep.max_ratio,
                                    "ladder": rep.ladder(), "epsilon_convention": rep.epsilon_convention})


def cmd_identities(cfg: RunConfig) -> dict:
    res = identity_suite(cfg.seed)
    rows = [dict(identity=k, max_abs_residual=v) for k, v in res]
    return dict(rows=rows, summary=_verdict(rows, "max_abs_residual", IDENTITY_TOL))


def determinism_check(seed: int) -> CheckResult:
    """Seeded report payloads must not depend on repetition or on the thread count."""
    def payload(threads):
        return json.dumps(_plain([c.to_dict() for c in run_checks(seed, threads, only=(2, 9))]))

    a, b, c = payload(1), payload(1), payload(8)
    return CheckResult(10, "reports are byte-identical across runs and thread counts", a == b == c,
                       {"repeat_identical": a == b, "threads_identical": a == c})


def cmd_verify_all(cfg: RunConfig) -> dict:
    only = cfg.params.get("only") or list(range(1, 11))
    checks = run_checks(cfg.seed, cfg.threads, only=[k for k in only if k != 10])
    if 10 in only:
        checks.append(determinism_check(cfg.seed))
    for c in checks:
        print(c.line(), file=sys.stderr)
    rows = [c.to_dict() for c in checks]
    failed = [c.criterion for c in checks if not c.passed]
    return dict(rows=rows, summary={"pass": len(checks) - len(failed), "fail": len(failed),
                                    "failed_criteria": failed})


HANDLERS = {
    "factor": cmd_factor, "char-table": cmd_char_table, "lvalue": cmd_lvalue, "moment": cmd_moment,
    "main-term": cmd_main_term, "kloosterman": cmd_kloosterman, "estermann-check": cmd_estermann_check,
    "dq-check": cmd_dq_check, "sweep": cmd_sweep, "identities": cmd_identities, "verify-all": cmd_verify_all,
}


def run(cfg: RunConfig, out=None) -> int:
    """Execute one command; returns the exit code."""
    out = out or sys.stdout
    if cfg.cache_dir:
        os.environ[CACHE_ENV] = cfg.cache_dir
    body = HANDLERS[cfg.command](cfg)
    report = {"version": {"schema": SCHEMA_VERSION, "tool": __version__}, "command": cfg.command,
              "config": cfg.echo(), "rows": body["rows"], "summary": body["summary"]}
    out.write(render(report, cfg.output_format))
    return 1 if report["summary"].get("fail", 0) else 0


# ------------------------------------------------------------ argparse


def _int_list(text: str) -> List[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _grid(text: str) -> List[List[int]]:
    """Grid points separated by ';', coordinates by ','."""
    return [_int_list(p) for p in text.split(";") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=("json", "csv", "human"), default="json")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cache-dir", default=None, help=f"character table cache (overrides ${CACHE_ENV})")
    common.add_argument("--budget", dest="work_budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--tol", dest="target_abs_error", type=float, default=DEFAULT_PRECISION.target_abs_error)

    p = argparse.ArgumentParser(prog="lmoments", description="Moments of Dirichlet L-functions: evaluators and checks.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("factor", parents=[common], help="prime factorization")
    s.add_argument("n", type=int, nargs="+")
    s = sub.add_parser("char-table", parents=[common], help="characters modulo q")
    s.add_argument("q", type=int)
    s.add_argument("--filter", default="all", choices=("all", "primitive", "primitive_even", "primitive_odd"))
    s = sub.add_parser("lvalue", parents=[common], help="L(s, chi) for the chi-index-th character mod q")
    s.add_argument("q", type=int)
    s.add_argument("index", type=int)
    s.add_argument("s")
    s = sub.add_parser("moment", parents=[common], help="shifted fourth moment against its main term")
    s.add_argument("q", type=int)
    s.add_argument("--shifts")
    s.add_argument("--mode", default="all_primitive", choices=("even", "odd", "all", "all_primitive"))
    s = sub.add_parser("main-term", parents=[common], help="the six-term main term")
    s.add_argument("q", type=int)
    s.add_argument("--shifts")
    s.add_argument("--mode", default="all_primitive", choices=("even", "odd", "all", "all_primitive"))
    s.add_argument("--limit", action="store_true", help="zero-shift limit")
    s = sub.add_parser("kloosterman", parents=[common], help="S(m, n; q)")
    s.add_argument("m", type=int)
    s.add_argument("n", type=int)
    s.add_argument("q", type=int)
    s.add_argument("--method", default="fast", choices=("naive", "fast"))
    sub.add_parser("estermann-check", parents=[common], help="Estermann functional equations and residues")
    s = sub.add_parser("dq-check", parents=[common], help="functional equation and residues of D_q")
    s.add_argument("--form", default="lattice", choices=DQ_FORMS)
    s.add_argument("--moduli", type=_int_list, default=[2, 3, 5, 6])
    s.add_argument("--s", default="0.2+0.1i")
    s.add_argument("--lam", default="0.3")
    s = sub.add_parser("sweep", parents=[common], help="bound sweeps")
    s.add_argument("proposition", choices=("proDS", "prok1k2", "tsum"))
    s.add_argument("--grid", type=_grid, help="points like '101,10,10;211,15,15'")
    sub.add_parser("identities", parents=[common], help="arithmetic identity suite")
    s = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", type=_int_list, help="criteria to run, e.g. 1,2,9")
    return p


GLOBAL_KEYS = ("command", "output_format", "threads", "seed", "cache_dir", "work_budget", "target_abs_error")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items() if k not in GLOBAL_KEYS}
    if params.get("mode") == "all":
        params["mode"] = "all_primitive"
    prec = PrecisionConfig(target_abs_error=ns.target_abs_error)
    return RunConfig(ns.command, params, prec, ns.threads, ns.seed, ns.output_format, ns.cache_dir, ns.work_budget)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        return run(config_from_args(ns))
    except (InvalidInput, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except LMomentsError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
