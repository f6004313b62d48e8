"""Command-line front end.

Subcommands: ``limit``, ``exact``, ``mc``, ``oracle two-point``,
``oracle moment``, ``psi``, ``compare`` and ``selftest``. Results are written
as JSON (default) or CSV to stdout or ``--out``.

Complex numbers are written ``a``, ``a+bi``, ``a-bi`` or ``bi`` with no
whitespace; lists are comma-separated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .block import build_block, exact_autocorr
from .errors import CBEError, DomainError, NumericError, RangeError
from .limit import LIMIT_TOL, limit_autocorr_solution, limit_single_point, psi_eval, psi_series
from .oracles import single_point_moment_finite_n, two_point_closed_form
from .szego import mc_autocorr

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_RANGE = 0, 2, 3, 4
CSV_COLUMNS = ["beta", "n", "method", "w", "y", "value_re", "value_im", "stderr_re", "stderr_im"]
METHODS = ("mc", "exact", "limit", "oracle")


class ValidationError(CBEError, ValueError):
    code = "validation"


_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^(?P<re>[+-]?{_NUM})?(?:(?P<im>[+-]?(?:{_NUM})?)i)?$"
)
_IMAG_RE = re.compile(rf"^(?P<im>[+-]?(?:{_NUM})?)i$")


def parse_complex(text: str) -> complex:
    """Parse ``"a"``, ``"a+bi"``, ``"a-bi"``, ``"bi"``, ``"-i"``."""
    text = text.strip() if text is not None else ""
    pure = _IMAG_RE.match(text)
    if pure is not None:  # "3i" would otherwise split as 3 + i
        im = pure.group("im")
        return complex(0.0, {"": 1.0, "+": 1.0, "-": -1.0}.get(im) or float(im))
    m = _COMPLEX_RE.match(text)
    if not text or m is None or (m.group("re") is None and m.group("im") is None):
        raise ValidationError(f"cannot parse complex number {text!r}")
    re_part = float(m.group("re")) if m.group("re") is not None else 0.0
    im = m.group("im")
    if im is None:
        im_part = 0.0
    elif im in ("", "+"):
        im_part = 1.0
    elif im == "-":
        im_part = -1.0
    else:
        if m.group("re") is not None and im[0] not in "+-":
            raise ValidationError(f"cannot parse complex number {text!r}")
        im_part = float(im)
    return complex(re_part, im_part)


def format_complex(z: complex) -> str:
    """Inverse of :func:`parse_complex`; round-trips doubles exactly."""
    z = complex(z)
    if z.imag == 0.0 and math.copysign(1.0, z.imag) > 0:
        return repr(z.real)
    sign = "+" if math.copysign(1.0, z.imag) > 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_complex_list(text: Optional[str]) -> list[complex]:
    if text is None or text == "":
        return []
    return [parse_complex(part) for part in text.split(",")]


@dataclass
class AutocorrQuery:
    beta: float
    method: str
    w: list = field(default_factory=list)
    y: list = field(default_factory=list)
    n: Optional[int] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    tol: Optional[float] = None
    lam: Optional[float] = None

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        if not isinstance(self.beta, (int, float)) or not self.beta > 0 or not math.isfinite(self.beta):
            raise ValidationError(f"beta must be a positive finite number, got {self.beta!r}")
        if self.n is not None and (int(self.n) != self.n or self.n < 1):
            raise ValidationError(f"n must be a positive integer, got {self.n!r}")
        if self.method in ("mc", "exact") and self.n is None:
            raise ValidationError(f"method {self.method} requires n")
        if self.method == "mc" and self.samples is None:
            raise ValidationError("method mc requires samples")
        if self.method == "oracle":
            if self.lam is not None:
                if self.n is None:
                    raise ValidationError("the moment oracle requires n")
            elif not self._single_point() and not (len(self.w) == 1 and len(self.y) == 1 and self.n is None):
                raise ValidationError(
                    "oracle needs a two-point query (one w, one y, no n) or the single-point form (w = y = 0)"
                )
        elif self.lam is not None:
            raise ValidationError("lam is only meaningful for method oracle")
        if self.method != "oracle" and not self.w and not self.y:
            raise ValidationError("at least one of w, y must be non-empty")

    def _single_point(self) -> bool:
        return bool(self.y) and len(self.w) == len(self.y) and all(v == 0 for v in self.w + self.y)

    def echo(self) -> dict:
        out = asdict(self)
        out["w"] = [format_complex(v) for v in self.w]
        out["y"] = [format_complex(v) for v in self.y]
        return out

    @classmethod
    def from_echo(cls, data: dict) -> "AutocorrQuery":
        data = dict(data)
        data["w"] = [parse_complex(v) for v in data.get("w", [])]
        data["y"] = [parse_complex(v) for v in data.get("y", [])]
        return cls(**data)


@dataclass
class AutocorrResult:
    query: AutocorrQuery
    value: complex
    stderr: Optional[tuple[float, float]] = None
    normalized: Optional[complex] = None
    truncation_K: Optional[int] = None
    runtime_ms: float = 0.0
    log_value: Optional[float] = None

    def to_json(self) -> dict:
        def cx(z):
            return None if z is None else {"re": z.real, "im": z.imag}

        out = {
            "query": self.query.echo(),
            "value": cx(self.value),
            "stderr": None if self.stderr is None else {"re": self.stderr[0], "im": self.stderr[1]},
            "normalized": cx(self.normalized),
            "truncation_K": self.truncation_K,
            "runtime_ms": self.runtime_ms,
        }
        if self.log_value is not None:
            out["log_value"] = self.log_value
        return out

    def csv_row(self) -> dict:
        q = self.query
        value = self.value if self.value is not None else complex("nan")
        return {
            "beta": q.beta,
            "n": "" if q.n is None else q.n,
            "method": q.method,
            "w": ",".join(format_complex(v) for v in q.w),
            "y": ",".join(format_complex(v) for v in q.y),
            "value_re": value.real,
            "value_im": value.imag,
            "stderr_re": "" if self.stderr is None else self.stderr[0],
            "stderr_im": "" if self.stderr is None else self.stderr[1],
        }


def normalization_exponent(beta: float, R: int, r: int) -> float:
    return 2.0 * r * (R - r) / beta


def run_query(q: AutocorrQuery, threads: int = 1) -> AutocorrResult:
    """Dispatch one query to the Monte Carlo, exact, limit or oracle route."""
    q.validate()
    t0 = time.perf_counter()
    stderr = None
    K = None
    log_value = None
    if q.method == "mc":
        seed = 0 if q.seed is None else q.seed
        est = mc_autocorr(q.beta, q.n, q.w, q.y, q.samples, seed, workers=threads)
        value = est.mean
        stderr = (est.stderr_re, est.stderr_im)
    elif q.method == "exact":
        value = exact_autocorr(q.beta, q.n, q.w, q.y)
    elif q.method == "limit":
        value, sol = limit_autocorr_solution(q.beta, q.w, q.y, tol=q.tol or LIMIT_TOL)
        K = sol.truncation_K
    else:
        if q.lam is not None or (q._single_point() and q.n is not None):
            lam = q.lam if q.lam is not None else len(q.y)
            mv = single_point_moment_finite_n(q.beta, q.n, lam)
            value = None if mv.value is None else complex(mv.value)
            log_value = mv.log_value
        elif q._single_point():
            value = complex(limit_single_point(q.beta, len(q.y)))
        else:
            value = two_point_closed_form(q.beta, q.w[0], q.y[0])
    normalized = None
    if q.n is not None and value is not None:
        if q.lam is not None:
            exponent = 2.0 * q.lam**2 / q.beta
        else:
            exponent = normalization_exponent(q.beta, len(q.w) + len(q.y), len(q.y))
        normalized = value * q.n ** (-exponent)
    runtime = (time.perf_counter() - t0) * 1e3
    return AutocorrResult(q, value, stderr, normalized, K, runtime, log_value)


def run_compare(
    beta: float,
    n_list: list[int],
    w: list[complex],
    y: list[complex],
    samples: Optional[int] = None,
    seed: int = 0,
    mc_n: Optional[list[int]] = None,
    threads: int = 1,
) -> dict:
    """Tabulate exact finite-n values against the limit, plus MC and Bessel rows."""
    R, r = len(w) + len(y), len(y)
    exponent = normalization_exponent(beta, R, r)
    limit_value, _ = limit_autocorr_solution(beta, w, y)
    oracle = None
    if len(w) == 1 and len(y) == 1:
        oracle = two_point_closed_form(beta, w[0], y[0])
    rows = []
    for n in n_list:
        exact = exact_autocorr(beta, n, w, y)
        normalized = exact * n ** (-exponent)
        err = abs(normalized - limit_value)
        rows.append(
            {
                "n": n,
                "exact": {"re": exact.real, "im": exact.imag},
                "normalized": {"re": normalized.real, "im": normalized.imag},
                "abs_err": err,
                "rel_err": err / abs(limit_value) if limit_value != 0 else None,
            }
        )
    errs = [row["abs_err"] for row in rows]
    checks = {
        "monotone_decrease": all(a > b for a, b in zip(errs, errs[1:])) if len(errs) > 1 else None,
        "final_within_2pct": rows[-1]["rel_err"] is not None and rows[-1]["rel_err"] <= 0.02 if rows else None,
        "oracle_match": None if oracle is None else abs(oracle - limit_value) <= 1e-9 * (1 + abs(oracle)),
    }
    mc_rows = []
    if samples:
        for n in mc_n if mc_n is not None else n_list[:1]:
            est = mc_autocorr(beta, n, w, y, samples, seed, workers=threads)
            exact = exact_autocorr(beta, n, w, y)
            z_re = (est.mean.real - exact.real) / est.stderr_re if est.stderr_re > 0 else 0.0
            z_im = (est.mean.imag - exact.imag) / est.stderr_im if est.stderr_im > 0 else 0.0
            mc_rows.append(
                {
                    "n": n,
                    "mean": {"re": est.mean.real, "im": est.mean.imag},
                    "stderr": {"re": est.stderr_re, "im": est.stderr_im},
                    "exact": {"re": exact.real, "im": exact.imag},
                    "z": {"re": z_re, "im": z_im},
                    "pass": abs(z_re) <= 4 and abs(z_im) <= 4,
                }
            )
    return {
        "beta": beta,
        "w": [format_complex(v) for v in w],
        "y": [format_complex(v) for v in y],
        "exponent": exponent,
        "limit": {"re": limit_value.real, "im": limit_value.imag},
        "oracle": None if oracle is None else {"re": oracle.real, "im": oracle.imag},
        "rows": rows,
        "mc": mc_rows,
        "checks": checks,
    }


def parse_grid(text: str) -> np.ndarray:
    try:
        a, b, steps = text.split(":")
        a, b, steps = float(a), float(b), int(steps)
    except ValueError:
        raise ValidationError(f"--grid-x expects a:b:steps, got {text!r}") from None
    if steps < 1:
        raise ValidationError("--grid-x needs at least one step")
    return np.linspace(a, b, steps)


def _default_seed() -> int:
    env = os.environ.get("CBA_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"CBA_SEED must be an integer, got {env!r}") from None


def _add_common(p: argparse.ArgumentParser, n_required: bool = False) -> None:
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, required=n_required)
    p.add_argument("--w", default="")
    p.add_argument("--y", default="")
    p.add_argument("--grid-x", dest="grid_x", help="sweep w=[x], y=[-x] over a:b:steps")
    _add_output(p)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write output to PATH instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbe-autocorr",
        description="Autocorrelations of the circular beta ensemble characteristic polynomial.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("limit", help="microscopic limit via the ODE series")
    _add_common(p)
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("exact", help="exact finite-n value via transfer products")
    _add_common(p, n_required=True)

    p = sub.add_parser("mc", help="Monte Carlo estimate")
    _add_common(p, n_required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("oracle", help="closed-form reference values")
    osub = p.add_subparsers(dest="oracle", required=True)
    q = osub.add_parser("two-point", help="Bessel-function two-point limit")
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--w", default="")
    q.add_argument("--y", default="")
    q.add_argument("--grid-x", dest="grid_x")
    _add_output(q)
    q = osub.add_parser("moment", help="finite-n E|Z_n|^(2 lam) from the Selberg product")
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--lam", type=float, required=True)
    _add_output(q)

    p = sub.add_parser("psi", help="dump Psi series coefficients and values")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--w", default="")
    p.add_argument("--y", default="")
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--t", default="1", help="comma-separated evaluation times in (0, 2]")
    _add_output(p)

    p = sub.add_parser("compare", help="exact vs limit vs Monte Carlo report")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n-list", dest="n_list", default="250,500,1000,2000")
    p.add_argument("--w", default="")
    p.add_argument("--y", default="")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mc-n", dest="mc_n", default=None, help="n values for MC rows (default: first of --n-list)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    _add_output(p)

    sub.add_parser("selftest", help="run the acceptance criteria")
    return parser


def _queries_from_args(args, method: str) -> list[AutocorrQuery]:
    base = dict(beta=args.beta, method=method)
    for name in ("n", "samples", "tol", "lam"):
        if getattr(args, name, None) is not None:
            base[name] = getattr(args, name)
    if method == "mc":
        base["seed"] = args.seed if args.seed is not None else _default_seed()
    grid = getattr(args, "grid_x", None)
    if grid:
        if args.w or args.y:
            raise ValidationError("--grid-x cannot be combined with --w/--y")
        return [AutocorrQuery(w=[complex(x)], y=[complex(-x)], **base) for x in parse_grid(grid)]
    w = parse_complex_list(getattr(args, "w", ""))
    y = parse_complex_list(getattr(args, "y", ""))
    return [AutocorrQuery(w=w, y=y, **base)]


def _render_results(results: list[AutocorrResult], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for res in results:
            writer.writerow(res.csv_row())
        return buf.getvalue()
    payload = results[0].to_json() if len(results) == 1 else [res.to_json() for res in results]
    return json.dumps(payload, indent=2) + "\n"


def _render_compare(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "n", "re", "im", "abs_err", "rel_err", "stderr_re", "stderr_im", "pass"])
    writer.writerow(["limit", "", report["limit"]["re"], report["limit"]["im"], "", "", "", "", ""])
    if report["oracle"] is not None:
        writer.writerow(
            ["oracle", "", report["oracle"]["re"], report["oracle"]["im"], "", "", "", "", report["checks"]["oracle_match"]]
        )
    for row in report["rows"]:
        writer.writerow(
            ["exact_normalized", row["n"], row["normalized"]["re"], row["normalized"]["im"], row["abs_err"], row["rel_err"], "", "", ""]
        )
    for row in report["mc"]:
        writer.writerow(
            ["mc", row["n"], row["mean"]["re"], row["mean"]["im"], "", "", row["stderr"]["re"], row["stderr"]["im"], row["pass"]]
        )
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _psi_dump(args) -> dict:
    w = parse_complex_list(args.w)
    y = parse_complex_list(args.y)
    R, r = len(w) + len(y), len(y)
    if R == 0:
        raise ValidationError("at least one of w, y must be non-empty")
    block = build_block(R, r)
    x = w + [v.conjugate() for v in y]
    sol = psi_series(block, args.beta, x, tol=args.tol)
    times = [float(t) for t in args.t.split(",")]
    return {
        "beta": args.beta,
        "R": R,
        "r": r,
        "states": ["".join(map(str, s)) for s in block.states],
        "sigma": sol.sigma,
        "truncation_K": sol.truncation_K,
        "coeffs": [[{"re": c.real, "im": c.imag} for c in vec] for vec in sol.coeffs],
        "values": [
            {"t": t, "psi": [{"re": c.real, "im": c.imag} for c in psi_eval(sol, t)]} for t in times
        ],
    }


_EXIT_KIND = {EXIT_VALIDATION: "validation", EXIT_NUMERIC: "numeric", EXIT_RANGE: "range"}


def _error_exit(exc: Exception, code: int) -> int:
    kind = getattr(exc, "code", _EXIT_KIND[code])
    sys.stderr.write(json.dumps({"error": {"code": kind, "message": str(exc)}}) + "\n")
    return code


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "selftest":
            from .acceptance import run_all

            results = run_all()
            return EXIT_OK if all(res.passed for res in results) else 1
        if args.command == "psi":
            if args.format != "json":
                raise ValidationError("psi output is JSON only")
            _emit(json.dumps(_psi_dump(args), indent=2) + "\n", args.out)
            return EXIT_OK
        if args.command == "compare":
            n_list = [int(v) for v in args.n_list.split(",") if v]
            mc_n = [int(v) for v in args.mc_n.split(",")] if args.mc_n else None
            seed = args.seed if args.seed is not None else _default_seed()
            report = run_compare(
                args.beta,
                n_list,
                parse_complex_list(args.w),
                parse_complex_list(args.y),
                samples=args.samples,
                seed=seed,
                mc_n=mc_n,
                threads=args.threads,
            )
            _emit(_render_compare(report, args.format), args.out)
            return EXIT_OK
        method = "oracle" if args.command == "oracle" else args.command
        queries = _queries_from_args(args, method)
        threads = getattr(args, "threads", 1)
        results = [run_query(q, threads=threads) for q in queries]
        _emit(_render_results(results, args.format), args.out)
        return EXIT_OK
    except (ValidationError, DomainError) as exc:
        return _error_exit(exc, EXIT_VALIDATION)
    except RangeError as exc:
        return _error_exit(exc, EXIT_RANGE)
    except (NumericError, OverflowError, FloatingPointError) as exc:
        return _error_exit(exc, EXIT_NUMERIC)


if __name__ == "__main__":
    sys.exit(main())
