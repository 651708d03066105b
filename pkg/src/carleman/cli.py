"""Command-line front end: ``verify``, ``scan``, ``sweep``, ``path``, ``counterexample``.

Exit codes: 0 success, 1 suite failure or positive scan finding, 2 usage or
configuration error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .derivative import (b_matrix, branch_ok, classify, d_alpha_gamma,
                         d_alpha_lambda, d_hat_alpha)
from .errors import CarlemanError, NonConvergenceError
from .gram import (KernelCombo, build_gram, eval_vector, projection_norm_sq,
                   quadratic_form)
from .homotopy import (NORM_PATH, PATH_A, PATH_B, mobius_reduce,
                       normalize_two_kernel, norm_path_slope,
                       path_A, path_B, two_kernel_norm_path)
from .quadrature import QuadratureConfig
from .scan import ScanSpec, run_scan
from .suites import SUITES, remark_instance, run_suite

log = logging.getLogger("carleman")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONV = 0, 1, 2, 3

SWEEP_HEADER = "param,value,d,n,branch_ok,flags"
SCAN_HEADER = "index,alpha,k,d,n,branch_ok,flags,c,w"
SWEEP_MODES = ("alpha", "re_f1", "im_f1", "coeff")


class ConfigError(ValueError):
    """Malformed command configuration."""


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------

def fmt_num(x: Optional[float]) -> str:
    """Shortest round-trip decimal; empty cell for missing or non-finite values."""
    if x is None:
        return ""
    x = float(x)
    if not math.isfinite(x):
        return ""
    return repr(x)


def fmt_complex_list(values: Iterable[complex]) -> str:
    return ";".join(repr(complex(v)) for v in values)


def parse_complex(value) -> complex:
    """Accept ``1.5``, ``"1+2j"``, ``"(1+2j)"`` or ``[re, im]``."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex pair must have two entries: {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex number {value!r}") from exc
    if isinstance(value, (int, float)):
        return complex(value)
    raise ConfigError(f"cannot parse complex number {value!r}")


def parse_complex_list(values, name: str) -> np.ndarray:
    if isinstance(values, str):
        values = [v for v in values.split(";") if v]
    if not isinstance(values, (list, tuple)) or not values:
        raise ConfigError(f"{name!r} must be a nonempty list")
    return np.array([parse_complex(v) for v in values], dtype=complex)


def parse_grid(spec, name: str = "grid") -> np.ndarray:
    """``[lo, hi, num]``, ``{"start", "stop", "num"}`` or ``{"values": [...]}``."""
    if isinstance(spec, dict):
        if "values" in spec:
            grid = np.asarray(spec["values"], dtype=float)
        else:
            try:
                grid = np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))
            except KeyError as exc:
                raise ConfigError(f"{name} needs start/stop/num or values") from exc
    elif isinstance(spec, (list, tuple)) and len(spec) == 3:
        grid = np.linspace(float(spec[0]), float(spec[1]), int(spec[2]))
    else:
        raise ConfigError(f"cannot parse {name}: {spec!r}")
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ConfigError(f"{name} must be a nonempty finite list")
    return grid


def parse_range(text: str, cast=float) -> tuple:
    """``"LO..HI"`` (or a single value) to a pair."""
    parts = text.split("..")
    try:
        if len(parts) == 1:
            v = cast(parts[0])
            return v, v
        if len(parts) == 2:
            return cast(parts[0]), cast(parts[1])
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}") from exc
    raise ConfigError(f"bad range {text!r}; expected LO..HI")


def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _timestamp_line() -> str:
    now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0)
    return f"# generated {now.isoformat()}\n"


def _open_out(path: str) -> TextIO:
    if path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="")


# ---------------------------------------------------------------------------
# Sweep rows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    param: str
    value: float
    d_value: Optional[float]
    n_value: Optional[float]
    branch_ok: bool
    flags: str

    def csv(self) -> str:
        flags = self.flags.replace(",", ";")
        return ",".join([self.param, fmt_num(self.value), fmt_num(self.d_value),
                         fmt_num(self.n_value), str(self.branch_ok).lower(), flags])


def write_rows(rows: Sequence[SweepRow], fh: TextIO, timestamp: bool = True):
    if timestamp:
        fh.write(_timestamp_line())
    fh.write(SWEEP_HEADER + "\n")
    for row in rows:
        fh.write(row.csv() + "\n")


@dataclass(frozen=True)
class SweepConfig:
    mode: str
    alpha: float
    c: Optional[np.ndarray]
    w: np.ndarray
    f: Optional[np.ndarray]
    index: int
    grid: np.ndarray

    @classmethod
    def from_dict(cls, cfg: dict) -> "SweepConfig":
        mode = cfg.get("mode", "alpha")
        if mode not in SWEEP_MODES:
            raise ConfigError(f"mode must be one of {SWEEP_MODES}")
        if "w" not in cfg or "grid" not in cfg:
            raise ConfigError("sweep config needs 'w' and 'grid'")
        w = parse_complex_list(cfg["w"], "w")
        alpha = float(cfg.get("alpha", 2.0))
        if mode in ("re_f1", "im_f1"):
            if "f" not in cfg:
                raise ConfigError(f"mode {mode} needs node values 'f'")
            f = parse_complex_list(cfg["f"], "f")
            c = None
            if f.shape != w.shape:
                raise ConfigError("'f' and 'w' differ in length")
        else:
            if "c" not in cfg:
                raise ConfigError(f"mode {mode} needs coefficients 'c'")
            c = parse_complex_list(cfg["c"], "c")
            f = None
            if c.shape != w.shape:
                raise ConfigError("'c' and 'w' differ in length")
        index = int(cfg.get("index", 0))
        if not 0 <= index < len(w):
            raise ConfigError("'index' out of range")
        grid = parse_grid(cfg["grid"])
        if mode == "alpha" and np.any(grid <= 0):
            raise ConfigError("alpha grid must be positive")
        if not alpha > 0:
            raise ConfigError("alpha must be positive")
        return cls(mode, alpha, c, w, f, index, grid)


def _failed(param, value, ok, exc) -> SweepRow:
    return SweepRow(param, value, None, None, ok, type(exc).__name__)


def sweep_point(cfg: SweepConfig, value: float) -> SweepRow:
    """Evaluate one grid point; failures become flagged rows."""
    if cfg.mode == "alpha":
        ok = False
        try:
            combo = KernelCombo(value, cfg.w, cfg.c)
            cls = classify(combo)
            ok = cls.branch_ok
            if ok:
                d = d_alpha_lambda(combo)
            elif cls.in_gamma:
                d = d_alpha_gamma(combo)
            else:
                return SweepRow("alpha", value, None, quadratic_form(combo), False,
                                "class=Outside")
            return SweepRow("alpha", value, d, quadratic_form(combo), ok,
                            f"class={cls.kind}")
        except (CarlemanError, ArithmeticError, ValueError) as exc:
            return _failed("alpha", value, ok, exc)
    if cfg.mode in ("re_f1", "im_f1"):
        f = cfg.f.copy()
        f[cfg.index] = (complex(value, f[cfg.index].imag) if cfg.mode == "re_f1"
                        else complex(f[cfg.index].real, value))
        ok = branch_ok(f)
        try:
            d = d_hat_alpha(f, cfg.w, cfg.alpha)
            n = projection_norm_sq(f, build_gram(cfg.w, cfg.alpha))
            return SweepRow(cfg.mode, value, d, n, ok, "")
        except (CarlemanError, ArithmeticError, ValueError) as exc:
            return _failed(cfg.mode, value, ok, exc)
    c = cfg.c.copy()
    c[cfg.index] = value
    ok = False
    try:
        combo = KernelCombo(cfg.alpha, cfg.w, c)
        ok = branch_ok(eval_vector(combo))
        return SweepRow("coeff", value, d_alpha_gamma(combo), quadratic_form(combo),
                        ok, "class=Gamma")
    except (CarlemanError, ArithmeticError, ValueError) as exc:
        return _failed("coeff", value, ok, exc)


def _sweep_chunk(args):
    cfg, values = args
    return [sweep_point(cfg, v) for v in values]


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> list[SweepRow]:
    values = [float(v) for v in cfg.grid]
    if jobs <= 1 or len(values) < 2:
        return [sweep_point(cfg, v) for v in values]
    chunks = [(cfg, values[i::jobs]) for i in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_sweep_chunk, chunks))
    # undo the round-robin split so rows follow the grid order
    rows: list[Optional[SweepRow]] = [None] * len(values)
    for i, part in enumerate(parts):
        rows[i::jobs] = part
    return rows


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

def run_path(cfg: dict) -> list[SweepRow]:
    kind = cfg.get("kind", PATH_A)
    if kind not in (PATH_A, PATH_B, NORM_PATH):
        raise ConfigError(f"kind must be one of {(PATH_A, PATH_B, NORM_PATH)}")
    for key in ("alpha", "c", "w"):
        if key not in cfg:
            raise ConfigError(f"path config needs {key!r}")
    combo = KernelCombo(float(cfg["alpha"]), parse_complex_list(cfg["w"], "w"),
                        parse_complex_list(cfg["c"], "c"))
    grid = parse_grid(cfg["grid"]) if "grid" in cfg else None
    slack = cfg.get("slack")
    flags = ""
    rows = []
    if kind == PATH_A:
        if combo.points[0] != 0:
            combo = mobius_reduce(combo)
            flags = "mobius_reduced"
        trace = path_A(combo, grid, slack)
        W = build_gram(combo.points, 1.0).entries
        L = np.log(W.real)  # log a_ij at t = 1
        c = combo.coeffs
        for t, v in zip(trace.parameter_grid, trace.values):
            n = float(np.real(c @ np.exp(t * L) @ np.conj(c)))
            rows.append(SweepRow("t", t, v, max(n, 0.0), True, flags))
    elif kind == PATH_B:
        trace = path_B(combo, grid, slack)
        w = combo.points.real
        W = (1.0 - np.outer(w, w)) ** (-combo.alpha)
        c = combo.coeffs
        for t, v in zip(trace.parameter_grid, trace.values):
            A = W.copy()
            A[0, 0] = (1 - t) * W[0, 0] + t * W[0, 1] ** 2 / W[1, 1]
            n = float(np.real(c @ A @ np.conj(c)))
            rows.append(SweepRow("t", t, v, max(n, 0.0), True, flags))
    else:
        normalized = normalize_two_kernel(combo)
        trace = two_kernel_norm_path(normalized, grid, slack)
        for b, v in zip(trace.parameter_grid, trace.values):
            rows.append(SweepRow("beta", b, norm_path_slope(normalized, b), v, True,
                                 "d=dN_beta/dbeta"))
    verdict = (f"kind={trace.kind};monotone_nonincreasing={str(trace.monotone_nonincreasing).lower()};"
               f"monotone_nondecreasing={str(trace.monotone_nondecreasing).lower()};"
               f"slack={trace.slack!r}")
    first, last = trace.endpoint_values
    rows.append(SweepRow("summary", float(len(trace.values)), first, last, True, verdict))
    return rows


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    names = cfg.get("suites", list(SUITES))
    if args.suite:
        names = args.suite
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s) {unknown}; available: {sorted(SUITES)}")
    options = {}
    tol = cfg.get("rel_tol", cfg.get("tolerance"))
    if tol is not None:
        options["tolerance"] = float(tol)
    for key in ("samples", "seed"):
        if key in cfg:
            options[key] = int(cfg[key])
    if "quadrature" in cfg:
        options["config"] = QuadratureConfig(**cfg["quadrature"])
    report = {"suites": {}, "passed": True}
    for name in names:
        result = run_suite(name, **options)
        report["suites"][name] = result.as_dict()
        report["passed"] &= result.passed
        log.info("%-20s %s  max_error=%.3e  tol=%.1e  (%.2fs)", name,
                 "PASS" if result.passed else "FAIL", result.max_error,
                 result.tolerance, result.seconds)
    out = args.report or cfg.get("report", "verify_report.json")
    with _open_out(out) as fh:
        json.dump(report, fh, indent=2, default=float)
        fh.write("\n")
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _scan_spec(args) -> ScanSpec:
    cfg = load_config(args.config)
    fields = dict(cfg)
    fields.pop("out", None)
    if args.target:
        fields["target"] = args.target
    if args.samples is not None:
        fields["samples"] = args.samples
    if args.seed is not None:
        fields["seed"] = args.seed
    if args.k:
        fields["k_range"] = parse_range(args.k, int)
    if args.alpha:
        fields["alpha_range"] = parse_range(args.alpha, float)
    if "target" not in fields:
        raise ConfigError("scan needs --target (or 'target' in the config)")
    for key in ("k_range", "alpha_range"):
        if key in fields and isinstance(fields[key], str):
            fields[key] = parse_range(fields[key], int if key == "k_range" else float)
    try:
        return ScanSpec(**fields)
    except TypeError as exc:
        raise ConfigError(f"bad scan config: {exc}") from exc


def cmd_scan(args) -> int:
    spec = _scan_spec(args)
    result = run_scan(spec, jobs=args.jobs)
    rows = result.top()
    top_ids = {r.index for r in rows}
    # every positive finding is emitted, even beyond the top rows
    rows += [r for r in result.positive if r.index not in top_ids]
    rows += [r for r in result.records if r.d is None]
    out = args.out or "scan.csv"
    with _open_out(out) as fh:
        if not args.no_timestamp:
            fh.write(_timestamp_line())
        fh.write(SCAN_HEADER + "\n")
        for r in rows:
            flags = ";".join(x for x in (r.flags, "positive" if r.positive else "") if x)
            fh.write(",".join([str(r.index), fmt_num(r.alpha), str(r.k), fmt_num(r.d),
                               fmt_num(r.n), str(r.branch_ok).lower(), flags,
                               fmt_complex_list(r.c), fmt_complex_list(r.w)]) + "\n")
    summary = result.summary()
    if out != "-":
        Path(out + ".summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    log.info("scan %s: %d samples, %d positive, %d failed, %d rejections, max D = %s",
             spec.target, spec.samples, result.positive_count, result.failures,
             result.rejections, summary["max_d"])
    if result.positive_count:
        log.warning("POSITIVE VALUES FOUND for %s: %d sample(s); rows flagged 'positive' in %s",
                    spec.target, result.positive_count, out)
        return EXIT_FAIL
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = SweepConfig.from_dict(load_config(args.config))
    rows = run_sweep(cfg, jobs=args.jobs)
    with _open_out(args.out) as fh:
        write_rows(rows, fh, timestamp=not args.no_timestamp)
    bad = sum(r.d_value is None for r in rows)
    log.info("sweep %s: %d rows, %d flagged", cfg.mode, len(rows), bad)
    return EXIT_OK


def cmd_path(args) -> int:
    rows = run_path(load_config(args.config))
    with _open_out(args.out) as fh:
        write_rows(rows, fh, timestamp=not args.no_timestamp)
    log.info("path: %s", rows[-1].flags)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    alpha = args.alpha
    if not alpha > 0:
        raise ConfigError("alpha must be positive")
    combo = remark_instance(alpha)
    B = b_matrix(combo).entries
    eig = np.linalg.eigvalsh(-B)
    d = d_alpha_lambda(combo)
    report = {
        "alpha": alpha,
        "w": [0.0, float(combo.points[1].real)],
        "c": [1.0, 1.0],
        "B": [[repr(float(x.real)) for x in row] for row in B],
        "eigenvalues_minus_B": [float(e) for e in eig],
        "d_alpha": d,
        "minus_B_psd": bool(eig[0] >= 0),
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carleman",
        description="Kernel-combination norm derivatives: verification, scans, sweeps.")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    parser.add_argument("--quiet", action="store_true", help="only print warnings")
    # the global flags are also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the cross-validation suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES),
                   help="run only this suite (repeatable)")
    p.add_argument("--config", help="JSON config (suites, rel_tol, samples, seed)")
    p.add_argument("--report", help="report path (default verify_report.json)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", parents=[common], help="seeded random scan of the sign of D")
    p.add_argument("--target")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--k", help="node count range MIN..MAX")
    p.add_argument("--alpha", help="exponent range LO..HI")
    p.add_argument("--config", help="JSON ScanSpec fields")
    p.add_argument("--out", help="CSV path (default scan.csv)")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("sweep", parents=[common], help="evaluate D along a one-parameter grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("path", parents=[common], help="sample a homotopy or norm path")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("counterexample", parents=[common], help="indefinite -B with D < 0")
    p.add_argument("--alpha", type=float, default=2.0)
    p.set_defaults(func=cmd_counterexample)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    if args.jobs < 1:
        log.error("--jobs must be at least 1")
        return EXIT_USAGE
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        log.error("non-convergence: %s", exc)
        return EXIT_NONCONV
    except (ConfigError, CarlemanError, ValueError, KeyError, TypeError) as exc:
        log.error("error: %s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
