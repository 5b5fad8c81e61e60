"""Command-line experiments: orbits, distribution checks, three-way mean comparisons,
moment estimates, Laurent coefficients and Stieltjes constants.

Every flag mirrors a field of an optional JSON config (``--config``); flags
override file values.  Exit codes: 0 success, 1 usage or config error,
2 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Any, Sequence

import numpy as np

from .closed_form import classify, closed_form_mean
from .dynamics import (
    CauchyInvariant,
    FixedPoint,
    OrbitConfig,
    TransformParams,
    UniformInterval,
    birkhoff_average,
    ks_statistic,
    linear_checkpoints,
    log_checkpoints,
    orbit_chunks,
)
from .errors import BoolezetaError, NumericFailure
from .quadrature import moment_quadrature, quadrature_mean
from .targets import (
    STIELTJES_K_MAX,
    TargetFunction,
    evaluate_target,
    laurent_extract,
    parse_target,
    stieltjes_gamma,
)

log = logging.getLogger("boolezeta")

COMMANDS = ("orbit", "distcheck", "mean", "compare", "lindelof", "laurent", "stieltjes")
ORBIT_COMMANDS = ("orbit", "distcheck", "mean", "compare", "lindelof")
KS_THRESHOLD = 0.01
KS_REFERENCE_N = 1_000_000


class UsageError(Exception):
    pass


# -- configuration ----------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    target: str = "zeta:k=0"
    alpha: float = 1.0
    beta: float = 0.0
    s: list[complex] = field(default_factory=lambda: [2 + 0j])
    N: int = 1_000_000
    seeds: list[int] = field(default_factory=lambda: [0])
    tol: float = 1e-10
    out: str | None = None
    format: str | None = None
    checkpoints: str = "log"
    start: str = "uniform"
    x0: float | None = None
    burn_in: int = 0
    threshold: float = KS_THRESHOLD
    k: int = 0
    l: list[int] = field(default_factory=lambda: [1])
    n_max: int = 4
    radius: float = 0.5
    k_max: int = 10
    skip_ergodic: bool = False
    moment_T: float = 2000.0

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.N < 1:
            raise UsageError("N must be >= 1")
        if not self.tol > 0:
            raise UsageError("tol must be > 0")
        if self.command in ORBIT_COMMANDS and not self.seeds:
            raise UsageError("seeds must be non-empty")
        if any(not 0 <= sd < 2**64 for sd in self.seeds):
            raise UsageError("seeds must be 64-bit unsigned integers")
        if self.format not in (None, "csv", "json"):
            raise UsageError("format must be csv or json")
        if self.checkpoints not in ("log", "linear"):
            raise UsageError("checkpoints must be 'log' or 'linear'")
        if self.start not in ("uniform", "cauchy", "fixed"):
            raise UsageError("start must be uniform, cauchy or fixed")
        if self.start == "fixed" and self.x0 is None:
            raise UsageError("start=fixed needs x0")
        if not 0 <= self.burn_in < self.N:
            raise UsageError("burn_in must satisfy 0 <= burn_in < N")
        if any(v < 1 for v in self.l):
            raise UsageError("each l must be >= 1")
        if not 0 <= self.k_max <= STIELTJES_K_MAX:
            raise UsageError(f"k_max must be in [0, {STIELTJES_K_MAX}]")
        if self.k < 0 or self.n_max < 0 or not self.radius > 0:
            raise UsageError("k, n_max must be >= 0 and radius > 0")
        if not self.alpha > 0:
            raise UsageError("alpha must be > 0")

    @property
    def params(self) -> TransformParams:
        return TransformParams(self.alpha, self.beta)

    def target_function(self) -> TargetFunction:
        try:
            return parse_target(self.target)
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad target {self.target!r}: {exc}") from exc

    def orbit_config(self, seed: int) -> OrbitConfig:
        if self.x0 is not None or self.start == "fixed":
            start = FixedPoint(float(self.x0))
        elif self.start == "cauchy":
            start = CauchyInvariant()
        else:
            start = UniformInterval()
        return OrbitConfig(self.params, self.N, seed, start)

    def checkpoint_list(self) -> list[int]:
        n = self.N - self.burn_in
        return log_checkpoints(n) if self.checkpoints == "log" else linear_checkpoints(n)


def parse_complex(text: Any) -> complex:
    """Accept 're,im', 're', 'a+bj', a number or a [re, im] pair."""
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise UsageError(f"complex pair must have two entries, got {text!r}")
        return complex(float(text[0]), float(text[1]))
    if isinstance(text, (int, float, complex)):
        return complex(text)
    t = str(text).strip().replace(" ", "")
    if "," in t:
        re_part, im_part = t.split(",", 1)
        return complex(float(re_part), float(im_part))
    try:
        return complex(float(t))
    except ValueError:
        pass
    try:
        return complex(t.replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"cannot parse complex number {text!r}") from exc


def parse_s_list(value: Any) -> list[complex]:
    if isinstance(value, (list, tuple)):
        if len(value) == 2 and all(isinstance(v, (int, float)) for v in value) and not isinstance(value[0], list):
            # a bare [re, im] pair
            return [parse_complex(value)]
        return [parse_complex(v) for v in value]
    return [parse_complex(v) for v in str(value).split(";") if v.strip()]


def parse_int_list(value: Any) -> list[int]:
    """'0,1,2', '0-9' or a JSON list."""
    if isinstance(value, int):
        return [value]
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    out: list[int] = []
    for part in str(value).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


_CONVERTERS = {
    "s": parse_s_list,
    "seeds": parse_int_list,
    "l": parse_int_list,
    "N": lambda v: int(float(v)),
    "burn_in": int,
    "k": int,
    "n_max": int,
    "k_max": int,
    "alpha": float,
    "beta": float,
    "tol": float,
    "threshold": float,
    "radius": float,
    "moment_T": float,
    "x0": lambda v: None if v is None else float(v),
    "skip_ergodic": bool,
}


def build_config(command: str, file_values: dict, flag_values: dict) -> RunConfig:
    names = {f.name for f in fields(RunConfig)}
    merged: dict[str, Any] = {}
    for source in (file_values, flag_values):
        for key, value in source.items():
            if value is None:
                continue
            key = key.replace("-", "_")
            if key not in names or key == "command":
                raise UsageError(f"unknown config field {key!r}")
            merged[key] = value
    try:
        for key, value in list(merged.items()):
            conv = _CONVERTERS.get(key)
            if conv is not None:
                merged[key] = conv(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config value: {exc}") from exc
    cfg = RunConfig(command=command, **merged)
    cfg.validate()
    return cfg


# -- formatting --------------------------------------------------------------------


def fmt(x: Any) -> str:
    """17 significant digits, '.' decimal, independent of locale."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _json_number(x: float) -> float | str:
    x = float(x)
    return x if math.isfinite(x) else str(x)


def cjson(z: complex) -> list:
    z = complex(z)
    return [_json_number(z.real), _json_number(z.imag)]


class Output:
    """Writes to a file or stdout; CSV rows are formatted as they arrive."""

    def __init__(self, path: str | None):
        self.path = path
        self._fh = open(path, "w", newline="", encoding="utf-8") if path else sys.stdout
        self._csv = csv.writer(self._fh, lineterminator="\n")

    def comment(self, text: str) -> None:
        self._fh.write(f"# {text}\n")

    def row(self, values: Sequence[Any]) -> None:
        self._csv.writerow([fmt(v) for v in values])

    def json(self, doc: Any) -> None:
        json.dump(doc, self._fh, indent=2, sort_keys=False, allow_nan=False)
        self._fh.write("\n")

    def close(self) -> None:
        if self.path:
            self._fh.close()
        else:
            self._fh.flush()


def _params_doc(p: TransformParams) -> dict:
    return {"alpha": p.alpha, "beta": p.beta}


def _workers() -> int:
    raw = os.environ.get("BOOLEZETA_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"BOOLEZETA_THREADS must be an integer, got {raw!r}") from None


def _ordered_map(fn, items):
    """Map with up to BOOLEZETA_THREADS workers; results come back in input order."""
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- commands ----------------------------------------------------------------------


def cmd_orbit(cfg: RunConfig, out: Output) -> int:
    multi = len(cfg.seeds) > 1
    out.row(["seed", "step", "value"] if multi else ["step", "value"])
    for seed in cfg.seeds:
        step = 0
        for block in orbit_chunks(cfg.orbit_config(seed)):
            for v in block.tolist():
                out.row([seed, step, v] if multi else [step, v])
                step += 1
    return 0


def distcheck_threshold(cfg: RunConfig) -> float:
    n = cfg.N - cfg.burn_in
    return cfg.threshold * math.sqrt(KS_REFERENCE_N / n)


def _distcheck_one(cfg: RunConfig, seed: int) -> dict:
    sample = np.concatenate(list(orbit_chunks(cfg.orbit_config(seed))))[cfg.burn_in:]
    stat = ks_statistic(sample, cfg.params)
    thr = distcheck_threshold(cfg)
    return {
        "seed": seed,
        "ks_statistic": stat,
        "n": int(sample.size),
        "params": _params_doc(cfg.params),
        "threshold": thr,
        "pass": bool(stat < thr),
    }


def cmd_distcheck(cfg: RunConfig, out: Output) -> int:
    runs = _ordered_map(lambda sd: _distcheck_one(cfg, sd), cfg.seeds)
    if (cfg.format or "json") == "csv":
        out.row(["seed", "n", "ks_statistic", "threshold", "pass"])
        for r in runs:
            out.row([r["seed"], r["n"], r["ks_statistic"], r["threshold"], r["pass"]])
        return 0
    doc = runs[0] if len(runs) == 1 else {
        "params": _params_doc(cfg.params),
        "n": runs[0]["n"],
        "threshold": runs[0]["threshold"],
        "pass_count": sum(r["pass"] for r in runs),
        "runs": runs,
    }
    out.json(doc)
    return 0


def _target_integrand(target: TargetFunction, s: complex):
    return lambda x: evaluate_target(target, s + 1j * x)


def ergodic_estimates(cfg: RunConfig, target: TargetFunction, s: complex) -> list:
    marks = cfg.checkpoint_list()

    def one(seed):
        res = birkhoff_average(_target_integrand(target, s), cfg.orbit_config(seed), marks, cfg.burn_in)
        return seed, res

    return _ordered_map(one, cfg.seeds)


def _median_complex(values: Sequence[complex]) -> complex:
    arr = np.asarray(values, dtype=complex)
    return complex(float(np.median(arr.real)), float(np.median(arr.imag)))


def mean_report(cfg: RunConfig, target: TargetFunction, s: complex, with_ergodic: bool = True) -> dict:
    params = cfg.params
    case = classify(target, s, params)
    closed = closed_form_mean(target, s, params)
    quad = quadrature_mean(target, s, params, cfg.tol)
    report: dict[str, Any] = {
        "target": target.spec(),
        "s": cjson(s),
        "params": _params_doc(params),
        "closed_form": {"value": cjson(closed), "case": case.value},
        "quadrature": {
            "value": cjson(quad.value),
            "error_estimate": quad.error_estimate,
            "panels": quad.panels,
            "truncation_T": quad.truncation_T,
            "method": quad.method,
        },
    }
    disc = {"quadrature_closed": abs(quad.value - closed)}
    if with_ergodic:
        runs = ergodic_estimates(cfg, target, s)
        est = _median_complex([r.value for _, r in runs])
        report["ergodic"] = {
            "estimate": cjson(est),
            "N": runs[0][1].n,
            "seeds": [sd for sd, _ in runs],
            "runs": [
                {
                    "seed": sd,
                    "estimate": cjson(r.value),
                    "checkpoints": [[n, *cjson(v)] for n, v in r.checkpoints],
                }
                for sd, r in runs
            ],
        }
        disc["ergodic_closed"] = abs(est - closed)
    report["discrepancies"] = disc
    return report


def cmd_mean(cfg: RunConfig, out: Output) -> int:
    target = cfg.target_function()
    reports = [mean_report(cfg, target, s, not cfg.skip_ergodic) for s in cfg.s]
    if (cfg.format or "json") == "csv":
        _compare_rows(out, [(r, None) for r in reports])
        return 0
    out.json(reports[0] if len(reports) == 1 else reports)
    return 0


COMPARE_HEADER = [
    "s_re", "s_im", "case",
    "closed_re", "closed_im",
    "quadrature_re", "quadrature_im", "quadrature_error_estimate",
    "ergodic_re", "ergodic_im",
    "abs_quadrature_minus_closed", "abs_ergodic_minus_closed",
    "error",
]


def _compare_rows(out: Output, rows) -> None:
    out.row(COMPARE_HEADER)
    for rep, s_err in rows:
        if rep is None:
            s, err = s_err
            out.row([s.real, s.imag, "", "", "", "", "", "", "", "", "", "", err])
            continue
        erg = rep.get("ergodic")
        out.row([
            rep["s"][0], rep["s"][1], rep["closed_form"]["case"],
            *rep["closed_form"]["value"],
            *rep["quadrature"]["value"], rep["quadrature"]["error_estimate"],
            *(erg["estimate"] if erg else ["", ""]),
            rep["discrepancies"]["quadrature_closed"],
            rep["discrepancies"].get("ergodic_closed", ""),
            "",
        ])


def compare_grid(cfg: RunConfig) -> list:
    target = cfg.target_function()

    def one(s):
        try:
            return mean_report(cfg, target, s, not cfg.skip_ergodic), None
        except (BoolezetaError, ValueError) as exc:
            return None, (s, f"{type(exc).__name__}: {exc}")

    return [one(s) for s in cfg.s]


def cmd_compare(cfg: RunConfig, out: Output) -> int:
    rows = compare_grid(cfg)
    if (cfg.format or "csv") == "json":
        out.json([
            rep if rep is not None else {"s": cjson(err[0]), "error": err[1]}
            for rep, err in rows
        ])
    else:
        _compare_rows(out, rows)
    return 0


def lindelof_report(cfg: RunConfig) -> dict:
    target = cfg.target_function()
    if cfg.k and target.family != "const":
        target = target.with_k(cfg.k)
    s = complex(0.5, 0.0)
    ls = sorted(set(cfg.l))
    powers = np.array([2 * v for v in ls], dtype=float)
    marks = cfg.checkpoint_list()

    def moments(x):
        a = np.abs(evaluate_target(target, s + 1j * x))
        return a[:, None] ** powers[None, :]

    def one(seed):
        return seed, birkhoff_average(moments, cfg.orbit_config(seed), marks, cfg.burn_in)

    runs = _ordered_map(one, cfg.seeds)
    doc: dict[str, Any] = {
        "target": target.spec(),
        "k": target.k,
        "l": ls,
        "params": _params_doc(cfg.params),
        "seeds": [sd for sd, _ in runs],
        "N": runs[0][1].n,
        "checkpoints": [n for n, _ in runs[0][1].checkpoints],
        "running": {},
        "final": {},
        "stabilization": {},
        "quadrature_reference": {},
        "note": "estimator diagnostics only; a finite run cannot decide whether the moment limit exists",
    }
    for j, lv in enumerate(ls):
        key = str(lv)
        doc["running"][key] = {str(sd): [float(np.atleast_1d(v)[j]) for _, v in r.checkpoints] for sd, r in runs}
        doc["final"][key] = {str(sd): float(np.atleast_1d(r.value)[j]) for sd, r in runs}
        doc["stabilization"][key] = {
            str(sd): stabilization(r.checkpoints, j, r.n) for sd, r in runs
        }
        if 2 * lv <= 4:
            ref = moment_quadrature(target, 0.5, lv, cfg.params, T=cfg.moment_T)
            doc["quadrature_reference"][key] = {
                "value": ref.value.real,
                "error_estimate": ref.error_estimate,
                "truncation_T": ref.truncation_T,
            }
    return doc


def stabilization(checkpoints, j: int, n: int) -> float:
    """Largest relative change of the running average over the last decade of checkpoints."""
    pts = [(c, float(np.atleast_1d(v)[j])) for c, v in checkpoints if c >= n / 10]
    if len(pts) < 2:
        return 0.0
    final = pts[-1][1]
    if final == 0:
        return 0.0 if all(v == 0 for _, v in pts) else math.inf
    return max(abs(v - final) / abs(final) for _, v in pts)


def cmd_lindelof(cfg: RunConfig, out: Output) -> int:
    doc = lindelof_report(cfg)
    if (cfg.format or "json") == "csv":
        out.row(["seed", "l", "checkpoint", "running_moment"])
        for key, per_seed in doc["running"].items():
            for sd, vals in per_seed.items():
                for c, v in zip(doc["checkpoints"], vals):
                    out.row([int(sd), int(key), c, v])
        return 0
    out.json(doc)
    return 0


def cmd_laurent(cfg: RunConfig, out: Output) -> int:
    target = cfg.target_function()
    exp = laurent_extract(target, n_max=cfg.n_max, radius=cfg.radius)
    if (cfg.format or "csv") == "json":
        out.json({
            "target": target.spec(),
            "s0": cjson(exp.s0),
            "m": exp.m,
            "radius": cfg.radius,
            "coefficients": {str(n): cjson(a) for n, a in sorted(exp.coefficients.items())},
        })
        return 0
    out.comment(f"target={target.spec()} s0={fmt(exp.s0.real)}{exp.s0.imag:+.17g}j m={exp.m} radius={fmt(cfg.radius)} n_max={cfg.n_max}")
    out.row(["n", "re", "im"])
    for n, a in sorted(exp.coefficients.items()):
        out.row([n, a.real, a.imag])
    return 0


def cmd_stieltjes(cfg: RunConfig, out: Output) -> int:
    rows = []
    for k in range(cfg.k_max + 1):
        a = stieltjes_gamma(k, "contour")
        b = stieltjes_gamma(k, "limit")
        rows.append((k, a, b, abs(a - b)))
    if (cfg.format or "csv") == "json":
        out.json([{"k": k, "gamma": a, "gamma_limit": b, "abs_diff": d} for k, a, b, d in rows])
        return 0
    out.row(["k", "gamma", "gamma_limit", "abs_diff"])
    for r in rows:
        out.row(r)
    return 0


HANDLERS = {
    "orbit": cmd_orbit,
    "distcheck": cmd_distcheck,
    "mean": cmd_mean,
    "compare": cmd_compare,
    "lindelof": cmd_lindelof,
    "laurent": cmd_laurent,
    "stieltjes": cmd_stieltjes,
}


# -- argument parsing ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boolezeta", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file whose fields mirror the flags")
        p.add_argument("--target", help='e.g. "zeta:k=1", "hurwitz:a=1/3,k=0", "L:q=4,index=1", "dedekind:d=-4", "const:c=1"')
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--s", action="append", help='"re,im"; repeat or separate with ";" for a grid')
        p.add_argument("--N", help="orbit length")
        p.add_argument("--seeds", help='"0,1,2" or "0-9"')
        p.add_argument("--tol", type=float)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--checkpoints", choices=("log", "linear"))
        p.add_argument("--start", choices=("uniform", "cauchy", "fixed"))
        p.add_argument("--x0", type=float, help="fixed starting point (implies --start fixed)")
        p.add_argument("--burn-in", type=int)
        if name == "distcheck":
            p.add_argument("--threshold", type=float, help="KS threshold at N = 10^6 (scaled as 1/sqrt(N))")
        if name in ("lindelof",):
            p.add_argument("--k", type=int)
            p.add_argument("--l", help='moment indices, e.g. "1,2"')
            p.add_argument("--moment-T", type=float)
        if name == "laurent":
            p.add_argument("--n-max", type=int)
            p.add_argument("--radius", type=float)
        if name == "stieltjes":
            p.add_argument("--k-max", type=int)
        if name in ("mean", "compare"):
            p.add_argument("--skip-ergodic", action="store_true", default=None)
    return parser


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a JSON object")
    return doc


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on usage errors and --help; hand the code back instead
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    if flags.get("s") is not None:
        flags["s"] = ";".join(flags["s"])
    try:
        cfg = build_config(args.command, _load_config_file(args.config), flags)
        out = Output(cfg.out)
    except (UsageError, OSError) as exc:
        print(f"boolezeta: {exc}", file=sys.stderr)
        return 1
    try:
        return HANDLERS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"boolezeta: {exc}", file=sys.stderr)
        return 1
    except NumericFailure as exc:
        print(f"boolezeta: numeric failure: {exc}", file=sys.stderr)
        return 2
    except (BoolezetaError, ValueError) as exc:
        print(f"boolezeta: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    finally:
        out.close()


if __name__ == "__main__":
    sys.exit(main())
