"""Command-line interface.

    ordalloc allocate   --n 4 --nu 0.25
    ordalloc sweep      --n 2 --grid 0:1:0.05
    ordalloc covariance --n 4 --nu 1
    ordalloc density    --n 3 --points 101
    ordalloc simulate   --n 2 --nu 0.5 --trials 1000000 --seed 42

Settings may come from a JSON file (``--config``); flags override it.
Data goes to stdout (or ``--out``), diagnostics to stderr.

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 Monte Carlo disagreement with the analytic values.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import allocator, mc, orderstats, riskaverse
from .model import ConvergenceError, DomainError, ModelParams

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_ORACLE = 4

TABLE_DECIMALS = 4
CSV_DECIMALS = 6
FORMATS = ("table", "csv", "jsonl")
CSV_COMMANDS = ("sweep", "covariance", "density")

RULE_OF_THUMB_NOTE = (
    "nu unknown: rule-of-thumb weights 2i/(n(n+1)), the nu -> 1 limit of the sorted weighted portfolio"
)


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    n: int
    nu: float | str | None = None
    a: float = 1.0
    b: float = 0.0
    c0: float = 1.0
    labels: tuple | None = None
    output_format: str = "table"
    trials: int = 1_000_000
    seed: int = mc.DEFAULT_SEED
    workers: int = 1
    grid: str = "0:1:0.05"
    points: int = 101

    @property
    def nu_unknown(self):
        return self.nu == "unknown"

    def params(self, nu=None):
        nu = self.nu if nu is None else nu
        if nu is None or nu == "unknown":
            raise ConfigError("this command needs a numeric --nu")
        try:
            return ModelParams(n=self.n, nu=float(nu), a=self.a, b=self.b, c0=self.c0)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc


_KEYS = {
    "n": int, "nu": str, "a": float, "b": float, "c0": float, "labels": None,
    "format": str, "trials": int, "seed": int, "workers": int, "grid": str, "points": int,
}


def _coerce_nu(value):
    if value is None:
        return None
    text = str(value).strip().lower()
    if text == "unknown":
        return "unknown"
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"--nu must be a number in [0, 1] or 'unknown', got {value!r}") from None


def build_config(args) -> RunConfig:
    settings = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        settings.update(loaded)
    for key in _KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if "n" not in settings:
        raise ConfigError("--n is required")
    try:
        n = int(settings["n"])
        if n != float(settings["n"]) or n < 1:
            raise ValueError
    except (TypeError, ValueError):
        raise ConfigError(f"n must be a positive integer, got {settings['n']!r}") from None
    labels = settings.get("labels")
    if isinstance(labels, str):
        labels = [s.strip() for s in labels.split(",")]
    if labels is not None:
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise ConfigError(f"got {len(labels)} labels for n={n}")
    fmt = settings.get("format", getattr(args, "default_format", "table"))
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    try:
        cfg = RunConfig(
            n=n,
            nu=_coerce_nu(settings.get("nu")),
            a=float(settings.get("a", 1.0)),
            b=float(settings.get("b", 0.0)),
            c0=float(settings.get("c0", 1.0)),
            labels=labels,
            output_format=fmt,
            trials=int(settings.get("trials", 1_000_000)),
            seed=int(settings.get("seed", mc.DEFAULT_SEED)),
            workers=int(settings.get("workers", 1)),
            grid=str(settings.get("grid", "0:1:0.05")),
            points=int(settings.get("points", 101)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad configuration value: {exc}") from exc
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return cfg


def parse_grid(text):
    """``start:stop:step`` (inclusive) or a single value, all within [0, 1]."""
    parts = str(text).split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; expected start:stop:step") from None
    if len(nums) == 1:
        values = nums
    elif len(nums) == 3:
        start, stop, step = nums
        if step <= 0 or stop < start:
            raise ConfigError(f"bad grid {text!r}; need step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + k * step, 12) for k in range(count)]
    else:
        raise ConfigError(f"bad grid {text!r}; expected start:stop:step")
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise ConfigError("grid values must lie in [0, 1]")
    return values


# --- formatting -------------------------------------------------------------


def fmt_value(x, decimals):
    """Fixed decimals; exact integers are written without a fraction."""
    x = float(x)
    if x == int(x):
        return str(int(x))
    text = f"{x:.{decimals}f}"
    return "0" if float(text) == 0 else text


def fmt_coord(x):
    return f"{float(x):.12g}"


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _jsonl_text(records):
    return "".join(json.dumps(r, sort_keys=False) + "\n" for r in records)


def _table_text(header, rows, title=None):
    widths = [max(len(str(h)), *(len(str(r[k])) for r in rows)) for k, h in enumerate(header)]
    lines = [title] if title else []
    lines.append("  ".join(str(h).rjust(w) if k else str(h).ljust(w) for k, (h, w) in enumerate(zip(header, widths))))
    for r in rows:
        lines.append("  ".join(str(c).rjust(w) if k else str(c).ljust(w) for k, (c, w) in enumerate(zip(r, widths))))
    return "\n".join(lines) + "\n"


def _weight_headers(cfg: RunConfig, prefix="omega"):
    if cfg.labels and cfg.output_format == "table":
        return list(cfg.labels)
    return [f"{prefix}_{i}" for i in range(1, cfg.n + 1)]


# --- commands ---------------------------------------------------------------


def cmd_allocate(cfg: RunConfig):
    notes = []
    exit_code = EXIT_OK
    extra = {}
    if cfg.nu is None:
        raise ConfigError("allocate needs --nu (a number in [0, 1] or 'unknown')")
    if cfg.nu_unknown:
        reports = [("EWP", allocator.ewp_weights(cfg.n), None),
                   ("rule-of-thumb", allocator.rule_of_thumb_weights(cfg.n), None)]
        notes.append(RULE_OF_THUMB_NOTE)
    else:
        params = cfg.params()
        V = orderstats.covariance_matrix(params.n, params.nu)
        reports = [
            ("EWP", None, riskaverse.build_report(allocator.ewp_weights(params.n), params, "EWP", V)),
            ("SWP", None, riskaverse.build_report(allocator.swp_weights(params.n, params.nu), params, "SWP", V)),
        ]
        if params.b > 0 and params.nu > 0:
            outcome = riskaverse.optimize_mean_variance(params)
            reports.append(("mean-variance", None, outcome.report))
            extra["solver_converged"] = outcome.converged
            if not outcome.converged:
                exit_code = EXIT_SOLVER
                print(f"error: mean-variance solver did not converge "
                      f"(stationarity {outcome.stationarity:.3g})", file=sys.stderr)
        elif params.b > 0:
            notes.append("nu = 0: output is riskless, so the mean-variance optimum is any allocation")
        if params.n > 1:
            extra["dominance_gap"] = allocator.dominance_gap(params)

    headers = _weight_headers(cfg)
    fmt = cfg.output_format
    if fmt == "jsonl":
        records = []
        for method, w, rep in reports:
            rec = rep.as_dict() if rep is not None else {"method": method, "weights": [float(x) for x in w], "n": cfg.n, "nu": "unknown"}
            if cfg.labels:
                rec["labels"] = list(cfg.labels)
            records.append(rec)
        if extra:
            records.append(extra)
        for note in notes:
            print(f"note: {note}", file=sys.stderr)
        return _jsonl_text(records), exit_code

    d = TABLE_DECIMALS if fmt == "table" else CSV_DECIMALS
    val = (lambda x: f"{x:.{d}f}") if fmt == "table" else (lambda x: fmt_value(x, d))
    rows = []
    for method, w, rep in reports:
        if rep is None:
            rows.append([method, *(val(x) for x in w), "", "", ""])
        else:
            rows.append([method, *(val(x) for x in rep.weights),
                         val(rep.expected_output), val(rep.variance), val(rep.utility)])
    if fmt == "csv":
        for note in notes:
            print(f"note: {note}", file=sys.stderr)
        return _csv_text(["method", *headers, "expected_output", "variance", "utility"], rows), exit_code
    title = f"n={cfg.n}  nu={cfg.nu if cfg.nu_unknown else fmt_coord(cfg.nu)}  a={fmt_coord(cfg.a)}  b={fmt_coord(cfg.b)}"
    text = _table_text(["method", *headers, "E[c1]", "Var[c1]", "utility"], rows, title)
    if "dominance_gap" in extra:
        text += f"dominance gap B2 - B1: {extra['dominance_gap']:.{d}f}\n"
    text += "".join(f"# {note}\n" for note in notes)
    return text, exit_code


def cmd_sweep(cfg: RunConfig):
    grid = parse_grid(cfg.grid)
    rows = [[nu, allocator.swp_weights(cfg.n, nu)] for nu in grid]
    header = ["nu", *[f"omega_{i}" for i in range(1, cfg.n + 1)]]
    if cfg.output_format == "jsonl":
        return _jsonl_text({"nu": nu, "weights": [float(x) for x in w]} for nu, w in rows), EXIT_OK
    if cfg.output_format == "table":
        body = [[fmt_coord(nu), *(f"{x:.{TABLE_DECIMALS}f}" for x in w)] for nu, w in rows]
        return _table_text(header, body, f"sorted weighted portfolio, n={cfg.n}"), EXIT_OK
    body = [[fmt_coord(nu), *(fmt_value(x, CSV_DECIMALS) for x in w)] for nu, w in rows]
    return _csv_text(header, body), EXIT_OK


def cmd_covariance(cfg: RunConfig):
    params = cfg.params()
    if params.nu == 0:
        raise ConfigError(
            "covariance needs nu > 0: at nu = 0 every x**nu equals 1, the variances vanish "
            "and correlations cannot be evaluated"
        )
    V = orderstats.covariance_matrix(params.n, params.nu).m
    rho = orderstats.correlation_matrix(params.n, params.nu).m
    cols = [f"c_{j}" for j in range(1, params.n + 1)]
    if cfg.output_format == "jsonl":
        return _jsonl_text([
            {"matrix": "V", "nu": params.nu, "n": params.n, "values": V.tolist()},
            {"matrix": "rho", "nu": params.nu, "n": params.n, "values": rho.tolist()},
        ]), EXIT_OK
    if cfg.output_format == "table":
        text = _table_text(["V", *cols], [[str(i + 1), *(f"{x:.{TABLE_DECIMALS}f}" for x in r)] for i, r in enumerate(V)],
                           f"covariance of x_(i)**nu, n={params.n}, nu={fmt_coord(params.nu)}")
        text += _table_text(["rho", *cols], [[str(i + 1), *(f"{x:.{TABLE_DECIMALS}f}" for x in r)] for i, r in enumerate(rho)],
                            "correlation")
        return text, EXIT_OK
    rows = [["V", i + 1, *(fmt_value(x, CSV_DECIMALS) for x in r)] for i, r in enumerate(V)]
    rows += [["rho", i + 1, *(fmt_value(x, TABLE_DECIMALS) for x in r)] for i, r in enumerate(rho)]
    return _csv_text(["matrix", "i", *cols], rows), EXIT_OK


def cmd_density(cfg: RunConfig):
    if cfg.points < 2:
        raise ConfigError("--points must be >= 2")
    x = np.linspace(0.0, 1.0, cfg.points)
    dens = np.column_stack([orderstats.order_statistic_pdf(x, i, cfg.n) for i in range(1, cfg.n + 1)])
    header = ["x", *[f"rho_{i}" for i in range(1, cfg.n + 1)]]
    if cfg.output_format == "jsonl":
        return _jsonl_text({"x": float(xi), "density": [float(v) for v in row]} for xi, row in zip(x, dens)), EXIT_OK
    if cfg.output_format == "table":
        body = [[fmt_coord(xi), *(f"{v:.{TABLE_DECIMALS}f}" for v in row)] for xi, row in zip(x, dens)]
        return _table_text(header, body, f"order-statistic densities, n={cfg.n}"), EXIT_OK
    body = [[fmt_coord(xi), *(fmt_value(v, CSV_DECIMALS) for v in row)] for xi, row in zip(x, dens)]
    return _csv_text(header, body), EXIT_OK


def cmd_simulate(cfg: RunConfig):
    params = cfg.params()
    spec = mc.SimulationSpec(trials=cfg.trials, seed=cfg.seed, params=params, workers=cfg.workers)
    b1 = allocator.max_output_case1(params)
    b2 = allocator.max_output_case2(params)
    ewp = mc.simulate_payoffs(allocator.ewp_weights(params.n), spec, sorted=False)
    swp = mc.simulate_payoffs(allocator.swp_weights(params.n, params.nu), spec, sorted=True)
    gap_se = math.hypot(ewp.standard_error, swp.standard_error)
    ok = ewp.agrees_with(b1) and swp.agrees_with(b2)
    rows = [
        ("B1_ewp_unranked", b1, ewp.mean, ewp.standard_error),
        ("B2_swp_ranked", b2, swp.mean, swp.standard_error),
        ("gap_B2_minus_B1", b2 - b1, swp.mean - ewp.mean, gap_se),
    ]
    exit_code = EXIT_OK if ok else EXIT_ORACLE
    if not ok:
        print(f"error: Monte Carlo disagrees with analytic values beyond {mc.SE_GATE:g} standard errors",
              file=sys.stderr)
    fmt = cfg.output_format
    if fmt == "jsonl":
        recs = [{"quantity": q, "analytic": a, "empirical": e, "standard_error": s} for q, a, e, s in rows]
        recs.append({"trials": cfg.trials, "seed": cfg.seed, "agrees": ok})
        return _jsonl_text(recs), exit_code
    if fmt == "csv":
        body = [[q, fmt_value(a, CSV_DECIMALS), fmt_value(e, CSV_DECIMALS), fmt_value(s, CSV_DECIMALS)] for q, a, e, s in rows]
        return _csv_text(["quantity", "analytic", "empirical", "standard_error"], body), exit_code
    body = [[q, f"{a:.{TABLE_DECIMALS}f}", f"{e:.{TABLE_DECIMALS}f}", f"{s:.2e}",
             f"{(e - a) / s:+.2f}" if s > 0 else "-"] for q, a, e, s in rows]
    title = (f"n={params.n}  nu={fmt_coord(params.nu)}  a={fmt_coord(params.a)}  "
             f"trials={cfg.trials}  seed={cfg.seed}")
    text = _table_text(["quantity", "analytic", "empirical", "std_err", "z"], body, title)
    text += f"agreement within {mc.SE_GATE:g} standard errors: {'yes' if ok else 'no'}\n"
    return text, exit_code


COMMANDS = {
    "allocate": cmd_allocate,
    "sweep": cmd_sweep,
    "covariance": cmd_covariance,
    "density": cmd_density,
    "simulate": cmd_simulate,
}


def _add_common(p):
    p.add_argument("--config", help="JSON file with settings; flags override it")
    p.add_argument("--n", type=int, help="number of alternatives")
    p.add_argument("--nu", help="elasticity in [0, 1], or 'unknown' (allocate only)")
    p.add_argument("--a", type=float, help="absolute maximum output per alternative (default 1)")
    p.add_argument("--b", type=float, help="risk aversion (default 0)")
    p.add_argument("--c0", type=float, help="total budget (default 1)")
    p.add_argument("--labels", help="comma-separated names in ascending rank order")
    p.add_argument("--format", choices=FORMATS, help="output format (default table)")
    p.add_argument("--out", help="write data to this file instead of stdout")


def make_parser():
    parser = argparse.ArgumentParser(prog="ordalloc", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(default_format="csv" if name in CSV_COMMANDS else "table")
        if name == "sweep":
            p.add_argument("--grid", help="nu grid start:stop:step (default 0:1:0.05)")
        if name == "density":
            p.add_argument("--points", type=int, help="number of x grid points (default 101)")
        if name == "simulate":
            p.add_argument("--trials", type=int, help="Monte Carlo trials (default 1000000)")
            p.add_argument("--seed", type=int, help=f"seed (default {mc.DEFAULT_SEED})")
            p.add_argument("--workers", type=int, help="worker threads (default 1)")
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr, format="%(levelname)s: %(message)s")
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        text, code = COMMANDS[args.command](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
