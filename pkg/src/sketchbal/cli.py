"""Command-line harness: ``sketchbal {synthetic,solver,perturb,report}``.

Every command writes plain CSV into an output directory (``--out``, falling
back to ``$SKETCHBAL_OUT`` and then ``./sketchbal-out``). Floats are written
with 17 significant digits so reruns are byte-identical.

Exit codes: 0 success, 1 runtime/IO error or bound violation, 2 usage error.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from . import __version__
from .balance import RlcbConfig
from .errors import SketchbalError
from .experiments.solver import SolverConfig, run_solver_suite
from .experiments.stability import PERTURB_METHODS, PerturbConfig, run_perturbation_suite
from .experiments.synthetic import (METHODS, SuccessWindow, SummaryRow, SyntheticConfig,
                                    run_synthetic_suite, summarize)
from .matrixzoo import structured_spectrum

COMMANDS = ("synthetic", "solver", "perturb", "report")
DEFAULT_OUT = "sketchbal-out"
OUT_ENV = "SKETCHBAL_OUT"

TRIAL_HEADER = ["family", "method", "s", "trial", "rel_max", "rel_min", "cond_ratio",
                "success", "seed"]
SUMMARY_HEADER = [f.name for f in fields(SummaryRow)]
RATES_HEADER = ["family", "method", "s", "success_rate"]
TRACE_HEADER = ["problem", "method", "iteration", "residual", "sketched_residual"]
SOLVER_HEADER = ["problem", "method", "iter", "initial_residual", "final_residual",
                 "sketched_iter"]
PERTURB_HEADER = ["family", "method", "s", "eta", "seed", "measured_shift", "bound",
                  "satisfied"]


class UsageError(Exception):
    """Invalid configuration; reported with exit code 2."""


@dataclass
class RunConfig:
    command: str = "synthetic"
    seed: int = 0
    m: int = 1500
    n: int = 400
    r: int = 20
    sketch_sizes: list = field(default_factory=lambda: [90, 180, 300])
    methods: list = None
    n_trials: int = 20
    window_lower: float = 0.5
    window_upper: float = 2.0
    clip_factor: float = 10.0
    trim_fraction: float = 0.1
    poisson_k: int = 16
    path_p: int = 300
    solver_s: int = 90
    tol: float = 1e-6
    cap: int = 200
    etas: list = field(default_factory=lambda: [0.01, 0.1, 0.5])
    n_seeds: int = 100
    out: str = None

    @property
    def output_dir(self):
        return Path(self.out)

    @property
    def window(self):
        return SuccessWindow(self.window_lower, self.window_upper)

    @property
    def rlcb(self):
        return RlcbConfig(self.trim_fraction, self.clip_factor, self.r)

    def synthetic(self):
        return SyntheticConfig(m=self.m, n=self.n, r=self.r,
                               sketch_sizes=tuple(self.sketch_sizes),
                               methods=tuple(self.methods), n_trials=self.n_trials,
                               base_seed=self.seed, window=self.window, rlcb=self.rlcb)

    def solver(self):
        return SolverConfig(poisson_k=self.poisson_k, path_p=self.path_p, s=self.solver_s,
                            r=self.r, tol=self.tol, cap=self.cap, base_seed=self.seed,
                            rlcb=self.rlcb)

    def perturb(self):
        return PerturbConfig(m=self.m, n=self.n, r=self.r,
                             sketch_sizes=tuple(self.sketch_sizes),
                             methods=tuple(self.methods), etas=tuple(self.etas),
                             n_seeds=self.n_seeds, base_seed=self.seed, rlcb=self.rlcb)


_INT_KEYS = {"seed", "m", "n", "r", "n_trials", "poisson_k", "path_p", "solver_s", "cap",
             "n_seeds"}
_FLOAT_KEYS = {"window_lower", "window_upper", "clip_factor", "trim_fraction", "tol"}
_LIST_KEYS = {"sketch_sizes": int, "methods": str, "etas": float}
CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | set(_LIST_KEYS) | {"out"}


def _coerce(key, value):
    """Check a config-file value against the type of ``key``."""
    def bad(kind):
        return UsageError(f"config key {key!r} must be {kind}, got {value!r}")

    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise bad("an integer")
        return value
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad("a number")
        return float(value)
    if key in _LIST_KEYS:
        kind = _LIST_KEYS[key]
        items = value if isinstance(value, list) else [value]
        for x in items:
            ok = (isinstance(x, str) if kind is str
                  else isinstance(x, (int, float)) and not isinstance(x, bool)
                  and (kind is float or isinstance(x, int)))
            if not ok:
                raise bad(f"a list of {kind.__name__}")
        return [kind(x) for x in items]
    if not isinstance(value, str):
        raise bad("a string")
    return value


def _split_list(kind):
    def parse(text):
        try:
            return [kind(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated {kind.__name__} values")
    return parse


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sketchbal",
        description="Balanced sketching experiments: distortion, solver and stability runs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "synthetic": "Monte Carlo distortion suite (trials.csv, summary.csv, success_rates.csv)",
        "solver": "gradient-descent solver comparison (solver_traces.csv, solver_summary.csv)",
        "perturb": "perturbation-bound check (perturbation.csv)",
        "report": "compare outputs in --out with the bundled reference values",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        p.add_argument("--config", metavar="FILE", help="JSON file of defaults; flags override it")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        p.add_argument("--seed", type=int, help="base seed (default 0)")
        p.add_argument("--m", type=int, help="rows of the synthetic matrices (1500)")
        p.add_argument("--n", type=int, help="columns of the synthetic matrices (400)")
        p.add_argument("--r", type=int, help="rank (20)")
        p.add_argument("--sketch-sizes", type=_split_list(int), nargs="+",
                       help="sketch sizes, e.g. '90 180' or '90,180' (90 180 300)")
        p.add_argument("--methods", type=_split_list(str), nargs="+",
                       help=f"synthetic: {', '.join(METHODS)}; perturb: "
                            f"{', '.join(PERTURB_METHODS)}")
        p.add_argument("--n-trials", type=int, help="trials per cell (20)")
        p.add_argument("--clip-factor", type=float, help="RLCB clip factor (10)")
        p.add_argument("--trim-fraction", type=float, help="RLCB trim fraction (0.1)")
        p.add_argument("--window-lower", type=float, help="success window lower end (0.5)")
        p.add_argument("--window-upper", type=float, help="success window upper end (2.0)")
        p.add_argument("--poisson-k", type=int, help="Poisson grid side (16)")
        p.add_argument("--path-p", type=int, help="path graph vertices (300)")
        p.add_argument("--solver-s", type=int, help="solver sketch size (90)")
        p.add_argument("--tol", type=float, help="solver relative tolerance (1e-6)")
        p.add_argument("--cap", type=int, help="solver iteration cap (200)")
        p.add_argument("--etas", type=_split_list(float), nargs="+",
                       help="perturbation levels in (0, 1) (0.01 0.1 0.5)")
        p.add_argument("--n-seeds", type=int, help="perturbation seeds (100)")
    return parser


def _validate(cfg):
    def need(cond, invariant):
        if not cond:
            raise UsageError(f"invalid configuration: {invariant}")

    for key in ("m", "n", "r", "n_trials", "poisson_k", "path_p", "solver_s", "cap",
                "n_seeds"):
        need(getattr(cfg, key) > 0, f"{key} must be positive (got {getattr(cfg, key)})")
    need(cfg.seed >= 0, f"seed must be non-negative (got {cfg.seed})")
    need(cfg.r <= min(cfg.m, cfg.n), f"r must not exceed min(m, n) (got r={cfg.r})")
    need(len(cfg.sketch_sizes) > 0, "sketch_sizes must be non-empty")
    for s in cfg.sketch_sizes:
        need(cfg.r <= s <= cfg.m, f"sketch sizes must satisfy r <= s <= m (got s={s})")
    allowed = PERTURB_METHODS if cfg.command == "perturb" else METHODS
    need(len(cfg.methods) > 0, "methods must be non-empty")
    for name in cfg.methods:
        need(name in allowed, f"method {name!r} not in {allowed}")
    need(0 < cfg.tol < 1, f"tol must lie in (0, 1) (got {cfg.tol})")
    for eta in cfg.etas:
        need(0 < eta < 1, f"eta must lie in (0, 1) (got {eta})")
    need(cfg.solver_s <= min(cfg.poisson_k ** 2, cfg.path_p),
         f"solver_s must not exceed the problem sizes (got {cfg.solver_s})")
    need(cfg.r <= cfg.solver_s, f"r must not exceed solver_s (got r={cfg.r})")
    try:
        cfg.window
        cfg.rlcb
    except SketchbalError as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def parse_config(argv=None):
    """Parse flags (and an optional JSON config) into a validated :class:`RunConfig`.

    Raises :class:`UsageError` for unknown keys, type mismatches and
    invariant violations. Argument syntax errors exit via argparse (code 2).
    """
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a flat JSON object")
        unknown = sorted(set(doc) - CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        values = {k: _coerce(k, v) for k, v in doc.items()}
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is None:
            continue
        if key in _LIST_KEYS:
            v = [x for chunk in v for x in chunk]
        values[key] = v

    cfg = RunConfig(command=args.command, **values)
    if cfg.methods is None:
        cfg.methods = list(PERTURB_METHODS if cfg.command == "perturb"
                           else SyntheticConfig().methods)
    if cfg.out is None:
        cfg.out = os.environ.get(OUT_ENV) or DEFAULT_OUT
    _validate(cfg)
    return cfg


# ---------------------------------------------------------------------------
# CSV output


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _prepare_out(cfg):
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    return out


def cmd_synthetic(cfg):
    out = _prepare_out(cfg)
    records = run_synthetic_suite(cfg.synthetic())
    summary = summarize(records)
    write_csv(out / "trials.csv", TRIAL_HEADER,
              ([getattr(rec, k) for k in TRIAL_HEADER] for rec in records))
    write_csv(out / "summary.csv", SUMMARY_HEADER,
              ([getattr(row, k) for k in SUMMARY_HEADER] for row in summary))
    write_csv(out / "success_rates.csv", RATES_HEADER,
              ([getattr(row, k) for k in RATES_HEADER] for row in summary))
    print(f"synthetic: {len(records)} trials, {len(summary)} groups -> {out}")
    return 0


def cmd_solver(cfg):
    out = _prepare_out(cfg)
    traces = run_solver_suite(cfg.solver())
    trace_rows = []
    for t in traces:
        # the original method has no separate sketched objective: column left empty
        inner = t.sketched_residuals or [""] * len(t.residuals)
        for k, res in enumerate(t.residuals):
            trace_rows.append([t.problem, t.method, k, res, inner[k]])
    write_csv(out / "solver_traces.csv", TRACE_HEADER, trace_rows)
    write_csv(out / "solver_summary.csv", SOLVER_HEADER,
              ([t.problem, t.method, t.iters_to_tol, t.initial_residual, t.final_residual,
                t.sketched_iters_to_tol] for t in traces))
    for t in traces:
        print(f"{t.problem:15s} {t.method:12s} iter={t.iters_to_tol:4d} "
              f"r0={t.initial_residual:.3g} r_final={t.final_residual:.3g} "
              f"sketched_iter={t.sketched_iters_to_tol}")
    return 0


def cmd_perturb(cfg):
    out = _prepare_out(cfg)
    rows = run_perturbation_suite(cfg.perturb())
    write_csv(out / "perturbation.csv", PERTURB_HEADER,
              ([r.family, r.method, r.s, r.eta, r.seed, r.report.measured_shift,
                r.report.bound, r.report.satisfied] for r in rows))
    bad = [r for r in rows if not r.report.satisfied]
    print(f"perturb: {len(rows)} rows, {len(bad)} violations -> {out}")
    for r in bad:
        print(f"  violation: {r.method} s={r.s} eta={r.eta} seed={r.seed} "
              f"shift={r.report.measured_shift:.3e} bound={r.report.bound:.3e}",
              file=sys.stderr)
    return 1 if bad else 0


# ---------------------------------------------------------------------------
# report


def load_reference():
    text = resources.files("sketchbal").joinpath("data/reference_values.json").read_text(
        encoding="utf-8")
    return json.loads(text)


def classify(cell, value, kappa=None):
    """``MATCH``, ``SOFT-MATCH`` or ``MISMATCH`` for one reference cell."""
    cls, ref = cell["cls"], cell["reference"]
    if value != value:  # nan
        return "MISMATCH"
    if cls == "exact":
        return "MATCH" if abs(value - ref) <= 1e-12 else "MISMATCH"
    if cls == "abs_band":
        d = abs(value - ref)
        return "MATCH" if d <= cell["tol"] else "SOFT-MATCH" if d <= 2 * cell["tol"] else "MISMATCH"
    if cls == "range":
        lo, hi = cell["lo"], cell["hi"]
        half = (hi - lo) / 2
        if lo <= value <= hi:
            return "MATCH"
        return "SOFT-MATCH" if lo - half <= value <= hi + half else "MISMATCH"
    if cls == "inverse_kappa":
        if kappa is not None and abs(value * kappa - 1) <= cell["tol"]:
            return "MATCH"
        return "SOFT-MATCH" if abs(value - ref) <= 0.01 else "MISMATCH"
    if cls == "max":
        return "MATCH" if value <= cell["hi"] else "SOFT-MATCH" if value <= 10 * cell["hi"] else "MISMATCH"
    if cls == "factor":
        if value <= 0 or ref <= 0:
            return "MISMATCH"
        ratio = max(value / ref, ref / value)
        f = cell["factor"]
        return "MATCH" if ratio <= f else "SOFT-MATCH" if ratio <= f * f else "MISMATCH"
    raise ValueError(f"unknown tolerance class {cls!r}")


def _report_lines(ref, summary, solver, kappa):
    lines = []
    by_cell = {(row["family"], row["method"], int(row["s"])): row for row in summary}
    for cell in ref["synthetic"]:
        row = by_cell.get((cell["family"], cell["method"], cell["s"]))
        if row is None:
            continue
        value = float(row[cell["metric"]])
        verdict = classify(cell, value, kappa)
        note = "" if cell.get("binding", True) else "  (non-binding)"
        lines.append(f"{verdict:10s} {cell['family']:11s} {cell['method']:11s} "
                     f"s={cell['s']:<4d} {cell['metric']:16s} computed={value:<10.4g} "
                     f"reference={cell['reference']:.4g}{note}")
    if solver is not None:
        by_run = {(row["problem"], row["method"]): row for row in solver}
        for cell in ref["solver"]:
            row = by_run.get((cell["problem"], cell["method"]))
            if row is None:
                continue
            value = float(row[cell["metric"]])
            verdict = classify(cell, value)
            note = "" if cell.get("binding", True) else "  (non-binding)"
            lines.append(f"{verdict:10s} {cell['problem']:15s} {cell['method']:11s} "
                         f"{cell['metric']:16s} computed={value:<10.4g} "
                         f"reference={cell['reference']:.4g}{note}")
    return lines


def cmd_report(cfg):
    out = cfg.output_dir
    try:
        read_csv(out / "trials.csv")
        summary = read_csv(out / "summary.csv")
    except FileNotFoundError as exc:
        print(f"sketchbal report: missing input: {exc.filename}", file=sys.stderr)
        return 1
    solver_path = out / "solver_summary.csv"
    solver = read_csv(solver_path) if solver_path.exists() else None
    ref = load_reference()
    sigma = structured_spectrum(cfg.r)
    kappa = float(sigma[0] / sigma[-1])
    lines = _report_lines(ref, summary, solver, kappa)
    print(f"reference data version {ref['version']}; structured kappa(A) = {kappa:.6g}")
    for line in lines:
        print(line)
    counts = {v: sum(line.startswith(v + " ") for line in lines)
              for v in ("MATCH", "SOFT-MATCH", "MISMATCH")}
    print(" ".join(f"{k}={v}" for k, v in counts.items()))
    if solver is None:
        print("(no solver_summary.csv; solver rows skipped)")
    return 0


HANDLERS = {"synthetic": cmd_synthetic, "solver": cmd_solver, "perturb": cmd_perturb,
            "report": cmd_report}


def main(argv=None):
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"sketchbal: error: {exc}", file=sys.stderr)
        return 2
    try:
        return HANDLERS[cfg.command](cfg)
    except (SketchbalError, OSError) as exc:
        print(f"sketchbal {cfg.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
