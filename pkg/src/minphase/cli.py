"""``minphase`` command line: design, transform, sweep and analyze.

Exit codes: 0 success, 1 usage error, 2 numeric or input failure.
Settings resolve as command-line flags, then ``minphase.cfg`` (TOML),
then built-in defaults. Each run writes ``manifest.json`` next to its
outputs; JSON outputs name it and text tap files carry it as a comment.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .conversion import MmseConfig, mmse_transform, transform
from .design import DesignFailure, design_minphase, measure_gamma_psd, waterfall_sweep
from .gramian import MAX_EIG_DIMENSION, NotPositiveDefinite, build_gramian, default_padding, min_eigenvalue
from .orchard_wilson import SolverConfig
from .signal_core import (
    DEFAULT_GRID_COUNT,
    FrequencyGrid,
    amplitude_extremum,
    amplitude_response,
    frequency_response_magnitude,
    zeros,
)
from .tapfile import TapFileError, format_float, load_fir, load_prototype, write_taps

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

CONFIG_NAME = "minphase.cfg"
GRID_ENV = "MINPHASE_GRID"
MANIFEST = "manifest.json"
WATERFALL_HEADER = ["gamma", "offset", "E_L2", "converged"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- config

def load_config(path: Path | None) -> dict:
    """Read the TOML config; a missing default file is an empty config."""
    if path is None:
        path = Path(CONFIG_NAME)
        if not path.exists():
            return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"bad config {path}: {exc}") from None


def _pick(flag, cfg: dict, section: str, key: str, default):
    if flag is not None:
        return flag
    sec = cfg.get(section, {})
    if key in sec:
        return sec[key]
    return cfg.get(key, default)


def solver_config(args, cfg: dict) -> SolverConfig:
    base = SolverConfig()
    sec = cfg.get("solver", {})
    kw = {}
    for name in ("max_iterations", "gradient_tolerance", "step_tolerance",
                 "initial_damping", "newton_polish"):
        val = getattr(args, name, None)
        kw[name] = val if val is not None else sec.get(name, getattr(base, name))
    try:
        return SolverConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"solver settings: {exc}") from None


def grid_from(args, cfg: dict) -> FrequencyGrid:
    """``--grid``, then ``MINPHASE_GRID``, then the config, then 4096."""
    count = getattr(args, "grid", None)
    if count is None:
        count = os.environ.get(GRID_ENV) or cfg.get("grid", DEFAULT_GRID_COUNT)
    try:
        return FrequencyGrid(int(count))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- parsing helpers

def parse_offsets(text: str) -> list[float]:
    """Comma-separated values, or ``logrange lo:hi:n``.

    A log range with both ends positive (or both negative) is geometric.
    One straddling zero is split at a magnitude floor of 1e-16: the
    negative and positive decades each get a share of the ``n`` points
    proportional to their decade count, ordered by increasing offset.
    """
    text = text.strip()
    if not text:
        return []
    if text.startswith("logrange"):
        spec = text[len("logrange"):].lstrip(" :")
        try:
            lo, hi, n = spec.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
        except ValueError:
            raise UsageError(f"bad logrange {text!r}; expected logrange lo:hi:n") from None
        return logrange(lo, hi, n)
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad offset list {text!r}") from None


def logrange(lo: float, hi: float, n: int, floor: float = 1e-16) -> list[float]:
    if n < 1:
        raise UsageError("logrange needs at least one point")
    if not lo < hi:
        raise UsageError("logrange needs lo < hi")
    if n == 1:
        return [lo]
    if lo > 0:
        return list(np.geomspace(lo, hi, n))
    if hi < 0:
        return list(-np.geomspace(-lo, -hi, n))
    neg = math.log10(max(-lo, floor) / floor) if lo < 0 else 0.0
    pos = math.log10(max(hi, floor) / floor) if hi > 0 else 0.0
    n_neg = int(round(n * neg / (neg + pos))) if neg + pos > 0 else 0
    n_neg = min(max(n_neg, 1 if lo < 0 else 0), n - (1 if hi > 0 else 0))
    n_pos = n - n_neg
    out = []
    if n_neg:
        out += list(-np.geomspace(-lo, floor, n_neg)) if n_neg > 1 else [lo]
    if n_pos:
        out += list(np.geomspace(floor, hi, n_pos)) if n_pos > 1 else [hi]
    return out


def parse_eig_sweep(text: str) -> list[int]:
    try:
        lo, hi, n = (int(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"bad --eig-sweep {text!r}; expected Qlo:Qhi:n") from None
    if not (1 <= lo <= hi and n >= 1):
        raise UsageError("--eig-sweep needs 1 <= Qlo <= Qhi and n >= 1")
    qs = np.unique(np.round(np.linspace(lo, hi, n)).astype(int))
    return [int(q) for q in qs]


def parse_epsilon(text):
    if text is None or text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"bad epsilon {text!r}; expected a number or 'auto'") from None


# ---------------------------------------------------------------- output helpers

class Run:
    """Collects the manifest of one command invocation."""

    def __init__(self, command: str, out: Path, inputs: dict, config: dict):
        self.out = out
        out.mkdir(parents=True, exist_ok=True)
        self.manifest = {
            "command": command,
            "version": __version__,
            "inputs": {k: str(v) for k, v in inputs.items()},
            "config": config,
            "outputs": [],
        }

    def path(self, name: str) -> Path:
        self.manifest["outputs"].append(name)
        return self.out / name

    def write_json(self, name: str, obj: dict):
        obj = dict(obj, manifest=MANIFEST)
        self.path(name).write_text(json.dumps(obj, indent=2, default=_json_default) + "\n")

    def write_taps(self, name: str, taps):
        p = self.path(name)
        write_taps(p, taps)
        p.write_text(f"# manifest: {MANIFEST}\n" + p.read_text())

    def write_csv(self, name: str, header, rows):
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])

    def finish(self):
        (self.out / MANIFEST).write_text(json.dumps(self.manifest, indent=2) + "\n")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format_float(v)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o).__name__)


def _finite(x):
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------- commands

def cmd_design(args) -> int:
    cfg = load_config(args.config)
    g = load_prototype(args.prototype)
    Q = int(_pick(args.q, cfg, "design", "q", default_padding(len(g))))
    eps = parse_epsilon(_pick(args.epsilon, cfg, "design", "epsilon", "auto"))
    solver = solver_config(args, cfg)
    grid = grid_from(args, cfg)
    run = Run("design", Path(args.out), {"prototype": args.prototype},
              {"Q": Q, "epsilon": eps, "solver": solver.__dict__, "grid": grid.count})
    c, rep = design_minphase(g, Q=Q, cfg=solver, epsilon=eps)
    run.write_taps("c.txt", c.taps)
    report = rep.to_dict()
    report["c"] = [float(x) for x in c.taps]
    run.write_json("report.json", report)
    w = grid.samples
    lifted = rep.scale * (amplitude_response(g, w) + rep.gamma_final)
    run.write_csv("response.csv", ["omega", "abs_C", "A_lifted"],
                  zip(w, frequency_response_magnitude(c, w), lifted))
    if args.trace:
        run.path("trace.jsonl").write_text(
            "".join(line + "\n" for line in rep.residual.trace_lines()))
    run.finish()
    print(f"E_L2={rep.residual.norm:.6e} gamma_psd={rep.gamma_psd!r} "
          f"offset={rep.offset!r} -> {run.out / 'c.txt'}")
    return 0


def cmd_transform(args) -> int:
    cfg = load_config(args.config)
    h = load_fir(args.fir)
    Q = _pick(args.q, cfg, "transform", "q", None)
    Q = None if Q is None else int(Q)
    solver = solver_config(args, cfg)
    grid = grid_from(args, cfg)
    config = {"Q": Q if Q is not None else default_padding(2 * len(h) - 1),
              "solver": solver.__dict__, "grid": grid.count}
    mcfg = None
    if args.mmse:
        try:
            mcfg = MmseConfig(_pick(args.plen, cfg, "mmse", "plen", None),
                              float(_pick(args.sigma2, cfg, "mmse", "sigma2", 1e-4)))
            mcfg.length_for(len(h))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        config["mmse"] = {"plen": mcfg.length_for(len(h)), "sigma2": mcfg.sigma2}
    run = Run("transform", Path(args.out), {"fir": args.fir}, config)
    res = transform(h, Q=Q, cfg=solver, grid=grid)
    run.write_taps("c.txt", res.c.taps)
    run.write_taps("f.txt", res.f_taps)
    report = {"factorization": res.to_dict()}
    report["factorization"].pop("f")
    if mcfg is not None:
        mm = mmse_transform(h, mcfg, grid=grid)
        run.write_taps("c_mmse.txt", mm.c.taps)
        report["mmse"] = mm.to_dict()
        report["mmse"].pop("f")
        ratio = mm.residual.norm / res.residual.norm if res.residual.norm > 0 else math.inf
        report["residual_ratio"] = _finite(ratio)
    run.write_json("report.json", report)
    run.finish()
    print(f"E_L2={res.residual.norm:.6e} spectral_error={res.spectral_error:.3e}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    g = load_prototype(args.prototype)
    offsets = parse_offsets(args.offsets)
    Q = int(_pick(args.q, cfg, "sweep", "q", default_padding(len(g))))
    jobs = int(_pick(args.jobs, cfg, "sweep", "jobs", 1))
    if jobs < 1:
        raise UsageError("--jobs must be at least 1")
    solver = solver_config(args, cfg)
    # jobs only changes scheduling, so it stays out of the manifest
    run = Run("sweep", Path(args.out), {"prototype": args.prototype},
              {"Q": Q, "offsets": offsets, "solver": solver.__dict__})
    pts = waterfall_sweep(g, offsets, Q=Q, cfg=solver, jobs=jobs) if offsets else []
    run.write_csv("waterfall.csv", WATERFALL_HEADER, (p.as_row() for p in pts))
    run.finish()
    print(f"{len(pts)} points -> {run.out / 'waterfall.csv'}")
    return 0


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    g = load_prototype(args.prototype)
    grid = grid_from(args, cfg)
    qs = parse_eig_sweep(args.eig_sweep) if args.eig_sweep else []
    run = Run("analyze", Path(args.out), {"prototype": args.prototype},
              {"grid": grid.count, "eig_sweep": qs, "zeros": args.zeros,
               "response": args.response})
    w_min, a_min = amplitude_extremum(g, "min")
    summary = {"min_amplitude": a_min, "omega_min": w_min,
               "gamma_psd": measure_gamma_psd(g), "length": len(g)}
    if qs:
        rows = []
        for q in qs:
            sys_ = build_gramian(g, q, 0.0)
            if sys_.dimension > MAX_EIG_DIMENSION:
                raise UsageError(f"Q={q} gives a matrix above {MAX_EIG_DIMENSION} rows")
            rows.append((q, min_eigenvalue(sys_)))
        run.write_csv("eig_sweep.csv", ["Q", "lambda_min"], rows)
        summary["lambda_min_last"] = rows[-1][1]
    if args.zeros:
        z = zeros(g) if len(g) > 1 else np.zeros(0, complex)
        run.write_json("zeros.json", {
            "zeros": [[float(v.real), float(v.imag)] for v in z],
            "modulus": [float(abs(v)) for v in z],
        })
    if args.response:
        w = grid.samples
        run.write_csv("response.csv", ["omega", "A"], zip(w, amplitude_response(g, w)))
    run.write_json("analysis.json", summary)
    run.finish()
    print(f"min_amplitude={a_min!r} gamma_psd={summary['gamma_psd']!r}")
    return 0


# ---------------------------------------------------------------- entry point

def _solver_flags(p):
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.add_argument("--gradient-tolerance", type=float, dest="gradient_tolerance")
    p.add_argument("--step-tolerance", type=float, dest="step_tolerance")
    p.add_argument("--initial-damping", type=float, dest="initial_damping")
    p.add_argument("--newton-polish", action="store_true", default=None, dest="newton_polish")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minphase", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--config", type=Path, help=f"TOML config (default ./{CONFIG_NAME})")

    p = sub.add_parser("design", help="minimum-phase factor of a lifted prototype")
    p.add_argument("--prototype", required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--epsilon", help="lift above gamma_psd, or 'auto'")
    p.add_argument("--grid", type=int)
    p.add_argument("--trace", action="store_true", help="write solver trace.jsonl")
    _solver_flags(p)
    common(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("transform", help="minimum-phase equivalent of an FIR")
    p.add_argument("--fir", required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--mmse", action="store_true", help="also run the MMSE baseline")
    p.add_argument("--sigma2", type=float)
    p.add_argument("--plen", type=int, help="MMSE feedforward length P+1")
    p.add_argument("--grid", type=int)
    _solver_flags(p)
    common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("sweep", help="residual norm against lift offset")
    p.add_argument("--prototype", required=True)
    p.add_argument("--offsets", required=True, help="csv list or 'logrange lo:hi:n'")
    p.add_argument("--q", type=int)
    p.add_argument("--jobs", type=int)
    _solver_flags(p)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="eigenvalue sweep, zeros and amplitude")
    p.add_argument("--prototype", required=True)
    p.add_argument("--eig-sweep", dest="eig_sweep", help="Qlo:Qhi:n")
    p.add_argument("--zeros", action="store_true")
    p.add_argument("--response", action="store_true")
    p.add_argument("--grid", type=int)
    common(p)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"minphase: error: {exc}", file=sys.stderr)
        return 1
    except (TapFileError, DesignFailure, NotPositiveDefinite, ValueError,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"minphase: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
