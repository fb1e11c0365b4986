"""Command-line front end.

Two subcommands::

    survwave estimate data.csv --out result/ [--filter symmlet5 --level auto ...]
    survwave simulate --baseline normal --n 100 --replications 200 --out study/

Settings may also come from a JSON file given with ``--config``.  Its keys
are the :class:`RunConfig` field names; command-line flags win over the file.

Input data are ``time,status`` rows (status 1 for an observed event, 0 for
a censored one) with an optional header.  Errors end the process with a JSON
document ``{"error": <kind>, "message": ...}`` on stderr and exit status 2
(configuration), 3 (data) or 4 (numerical).
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import censoring, estimator
from ._backend import BACKEND
from .censoring import CensoredSample
from .errors import (
    BadStatus,
    ConfigError,
    InvalidSampleSize,
    IoError,
    NegativeTime,
    ParseError,
    SurvWaveError,
)
from .simulation import SimulationConfig, run_study
from .wavelet_basis import load_filter


@dataclass
class RunConfig:
    mode: str = "estimate"
    input_path: Optional[str] = None
    filter: str = "symmlet5"
    level: object = "auto"
    estimator: str = "partial"
    postprocess: str = "clip"
    grid_points: int = 512
    output_dir: str = "."
    log_convention: str = "natural"
    # simulate mode
    baseline: str = "normal"
    n: int = 100
    replications: int = 1000
    lam: float = 0.8
    seed: int = 0
    estimator_kinds: tuple = ("partial", "complete")
    censoring_param: str = "mean"
    truth: str = "rescaled"
    mse_points: str = "grid"
    workers: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ("estimate", "simulate"):
            raise ConfigError(f"mode must be 'estimate' or 'simulate', got {self.mode!r}")
        if self.level != "auto":
            try:
                self.level = int(self.level)
            except (TypeError, ValueError):
                raise ConfigError(f"level must be 'auto' or an integer, got {self.level!r}") from None
            if not 0 <= self.level <= estimator.MAX_LEVEL:
                raise ConfigError(f"level must be in [0, {estimator.MAX_LEVEL}], got {self.level}")
        if int(self.grid_points) < 2:
            raise ConfigError("grid_points must be at least 2")
        if self.estimator not in estimator.KINDS:
            raise ConfigError(f"estimator must be one of {estimator.KINDS}")
        if self.postprocess not in estimator.POSTPROCESS_MODES:
            raise ConfigError(f"postprocess must be one of {estimator.POSTPROCESS_MODES}")
        if self.log_convention not in ("natural", "base2"):
            raise ConfigError("log_convention must be 'natural' or 'base2'")
        if self.mode == "estimate" and not self.input_path:
            raise ConfigError("estimate mode needs an input file")
        self.estimator_kinds = tuple(self.estimator_kinds)
        load_filter(self.filter)


def _parse_float(text):
    try:
        return float(text)
    except ValueError:
        return None


def ingest_csv(path):
    """Read ``time,status`` rows into an unnormalised :class:`CensoredSample`.

    Parameters
    ----------
    path : str
        UTF-8 CSV file.  The first row is a header when none of its fields
        is numeric; blank lines are skipped.

    Returns
    -------
    CensoredSample

    Raises
    ------
    ParseError, NegativeTime, BadStatus
        With the 1-based row number (header included) in ``.row``.
    IoError
        If the file cannot be read.
    """
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise IoError(f"{path} is not valid UTF-8") from None

    times, status = [], []
    for number, row in enumerate(rows, start=1):
        fields_ = [f.strip() for f in row]
        if not any(fields_):
            continue
        if number == 1 and all(_parse_float(f) is None for f in fields_):
            continue
        if len(fields_) != 2:
            raise ParseError(number, f"expected 2 fields (time,status), got {len(fields_)}")
        t = _parse_float(fields_[0])
        if t is None or not math.isfinite(t):
            raise ParseError(number, f"time {fields_[0]!r} is not a finite number")
        if t < 0:
            raise NegativeTime(number, f"time {t!r} is negative")
        d = _parse_float(fields_[1])
        if d not in (0.0, 1.0):
            raise BadStatus(number, f"status must be 0 or 1, got {fields_[1]!r}")
        times.append(t)
        status.append(int(d))
    if not times:
        raise InvalidSampleSize(f"{path} contains no data rows")
    return CensoredSample(np.array(times), np.array(status, dtype=np.int8))


def write_csv(sample, path):
    """Write a sample as ``time,status`` rows; times keep 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "status"])
        for y, d in zip(sample.y, sample.delta):
            w.writerow([f"{y:.17g}", int(d)])
    return path


def _fmt(v):
    return f"{v:.17g}"


def run_estimate(cfg):
    raw = ingest_csv(cfg.input_path)
    sample = estimator.normalize(raw)
    J = cfg.level if cfg.level != "auto" else estimator.select_level(sample.n, cfg.log_convention)
    filt = load_filter(cfg.filter)
    est = estimator.fit(sample, filt, J, cfg.estimator)
    shown = estimator.postprocess(est, cfg.postprocess)

    x = np.linspace(0.0, 1.0, int(cfg.grid_points))
    f_hat = estimator.evaluate(shown, x)
    if cfg.estimator == "partial":
        variance = np.maximum(estimator.variance_curve(sample, est, x), 0.0) * shown.scale ** 2
    else:
        variance = np.full_like(x, np.nan)

    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(os.path.join(cfg.output_dir, "density.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_original", "x_normalized", "f_hat", "f_hat_original_units", "variance"])
        for row in zip(x * sample.tau, x, f_hat, f_hat / sample.tau, variance):
            w.writerow([_fmt(v) for v in row])

    km = censoring.km_event(censoring.rank_sample(sample))
    meta = {
        "tau": sample.tau,
        "J": J,
        "filter": filt.name,
        "estimator": cfg.estimator,
        "postprocess": cfg.postprocess,
        "n": sample.n,
        "censoring_proportion": sample.censoring_proportion,
        "mass": float(km.cdf[-1]),
        "coefficient_mass": est.coefficient_mass,
        "coefficients": est.coeffs.tolist(),
        "log_convention": cfg.log_convention,
        "grid_points": int(cfg.grid_points),
        "backend": BACKEND,
    }
    with open(os.path.join(cfg.output_dir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_simulate(cfg):
    try:
        sim_cfg = SimulationConfig(
            baseline=cfg.baseline,
            n=int(cfg.n),
            replications=int(cfg.replications),
            lam=float(cfg.lam),
            filter=cfg.filter,
            seed=int(cfg.seed),
            grid=np.linspace(0.0, 1.0, int(cfg.grid_points)),
            estimator_kinds=cfg.estimator_kinds,
            level=None if cfg.level == "auto" else cfg.level,
            log_convention=cfg.log_convention,
            mse_points=cfg.mse_points,
            censoring_param=cfg.censoring_param,
            truth=cfg.truth,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    run_study(sim_cfg, workers=cfg.workers).write(cfg.output_dir)


def run(cfg):
    """Execute ``cfg``; returns the process exit status."""
    if cfg.mode == "estimate":
        run_estimate(cfg)
    else:
        run_simulate(cfg)
    return 0


def _parser():
    p = argparse.ArgumentParser(prog="survwave", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="mode", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with RunConfig fields")
        sp.add_argument("--filter")
        sp.add_argument("--level", help="'auto' or an explicit resolution level")
        sp.add_argument("--log-convention", dest="log_convention", choices=("natural", "base2"))
        sp.add_argument("--grid-points", dest="grid_points", type=int)
        sp.add_argument("--out", dest="output_dir")

    est = sub.add_parser("estimate", help="estimate a density from a time,status CSV")
    est.add_argument("input_path", nargs="?")
    est.add_argument("--estimator", choices=estimator.KINDS)
    est.add_argument("--postprocess", choices=estimator.POSTPROCESS_MODES)
    common(est)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo study")
    sim.add_argument("--baseline")
    sim.add_argument("--n", type=int)
    sim.add_argument("--replications", type=int)
    sim.add_argument("--lam", type=float)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--kinds", dest="estimator_kinds", nargs="+", choices=estimator.KINDS)
    sim.add_argument("--censoring-param", dest="censoring_param", choices=("mean", "rate"))
    sim.add_argument("--truth", choices=("rescaled", "direct"))
    sim.add_argument("--mse-points", dest="mse_points", choices=("grid", "samples"))
    sim.add_argument("--workers", type=int)
    common(sim)
    return p


def load_config(args):
    """Merge the optional JSON config file with explicit flags (flags win)."""
    settings = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                settings = json.load(fh)
        except OSError as exc:
            raise IoError(f"cannot read {args.config}: {exc.strerror or exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config} is not valid JSON: {exc}") from None
        if not isinstance(settings, dict):
            raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(settings) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            settings[key] = value
    return RunConfig(**settings)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return run(load_config(args))
    except SurvWaveError as exc:
        json.dump({"error": exc.kind, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
