"""Command-line driver.

Usage::

    libor-wvf SUBCOMMAND [--config FILE] [--key value ...]

Subcommands: ``simulate``, ``detrend``, ``wvf``, ``correlate``, ``calibrate``,
``evolve``, ``report``.  Settings come from a ``key = value`` file (``#``
starts a comment) and are overridden by command-line flags of the same name
(``threshold_sigmas`` <-> ``--threshold-sigmas``).  CDS inputs for the
credit-controlled detrending are given as ``cds.<entity> = path`` keys or
``--cds ENTITY=PATH`` flags.

Every stage writes its files plus ``<stage>.manifest.json`` into
``output_dir``.  Seeds: the master ``seed`` is expanded into per-stage seeds
with :func:`libor_wvf.fixing.derive_seed` (``simulate`` uses key 1,
``calibrate`` key 2); nothing else draws random numbers.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .aliasing import densitogram, gaussian_smooth, threshold_alias
from .correlation import METHODS, SUPPORTS, DetectorConfig, detector, null_calibration
from .detrend import (
    detrend_benchmark,
    detrend_with_credit,
    extensive_table,
    fit_credit_proxy,
    read_regression_report,
    regression_report_csv,
)
from .dynamics import DiffusionGenerator, WignerField, diffusion_reduction_check, evolve, max_stable_dt
from .errors import ConfigError, DataError, NumericError
from .export import dumps_json, grid_to_csv, heatmap, image_to_pgm
from .fixing import CollusionSpec, derive_seed, synthesize_panel
from .panel import PanelSeries, align, panel_to_csv, parse_cds_csv, parse_panel_csv
from .wvf import auto_wvf, lag_covariance

logger = logging.getLogger("libor_wvf")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
STAGE_KEYS = {"simulate": 1, "calibrate": 2}
SUBCOMMANDS = ("simulate", "detrend", "wvf", "correlate", "calibrate", "evolve", "report")


@dataclass
class RunConfig:
    output_dir: str = "out"
    seed: int = 0
    # inputs
    panel_path: str = ""
    residuals_path: str = ""
    regression_path: str = ""
    benchmark: str = "LIBOR"
    cds_paths: dict = field(default_factory=dict)
    # detrend / wvf / correlate
    detrend_mode: str = "eq2"
    entities: str = ""
    threshold_sigmas: float = 2.03
    rigid_threshold_sigmas: float = 4.06
    smoothing_sigma: float = 2.0
    method: str = "wvf_modulus"
    support: str = "all"
    wvf_complex: bool = False
    # simulate
    n_entities: int = 18
    n_days: int = 313
    colluders: str = ""
    shared_factor_sigma: float = 0.0
    idio_sigma: float = 0.01
    ar1_rho: float = 0.0
    shock: str = "gaussian"
    levy_alpha: float = 2.0
    initial_rate: float = 0.4
    # calibrate
    null_model: str = "gaussian"
    null_alpha: float = 2.0
    null_series: int = 6
    null_days: int = 313
    null_trials: int = 100
    null_cumulative: bool = False
    # evolve
    x_min: float = -10.0
    x_max: float = 10.0
    nx: int = 161
    p_min: float = -4.0
    p_max: float = 4.0
    np_: int = 81
    diff_a: float = 0.5
    drift_slope: float = 0.0
    rate_c: float = 0.0
    rate_curvature: float = 0.0
    x0_sigma: float = 1.0
    p0_sigma: float = 1.0
    t_final: float = 1.0
    dt: float = 0.0

    def validate(self):
        positive = ("threshold_sigmas", "rigid_threshold_sigmas", "smoothing_sigma", "x0_sigma",
                    "p0_sigma", "t_final")
        for key in positive:
            if getattr(self, key) <= 0:
                raise ConfigError(key, "must be positive")
        for key in ("shared_factor_sigma", "idio_sigma", "dt", "diff_a", "rate_curvature"):
            if getattr(self, key) < 0:
                raise ConfigError(key, "must be non-negative")
        if not 0 <= self.ar1_rho < 1:
            raise ConfigError("ar1_rho", "must lie in [0, 1)")
        for key, low in (("n_entities", 9), ("n_days", 2), ("null_series", 2), ("null_days", 2),
                         ("null_trials", 1), ("nx", 5), ("np_", 5)):
            if getattr(self, key) < low:
                raise ConfigError(key, f"must be >= {low}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        choices = {
            "detrend_mode": ("eq2", "eq3"),
            "method": METHODS,
            "support": SUPPORTS,
            "shock": ("gaussian", "levy"),
            "null_model": ("gaussian", "levy"),
        }
        for key, allowed in choices.items():
            if getattr(self, key) not in allowed:
                raise ConfigError(key, f"must be one of {', '.join(allowed)}")
        for key in ("levy_alpha", "null_alpha"):
            if not 0 < getattr(self, key) <= 2:
                raise ConfigError(key, "must lie in (0, 2]")
        if self.x_max <= self.x_min:
            raise ConfigError("x_max", "must exceed x_min")
        if self.p_max <= self.p_min:
            raise ConfigError("p_max", "must exceed p_min")
        return self

    def hashable(self):
        d = dataclasses.asdict(self)
        d.pop("output_dir")
        return d

    def sha256(self):
        return hashlib.sha256(json.dumps(self.hashable(), sort_keys=True).encode()).hexdigest()


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _flag_name(key):
    return "--" + key.rstrip("_").replace("_", "-") if key != "np_" else "--np"


def _coerce(key, raw):
    kind = _FIELDS[key].type
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as {kind}") from None
    return raw


def parse_config_text(text):
    """Parse ``key = value`` lines into a dict of typed values."""
    values = {}
    cds = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key.startswith("cds."):
            cds[key[4:]] = raw
            continue
        if key == "np":
            key = "np_"
        if key not in _FIELDS or key == "cds_paths":
            raise ConfigError(key, "unknown key")
        values[key] = _coerce(key, raw)
    if cds:
        values["cds_paths"] = cds
    return values


def build_parser():
    class _Parser(argparse.ArgumentParser):
        def error(self, message):
            self.print_usage(sys.stderr)
            self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")

    parser = _Parser(prog="libor-wvf", description="Wigner-Ville screening of benchmark-rate panels.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value settings file")
        p.add_argument("--cds", action="append", default=[], metavar="ENTITY=PATH")
        for key in _FIELDS:
            if key == "cds_paths":
                continue
            p.add_argument(_flag_name(key), dest=key, default=None, metavar="VALUE")
    return parser


def resolve_config(args):
    """Defaults, then config file, then flags."""
    values = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError("config", f"file {path} not found")
        values.update(parse_config_text(path.read_text(encoding="utf-8")))
    for key in _FIELDS:
        raw = getattr(args, key, None)
        if raw is not None:
            values[key] = _coerce(key, raw)
    if args.cds:
        cds = dict(values.get("cds_paths", {}))
        for item in args.cds:
            if "=" not in item:
                raise ConfigError("cds", f"expected ENTITY=PATH, got {item!r}")
            entity, path = item.split("=", 1)
            cds[entity.strip()] = path.strip()
        values["cds_paths"] = cds
    return RunConfig(**values).validate()


def _read_input(cfg, key):
    path = getattr(cfg, key)
    if not path:
        raise ConfigError(key, "required by this subcommand")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(key, f"file {p} not found")
    return p.read_text(encoding="utf-8")


def _slug(label):
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_") or "entity"


def _selected(cfg, available):
    if not cfg.entities:
        return list(available)
    wanted = [e.strip() for e in cfg.entities.split(",") if e.strip()]
    missing = [e for e in wanted if e not in available]
    if missing:
        raise ConfigError("entities", f"unknown entities {missing}")
    return wanted


def stage_simulate(cfg):
    colluders = [int(c) for c in cfg.colluders.split(",") if c.strip()] if cfg.colluders else []
    spec = CollusionSpec(
        colluders=colluders,
        shared_factor_sigma=cfg.shared_factor_sigma,
        idio_sigma=cfg.idio_sigma,
        ar1_rho=cfg.ar1_rho,
        seed=derive_seed(cfg.seed, STAGE_KEYS["simulate"]),
        shock=cfg.shock,
        levy_alpha=cfg.levy_alpha,
    )
    panel = synthesize_panel(cfg.n_entities, cfg.n_days, spec, initial_rate=cfg.initial_rate)
    info = {
        "colluders": sorted(spec.colluders),
        "colluder_labels": [panel.entities[i] for i in sorted(spec.colluders)],
        "shared_factor_sigma": spec.shared_factor_sigma,
        "idio_sigma": spec.idio_sigma,
        "ar1_rho": spec.ar1_rho,
        "shock": spec.shock,
        "levy_alpha": spec.levy_alpha,
        "stage_seed": spec.seed,
    }
    return {"panel.csv": panel_to_csv(panel), "simulation.json": dumps_json(info)}


def _residual_panel(panel, results):
    return PanelSeries(
        dates=panel.dates,
        entities=[r.entity for r in results],
        values=np.column_stack([r.residuals for r in results]),
    )


def stage_detrend(cfg):
    panel = parse_panel_csv(_read_input(cfg, "panel_path"), cfg.benchmark)
    if panel.n_filled:
        logger.info("carried forward %d missing cells", panel.n_filled)
    out = {}
    if cfg.detrend_mode == "eq2":
        results = detrend_benchmark(panel)
    else:
        if not cfg.cds_paths:
            raise ConfigError("cds_paths", "eq3 detrending needs at least one cds.<entity> input")
        series = []
        for entity, path in cfg.cds_paths.items():
            if entity not in panel.members:
                raise ConfigError(f"cds.{entity}", "entity not in panel")
            p = Path(path)
            if not p.is_file():
                raise ConfigError(f"cds.{entity}", f"file {p} not found")
            series.append(parse_cds_csv(p.read_text(encoding="utf-8"), entity))
        for cds in series:
            panel, _ = align(panel, cds)
        proxies = {}
        credit_rows = ["entity,alpha_credit,se_alpha_credit,beta_credit,se_beta_credit,r_squared"]
        for cds in series:
            _, cds = align(panel, cds)
            proxy = fit_credit_proxy(cds)
            proxies[cds.entity] = proxy
            credit_rows.append(",".join([
                cds.entity, *(repr(v) for v in (proxy.alpha_credit, proxy.se_alpha_credit,
                                                 proxy.beta_credit, proxy.se_beta_credit, proxy.r_squared))
            ]))
        results = detrend_with_credit(panel, proxies)
        out["credit_proxy.csv"] = "\n".join(credit_rows) + "\n"
    out["regression.csv"] = regression_report_csv(results)
    out["residuals.csv"] = panel_to_csv(_residual_panel(panel, results))
    return out


def stage_wvf(cfg):
    residuals = parse_panel_csv(_read_input(cfg, "residuals_path"), None)
    out = {}
    for label in _selected(cfg, residuals.entities):
        slug = _slug(label)
        x = residuals.column(label)
        w = auto_wvf(x)
        modulus = w.modulus()
        out[f"wvf_{slug}_modulus.csv"] = grid_to_csv(modulus)
        if cfg.wvf_complex:
            out[f"wvf_{slug}_real.csv"] = grid_to_csv(w.values.real)
            out[f"wvf_{slug}_imag.csv"] = grid_to_csv(w.values.imag)
        aliased = threshold_alias(modulus, cfg.threshold_sigmas)
        rigid = threshold_alias(modulus, cfg.rigid_threshold_sigmas)
        smoothed = gaussian_smooth(aliased, cfg.smoothing_sigma)
        cov = threshold_alias(lag_covariance(x, x).values.real, cfg.threshold_sigmas)
        out[f"wvf_{slug}_aliased.pgm"] = image_to_pgm(densitogram(aliased), f"{label} |WVF| > {cfg.threshold_sigmas} sd")
        out[f"wvf_{slug}_aliased.csv"] = grid_to_csv(densitogram(aliased))
        out[f"wvf_{slug}_rigid.pgm"] = image_to_pgm(densitogram(rigid), f"{label} |WVF| > {cfg.rigid_threshold_sigmas} sd")
        out[f"wvf_{slug}_smoothed.csv"] = grid_to_csv(smoothed)
        out[f"wvf_{slug}_smoothed.pgm"] = image_to_pgm(heatmap(smoothed), f"{label} smoothed, sigma {cfg.smoothing_sigma}")
        out[f"cov_{slug}_aliased.pgm"] = image_to_pgm(densitogram(cov), f"{label} lag products > {cfg.threshold_sigmas} sd")
        meta = w.sidecar()
        meta.update({
            "entity": label,
            "threshold_sigmas": cfg.threshold_sigmas,
            "rigid_threshold_sigmas": cfg.rigid_threshold_sigmas,
            "array_std": aliased.array_std,
            "surviving_fraction": aliased.fraction,
            "rigid_surviving_fraction": rigid.fraction,
            "smoothing_sigma": cfg.smoothing_sigma,
        })
        out[f"wvf_{slug}.json"] = dumps_json(meta)
    return out


def stage_correlate(cfg):
    residuals = parse_panel_csv(_read_input(cfg, "residuals_path"), None)
    labels = _selected(cfg, residuals.entities)
    config = DetectorConfig(cfg.method, cfg.threshold_sigmas, cfg.support)
    corr = detector([residuals.column(e) for e in labels], config, labels=labels)
    return {"correlation.csv": corr.to_csv()}


def stage_calibrate(cfg):
    config = DetectorConfig(cfg.method, cfg.threshold_sigmas, cfg.support)
    summary = null_calibration(
        cfg.null_series, cfg.null_days, cfg.null_model, cfg.null_trials,
        seed=derive_seed(cfg.seed, STAGE_KEYS["calibrate"]), alpha=cfg.null_alpha,
        config=config, cumulative=cfg.null_cumulative,
    )
    d = summary.to_dict()
    d.update({"method": cfg.method, "threshold_sigmas": cfg.threshold_sigmas, "support": cfg.support})
    return {"calibration.json": dumps_json(d)}


def stage_evolve(cfg):
    x = np.linspace(cfg.x_min, cfg.x_max, cfg.nx)
    p = np.linspace(cfg.p_min, cfg.p_max, cfg.np_)
    field0 = WignerField.separable(
        x, p,
        lambda v: np.exp(-v**2 / (2 * cfg.x0_sigma**2)),
        lambda v: np.exp(-v**2 / (2 * cfg.p0_sigma**2)),
    )
    curvature = cfg.rate_curvature
    gen = DiffusionGenerator(
        a=cfg.diff_a,
        b=(lambda v: cfg.drift_slope * v) if cfg.drift_slope else 0.0,
        c=(lambda v: cfg.rate_c + 0.5 * curvature * v**2) if curvature else cfg.rate_c,
        db=cfg.drift_slope if cfg.drift_slope else None,
        d2c=curvature if curvature else None,
    )
    dt_max = max_stable_dt(field0, gen)
    dt = cfg.dt if cfg.dt > 0 else min(dt_max, cfg.t_final)
    n_steps = int(np.ceil(cfg.t_final / dt - 1e-12))
    dt = cfg.t_final / n_steps
    final = evolve(field0, gen, dt, n_steps)
    report = {"dt": dt, "n_steps": n_steps, "t_final": final.t, "dt_limit": dt_max}
    if gen.has_constant_drift_and_rate:
        report.update(diffusion_reduction_check(field0, gen, dt, n_steps).to_dict())
    return {
        "field_final.csv": grid_to_csv(final.values),
        "field_final.pgm": image_to_pgm(heatmap(final.values), f"W[p, x] at t={final.t:g}"),
        "evolve.json": dumps_json(report),
    }


def stage_report(cfg):
    rows = read_regression_report(_read_input(cfg, "regression_path"))
    with_theta = any(r["theta"] is not None for r in rows)
    name = "regression_table_credit.csv" if with_theta else "regression_table.csv"
    return {name: extensive_table(rows, with_theta=with_theta)}


STAGES = {
    "simulate": stage_simulate,
    "detrend": stage_detrend,
    "wvf": stage_wvf,
    "correlate": stage_correlate,
    "calibrate": stage_calibrate,
    "evolve": stage_evolve,
    "report": stage_report,
}


def write_outputs(stage, cfg, files):
    """Write stage files and the manifest; returns the manifest dict."""
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for name in sorted(files):
        data = files[name].encode("utf-8")
        (out_dir / name).write_bytes(data)
        entries.append({"path": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
    manifest = {
        "stage": stage,
        "version": __version__,
        "config_sha256": cfg.sha256(),
        "seed": cfg.seed,
        "stage_seed": derive_seed(cfg.seed, STAGE_KEYS[stage]) if stage in STAGE_KEYS else None,
        "outputs": entries,
    }
    (out_dir / f"{stage}.manifest.json").write_text(dumps_json(manifest), encoding="utf-8")
    return manifest


def run(command, cfg):
    files = STAGES[command](cfg)
    return write_outputs(command, cfg, files)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        manifest = run(args.command, cfg)
    except ConfigError as exc:
        print(f"libor-wvf: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"libor-wvf: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"libor-wvf: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for entry in manifest["outputs"]:
        logger.info("wrote %s", entry["path"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
