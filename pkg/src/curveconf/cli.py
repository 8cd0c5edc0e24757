"""Command-line front end.

Subcommands: fit, boot, band, figures, synth, report. Settings come from an
optional TOML config file (``--config``) with command-line flags taking
precedence. Exit codes: 0 success, 2 input error, 3 numerical/model error,
4 usage or guard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bootstrap as boot
from . import figures as figs
from .dataset import ModelSpec, build_design, read_csv, summarize, to_csv
from .errors import CurveconfError, DataError, DomainError
from .interpret import render_friendly_table, summarize_curve
from .ols import fit
from .report import analytic_intervals, bootstrap_summary, render_report
from .synth import DEFAULT_SEED, DgpParams, generate

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

FORMATS = ("json", "csv", "md", "svg")
EXIT_INPUT, EXIT_MODEL, EXIT_USAGE = 2, 3, 4


class ConfigError(DataError):
    pass


@dataclass
class RunConfig:
    data: Path | None = None
    response: str = "performance"
    focal: str = "turnover"
    quadratic: bool = True
    controls: tuple[str, ...] = ("absenteeism", "mean_age", "region")
    reference: dict[str, float] = field(default_factory=lambda: {"region": 1.0, "absenteeism": 3.8, "mean_age": 28.0})
    resamples: int = 10_000
    seed: int = 0
    skip_budget: float = 0.01
    level: float = 0.95
    grid: int = 100
    grid_range: tuple[float, float] | None = None
    allow_extrapolation: bool = False
    out: Path = Path("out")
    formats: tuple[str, ...] = FORMATS
    workers: int = 1
    spaghetti: int = 5

    def __post_init__(self):
        if self.resamples < 1:
            raise DomainError("resamples must be >= 1")
        if not 0 < self.level < 1:
            raise DomainError("level must lie in (0, 1)")
        if self.grid < 1:
            raise DomainError("grid must have at least one point")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise DomainError(f"unknown output formats: {sorted(bad)}")

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(self.response, self.focal, self.quadratic, tuple(self.controls), self.reference)

    @property
    def plan(self) -> boot.ResamplePlan:
        return boot.ResamplePlan(B=self.resamples, seed=self.seed, skip_budget=self.skip_budget)

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats


# config-file keys and the RunConfig attribute they set
_FILE_KEYS = {
    "data": "data",
    "response": "response",
    "focal": "focal",
    "quadratic": "quadratic",
    "controls": "controls",
    "reference": "reference",
    "resamples": "resamples",
    "seed": "seed",
    "skip_budget": "skip_budget",
    "level": "level",
    "grid": "grid",
    "grid_range": "grid_range",
    "allow_extrapolation": "allow_extrapolation",
    "out": "out",
    "format": "formats",
    "workers": "workers",
    "spaghetti": "spaghetti",
}


def _split(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _parse_ref(items):
    ref = {}
    for item in items:
        if "=" not in item:
            raise DomainError(f"--ref expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            ref[k.strip()] = float(v)
        except ValueError:
            raise DomainError(f"--ref value for {k!r} is not a number: {v!r}") from None
    return ref


def _grid_range(value):
    parts = value if isinstance(value, (list, tuple)) else _split(value)
    try:
        lo, hi = (float(v) for v in parts)
    except (TypeError, ValueError):
        raise DomainError(f"grid range must be two numbers LO,HI, got {value!r}") from None
    if not lo < hi:
        raise DomainError("grid range needs LO < HI")
    return (lo, hi)


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from None
    values = {}
    for key, value in raw.items():
        if key not in _FILE_KEYS:
            raise ConfigError(f"unknown config key {key!r} in {path}")
        values[_FILE_KEYS[key]] = value
    base = path.parent
    for key in ("data", "out"):
        if key in values and not Path(values[key]).is_absolute():
            values[key] = base / values[key]
    return values


def resolve_config(args) -> RunConfig:
    """Defaults, then config file, then command-line flags."""
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    flags = {
        "data": args.data,
        "response": args.response,
        "focal": args.focal,
        "quadratic": args.quadratic,
        "controls": _split(args.controls) if args.controls is not None else None,
        "resamples": args.resamples,
        "seed": args.seed,
        "skip_budget": args.skip_budget,
        "level": args.level,
        "grid": args.grid,
        "grid_range": args.grid_range,
        "allow_extrapolation": True if args.allow_extrapolation else None,
        "out": args.out,
        "formats": _split(args.format) if args.format is not None else None,
        "workers": args.workers,
        "spaghetti": args.spaghetti,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    if args.ref:
        values["reference"] = {**values.get("reference", RunConfig().reference), **_parse_ref(args.ref)}
    if "data" in values:
        values["data"] = Path(values["data"])
    if "out" in values:
        values["out"] = Path(values["out"])
    if "controls" in values:
        values["controls"] = tuple(values["controls"])
    if "formats" in values:
        values["formats"] = tuple(values["formats"])
    if values.get("grid_range") is not None:
        values["grid_range"] = _grid_range(values["grid_range"])
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(f"config value has the wrong type: {exc}") from None


# --- pipeline pieces ---------------------------------------------------------


def _load(cfg: RunConfig):
    if cfg.data is None:
        raise ConfigError("no data file given (use --data or 'data' in the config file)")
    if not cfg.data.exists():
        raise DataError(f"data file not found: {cfg.data}")
    ds = read_csv(cfg.data)
    spec = cfg.spec
    # controls without a reference value are held at their sample mean
    summary = summarize(ds)
    ref = dict(spec.reference)
    for name in spec.controls:
        if name not in ref and name in summary:
            ref[name] = summary[name].mean
    spec = ModelSpec(spec.response, spec.focal, spec.quadratic, spec.controls, ref)
    return ds, spec, summary


def _fit(ds, spec, summary):
    design, y = build_design(ds, spec)
    result = fit(design, y)
    curve = summarize_curve(result, spec, summary, ds.column(spec.focal))
    return result, curve


def _write(path: Path, text: str, written: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    written.append(path)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _grid(cfg: RunConfig, ds, spec):
    focal = ds.column(spec.focal)
    observed = (float(focal.min()), float(focal.max()))
    lo, hi = cfg.grid_range if cfg.grid_range is not None else observed
    grid = np.linspace(lo, hi, cfg.grid) if cfg.grid > 1 else np.array([lo])
    return boot.check_grid(grid, observed, cfg.allow_extrapolation)


def cmd_fit(cfg: RunConfig) -> list[Path]:
    ds, spec, summary = _load(cfg)
    result, curve = _fit(ds, spec, summary)
    table = render_friendly_table(curve, analytic_intervals(result, spec, cfg.level))
    written = []
    if cfg.wants("json"):
        _write(cfg.out / "fit.json", result.to_json() + "\n", written)
        _write(cfg.out / "curve.json", curve.to_json() + "\n", written)
    if cfg.wants("md"):
        _write(cfg.out / "friendly_table.md", table.to_markdown(), written)
    if cfg.wants("csv"):
        _write(cfg.out / "friendly_table.csv", table.to_csv(), written)
    return written


def _run(cfg, ds, spec, result=None):
    return boot.run_bootstrap(ds, spec, cfg.plan, workers=cfg.workers, full_fit=result)


def cmd_boot(cfg: RunConfig) -> list[Path]:
    ds, spec, summary = _load(cfg)
    result, _ = _fit(ds, spec, summary)
    run = _run(cfg, ds, spec, result)
    written = []
    _write(cfg.out / "bootstrap.json", _dump(bootstrap_summary(run, cfg.level)), written)
    if cfg.wants("csv"):
        _write(cfg.out / "bootstrap_coefficients.csv", run.to_csv(), written)
    return written


def cmd_band(cfg: RunConfig) -> list[Path]:
    ds, spec, summary = _load(cfg)
    grid = _grid(cfg, ds, spec)
    result, _ = _fit(ds, spec, summary)
    run = _run(cfg, ds, spec, result)
    band = boot.confidence_band(run, grid, spec.reference, cfg.level, allow_extrapolation=True)
    written = []
    _write(cfg.out / "band.csv", band.to_csv(), written)
    return written


def _figures(cfg, ds, spec, result, run, grid):
    out = {}
    out["fig1"] = figs.scatter_with_curve(ds, result, spec, points=cfg.grid)
    if "region" in spec.controls:
        out["fig2"] = figs.region_curves(ds, result, spec, points=cfg.grid)
    out["fig3"] = figs.spaghetti(run, min(cfg.spaghetti, run.B), result, spec, points=cfg.grid)
    band = boot.confidence_band(run, grid, spec.reference, cfg.level, allow_extrapolation=True)
    out["fig4"] = figs.band_figure(band, ds, spec)
    return out


def cmd_figures(cfg: RunConfig) -> list[Path]:
    ds, spec, summary = _load(cfg)
    grid = _grid(cfg, ds, spec)
    result, _ = _fit(ds, spec, summary)
    run = _run(cfg, ds, spec, result)
    written = []
    for name, figure in _figures(cfg, ds, spec, result, run, grid).items():
        cfg.out.mkdir(parents=True, exist_ok=True)
        written.extend(figure.save(cfg.out / name))
    return written


FIGURE_CAPTIONS = {
    "fig1": "Data and curvilinear prediction at the reference covariates",
    "fig2": "Predictions for the three regions",
    "fig3": "Predictions from the data (bold) and the first resamples",
    "fig4": "Bootstrap confidence band",
}


def cmd_report(cfg: RunConfig) -> list[Path]:
    ds, spec, summary = _load(cfg)
    grid = _grid(cfg, ds, spec) if cfg.wants("svg") else None
    result, curve = _fit(ds, spec, summary)
    run = _run(cfg, ds, spec, result)
    written = []
    refs = []
    if cfg.wants("svg"):
        for name, figure in _figures(cfg, ds, spec, result, run, grid).items():
            cfg.out.mkdir(parents=True, exist_ok=True)
            written.extend(figure.save(cfg.out / name))
            refs.append((FIGURE_CAPTIONS[name], f"{name}.svg"))
    text = render_report(
        data_label=cfg.data.name,
        n=ds.n,
        spec=spec,
        fit=result,
        curve=curve,
        run=run,
        level=cfg.level,
        figures=refs,
    )
    _write(cfg.out / "report.md", text, written)
    return written


def cmd_synth(args) -> list[Path]:
    try:
        lo, mode, hi = (float(v) for v in _split(args.turnover))
        params = DgpParams(
            n=args.n,
            noise_sd=args.noise_sd,
            seed=args.seed if args.seed is not None else DEFAULT_SEED,
            turnover_distribution=(lo, mode, hi),
        )
    except (DomainError, ValueError) as exc:
        raise DataError(f"bad synthetic-data parameters: {exc}") from None
    ds = generate(params)
    out = Path(args.out) if args.out is not None else Path("synthetic.csv")
    if out.suffix != ".csv":
        out = out / "synthetic.csv"
    written = []
    _write(out, to_csv(ds), written)

    turnover = ds.column("turnover")
    below = int(np.sum(turnover < params.optimum))
    line = f"wrote {ds.n} rows to {out}; {below} offices below the true optimum {params.optimum:.2f}"
    if ds.n > 6:
        spec = params.model_spec()
        design, y = build_design(ds, spec)
        line += f"; fitted adjusted R² {fit(design, y).adj_r2:.3f}"
    print(line)
    return written


# --- argument parsing --------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", help="TOML config file; flags override its values")
    p.add_argument("--data", help="input CSV (office_id,performance,turnover,absenteeism,mean_age,region)")
    p.add_argument("--response")
    p.add_argument("--focal")
    p.add_argument("--quadratic", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--controls", help="comma-separated control columns")
    p.add_argument("--ref", action="append", default=[], metavar="K=V", help="reference covariate value")
    p.add_argument("--resamples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--skip-budget", type=float, dest="skip_budget")
    p.add_argument("--level", type=float)
    p.add_argument("--grid", type=int, help="number of grid points for curves and bands")
    p.add_argument("--grid-range", dest="grid_range", help="LO,HI for the band grid")
    p.add_argument("--allow-extrapolation", action="store_true", dest="allow_extrapolation")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", help="comma-separated subset of json,csv,md,svg")
    p.add_argument("--workers", type=int, help="threads used for resampling")
    p.add_argument("--spaghetti", type=int, help="resample curves drawn in fig3")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="curveconf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in [
        ("fit", "OLS fit with analytic confidence intervals and friendly table"),
        ("boot", "bootstrap percentile intervals and confidence levels"),
        ("band", "bootstrap confidence band over a turnover grid"),
        ("figures", "write fig1..fig4 as SVG with CSV sidecars"),
        ("report", "markdown report combining fit, bootstrap and figures"),
    ]:
        _common(sub.add_parser(name, help=help_text))
    synth = sub.add_parser("synth", help="write a synthetic dataset with a known curve")
    synth.add_argument("--n", type=int, default=110)
    synth.add_argument("--noise-sd", type=float, default=DgpParams().noise_sd, dest="noise_sd")
    synth.add_argument("--seed", type=int, default=None, help=f"default {DEFAULT_SEED}")
    synth.add_argument("--turnover", default="3,10,25", help="MIN,MODE,MAX of the triangular turnover draw")
    synth.add_argument("--out", help="output CSV path or directory")
    return parser


COMMANDS = {"fit": cmd_fit, "boot": cmd_boot, "band": cmd_band, "figures": cmd_figures, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        if args.command == "synth":
            cmd_synth(args)
        else:
            COMMANDS[args.command](resolve_config(args))
    except CurveconfError as exc:
        print(f"curveconf {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"curveconf {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
