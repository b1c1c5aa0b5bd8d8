"""Command-line drivers: ``zenga surface|estimate|simulate|slices``.

Exit codes: 0 on success, 2 for invalid input, 3 when a computation fails
numerically.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import cli_io
from .errors import CapabilityError, ConditioningError, DomainError, ValidationError, ZengaError
from .estimator import estimate_surface
from .grid import Measure
from .models import DegenerateModel, LognormalModel, LognormalParams, ParetoShifted, ParetoUnit, PowerModel
from .numerics import DEFAULT_TOL, QuantilePoint, Tolerance
from .simulation import McConfig, qualitative_check, reference_truth, run_replications, summaries_to_csv
from .surfaces import evaluate_surface

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

MODELS = {
    "pareto-shifted": ParetoShifted,
    "pareto-unit": ParetoUnit,
    "power": PowerModel,
    "degenerate": DegenerateModel,
    "lognormal": lambda **kw: LognormalModel(LognormalParams(**kw)),
}

_EXT = {"json": "json", "csv_long": "csv"}


def parse_grid(text: str | None) -> tuple[float, ...]:
    """``0.2,0.5,0.8`` or an inclusive range ``start:stop:step``; ``None`` gives 0.2..0.8 by 0.1."""
    if text is None:
        return cli_io.DEFAULT_LEVELS
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            k = int(np.floor((stop - start) / step + 1e-9))
            levels = tuple(round(start + i * step, 10) for i in range(k + 1))
        else:
            levels = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ValidationError(f"bad --grid {text!r}: {exc}") from None
    if not levels:
        raise ValidationError("--grid has no levels")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValidationError("--grid levels must be strictly increasing")
    return levels


def parse_params(text: str | None) -> dict[str, float]:
    """A JSON object or ``key=value`` pairs separated by commas."""
    if not text:
        return {}
    text = text.strip()
    if text.startswith("{"):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad --params JSON: {exc}") from None
    else:
        d = {}
        for item in text.split(","):
            if "=" not in item:
                raise ValidationError(f"bad --params item {item!r}; expected key=value")
            k, v = item.split("=", 1)
            d[k.strip()] = v.strip()
    try:
        return {k: float(v) for k, v in d.items()}
    except (TypeError, ValueError):
        raise ValidationError(f"--params values must be numbers: {d}") from None


def build_model(name: str, params: dict[str, float]):
    if name not in MODELS:
        raise ValidationError(f"unknown model {name!r}; choose from {sorted(MODELS)}")
    try:
        return MODELS[name](**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {name}: {exc}") from None


def _tolerance(tol: float | None) -> Tolerance:
    if tol is None:
        return DEFAULT_TOL
    return Tolerance(tol, max(DEFAULT_TOL.rel_tol, tol))


def _say(cfg: cli_io.RunConfig, msg: str) -> None:
    if not cfg.quiet:
        print(msg)


def _level_tag(u: float) -> str:
    return f"{u:g}"


def run_surface(args, cfg: cli_io.RunConfig) -> None:
    model = build_model(args.model, parse_params(args.params))
    tol = _tolerance(cfg.tol)
    grid = evaluate_surface(model, args.measure, cfg.levels, tol=tol)
    path = cli_io.emit_surface(grid, cfg.fmt, cfg.out / f"surface_{grid.measure.value}.{_EXT[cfg.fmt]}")
    _say(cfg, f"wrote {path}")


def run_estimate(args, cfg: cli_io.RunConfig) -> None:
    if args.data is None:
        spec = cli_io.DatasetSpec(cli_io.fixture_path(), args.x1_col or cli_io.FIXTURE_X1, args.x2_col or cli_io.FIXTURE_X2)
    else:
        if args.x1_col is None or args.x2_col is None:
            raise ValidationError("--x1-col and --x2-col are required with --data")
        spec = cli_io.DatasetSpec(args.data, args.x1_col, args.x2_col)
    sample = cli_io.load_dataset(spec)
    if args.rescale:
        sample, scales = cli_io.rescale_unit(sample)
        cli_io.write_text(cfg.out / "scales.json", json.dumps({"x1": scales[0], "x2": scales[1]}, sort_keys=True) + "\n")
    grid = estimate_surface(sample, cfg.levels)
    if grid.n_missing == 2 * grid.values.size:
        raise ConditioningError(f"no grid cell could be estimated from {sample.n} rows: {grid.meta['failures']}")
    written = [cli_io.emit_surface(grid, cfg.fmt, cfg.out / f"surface_VBZC.{_EXT[cfg.fmt]}")]
    summary_levels = [u for u in cli_io.SUMMARY_LEVELS if np.any(np.abs(np.asarray(cfg.levels) - u) <= 1e-12)]
    if summary_levels:
        rows = cli_io.summary_rows(grid, summary_levels)
        written.append(cli_io.write_text(cfg.out / "summary_3x3.csv", cli_io.summary_to_csv(rows)))
        for fix in ("u1", "u2"):
            for at in summary_levels:
                s = grid.slice(fix, at)
                written.append(cli_io.write_text(cfg.out / f"slice_{fix}_{_level_tag(at)}.csv", cli_io.slice_to_csv(s)))
    _say(cfg, f"n={sample.n}, missing cells={grid.n_missing}")
    for p in written:
        _say(cfg, f"wrote {p}")


def _mc_config(path: str | None, seed: int | None) -> McConfig:
    raw: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ValidationError(f"config not found: {p}")
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad config JSON: {exc}") from None
    allowed = {"dgp", "points", "sizes", "replications", "master_seed", "oracle_n", "oracle_seed", "workers"}
    unknown = set(raw) - allowed
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    kw = dict(raw)
    if "dgp" in kw:
        kw["dgp"] = LognormalParams(**kw["dgp"])
    if "points" in kw:
        kw["points"] = tuple(QuantilePoint(*p) for p in kw["points"])
    if "sizes" in kw:
        kw["sizes"] = tuple(kw["sizes"])
    if seed is not None:
        kw["master_seed"] = seed
    try:
        return McConfig(**kw)
    except TypeError as exc:
        raise ValidationError(f"bad config: {exc}") from None


def run_simulate(args, cfg: cli_io.RunConfig) -> None:
    config = _mc_config(args.config, args.seed)
    truths = [reference_truth(config.dgp, p, config.oracle_n, config.resolved_oracle_seed) for p in config.points]
    rows = run_replications(config, truths)
    path = cli_io.write_text(cfg.out / "simulation.csv", summaries_to_csv(rows))
    meta = {
        "dgp": dataclasses.asdict(config.dgp) if dataclasses.is_dataclass(config.dgp) else repr(config.dgp),
        "master_seed": config.master_seed,
        "oracle_n": config.oracle_n,
        "oracle_seed": config.resolved_oracle_seed,
        "replications": config.replications,
        "sizes": list(config.sizes),
        "truths": [{"u1": p.u1, "u2": p.u2, "i12": t[0], "i21": t[1]} for p, t in zip(config.points, truths)],
    }
    cli_io.write_text(cfg.out / "simulation_meta.json", json.dumps(meta, sort_keys=True, indent=1) + "\n")
    report = qualitative_check(rows)
    check = {f"{a:g},{b:g}": v for (a, b), v in report.items()}
    cli_io.write_text(cfg.out / "simulation_check.json", json.dumps(check, sort_keys=True, indent=1) + "\n")
    _say(cfg, f"wrote {path}")


def run_slices(args, cfg: cli_io.RunConfig) -> None:
    grid = cli_io.load_surface(args.surface)
    try:
        s = grid.slice(args.fix, args.at)
    except DomainError as exc:
        raise ValidationError(str(exc)) from None
    path = cli_io.write_text(cfg.out / f"slice_{args.fix}_{_level_tag(s.at)}.csv", cli_io.slice_to_csv(s))
    _say(cfg, f"wrote {path}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="zenga_out", help="output directory (created if missing)")
    common.add_argument("--format", choices=("json", "csv_long"), default="json", help="surface file format")
    common.add_argument("--tol", type=float, default=None, help="absolute quadrature tolerance")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")

    parser = argparse.ArgumentParser(prog="zenga", description="Bivariate Zenga surfaces and curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("surface", parents=[common], help="evaluate a parametric surface on a grid")
    p.add_argument("--model", required=True, choices=sorted(MODELS))
    p.add_argument("--params", default=None, help="JSON object or key=value,... (e.g. alpha=3)")
    p.add_argument("--measure", default="I", choices=[m.value for m in Measure])
    p.add_argument("--grid", default=None, help="levels: a,b,c or start:stop:step (default 0.2:0.8:0.1)")
    p.set_defaults(run=run_surface)

    p = sub.add_parser("estimate", parents=[common], help="estimate the VBZC surface from a CSV file")
    p.add_argument("--data", default=None, help="CSV with a header row (default: shipped synthetic fixture)")
    p.add_argument("--x1-col", default=None)
    p.add_argument("--x2-col", default=None)
    p.add_argument("--grid", default=None)
    p.add_argument("--rescale", action="store_true", help="divide each column by its maximum first")
    p.set_defaults(run=run_estimate)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo bias and MSE of the estimators")
    p.add_argument("--config", default=None, help="JSON file with McConfig fields")
    p.add_argument("--seed", type=int, default=None, help="overrides master_seed")
    p.set_defaults(run=run_simulate)

    p = sub.add_parser("slices", parents=[common], help="extract one slice from a saved surface")
    p.add_argument("--surface", required=True, help="surface file written by surface or estimate")
    p.add_argument("--fix", required=True, choices=("u1", "u2"))
    p.add_argument("--at", required=True, type=float)
    p.set_defaults(run=run_slices)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = cli_io.RunConfig(
            out=Path(args.out),
            fmt=args.format,
            levels=parse_grid(getattr(args, "grid", None)),
            tol=args.tol,
            quiet=args.quiet,
        )
        cfg.out.mkdir(parents=True, exist_ok=True)
        args.run(args, cfg)
    except (ValidationError, DomainError, CapabilityError, OSError) as exc:
        print(f"zenga: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ZengaError as exc:
        print(f"zenga: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
