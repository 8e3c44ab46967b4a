# function: command-line entry point (verify / scan / list / describe)
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Literal, Sequence

from pydantic import BaseModel, ValidationError, field_validator, model_validator
from rich.console import Console
from rich.table import Table

from bitensionlab.catalog import EXAMPLES, FAMILY_PARAMS, ExampleSpec, confirm_expected, corollary_assertions, get_example
from bitensionlab.catalog.specfile import load_spec_file
from bitensionlab.config import load_settings
from bitensionlab.errors import BitensionError, CheckNotApplicable
from bitensionlab.utils.logger import setup_logger
from bitensionlab.verify import (
    CHECKS,
    CheckOptions,
    QuadratureGrid,
    ResidualReport,
    Verdict,
    check_hilbert,
    check_lemma,
    check_prop2,
    check_prop3_bound,
    check_s2form,
    check_tau2,
    check_thm1,
    check_thm2,
    check_thm3,
    parse_grid,
    point_grid,
    reports_to_csv,
    reports_to_json,
    scan_family,
    skipped_report,
)

logger = logging.getLogger("bitensionlab.cli")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

Command = Literal["verify", "scan", "list", "describe"]
OutputFormat = Literal["json", "csv", "text"]


# ───────────── run configuration ─────────────


class RunConfig(BaseModel):
    command: Command
    example: str | None = None
    spec_path: Path | None = None
    params: dict[str, float] = {}
    checks: list[str] = list(CHECKS)
    grid: tuple[int, int] = (24, 24)
    quad_grid: tuple[int, int] = (32, 32)
    jet_order: int | None = None
    tol_factor: float = 1.0
    k0: float | None = None
    synthetic: list[str] | None = None
    out: Path | None = None
    fmt: OutputFormat = "json"
    threads: int | None = None
    expected: bool = False
    as_json: bool = False
    # scan
    scan_param: str | None = None
    scan_range: tuple[float, float] | None = None
    samples: int = 64
    residual: str = "tau2"

    @field_validator("checks", mode="before")
    def _split_checks(cls, v):
        if isinstance(v, str):
            v = [c.strip() for c in v.split(",") if c.strip()]
        if v == ["all"] or not v:
            return list(CHECKS)
        unknown = [c for c in v if c not in CHECKS]
        if unknown:
            raise ValueError(f"unknown checks {unknown}; choose from {', '.join(CHECKS)}")
        return v

    @field_validator("grid", "quad_grid", mode="before")
    def _parse_grid(cls, v):
        return parse_grid(v) if isinstance(v, str) else v

    @field_validator("scan_range", mode="before")
    def _parse_range(cls, v):
        if isinstance(v, str):
            lo, sep, hi = v.partition(":")
            if not sep:
                raise ValueError(f"range must look like lo:hi, got {v!r}")
            return float(lo), float(hi)
        return v

    @field_validator("tol_factor")
    def _positive_tol(cls, v):
        if not v > 0.0:
            raise ValueError(f"tolerance factor must be positive, got {v}")
        return v

    @model_validator(mode="after")
    def _check_orders(self):
        if self.jet_order is not None:
            if not 2 <= self.jet_order <= 5:
                raise ValueError(f"jet order must be in [2, 5], got {self.jet_order}")
            if self.command == "verify":
                low = [c for c in self.checks if CHECKS[c].required_order > self.jet_order]
                if low:
                    raise ValueError(f"jet order {self.jet_order} is below the minimum of {low}")
        if self.command in ("verify", "scan") and not (self.example or self.spec_path):
            raise ValueError(f"{self.command} needs an example name or --spec")
        if self.command == "scan" and self.spec_path is not None:
            raise ValueError("scan needs a built-in family, not a spec file")
        return self


def _parse_value(text: str) -> float:
    low = text.strip().lower()
    if low in {"true", "false"}:
        return 1.0 if low == "true" else 0.0
    return float(text)


def _parse_params(items: Sequence[str] | None) -> dict[str, float]:
    params: dict[str, float] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"parameter must look like name=value, got {item!r}")
        params[key.strip()] = _parse_value(value)
    return params


# ───────────── argument parsing ─────────────


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    p = argparse.ArgumentParser(prog="bitension-lab", description="Numerical verification of biharmonic identities")
    p.add_argument("--log-level", default=None, help="console log level (default: LOG_LEVEL or INFO)")
    p.add_argument("--log-dir", default=None, help="write CSV logs under this directory")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run identity checks on an example or spec file")
    v.add_argument("example", nargs="?", help="built-in example name")
    v.add_argument("--spec", dest="spec_path", help="spec file (.bls, .toml, .yaml, .json)")
    v.add_argument("--param", action="append", help="example parameter, e.g. r=0.70710678")
    v.add_argument("--checks", default="all", help="all or a comma list of " + ", ".join(CHECKS))
    v.add_argument("--grid", default="24x24", help="pointwise sample grid")
    v.add_argument("--quad-grid", default="32x32", help="quadrature grid for integral checks; checked against its doubling")
    v.add_argument("--jet-order", type=int, default=None)
    v.add_argument("--tol", type=float, default=1.0, help="tolerance factor")
    v.add_argument("--k0", type=float, default=None, help="ambient curvature bound for prop3")
    v.add_argument("--synthetic", default=None, help="S11,S12,S22 expressions for the thm1 parts check")
    v.add_argument("--threads", type=int, default=None)
    v.add_argument("--expected", action="store_true", help="also confirm the example's expected properties")
    v.add_argument("--out", default=None)
    v.add_argument("--format", dest="fmt", choices=("json", "csv", "text"), default="json")

    s = sub.add_parser("scan", help="scan a one-parameter family")
    s.add_argument("example")
    s.add_argument("--param", dest="scan_param", default=None, help="parameter to scan")
    s.add_argument("--set", dest="fixed", action="append", help="fixed parameter, e.g. seed=3")
    s.add_argument("--range", dest="scan_range", required=True, help="lo:hi")
    s.add_argument("--samples", type=int, default=64)
    s.add_argument("--residual", default="tau2", choices=("tau2", "tau2_l2", "prop2"))
    s.add_argument("--grid", default="6x6")
    s.add_argument("--jet-order", type=int, default=None)
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--out", default=None)

    ls = sub.add_parser("list", help="list catalog examples")
    ls.add_argument("--json", dest="as_json", action="store_true")

    d = sub.add_parser("describe", help="describe a check")
    d.add_argument("check", nargs="?")
    return p.parse_args(argv)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    raw = {k: v for k, v in vars(args).items() if v is not None and k not in {"log_level", "log_dir", "param", "fixed", "check"}}
    if args.command == "verify":
        raw["params"] = _parse_params(args.param)
        if args.synthetic:
            raw["synthetic"] = [c.strip() for c in args.synthetic.split(",")]
        raw["tol_factor"] = raw.pop("tol", 1.0)
    if args.command == "scan":
        raw["params"] = _parse_params(args.fixed)
    if args.command == "describe" and args.check:
        raw["example"] = args.check
    return RunConfig.model_validate(raw)


# ───────────── verify ─────────────


def _resolve(cfg: RunConfig) -> ExampleSpec:
    if cfg.spec_path is not None:
        return load_spec_file(cfg.spec_path)
    assert cfg.example is not None
    return get_example(cfg.example, **cfg.params)


def _run_check(name: str, spec: ExampleSpec, cfg: RunConfig, opts: CheckOptions) -> ResidualReport:
    phi = spec.immersion
    info = CHECKS[name]
    if info.immersion_only and not phi.is_immersion:
        return skipped_report(name, spec.label, "applies to immersions only")
    grid = point_grid(phi.domain, *cfg.grid)
    try:
        if name == "tau2":
            return check_tau2(phi, grid, opts)
        if name == "hilbert":
            return check_hilbert(phi, grid, opts)
        if name == "lemma":
            return check_lemma(phi, grid, opts)
        if name == "prop2":
            return check_prop2(phi, grid, opts)
        if name == "thm1":
            quad = QuadratureGrid.for_domain(phi.domain, *cfg.quad_grid)
            return check_thm1(phi, quad, opts, synthetic=cfg.synthetic)
        if name == "thm2":
            return check_thm2(phi, grid, opts)
        if name == "thm3":
            return check_thm3(phi, grid, opts)
        if name == "prop3":
            k0 = cfg.k0 if cfg.k0 is not None else phi.ambient.curvature
            if k0 is None or k0 <= 0.0:
                return skipped_report(name, spec.label, "no positive ambient curvature bound; pass --k0")
            return check_prop3_bound(phi, grid, k0, opts)
        return check_s2form(phi, grid, opts)
    except CheckNotApplicable as exc:
        logger.info("%s skipped on %s: %s", name, spec.label, exc)
        return skipped_report(name, spec.label, str(exc), grid=grid.label)


def _summary_table(reports: Sequence[ResidualReport]) -> Table:
    table = Table(title="bitension-lab")
    for col in ("check", "example", "grid", "order", "max residual", "tolerance", "verdict"):
        table.add_column(col)
    style = {Verdict.PASS: "green", Verdict.FAIL: "red", Verdict.DEGENERATE: "yellow", Verdict.SKIPPED: "dim"}
    for r in reports:
        table.add_row(
            r.check,
            r.example,
            r.grid,
            str(r.jet_order),
            f"{r.max_residual:.3e}",
            f"{r.tolerance:.1e}",
            f"[{style[r.verdict]}]{r.verdict.value}[/]",
        )
    return table


def _render_text(reports: Sequence[ResidualReport]) -> str:
    lines = []
    for r in reports:
        lines.append(f"{r.check} {r.example} {r.grid} order={r.jet_order} max={r.max_residual!r} tol={r.tolerance!r} {r.verdict.value}")
        lines.extend(f"  note: {n}" for n in r.notes)
    return "\n".join(lines) + "\n"


def run_verify(cfg: RunConfig, console: Console) -> int:
    spec = _resolve(cfg)
    opts = CheckOptions(jet_order=cfg.jet_order, tol_factor=cfg.tol_factor, threads=cfg.threads, settings=load_settings())
    reports = [_run_check(name, spec, cfg, opts) for name in cfg.checks]
    failed = any(r.verdict is Verdict.FAIL for r in reports)

    meta: dict = {"example": spec.label, "params": dict(spec.immersion.params)}
    if cfg.expected:
        grid = point_grid(spec.domain, *cfg.grid)
        props = confirm_expected(spec, grid, threads=cfg.threads)
        asserts = corollary_assertions(spec, grid, threads=cfg.threads)
        meta["expected"] = [p.to_dict() for p in props]
        meta["assertions"] = [
            {"name": a.name, "applies": a.applies, "holds": a.holds, "detail": a.detail} for a in asserts
        ]
        failed = failed or not all(p.ok for p in props) or not all(a.holds for a in asserts)

    console.print(_summary_table(reports))
    if cfg.out is not None:
        if cfg.fmt == "json":
            body = reports_to_json(reports, meta=meta)
        elif cfg.fmt == "csv":
            body = reports_to_csv(reports)
        else:
            body = _render_text(reports)
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(body, encoding="utf-8")
        logger.info("report written to %s", cfg.out)
    return EXIT_FAIL if failed else EXIT_OK


# ───────────── scan / list / describe ─────────────


def run_scan(cfg: RunConfig, console: Console) -> int:
    assert cfg.example is not None and cfg.scan_range is not None
    name = cfg.example
    if name not in EXAMPLES:
        get_example(name)  # raises UnknownExample
    param = cfg.scan_param or FAMILY_PARAMS.get(name)
    if param is None:
        raise ValueError(f"{name} has no default scan parameter; pass --param")
    nx, ny = cfg.grid

    def family(t: float):
        return get_example(name, **{**cfg.params, param: t}).immersion

    result = scan_family(
        family,
        cfg.scan_range,
        cfg.samples,
        lambda phi: point_grid(phi.domain, nx, ny),
        residual=cfg.residual,  # type: ignore[arg-type]
        label=f"{name}:{param}",
        options=CheckOptions(jet_order=cfg.jet_order, threads=cfg.threads),
    )
    if cfg.out is None:
        sys.stdout.write(result.to_csv())
    else:
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(result.to_csv(), encoding="utf-8")
        table = Table(title=f"scan {result.family}")
        table.add_column("zero")
        for z in result.zeros:
            table.add_row(repr(z))
        console.print(table)
    for note in result.notes:
        logger.info(note)
    return EXIT_OK


def run_list(cfg: RunConfig, console: Console) -> int:
    entries = [get_example(name) for name in EXAMPLES]
    if cfg.as_json:
        payload = {
            e.label: {"ambient": e.ambient_label, "description": e.description, "expected": e.expected_table()}
            for e in entries
        }
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return EXIT_OK
    table = Table(title="catalog")
    for col in ("name", "ambient", "topology", "expected"):
        table.add_column(col)
    for name, e in zip(EXAMPLES, entries):
        props = ", ".join(f"{k}={v}" for k, v in e.expected_table().items())
        table.add_row(name, e.ambient_label, e.domain.topology, props)
    console.print(table)
    return EXIT_OK


def run_describe(cfg: RunConfig, console: Console) -> int:
    name = cfg.example
    if name is None:
        for info in CHECKS.values():
            kind = "integral" if info.integral else "pointwise"
            console.print(f"{info.name:8} {kind:9} order {info.required_order}")
        return EXIT_OK
    info = CHECKS.get(name)
    if info is None:
        raise ValueError(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")
    kind = "integral" if info.integral else "pointwise"
    console.print(f"[bold]{info.name}[/] ({kind}, jet order ≥ {info.required_order})")
    console.print(info.anchor)
    return EXIT_OK


def run(cfg: RunConfig, console: Console | None = None) -> int:
    out = console or Console()
    handlers = {"verify": run_verify, "scan": run_scan, "list": run_list, "describe": run_describe}
    return handlers[cfg.command](cfg, out)


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    setup_logger(args.command, console_level=args.log_level, log_root=args.log_dir)
    try:
        cfg = _config_from_args(args)
        return run(cfg)
    except (ValidationError, ValueError, BitensionError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
