"""User-defined examples: the ``bitensionlab-spec v1`` text format and its TOML/YAML/JSON twins.

Text grammar::

    file     := header { blank | comment | section | entry }
    header   := "bitensionlab-spec v1"
    section  := "[" ("ambient" | "immersion" | "domain" | "expected") "]"
    entry    := key "=" value
    comment  := "#" ...

``[ambient]``   ``kind`` (euclidean | sphere | hyperbolic | conformal | metric),
                ``dim``, ``radius``, ``factor``, or ``hAB`` entries (1-based, A ≤ B)
``[immersion]`` ``label``, ``u1`` … ``un`` and optionally ``g11``, ``g12``, ``g22``
``[domain]``    ``x = a : b``, ``y = a : b`` (constant expressions),
                ``periodic = x, y``, ``compact``, ``topology``
``[expected]``  ``name = value`` or ``name = value ~ tolerance``
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from bitensionlab.ambient import AmbientManifold, make_builtin_manifold, manifold_from_metric
from bitensionlab.catalog.builtins import PROPERTY_NAMES, ExampleSpec, Expected
from bitensionlab.errors import BitensionError, ExprSyntaxError, SpecParseError
from bitensionlab.exprdsl import eval_constant, parse_expr
from bitensionlab.immersion import Domain, make_immersion
from bitensionlab.utils.config import STRUCTURED_EXTENSIONS, ConfigError, parse_config_text

logger = logging.getLogger("bitensionlab.catalog.specfile")

HEADER = "bitensionlab-spec v1"
SECTIONS = ("ambient", "immersion", "domain", "expected")
_BOOL_PROPS = {"biharmonic", "harmonic", "cmc", "pseudo_umbilical", "flat"}
_KEY_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_TRUE = {"true", "yes", "1"}
_FALSE = {"false", "no", "0"}


@dataclass
class _Entry:
    value: str
    line: int
    column: int


@dataclass
class RawSpec:
    """Section → key → entry, with source positions for error messages."""

    sections: dict[str, dict[str, _Entry]] = field(default_factory=lambda: {s: {} for s in SECTIONS})

    def get(self, section: str, key: str) -> _Entry | None:
        return self.sections[section].get(key)


# ───────────── text format ─────────────


def parse_spec_text(text: str) -> RawSpec:
    lines = text.splitlines()
    first = next((i for i, ln in enumerate(lines) if ln.strip() and not ln.lstrip().startswith("#")), None)
    if first is None or lines[first].strip() != HEADER:
        raise SpecParseError(f"missing header line {HEADER!r}", (first or 0) + 1)

    raw = RawSpec()
    current: str | None = None
    for idx in range(first + 1, len(lines)):
        line_no = idx + 1
        line = lines[idx]
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise SpecParseError("unterminated section header", line_no, indent + len(stripped))
            name = stripped[1:-1].strip()
            if name not in SECTIONS:
                raise SpecParseError(f"unknown section [{name}]", line_no, indent + 1)
            current = name
            continue
        if current is None:
            raise SpecParseError("entry outside of any section", line_no, indent)
        if "=" not in stripped:
            raise SpecParseError("expected 'key = value'", line_no, indent)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not _KEY_RE.match(key):
            raise SpecParseError(f"bad key {key!r}", line_no, indent)
        if key in raw.sections[current]:
            raise SpecParseError(f"duplicate key {key!r} in [{current}]", line_no, indent)
        value_col = line.index("=") + 2 + (len(value) - len(value.lstrip()))
        raw.sections[current][key] = _Entry(value.strip(), line_no, value_col)
    return raw


def _from_mapping(data: Mapping[str, Any]) -> RawSpec:
    raw = RawSpec()
    for section, entries in data.items():
        if section not in SECTIONS:
            raise SpecParseError(f"unknown section {section!r}", 1)
        if not isinstance(entries, Mapping):
            raise SpecParseError(f"section {section!r} must be a table", 1)
        for key, value in entries.items():
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, (list, tuple)):
                sep = ":" if section == "domain" and key in ("x", "y") else ", "
                text = sep.join(str(v) for v in value)
            else:
                text = str(value)
            raw.sections[section][str(key)] = _Entry(text, 1, 1)
    return raw


# ───────────── interpretation ─────────────


def _shifted(entry: _Entry, offset: int) -> _Entry:
    """``entry`` with its column moved to a part of the value starting ``offset`` characters in."""
    return _Entry(entry.value, entry.line, entry.column + offset)


def _require(raw: RawSpec, section: str, key: str) -> _Entry:
    entry = raw.get(section, key)
    if entry is None:
        raise SpecParseError(f"[{section}] needs '{key}'", 1)
    return entry


def _constant(entry: _Entry, text: str | None = None) -> float:
    try:
        return eval_constant(parse_expr(entry.value if text is None else text))
    except ExprSyntaxError as exc:
        raise SpecParseError(str(exc), entry.line, entry.column + exc.offset - 1) from exc
    except BitensionError as exc:
        raise SpecParseError(str(exc), entry.line, entry.column) from exc


def _flag(entry: _Entry) -> bool:
    v = entry.value.lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise SpecParseError(f"expected true or false, got {entry.value!r}", entry.line, entry.column)


def _expr(entry: _Entry):
    try:
        return parse_expr(entry.value)
    except ExprSyntaxError as exc:
        raise SpecParseError(str(exc), entry.line, entry.column + exc.offset - 1) from exc


def _ambient(raw: RawSpec) -> AmbientManifold:
    kind = _require(raw, "ambient", "kind").value
    if kind == "metric":
        entries = {k: e for k, e in raw.sections["ambient"].items() if re.fullmatch(r"h\d\d", k)}
        n = max((int(k[2]) for k in entries), default=0)
        rows = []
        for a in range(1, n + 1):
            row = []
            for b in range(a, n + 1):
                entry = entries.get(f"h{a}{b}")
                row.append(_expr(entry) if entry is not None else parse_expr("0"))
            rows.append(row)
        try:
            return manifold_from_metric(rows, label="metric")
        except BitensionError as exc:
            raise SpecParseError(str(exc), _require(raw, "ambient", "kind").line) from exc
    dim_entry = _require(raw, "ambient", "dim")
    try:
        dim = int(dim_entry.value)
    except ValueError as exc:
        raise SpecParseError(f"dim must be an integer, got {dim_entry.value!r}", dim_entry.line, dim_entry.column) from exc
    radius = raw.get("ambient", "radius")
    factor = raw.get("ambient", "factor")
    try:
        return make_builtin_manifold(
            kind,
            dim,
            r=_constant(radius) if radius else 1.0,
            factor=_expr(factor) if factor else None,
        )
    except SpecParseError:
        raise
    except BitensionError as exc:
        raise SpecParseError(str(exc), dim_entry.line) from exc


def _interval(entry: _Entry) -> tuple[float, float]:
    lo, sep, hi = entry.value.partition(":")
    if not sep:
        raise SpecParseError("interval must look like 'a : b'", entry.line, entry.column)
    return _constant(entry, lo), _constant(_shifted(entry, len(lo) + 1), hi)


def _domain(raw: RawSpec) -> Domain:
    x0, x1 = _interval(_require(raw, "domain", "x"))
    y0, y1 = _interval(_require(raw, "domain", "y"))
    periodic = raw.get("domain", "periodic")
    axes = {a.strip() for a in periodic.value.split(",")} - {""} if periodic else set()
    if axes - {"x", "y"}:
        assert periodic is not None
        raise SpecParseError(f"periodic axes must be x or y, got {periodic.value!r}", periodic.line, periodic.column)
    compact = raw.get("domain", "compact")
    topology = raw.get("domain", "topology")
    try:
        return Domain(
            x0,
            x1,
            y0,
            y1,
            periodic_x="x" in axes,
            periodic_y="y" in axes,
            compact=_flag(compact) if compact else axes == {"x", "y"},
            topology=topology.value if topology else "disk",
        )
    except BitensionError as exc:
        raise SpecParseError(str(exc), _require(raw, "domain", "x").line) from exc


def _expected(raw: RawSpec) -> dict[str, Expected]:
    out = {}
    for key, entry in raw.sections["expected"].items():
        if key not in PROPERTY_NAMES:
            raise SpecParseError(f"unknown expected property {key!r}", entry.line, entry.column)
        value, _, tol = entry.value.partition("~")
        tolerance = _constant(_shifted(entry, len(value) + 1), tol) if tol.strip() else 1e-7
        if key in _BOOL_PROPS:
            out[key] = Expected(_flag(_Entry(value.strip(), entry.line, entry.column)), tolerance)
        else:
            out[key] = Expected(_constant(entry, value), tolerance)
    return out


def build_spec(raw: RawSpec, *, default_label: str = "spec") -> ExampleSpec:
    ambient = _ambient(raw)
    coords = [_expr(_require(raw, "immersion", f"u{a}")) for a in range(1, ambient.dim + 1)]
    prescribed = None
    if raw.get("immersion", "g11") is not None:
        prescribed = [_expr(_require(raw, "immersion", k)) for k in ("g11", "g12", "g22")]
    label_entry = raw.get("immersion", "label")
    label = label_entry.value if label_entry else default_label
    try:
        phi = make_immersion(ambient, coords, _domain(raw), label=label, prescribed=prescribed)
    except SpecParseError:
        raise
    except BitensionError as exc:
        raise SpecParseError(str(exc), _require(raw, "immersion", "u1").line) from exc
    return ExampleSpec(label, phi, _expected(raw), "loaded from spec file")


def load_spec_text(text: str, *, label: str = "spec") -> ExampleSpec:
    return build_spec(parse_spec_text(text), default_label=label)


def _read_utf8(path: Path) -> str:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise SpecParseError(f"cannot read {path}: {exc}", 1) from exc
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data.count(b"\n", 0, exc.start) + 1
        column = exc.start - data.rfind(b"\n", 0, exc.start)
        raise SpecParseError(f"invalid UTF-8 byte 0x{data[exc.start]:02x}", line, column) from exc


def load_spec_file(path: str | Path) -> ExampleSpec:
    """Read a ``.bls`` text spec, or the same sections from TOML, YAML or JSON.

    Files must be UTF-8; columns of decoding errors count bytes.
    """
    spec_path = Path(path)
    text = _read_utf8(spec_path)
    if spec_path.suffix.lower() in STRUCTURED_EXTENSIONS:
        try:
            data = parse_config_text(text, spec_path.suffix, source=str(spec_path))
        except ConfigError as exc:
            raise SpecParseError(str(exc), 1) from exc
        spec = build_spec(_from_mapping(data), default_label=spec_path.stem)
    else:
        spec = load_spec_text(text, label=spec_path.stem)
    logger.info("loaded %s from %s", spec.label, spec_path)
    return spec


__all__ = ["HEADER", "RawSpec", "build_spec", "load_spec_file", "load_spec_text", "parse_spec_text"]
