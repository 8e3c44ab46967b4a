from __future__ import annotations

import json
from pathlib import Path

import pytest

try:
    import bitensionlab.catalog as catalog
    from bitensionlab.catalog import confirm_expected, load_spec_file, load_spec_text
    from bitensionlab.catalog.specfile import HEADER, parse_spec_text
    from bitensionlab.errors import SpecParseError
    from bitensionlab.verify import Verdict, check_tau2, point_grid
except Exception:
    import src.bitensionlab.catalog as catalog  # type: ignore
    from src.bitensionlab.catalog import confirm_expected, load_spec_file, load_spec_text  # type: ignore
    from src.bitensionlab.catalog.specfile import HEADER, parse_spec_text  # type: ignore
    from src.bitensionlab.errors import SpecParseError  # type: ignore
    from src.bitensionlab.verify import Verdict, check_tau2, point_grid  # type: ignore


DATA = Path(catalog.__file__).parent / "data"

_PLANE = """bitensionlab-spec v1
[ambient]
kind = euclidean
dim = 3

[immersion]
u1 = x
u2 = y
u3 = 0.5*x + 0.25*y

[domain]
x = 0 : 1
y = -1 : 1

[expected]
harmonic = true
K = 0 ~ 1e-9
"""


def test_plane_text_spec() -> None:
    spec = load_spec_text(_PLANE, label="tilted")
    assert spec.label == "tilted"
    assert spec.immersion.ambient.dim == 3
    assert spec.domain.x0 == 0.0 and spec.domain.y0 == -1.0
    assert not spec.domain.compact
    assert spec.expected["K"].tolerance == pytest.approx(1e-9)
    assert all(c.ok for c in confirm_expected(spec, point_grid(spec.domain, 2, 2)))


def test_shipped_biharmonic_sphere() -> None:
    spec = load_spec_file(DATA / "biharmonic-sphere.bls")
    assert spec.label == "biharmonic-sphere"
    assert spec.domain.compact and spec.domain.periodic_y and not spec.domain.periodic_x
    checks = confirm_expected(spec, point_grid(spec.domain, 3, 3))
    assert all(c.ok for c in checks), [c.to_dict() for c in checks if not c.ok]


def test_shipped_enneper_patch() -> None:
    spec = load_spec_file(DATA / "enneper-patch.bls")
    assert check_tau2(spec.immersion, point_grid(spec.domain, 3, 3)).verdict is Verdict.PASS


def test_shipped_toml_spec() -> None:
    spec = load_spec_file(DATA / "hyperbolic-torus.toml")
    assert spec.label == "hyperbolic-torus"
    assert spec.immersion.ambient.kind == "hyperbolic"
    assert spec.domain.compact, "both axes periodic makes the domain compact"
    assert check_tau2(spec.immersion, point_grid(spec.domain, 2, 2)).verdict is Verdict.FAIL


def test_json_twin(tmp_path: Path) -> None:
    doc = {
        "ambient": {"kind": "sphere", "dim": 3},
        "immersion": {"u1": "0.3*cos(x)", "u2": "0.3*sin(x)", "u3": "y"},
        "domain": {"x": [0, "2*pi"], "y": [-0.5, 0.5], "periodic": ["x"]},
    }
    path = tmp_path / "cyl.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    spec = load_spec_file(path)
    assert spec.label == "cyl"
    assert spec.domain.periodic_x and not spec.domain.periodic_y
    assert spec.domain.x1 == pytest.approx(6.283185307179586)


def test_metric_ambient_and_prescribed_metric() -> None:
    text = """bitensionlab-spec v1
[ambient]
kind = metric
h11 = 1 + u2^2
h22 = 1
h33 = 1
[immersion]
u1 = x
u2 = y
u3 = 0
g11 = 1
g12 = 0
g22 = 1
[domain]
x = 0 : 1
y = 0 : 1
"""
    spec = load_spec_text(text)
    assert spec.immersion.ambient.kind == "metric"
    assert not spec.immersion.is_immersion


def test_header_lines_are_checked() -> None:
    raw = parse_spec_text(f"# comment first\n{HEADER}\n[ambient]\nkind = euclidean\n")
    assert raw.get("ambient", "kind").value == "euclidean"
    with pytest.raises(SpecParseError) as info:
        parse_spec_text("bitension spec\n[ambient]\n")
    assert info.value.line == 1


@pytest.mark.parametrize(
    "body, line, column",
    [
        ("[shape]\n", 2, 2),
        ("kind = euclidean\n", 2, 1),
        ("[ambient]\n  dim\n", 3, 3),
        ("[ambient]\nkind = euclidean\nkind = sphere\n", 4, 1),
        ("[ambient\n", 2, 9),
    ],
)
def test_syntax_errors_carry_positions(body: str, line: int, column: int) -> None:
    with pytest.raises(SpecParseError) as info:
        parse_spec_text(f"{HEADER}\n{body}")
    assert (info.value.line, info.value.column) == (line, column), str(info.value)


def test_expression_errors_point_into_the_value() -> None:
    bad = _PLANE.replace("u3 = 0.5*x + 0.25*y", "u3 = 0.5*x + * y")
    with pytest.raises(SpecParseError) as info:
        load_spec_text(bad)
    assert info.value.line == 9
    assert info.value.column == 14, "column of the stray '*' inside the value"


def test_semantic_errors() -> None:
    with pytest.raises(SpecParseError):
        load_spec_text(_PLANE.replace("u3 = 0.5*x + 0.25*y\n", ""))
    with pytest.raises(SpecParseError):
        load_spec_text(_PLANE.replace("K = 0 ~ 1e-9", "genus = 1"))
    with pytest.raises(SpecParseError):
        load_spec_text(_PLANE.replace("harmonic = true", "harmonic = maybe"))
    with pytest.raises(SpecParseError):
        load_spec_text(_PLANE.replace("x = 0 : 1", "x = 1 : 0"))
    with pytest.raises(SpecParseError):
        load_spec_text(_PLANE.replace("dim = 3", "dim = three"))


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(SpecParseError):
        load_spec_file(tmp_path / "absent.bls")
    with pytest.raises(SpecParseError):
        load_spec_file(tmp_path / "absent.toml")


@pytest.mark.parametrize(
    "old, new, line, column",
    [
        ("x = 0 : 1", "x = * : 1", 12, 5),
        ("x = 0 : 1", "x = 0 : 2 * * 3", 12, 13),
        ("K = 0 ~ 1e-9", "K = 0 ~ * 1e-9", 17, 9),
    ],
)
def test_errors_in_value_parts_point_at_the_part(old: str, new: str, line: int, column: int) -> None:
    with pytest.raises(SpecParseError) as info:
        load_spec_text(_PLANE.replace(old, new))
    assert (info.value.line, info.value.column) == (line, column), str(info.value)


# ───────────── encoding ─────────────


def test_undecodable_text_spec(tmp_path: Path) -> None:
    path = tmp_path / "latin.bls"
    path.write_bytes(f"{HEADER}\n[ambient]\n".encode() + b"kind = eu\xffclid\n")
    with pytest.raises(SpecParseError) as info:
        load_spec_file(path)
    assert (info.value.line, info.value.column) == (3, 10)
    assert "0xff" in str(info.value)


def test_undecodable_structured_spec(tmp_path: Path) -> None:
    path = tmp_path / "latin.json"
    path.write_bytes(b'{"ambient":\n {"kind": "\xff"}}')
    with pytest.raises(SpecParseError) as info:
        load_spec_file(path)
    assert (info.value.line, info.value.column) == (2, 12)
