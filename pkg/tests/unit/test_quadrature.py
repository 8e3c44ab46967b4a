from __future__ import annotations

import json
import math

import pytest

try:
    from bitensionlab.catalog import get_example
    from bitensionlab.errors import BadParameter, GridTooCoarse, NotCompact
    from bitensionlab.immersion import Domain
    from bitensionlab.verify.quadrature import (
        AxisRule,
        QuadratureGrid,
        integrate_chart,
        integrate_values,
        parallel_map,
        parse_grid,
        point_grid,
    )
    from bitensionlab.verify.report import (
        PointResidual,
        ResidualReport,
        Verdict,
        relative_residual,
        reports_to_csv,
        reports_to_json,
        skipped_report,
    )
except Exception:
    from src.bitensionlab.catalog import get_example  # type: ignore
    from src.bitensionlab.errors import BadParameter, GridTooCoarse, NotCompact  # type: ignore
    from src.bitensionlab.immersion import Domain  # type: ignore
    from src.bitensionlab.verify.quadrature import (  # type: ignore
        AxisRule,
        QuadratureGrid,
        integrate_chart,
        integrate_values,
        parallel_map,
        parse_grid,
        point_grid,
    )
    from src.bitensionlab.verify.report import (  # type: ignore
        PointResidual,
        ResidualReport,
        Verdict,
        relative_residual,
        reports_to_csv,
        reports_to_json,
        skipped_report,
    )


# ───────────── quadrature ─────────────


def test_flat_torus_area() -> None:
    """The product of unit circles has area 4π²."""
    phi = get_example("flat-torus-R4").immersion
    grid = QuadratureGrid.for_domain(phi.domain, 8, 8)
    assert integrate_chart(phi, lambda p: 1.0, grid, threads=1) == pytest.approx(4.0 * math.pi**2, rel=1e-12)


def test_sphere_area_with_refinement_check() -> None:
    phi = get_example("unit-sphere-R3").immersion
    grid = QuadratureGrid.for_domain(phi.domain, 12, 4)
    area = integrate_chart(phi, lambda p: 1.0, grid, threads=1, refine_check=True, tolerance=1e-9)
    assert area == pytest.approx(4.0 * math.pi, rel=1e-10)


def test_coarse_grid_is_reported() -> None:
    phi = get_example("unit-sphere-R3").immersion
    grid = QuadratureGrid.for_domain(phi.domain, 4, 4)
    with pytest.raises(GridTooCoarse):
        integrate_chart(phi, lambda p: math.cos(8.0 * p[0]) ** 2, grid, threads=1, refine_check=True, tolerance=1e-9)


def test_periodic_rule_needs_a_periodic_axis() -> None:
    with pytest.raises(BadParameter):
        QuadratureGrid.for_domain(Domain(0.0, 1.0, 0.0, 1.0), 4, 4, x_kind="periodic")


def test_integration_needs_a_compact_domain() -> None:
    phi = get_example("cylinder-R3").immersion
    grid = QuadratureGrid.for_domain(phi.domain, 4, 4)
    with pytest.raises(NotCompact):
        integrate_chart(phi, lambda p: 1.0, grid)


def test_gauss_rule_integrates_polynomials() -> None:
    """An n-point Gauss rule is exact for degree 2n - 1."""
    rule = AxisRule("gauss", -1.0, 2.0, 3)
    total = math.fsum(w * x**5 for x, w in zip(rule.nodes, rule.weights))
    assert total == pytest.approx((2.0**6 - 1.0) / 6.0, rel=1e-13)


def test_integrate_values_length_mismatch() -> None:
    grid = QuadratureGrid(AxisRule("gauss", 0.0, 1.0, 2), AxisRule("gauss", 0.0, 1.0, 2))
    with pytest.raises(BadParameter):
        integrate_values(grid, [1.0, 2.0])


def test_point_grid_midpoints() -> None:
    grid = point_grid(Domain(0.0, 2.0, 0.0, 1.0), 2, 1)
    assert grid.points == [(0.5, 0.5), (1.5, 0.5)]
    assert grid.label == "2x1"


@pytest.mark.parametrize("text, expected", [("24x24", (24, 24)), ("3X5", (3, 5)), ("8×2", (8, 2))])
def test_parse_grid(text: str, expected) -> None:
    assert parse_grid(text) == expected


@pytest.mark.parametrize("text", ["24", "ax3", "0x4", "3x4x5"])
def test_parse_grid_rejects(text: str) -> None:
    with pytest.raises(BadParameter):
        parse_grid(text)


def test_parallel_map_keeps_order() -> None:
    pts = [(float(k), 0.0) for k in range(20)]
    assert parallel_map(lambda p: p[0] * 2.0, pts, threads=4) == [2.0 * k for k in range(20)]
    with pytest.raises(BadParameter):
        parallel_map(lambda p: 0.0, pts, threads=-1)


# ───────────── reports ─────────────


def _report(residuals: list[float], tol: float = 1e-6) -> ResidualReport:
    points = [PointResidual((0.1 * k, 0.2), r, {"a": r}) for k, r in enumerate(residuals)]
    return ResidualReport("tau2", "demo", "2x1", 4, tol, points)


def test_verdicts() -> None:
    assert _report([1e-9, 1e-8]).decide() is Verdict.PASS
    assert _report([1e-9, 1e-3]).decide() is Verdict.FAIL
    assert _report([1e-9, float("nan")]).decide() is Verdict.FAIL
    degenerate = _report([0.0])
    degenerate.points[0] = PointResidual((0.0, 0.0), 0.0, degenerate=True)
    assert degenerate.decide() is Verdict.DEGENERATE
    assert Verdict.DEGENERATE.ok and not Verdict.FAIL.ok
    skipped = skipped_report("thm1", "demo", "domain is not compact")
    assert skipped.decide() is Verdict.SKIPPED


def test_relative_residual_scaling() -> None:
    assert relative_residual(0.5, 0.1, 0.2) == pytest.approx(0.5)
    assert relative_residual(0.5, 10.0, -50.0) == pytest.approx(0.01)
    assert relative_residual(0.5, float("inf")) == pytest.approx(0.5)


def test_json_is_deterministic_and_sorted() -> None:
    r = _report([1e-9, 2e-9])
    r.extras = {"zeta": 1.0, "alpha": float("inf")}
    r.decide()
    text = reports_to_json([r], meta={"version": "x"})
    assert text == reports_to_json([r], meta={"version": "x"})
    payload = json.loads(text)
    body = payload["reports"][0]
    assert list(body) == sorted(body), "keys are sorted"
    assert body["extras"] == {"alpha": None, "zeta": 1.0}, "non-finite numbers become null"
    assert body["max_residual"] == 2e-9
    assert payload["meta"] == {"version": "x"}


def test_csv_rows() -> None:
    text = reports_to_csv([_report([0.25])])
    lines = text.splitlines()
    assert lines[0] == "check,example,x,y,residual,degenerate"
    assert lines[1] == "tau2,demo,0.0,0.2,0.25,0"
