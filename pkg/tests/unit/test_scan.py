from __future__ import annotations

import pytest

try:
    from bitensionlab.catalog import get_example
    from bitensionlab.catalog.builtins import BIHARMONIC_RADIUS
    from bitensionlab.errors import BadParameter, EmptyRange, NoSignChange
    from bitensionlab.verify import CheckOptions, point_grid, scan_family
    from bitensionlab.verify.scan import ScanResult, family_residual, point_residual
except Exception:
    from src.bitensionlab.catalog import get_example  # type: ignore
    from src.bitensionlab.catalog.builtins import BIHARMONIC_RADIUS  # type: ignore
    from src.bitensionlab.errors import BadParameter, EmptyRange, NoSignChange  # type: ignore
    from src.bitensionlab.verify import CheckOptions, point_grid, scan_family  # type: ignore
    from src.bitensionlab.verify.scan import ScanResult, family_residual, point_residual  # type: ignore


def _sphere(r: float):
    return get_example("small-sphere-S3", r=r).immersion


def _grid(phi):
    return point_grid(phi.domain, 2, 2)


def _equator(phi):
    return point_grid(phi.domain, 1, 1)


def test_empty_ranges() -> None:
    with pytest.raises(EmptyRange):
        scan_family(_sphere, (0.8, 0.6), 5, _grid)
    with pytest.raises(EmptyRange):
        scan_family(_sphere, (0.6, 0.8), 1, _grid)


def test_residual_kinds_agree_on_a_homogeneous_sphere() -> None:
    """‖τ2‖ is constant on the small sphere, so the maximum and the RMS coincide."""
    phi = _sphere(0.6)
    grid = _grid(phi)
    peak = family_residual(phi, grid, "tau2", CheckOptions())
    rms = family_residual(phi, grid, "tau2_l2", CheckOptions())
    assert peak == pytest.approx(rms, rel=1e-10)
    assert peak == pytest.approx(point_residual(phi, (1.0, 1.0)), rel=1e-10)
    with pytest.raises(BadParameter):
        family_residual(phi, grid, "bogus", CheckOptions())  # type: ignore[arg-type]


@pytest.mark.slow
def test_scan_finds_the_biharmonic_radius() -> None:
    result = scan_family(_sphere, (0.6, 0.8), 5, _grid, label="small-sphere-S3:r")
    assert len(result.samples) == 5
    assert len(result.zeros) == 1, f"zeros {result.zeros}"
    assert result.zeros[0] == pytest.approx(BIHARMONIC_RADIUS, abs=1e-7)
    assert not result.notes


def test_scan_over_the_radius_range() -> None:
    """One zero at 1/√2; the residual falls again towards the minimal great sphere at r = 1."""
    result = scan_family(_sphere, (0.3, 0.999), 15, _equator, label="small-sphere-S3:r")
    assert result.zeros == [pytest.approx(BIHARMONIC_RADIUS, abs=1e-6)]
    assert result.no_zero is None
    params = [t for t, _ in result.samples]
    values = [v for _, v in result.samples]
    assert all(v > 1e-3 for t, v in result.samples if t <= 0.65)
    assert values[-1] < values[-2] < max(values[params.index(t)] for t in params if t > 0.75)
    assert values[-1] > 1e-7, "r = 0.999 is close to, not on, the minimal sphere"


def test_scan_without_zero_records_it() -> None:
    result = scan_family(_sphere, (0.5, 0.6), 3, _grid)
    assert result.zeros == []
    assert isinstance(result.no_zero, NoSignChange)
    assert result.notes == [str(result.no_zero)]
    assert result.to_dict()["no_zero"] == str(result.no_zero)
    with pytest.raises(NoSignChange):
        scan_family(_sphere, (0.5, 0.6), 3, _grid, require_zero=True)


def test_csv_and_dict() -> None:
    result = ScanResult("fam", "tau2", [(0.5, 1.25), (0.75, 0.0)], zeros=[0.75])
    assert result.to_csv() == "param,residual\n0.5,1.25\n0.75,0.0\n"
    assert result.to_dict()["zeros"] == [0.75]
