from __future__ import annotations

import math

import pytest

try:
    from bitensionlab.catalog import EXAMPLES, confirm_expected, corollary_assertions, example_names, get_example
    from bitensionlab.catalog.assertions import Measured, assert_no_pseudo_umbilic_under_ricci_bound, assert_parallel_s2_alternative
    from bitensionlab.catalog.builtins import BIHARMONIC_RADIUS, perturbed_random, small_sphere_rho
    from bitensionlab.errors import BadParameter, UnknownExample
    from bitensionlab.verify import point_grid
except Exception:
    from src.bitensionlab.catalog import (  # type: ignore
        EXAMPLES,
        confirm_expected,
        corollary_assertions,
        example_names,
        get_example,
    )
    from src.bitensionlab.catalog.assertions import (  # type: ignore
        Measured,
        assert_no_pseudo_umbilic_under_ricci_bound,
        assert_parallel_s2_alternative,
    )
    from src.bitensionlab.catalog.builtins import BIHARMONIC_RADIUS, perturbed_random, small_sphere_rho  # type: ignore
    from src.bitensionlab.errors import BadParameter, UnknownExample  # type: ignore
    from src.bitensionlab.verify import point_grid  # type: ignore


def test_registry_names() -> None:
    names = example_names()
    assert names == list(EXAMPLES)
    for required in ("small-sphere-S3", "clifford-torus-S4", "unit-sphere-R3", "cylinder-R3", "perturbed-random"):
        assert required in names


def test_unknown_example() -> None:
    with pytest.raises(UnknownExample):
        get_example("klein-bottle")


def test_bad_builder_parameters() -> None:
    with pytest.raises(BadParameter):
        get_example("plane-R3", r=0.5)
    with pytest.raises(BadParameter):
        get_example("small-sphere-S3", r=1.5)
    with pytest.raises(BadParameter):
        get_example("perturbed-random", amplitude=0.5)


def test_stereographic_radius() -> None:
    assert small_sphere_rho(BIHARMONIC_RADIUS) == pytest.approx(math.sqrt(2.0) - 1.0, rel=1e-15)
    assert small_sphere_rho(1.0) == pytest.approx(1.0)


def test_expected_table_follows_the_radius() -> None:
    at = get_example("small-sphere-S3").expected_table()
    off = get_example("small-sphere-S3", r=0.6).expected_table()
    assert at["biharmonic"] is True and off["biharmonic"] is False
    assert at["K"] == pytest.approx(2.0)
    assert off["normH2"] == pytest.approx(0.64 / 0.36)
    assert get_example("small-sphere-S3", r=0.70710678).expected_table()["biharmonic"] is True


def test_perturbed_random_is_reproducible() -> None:
    a = perturbed_random(seed=7)
    b = perturbed_random(seed=7)
    c = perturbed_random(seed=8)
    assert a.immersion.coords == b.immersion.coords
    assert a.immersion.coords != c.immersion.coords
    assert a.label == "perturbed-random-R3-7"
    assert perturbed_random(seed=7, curved=True).ambient_label.startswith("sphere(3")


@pytest.mark.parametrize("name", list(EXAMPLES))
def test_expected_properties_are_confirmed(name: str) -> None:
    """Every built-in entry has the properties it advertises."""
    spec = get_example(name)
    checks = confirm_expected(spec, point_grid(spec.domain, 3, 3))
    assert checks, f"{name} advertises no properties"
    failed = [c.to_dict() for c in checks if not c.ok]
    assert not failed, f"{name}: {failed}"


def test_corollaries_on_the_biharmonic_sphere() -> None:
    spec = get_example("small-sphere-S3")
    by_name = {a.name: a for a in corollary_assertions(spec, point_grid(spec.domain, 3, 3))}
    sphere = by_name["sphere_pseudo_umbilical"]
    assert sphere.applies and sphere.holds
    assert by_name["flat_or_pseudo_umbilical"].applies
    assert by_name["flat_or_pseudo_umbilical"].holds
    for name in ("parallel_shape_operator", "parallel_s2_alternative"):
        assert by_name[name].applies and by_name[name].holds, by_name[name].detail
    ricci = by_name["no_pseudo_umbilic_under_ricci_bound"]
    assert not ricci.applies, "|H|² = 1 sits on the boundary of the curvature window"


def test_corollaries_on_the_clifford_torus() -> None:
    spec = get_example("clifford-torus-S4")
    by_name = {a.name: a for a in corollary_assertions(spec, point_grid(spec.domain, 3, 3))}
    assert not by_name["sphere_pseudo_umbilical"].applies, "a torus is not a sphere"
    assert by_name["flat_or_pseudo_umbilical"].applies and by_name["flat_or_pseudo_umbilical"].holds
    parallel = by_name["parallel_shape_operator"]
    assert parallel.applies and parallel.holds and "torus" in parallel.detail
    assert by_name["parallel_s2_alternative"].holds


def test_corollaries_do_not_apply_off_the_biharmonic_radius() -> None:
    spec = get_example("small-sphere-S3", r=0.6)
    for a in corollary_assertions(spec, point_grid(spec.domain, 2, 2)):
        assert not a.applies and a.holds


def _measured(**overrides: float) -> Measured:
    base = dict(
        tau_min=2.0,
        tau_max=2.0,
        tau2_max=0.0,
        dnormH2_max=0.0,
        normH2_min=0.5,
        normH2_max=0.5,
        K_min=0.0,
        K_max=0.0,
        pseudo_umbilic_min=0.25,
        pseudo_umbilic_max=0.25,
        nabla_ah_max=0.0,
        nabla_s2_max=0.0,
        s2_tracefree_max=0.5,
    )
    base.update(overrides)
    return Measured(**base)


def test_ricci_window_rules_out_pseudo_umbilical_points() -> None:
    """Synthetic measurements in S³: |H|² = 1/2 lies inside (0, Ric/2)."""
    spec = get_example("small-sphere-S3")
    ok = assert_no_pseudo_umbilic_under_ricci_bound(spec, _measured())
    assert ok.applies and ok.holds
    bad = assert_no_pseudo_umbilic_under_ricci_bound(spec, _measured(pseudo_umbilic_min=0.0))
    assert bad.applies and not bad.holds
    outside = assert_no_pseudo_umbilic_under_ricci_bound(spec, _measured(normH2_max=1.5))
    assert not outside.applies


def test_parallel_s2_alternative_uses_total_curvature() -> None:
    spec = get_example("clifford-torus-S4")
    assert assert_parallel_s2_alternative(spec, _measured(), total_curvature=0.0).holds
    assert not assert_parallel_s2_alternative(spec, _measured(), total_curvature=1.0).holds
    assert not assert_parallel_s2_alternative(spec, _measured(tau_min=1.0), total_curvature=0.0).holds
