from __future__ import annotations

import math

import pytest

try:
    from bitensionlab.ambient import euclidean
    from bitensionlab.catalog import get_example
    from bitensionlab.catalog.builtins import perturbed_random
    from bitensionlab.errors import BadParameter, GridTooCoarse, NotCMC, NotCompact, NotIsothermal
    from bitensionlab.immersion import Domain, make_immersion
    from bitensionlab.verify import (
        CHECKS,
        CheckOptions,
        JetCache,
        QuadratureGrid,
        Verdict,
        check_cmc,
        check_commutation,
        check_hilbert,
        check_lemma,
        check_prop2,
        check_prop3_bound,
        check_s2form,
        check_tau2,
        check_thm1,
        check_thm2,
        check_thm3,
        point_grid,
    )
except Exception:
    from src.bitensionlab.ambient import euclidean  # type: ignore
    from src.bitensionlab.catalog import get_example  # type: ignore
    from src.bitensionlab.catalog.builtins import perturbed_random  # type: ignore
    from src.bitensionlab.errors import BadParameter, GridTooCoarse, NotCMC, NotCompact, NotIsothermal  # type: ignore
    from src.bitensionlab.immersion import Domain, make_immersion  # type: ignore
    from src.bitensionlab.verify import (  # type: ignore
        CHECKS,
        CheckOptions,
        JetCache,
        QuadratureGrid,
        Verdict,
        check_cmc,
        check_commutation,
        check_hilbert,
        check_lemma,
        check_prop2,
        check_prop3_bound,
        check_s2form,
        check_tau2,
        check_thm1,
        check_thm2,
        check_thm3,
        point_grid,
    )


def _grid(phi, n: int = 3):
    return point_grid(phi.domain, n, n)


# ───────────── τ2 ─────────────


@pytest.mark.parametrize("name", ["small-sphere-S3", "clifford-torus-S4", "clifford-minimal-S3", "plane-R3"])
def test_tau2_passes_on_biharmonic_examples(name: str) -> None:
    phi = get_example(name).immersion
    report = check_tau2(phi, _grid(phi))
    assert report.verdict is Verdict.PASS, f"{name}: max ‖τ2‖ = {report.max_residual:.3e}"
    assert report.max_residual <= 1e-7


@pytest.mark.parametrize("name, params", [("small-sphere-S3", {"r": 0.6}), ("unit-sphere-R3", {}), ("flat-torus-R4", {})])
def test_tau2_fails_on_non_biharmonic_examples(name: str, params: dict) -> None:
    phi = get_example(name, **params).immersion
    report = check_tau2(phi, _grid(phi))
    assert report.verdict is Verdict.FAIL
    assert report.max_residual >= 1e-2, f"{name}: max ‖τ2‖ = {report.max_residual:.3e}"


def test_unit_sphere_tau2_value() -> None:
    """τ2 = 4φ on the unit sphere, so ‖τ2‖ = 4 everywhere."""
    phi = get_example("unit-sphere-R3").immersion
    report = check_tau2(phi, _grid(phi))
    assert report.max_residual == pytest.approx(4.0, rel=1e-9)
    assert all(v == pytest.approx(4.0) for v in report.column("tau_norm2"))


def test_jet_order_above_minimum_agrees() -> None:
    phi = get_example("small-sphere-S3", r=0.6).immersion
    grid = _grid(phi, 2)
    low = check_tau2(phi, grid)
    high = check_tau2(phi, grid, CheckOptions(jet_order=5))
    assert high.jet_order == 5
    assert high.max_residual == pytest.approx(low.max_residual, rel=1e-10)


def test_tolerance_factor_scales_the_verdict() -> None:
    phi = get_example("unit-sphere-R3").immersion
    report = check_tau2(phi, _grid(phi, 2), CheckOptions(tol_factor=1e8))
    assert report.tolerance == pytest.approx(10.0)
    assert report.verdict is Verdict.PASS


# ───────────── identities that hold for every map ─────────────


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("curved", [False, True])
def test_hilbert_identity_on_generic_surfaces(seed: int, curved: bool) -> None:
    """div S2 = -<dφ, τ2> whether or not the map is biharmonic."""
    phi = perturbed_random(seed=seed, curved=curved).immersion
    report = check_hilbert(phi, _grid(phi, 2))
    assert report.verdict is Verdict.PASS, f"seed {seed}: {report.max_residual:.3e}"
    assert max(report.column("dphi_tau2")) > 1e-3, "control surface is far from biharmonic"


@pytest.mark.parametrize("seed", [0, 4])
@pytest.mark.parametrize("curved", [False, True])
def test_commutation_identity_on_generic_surfaces(seed: int, curved: bool) -> None:
    phi = perturbed_random(seed=seed, curved=curved).immersion
    report = check_lemma(phi, _grid(phi, 2))
    assert report.verdict is Verdict.PASS, f"seed {seed}: {report.max_residual:.3e}"


def test_single_commutation_triple() -> None:
    phi = get_example("small-sphere-S3", r=0.6).immersion
    assert check_commutation(phi, (1.0, 2.0), 0, 1, 1) <= 1e-9
    with pytest.raises(BadParameter):
        check_commutation(phi, (1.0, 2.0), 0, 2, 1)


# ───────────── rough Laplacian of S2 ─────────────


@pytest.mark.parametrize("name", ["small-sphere-S3", "clifford-torus-S4", "clifford-minimal-S3"])
def test_prop2_on_biharmonic_examples(name: str) -> None:
    phi = get_example(name).immersion
    report = check_prop2(phi, _grid(phi, 2))
    assert report.verdict is Verdict.PASS, f"{name}: {report.max_residual:.3e}"
    assert report.extras["tau2_max"] <= 1e-7


def test_prop2_fails_on_generic_control() -> None:
    phi = perturbed_random(seed=1).immersion
    report = check_prop2(phi, _grid(phi, 2))
    assert report.verdict is Verdict.FAIL
    assert any("not biharmonic" in n for n in report.notes)


# ───────────── integral formula ─────────────


@pytest.mark.parametrize("name", ["small-sphere-S3", "clifford-torus-S4"])
def test_thm1_on_compact_biharmonic_surfaces(name: str) -> None:
    phi = get_example(name).immersion
    report = check_thm1(phi, QuadratureGrid.for_domain(phi.domain, 6, 6))
    assert report.verdict is Verdict.PASS, f"{name}: gap {report.extras['gap']:.3e}"
    assert abs(report.extras["gap"]) <= 1e-6


def test_thm1_parts_with_a_synthetic_field() -> None:
    """∫<ΔᴿS, S> = ∫|∇S|² for an arbitrary field on the flat torus."""
    phi = get_example("flat-torus-R4").immersion
    report = check_thm1(phi, QuadratureGrid.for_domain(phi.domain, 8, 8), synthetic=("sin(x)", "0", "cos(y)"))
    assert abs(report.extras["parts_laplacian"]) <= 1e-9
    assert report.verdict is Verdict.PASS


def test_thm1_parts_on_a_curved_torus() -> None:
    """Both integration-by-parts terms vanish on a torus of revolution, biharmonic or not."""
    phi = perturbed_random(amplitude=0.0).immersion
    grid = QuadratureGrid.for_domain(phi.domain, 4, 16)
    report = check_thm1(phi, grid, synthetic=("sin(x)", "0", "cos(y)"))
    assert abs(report.extras["parts_laplacian"]) <= 1e-6
    assert abs(report.extras["parts_divergence"]) <= 1e-6


def test_thm1_rejects_a_coarse_grid() -> None:
    phi = perturbed_random(seed=1).immersion
    grid = QuadratureGrid.for_domain(phi.domain, 2, 2)
    with pytest.raises(GridTooCoarse):
        check_thm1(phi, grid)
    report = check_thm1(phi, grid, refine_check=False)
    assert report.extras["refine_shift"] == 0.0


def test_thm1_records_the_refinement_shift() -> None:
    phi = get_example("clifford-torus-S4").immersion
    report = check_thm1(phi, QuadratureGrid.for_domain(phi.domain, 6, 6))
    assert 0.0 <= report.extras["refine_shift"] <= 1e-5
    assert report.summary_residual <= 1e-6


def test_thm1_needs_a_compact_domain() -> None:
    phi = get_example("cylinder-R3").immersion
    with pytest.raises(NotCompact):
        check_thm1(phi, QuadratureGrid.for_domain(phi.domain, 4, 4))


# ───────────── CMC immersions ─────────────


def test_thm2_degenerate_on_biharmonic_sphere() -> None:
    """The biharmonic sphere is pseudo-umbilical: every point takes the degenerate branch."""
    phi = get_example("small-sphere-S3").immersion
    report = check_thm2(phi, _grid(phi, 2))
    assert report.verdict is Verdict.DEGENERATE
    assert report.extras["D_max"] <= 1e-8
    assert report.notes, "limitation note is attached"


def test_thm2_rejects_non_biharmonic_sphere() -> None:
    phi = get_example("small-sphere-S3", r=0.6).immersion
    report = check_thm2(phi, _grid(phi, 2))
    assert report.verdict is Verdict.FAIL
    # D = 2|H|² - 2|H|⁴ with |H|² = 16/9
    expected = 2.0 * (16.0 / 9.0) ** 2 - 2.0 * 16.0 / 9.0
    assert report.extras["D_max"] == pytest.approx(expected, rel=1e-8)


def test_cmc_gate() -> None:
    assert check_cmc(get_example("cylinder-R3").immersion, point_grid(get_example("cylinder-R3").domain, 2, 2)) <= 1e-7
    phi = perturbed_random(seed=2).immersion
    with pytest.raises(NotCMC):
        check_thm2(phi, _grid(phi, 2))


def test_prop3_bound_is_sharp_at_the_biharmonic_radius() -> None:
    phi = get_example("small-sphere-S3").immersion
    report = check_prop3_bound(phi, _grid(phi), 1.0)
    assert report.verdict is Verdict.PASS
    assert all(abs(g) <= 1e-9 for g in report.column("gap")), "equality |A_H|² = 2|H|²"
    assert report.metadata["K0"] == 1.0


def test_prop3_bound_violated_off_the_biharmonic_radius() -> None:
    phi = get_example("small-sphere-S3", r=0.6).immersion
    assert check_prop3_bound(phi, _grid(phi), 1.0).verdict is Verdict.FAIL
    with pytest.raises(BadParameter):
        check_prop3_bound(phi, _grid(phi), 0.0)


def test_hopf_function_on_the_cylinder() -> None:
    """Constant |H| makes f holomorphic; on the unit cylinder f = 1/8."""
    phi = get_example("cylinder-R3").immersion
    report = check_thm3(phi, _grid(phi))
    assert report.verdict is Verdict.PASS
    assert report.extras["f_abs_max"] == pytest.approx(0.125, rel=1e-10)
    assert report.extras["dbar_f_max"] <= 1e-10
    assert report.extras["holomorphic"] == 1.0 and report.extras["cmc"] == 1.0
    assert max(report.column("dbar_f")) <= 1e-9


def test_hopf_function_vanishes_on_umbilical_sphere() -> None:
    phi = get_example("small-sphere-S3-mercator").immersion
    report = check_thm3(phi, _grid(phi))
    assert report.verdict is Verdict.PASS
    assert report.extras["f_abs_max"] <= 1e-9


def _conformal_torus():
    """Torus of revolution R = 2, r = 1 in isothermal coordinates: tan(θ/2) = √3 tan(√3 x / 2)."""
    t = "(1.7320508075688772*tan(0.8660254037844386*x))"
    cos_t = f"(1 - {t}^2)/(1 + {t}^2)"
    sin_t = f"2*{t}/(1 + {t}^2)"
    rho = f"(2 + {cos_t})"
    domain = Domain(-0.5, 0.5, 0.0, 2.0 * math.pi, periodic_y=True, topology="annulus")
    return make_immersion(euclidean(3), [f"{rho}*cos(y)", f"{rho}*sin(y)", sin_t], domain, label="torus-band")


def test_hopf_function_is_not_holomorphic_without_constant_mean_curvature() -> None:
    phi = _conformal_torus()
    report = check_thm3(phi, _grid(phi))
    assert report.extras["cmc"] == 0.0
    assert report.extras["holomorphic"] == 0.0
    assert report.extras["dbar_f_max"] > 1e-3
    assert any("not holomorphic" in n for n in report.notes)


def test_hopf_needs_isothermal_chart() -> None:
    phi = get_example("unit-sphere-R3").immersion
    with pytest.raises(NotIsothermal):
        check_thm3(phi, _grid(phi))


# ───────────── closed form of S2 ─────────────


@pytest.mark.parametrize("name", ["cylinder-R3", "flat-torus-R4", "perturbed-random", "small-sphere-S3"])
def test_s2_closed_form(name: str) -> None:
    phi = get_example(name).immersion
    report = check_s2form(phi, _grid(phi))
    assert report.verdict is Verdict.PASS, f"{name}: {report.max_residual:.3e}"
    assert report.extras["remark_min"] >= -1e-9


def test_s2_remark_vanishes_when_pseudo_umbilical() -> None:
    phi = get_example("clifford-torus-S4").immersion
    report = check_s2form(phi, _grid(phi))
    assert all(abs(v) <= 1e-9 for v in report.column("remark"))
    cyl = get_example("cylinder-R3").immersion
    # S2 = diag(3/2, -1/2) in the frame: 2|S2|² - (tr S2)² = 4
    assert check_s2form(cyl, _grid(cyl)).column("remark")[0] == pytest.approx(4.0, rel=1e-10)


def test_prescribed_metric_is_not_an_immersion() -> None:
    phi = make_immersion(euclidean(3), ["x", "y", "0"], Domain(0.0, 1.0, 0.0, 1.0), prescribed=["2", "0", "2"])
    with pytest.raises(BadParameter):
        check_s2form(phi, point_grid(phi.domain, 2, 2))
    # intrinsic checks still run
    assert check_tau2(phi, point_grid(phi.domain, 2, 2)).verdict is Verdict.PASS


# ───────────── registry and cache ─────────────


def test_registry_orders() -> None:
    assert list(CHECKS) == ["tau2", "hilbert", "lemma", "prop2", "thm1", "thm2", "thm3", "prop3", "s2form"]
    assert {n: c.required_order for n, c in CHECKS.items()} == {
        "tau2": 4,
        "hilbert": 4,
        "lemma": 3,
        "prop2": 5,
        "thm1": 5,
        "thm2": 5,
        "thm3": 4,
        "prop3": 2,
        "s2form": 3,
    }
    assert [n for n, c in CHECKS.items() if c.immersion_only] == ["thm2", "thm3", "prop3", "s2form"]


def test_jet_cache_is_shared_between_checks() -> None:
    phi = get_example("small-sphere-S3").immersion
    options = CheckOptions(jet_order=5, cache=JetCache())
    grid = _grid(phi, 2)
    check_tau2(phi, grid, options)
    check_hilbert(phi, grid, options)
    assert len(options.cache) == 4
    assert not math.isnan(check_s2form(phi, grid, options).max_residual)
    assert len(options.cache) == 4
