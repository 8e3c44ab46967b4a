"""Re-measure the expected properties of catalog entries and the corollary assertions built on them."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from bitensionlab.bienergy import BienergyJets
from bitensionlab.catalog.builtins import ExampleSpec
from bitensionlab.immersion import geometry_at, nabla_ah_norm2, point_geometry
from bitensionlab.verify.checks import GridLike, JetCache, tau2_norm
from bitensionlab.verify.quadrature import QuadratureGrid, integrate_chart, parallel_map

logger = logging.getLogger("bitensionlab.catalog.assertions")

_ORDER = 4
_BIHARMONIC_TOL = 1e-7


@dataclass(frozen=True)
class Measured:
    """Grid maxima of the quantities behind every expected property."""

    tau_min: float
    tau_max: float
    tau2_max: float
    dnormH2_max: float
    normH2_min: float
    normH2_max: float
    K_min: float
    K_max: float
    pseudo_umbilic_min: float
    pseudo_umbilic_max: float
    nabla_ah_max: float
    nabla_s2_max: float
    s2_tracefree_max: float

    @property
    def biharmonic(self) -> bool:
        return self.tau2_max <= _BIHARMONIC_TOL

    @property
    def cmc(self) -> bool:
        return self.dnormH2_max <= _BIHARMONIC_TOL

    def value(self, prop: str, tolerance: float) -> bool | tuple[float, float]:
        if prop == "biharmonic":
            return self.tau2_max <= tolerance
        if prop == "harmonic":
            return self.tau_max <= tolerance
        if prop == "cmc":
            return self.dnormH2_max <= tolerance
        if prop == "flat":
            return max(abs(self.K_min), abs(self.K_max)) <= tolerance
        if prop == "pseudo_umbilical":
            return self.pseudo_umbilic_max <= tolerance
        if prop == "K":
            return self.K_min, self.K_max
        if prop == "normH2":
            return self.normH2_min, self.normH2_max
        raise KeyError(prop)


@dataclass(frozen=True)
class PropertyCheck:
    example: str
    prop: str
    expected: bool | float
    measured: bool | tuple[float, float]
    ok: bool

    def to_dict(self) -> dict:
        measured = list(self.measured) if isinstance(self.measured, tuple) else self.measured
        return {"example": self.example, "property": self.prop, "expected": self.expected, "measured": measured, "ok": self.ok}


def _sample(pj: BienergyJets) -> tuple[float, ...]:
    geo = point_geometry(pj)
    dn2 = pj.inner(pj.mean_curvature, pj.mean_curvature).gradient()
    return (
        math.sqrt(max(0.0, float(geo.tau @ geo.h @ geo.tau))),
        tau2_norm(pj),
        float(np.linalg.norm(np.asarray(dn2.value))),
        geo.normH2,
        geo.K,
        geo.pseudo_umbilic_residual,
        math.sqrt(max(0.0, nabla_ah_norm2(pj))),
        math.sqrt(max(0.0, pj.tensor_norm2(np.asarray(pj.nabla_s2.value)))),
        math.sqrt(max(0.0, float(pj.sym_norm2(pj.s2).value) - 0.5 * float(pj.tau_norm2.value) ** 2)),
    )


def measure(spec: ExampleSpec, grid: GridLike, *, threads: int | None = None, cache: JetCache | None = None) -> Measured:
    store = cache or JetCache()
    phi = spec.immersion
    rows = parallel_map(lambda p: _sample(store.get(phi, p, _ORDER)), grid.points, threads=threads)
    cols = list(zip(*rows))
    return Measured(
        tau_min=min(cols[0]),
        tau_max=max(cols[0]),
        tau2_max=max(cols[1]),
        dnormH2_max=max(cols[2]),
        normH2_min=min(cols[3]),
        normH2_max=max(cols[3]),
        K_min=min(cols[4]),
        K_max=max(cols[4]),
        pseudo_umbilic_min=min(cols[5]),
        pseudo_umbilic_max=max(cols[5]),
        nabla_ah_max=max(cols[6]),
        nabla_s2_max=max(cols[7]),
        s2_tracefree_max=max(cols[8]),
    )


def confirm_expected(spec: ExampleSpec, grid: GridLike, *, threads: int | None = None) -> list[PropertyCheck]:
    """Compare every expected property of ``spec`` with the engine's measurement."""
    m = measure(spec, grid, threads=threads)
    out = []
    for prop, exp in spec.expected.items():
        got = m.value(prop, exp.tolerance)
        if isinstance(got, tuple):
            target = float(exp.value)
            ok = abs(got[0] - target) <= exp.tolerance and abs(got[1] - target) <= exp.tolerance
        else:
            ok = got == bool(exp.value)
        out.append(PropertyCheck(spec.label, prop, exp.value, got, ok))
        if not ok:
            logger.warning("%s: expected %s = %s, measured %s", spec.label, prop, exp.value, got)
    return out


# ───────────── corollary assertions ─────────────


@dataclass(frozen=True)
class Assertion:
    name: str
    example: str
    applies: bool
    holds: bool
    detail: str = ""


def assert_sphere_pseudo_umbilical(spec: ExampleSpec, m: Measured, *, tol: float = 1e-8) -> Assertion:
    """A biharmonic CMC immersed sphere is pseudo-umbilical."""
    applies = m.biharmonic and m.cmc and spec.domain.topology == "sphere"
    holds = (not applies) or m.pseudo_umbilic_max <= tol
    return Assertion("sphere_pseudo_umbilical", spec.label, applies, holds, f"pseudo-umbilic residual {m.pseudo_umbilic_max:.3e}")


def assert_flat_or_pseudo_umbilical(spec: ExampleSpec, m: Measured, *, tol: float = 1e-8) -> Assertion:
    """A compact biharmonic CMC surface with ``K ≥ 0`` is flat or pseudo-umbilical."""
    applies = (
        spec.domain.compact and m.biharmonic and m.cmc and m.K_min >= -tol
    )
    flat = max(abs(m.K_min), abs(m.K_max)) <= tol
    holds = (not applies) or flat or m.pseudo_umbilic_max <= tol
    return Assertion(
        "flat_or_pseudo_umbilical",
        spec.label,
        applies,
        holds,
        f"max|K| {max(abs(m.K_min), abs(m.K_max)):.3e}, pseudo-umbilic residual {m.pseudo_umbilic_max:.3e}",
    )


def assert_parallel_shape_operator(spec: ExampleSpec, m: Measured, *, tol: float = 1e-8) -> Assertion:
    """Compact proper-biharmonic immersions with ``∇A_H = 0`` are tori or pseudo-umbilical."""
    applies = spec.domain.compact and m.biharmonic and m.tau_max > _BIHARMONIC_TOL and m.nabla_ah_max <= tol
    holds = (not applies) or spec.domain.topology == "torus" or m.pseudo_umbilic_max <= tol
    return Assertion(
        "parallel_shape_operator",
        spec.label,
        applies,
        holds,
        f"max|∇A_H| {m.nabla_ah_max:.3e}, topology {spec.domain.topology}",
    )


def assert_no_pseudo_umbilic_under_ricci_bound(spec: ExampleSpec, m: Measured, *, tol: float = 1e-8) -> Assertion:
    """In a 3-dimensional space form of curvature ``k > 0`` (so ``Ric ≥ 2k``), ``0 < |H|² < k`` rules out pseudo-umbilical points."""
    amb = spec.immersion.ambient
    k = amb.curvature
    applies = (
        amb.dim == 3
        and k is not None
        and k > 0.0
        and m.biharmonic
        and m.cmc
        and m.normH2_min > tol
        and m.normH2_max < k - tol
    )
    holds = (not applies) or m.pseudo_umbilic_min > tol
    return Assertion(
        "no_pseudo_umbilic_under_ricci_bound",
        spec.label,
        applies,
        holds,
        f"|H|² in [{m.normH2_min:.6g}, {m.normH2_max:.6g}], min pseudo-umbilic residual {m.pseudo_umbilic_min:.3e}",
    )


def assert_parallel_s2_alternative(
    spec: ExampleSpec, m: Measured, *, total_curvature: float | None = None, tol: float = 1e-8
) -> Assertion:
    """Compact biharmonic maps with ``∇S₂ = 0``: ``|τ|`` is constant and ``∫K = 0`` or ``S₂ = |τ|²g/2``.

    ``total_curvature`` is only consulted when the trace-free part of ``S₂`` does not vanish.
    """
    applies = spec.domain.compact and m.biharmonic and m.nabla_s2_max <= tol
    constant_tau = m.tau_max - m.tau_min <= tol
    umbilic_s2 = m.s2_tracefree_max <= tol
    flat_on_average = total_curvature is not None and abs(total_curvature) <= 1e3 * tol
    holds = (not applies) or (constant_tau and (umbilic_s2 or flat_on_average))
    detail = f"max|∇S₂| {m.nabla_s2_max:.3e}, |τ| spread {m.tau_max - m.tau_min:.3e}, max|S₂°| {m.s2_tracefree_max:.3e}"
    if total_curvature is not None:
        detail += f", ∫K {total_curvature:.6g}"
    return Assertion("parallel_s2_alternative", spec.label, applies, holds, detail)


def total_curvature(spec: ExampleSpec, *, nodes: int = 16, threads: int | None = None) -> float:
    """``∫K v_g`` on a quadrature grid of the example domain."""
    phi = spec.immersion
    grid = QuadratureGrid.for_domain(spec.domain, nodes, nodes)
    return integrate_chart(phi, lambda p: geometry_at(phi, p).K, grid, threads=threads)


def corollary_assertions(spec: ExampleSpec, grid: GridLike, *, threads: int | None = None) -> list[Assertion]:
    m = measure(spec, grid, threads=threads)
    needs_integral = spec.domain.compact and m.biharmonic and m.nabla_s2_max <= 1e-8 and m.s2_tracefree_max > 1e-8
    total = total_curvature(spec, threads=threads) if needs_integral else None
    return [
        assert_sphere_pseudo_umbilical(spec, m),
        assert_flat_or_pseudo_umbilical(spec, m),
        assert_parallel_shape_operator(spec, m),
        assert_no_pseudo_umbilic_under_ricci_bound(spec, m),
        assert_parallel_s2_alternative(spec, m, total_curvature=total),
    ]


__all__ = [
    "Assertion",
    "Measured",
    "PropertyCheck",
    "assert_flat_or_pseudo_umbilical",
    "assert_no_pseudo_umbilic_under_ricci_bound",
    "assert_parallel_s2_alternative",
    "assert_parallel_shape_operator",
    "assert_sphere_pseudo_umbilical",
    "confirm_expected",
    "corollary_assertions",
    "measure",
    "total_curvature",
]
