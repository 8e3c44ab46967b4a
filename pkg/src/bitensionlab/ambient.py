"""Chart-based ambient Riemannian manifolds ``(N, h)``.

Curvature conventions::

    R(X, Y) = [∇_X, ∇_Y] - ∇_[X, Y]
    R(X, Y, Z, W) = <R(X, Y) W, Z>

so the round sphere has sectional curvature ``R(X, Y, X, Y) = +1`` on
orthonormal pairs.  In coordinates ``R(∂c, ∂d) ∂b = R^a_bcd ∂a``.

Metric components are :mod:`bitensionlab.exprdsl` expressions in the chart
variables ``u1 .. un``.  Their first and second partial derivatives are taken
symbolically once per manifold; evaluating them on jets of a composed map
``u = φ(x, y)`` gives Christoffel symbols and curvature as jets in ``(x, y)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence

import numpy as np

from bitensionlab.errors import BadParameter, ChartViolation, MetricDegenerate, SingularCompose
from bitensionlab.exprdsl import Expr, Num, derivative, eval_value, parse_expr
from bitensionlab.jets import Jet, jet_contract, jet_inv

logger = logging.getLogger("bitensionlab.ambient")

ManifoldKind = Literal["euclidean", "sphere", "hyperbolic", "conformal", "metric"]

# relative floor on the smallest metric eigenvalue
_DEGENERACY_RTOL = 1e-13


@dataclass(frozen=True)
class ChartDomain:
    """Valid chart region: all of R^n, or the open ball ``|u| < radius``."""

    description: str
    radius: float | None = None

    def contains(self, point: Sequence[float]) -> bool:
        if not all(math.isfinite(float(c)) for c in point):
            return False
        if self.radius is None:
            return True
        return math.fsum(float(c) ** 2 for c in point) < self.radius**2


@dataclass(frozen=True)
class AmbientManifold:
    dim: int
    metric: tuple[tuple[Expr, ...], ...]
    chart_domain: ChartDomain
    label: str
    kind: ManifoldKind = "metric"
    # known constant sectional curvature of built-ins, None otherwise
    curvature: float | None = None
    params: dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(f"u{k + 1}" for k in range(self.dim))

    @cached_property
    def _first_derivatives(self) -> tuple[tuple[tuple[Expr, ...], ...], ...]:
        # [c][a][b] = ∂_c h_ab
        memo: dict[tuple[int, str], Expr] = {}

        def d(e: Expr, var: str) -> Expr:
            key = (id(e), var)
            if key not in memo:
                memo[key] = derivative(e, var)
            return memo[key]

        return tuple(
            tuple(tuple(d(self.metric[a][b], var) for b in range(self.dim)) for a in range(self.dim))
            for var in self.variables
        )

    @cached_property
    def _second_derivatives(self) -> tuple[tuple[tuple[tuple[Expr, ...], ...], ...], ...]:
        # [c][d][a][b] = ∂_c ∂_d h_ab, built from the shared first-derivative trees
        first = self._first_derivatives
        memo: dict[tuple[int, str], Expr] = {}

        def d(e: Expr, var: str) -> Expr:
            key = (id(e), var)
            if key not in memo:
                memo[key] = derivative(e, var)
            return memo[key]

        n = self.dim
        table = [[None] * n for _ in range(n)]
        for c in range(n):
            for dd in range(c, n):
                block = tuple(
                    tuple(d(first[dd][a][b], self.variables[c]) for b in range(n)) for a in range(n)
                )
                table[c][dd] = block
                table[dd][c] = block
        return tuple(tuple(row) for row in table)  # type: ignore[arg-type]


# ───────────── construction ─────────────


def _symmetric(entries: Sequence[Sequence[Expr]]) -> tuple[tuple[Expr, ...], ...]:
    n = len(entries)
    return tuple(tuple(entries[min(a, b)][max(a, b)] for b in range(n)) for a in range(n))


def _conformal_metric(n: int, factor: Expr) -> tuple[tuple[Expr, ...], ...]:
    zero = Num(0.0)
    return tuple(tuple(factor if a == b else zero for b in range(n)) for a in range(n))


def _radius_sum(n: int) -> str:
    return " + ".join(f"u{k + 1}^2" for k in range(n))


def make_builtin_manifold(
    kind: str,
    n: int,
    *,
    r: float = 1.0,
    factor: str | Expr | None = None,
) -> AmbientManifold:
    """Build ``euclidean(n)``, ``sphere(n, r)``, ``hyperbolic(n, r)`` or ``conformal(n, factor)``.

    ``sphere`` uses the stereographic chart from ``(0, ..., 0, r)`` (metric
    ``4 r^4 / (r^2 + |u|^2)^2 δ``), ``hyperbolic`` the ball chart of radius
    ``r`` (metric ``4 r^4 / (r^2 - |u|^2)^2 δ``) and ``conformal`` the metric
    ``factor(u) δ``.
    """
    if not isinstance(n, int) or n < 2:
        raise BadParameter(f"ambient dimension must be an integer >= 2, got {n!r}")
    if kind in {"sphere", "hyperbolic"} and not (math.isfinite(r) and r > 0.0):
        raise BadParameter(f"radius must be positive, got {r!r}")

    if kind == "euclidean":
        metric = _conformal_metric(n, Num(1.0))
        return AmbientManifold(n, metric, ChartDomain("R^n"), f"euclidean({n})", "euclidean", 0.0)
    if kind == "sphere":
        lam2 = parse_expr(f"{4.0 * r**4!r}/({r * r!r} + {_radius_sum(n)})^2")
        return AmbientManifold(
            n,
            _conformal_metric(n, lam2),
            ChartDomain("stereographic chart, all points but the projection pole"),
            f"sphere({n},{r:g})",
            "sphere",
            1.0 / (r * r),
            {"r": r},
        )
    if kind == "hyperbolic":
        lam2 = parse_expr(f"{4.0 * r**4!r}/({r * r!r} - ({_radius_sum(n)}))^2")
        return AmbientManifold(
            n,
            _conformal_metric(n, lam2),
            ChartDomain(f"open ball of radius {r:g}", radius=r),
            f"hyperbolic({n},{r:g})",
            "hyperbolic",
            -1.0 / (r * r),
            {"r": r},
        )
    if kind == "conformal":
        if factor is None:
            raise BadParameter("conformal manifolds need a factor expression")
        expr = parse_expr(factor) if isinstance(factor, str) else factor
        return AmbientManifold(n, _conformal_metric(n, expr), ChartDomain("R^n"), f"conformal({n})", "conformal")
    raise BadParameter(f"unknown manifold kind {kind!r}")


def euclidean(n: int) -> AmbientManifold:
    return make_builtin_manifold("euclidean", n)


def sphere(n: int, r: float = 1.0) -> AmbientManifold:
    return make_builtin_manifold("sphere", n, r=r)


def hyperbolic(n: int, r: float = 1.0) -> AmbientManifold:
    return make_builtin_manifold("hyperbolic", n, r=r)


def conformal(n: int, factor: str | Expr) -> AmbientManifold:
    return make_builtin_manifold("conformal", n, factor=factor)


def manifold_from_metric(entries: Sequence[Sequence[str | Expr]], label: str = "custom") -> AmbientManifold:
    """Manifold from a full or upper-triangular matrix of metric expressions."""
    n = len(entries)
    if n < 2:
        raise BadParameter(f"ambient dimension must be >= 2, got {n}")
    parsed = [[parse_expr(e) if isinstance(e, str) else e for e in row] for row in entries]
    # upper-triangular rows may be ragged: row a holds columns a..n-1
    grid: list[list[Expr]] = [[Num(0.0)] * n for _ in range(n)]
    for a, row in enumerate(parsed):
        offset = n - len(row)
        for k, e in enumerate(row):
            grid[a][offset + k] = e
    return AmbientManifold(n, _symmetric(grid), ChartDomain("R^n"), label, "metric")


# ───────────── evaluation ─────────────


@dataclass(frozen=True)
class AmbientJets:
    """Metric, inverse, derivatives and curvature of ``h`` along a map, all jets of one order.

    Index layout: ``h[a, b]``, ``dh[c, a, b] = ∂_c h_ab``, ``gamma[a, b, c] = Γ^a_bc``,
    ``riemann13[a, b, c, d] = R^a_bcd`` and ``riemann[x, y, z, w] = R(∂x, ∂y, ∂z, ∂w)``.
    """

    h: Jet
    h_inv: Jet
    dh: Jet
    gamma: Jet
    riemann13: Jet | None
    riemann: Jet | None


def _lift(point: Sequence[Jet | float], order: int, plane: tuple[int, int]) -> list[Jet]:
    base = (0.0, 0.0)
    out: list[Jet] = []
    for k, c in enumerate(point):
        if isinstance(c, Jet):
            out.append(c)
            continue
        arr = np.zeros((order + 1) * (order + 2) // 2)
        arr[0] = float(c)
        if order >= 1 and k in plane:
            arr[1 + plane.index(k)] = 1.0
        out.append(Jet(order, arr, base))
    return out


def _matrix(exprs: Sequence[Sequence[Expr]], env: dict, cache: dict, template: Jet) -> Jet:
    n = len(exprs)
    arr = np.zeros((template.coeffs.shape[0], n, n))
    for a in range(n):
        for b in range(n):
            e = exprs[a][b]
            if isinstance(e, Num):
                arr[0, a, b] = e.value
                continue
            v = eval_value(e, env, cache)
            if isinstance(v, Jet):
                arr[:, a, b] = v.coeffs
            else:
                arr[0, a, b] = v
    return Jet(template.order, arr, template.base_point)


def ambient_jets(
    manifold: AmbientManifold,
    u: Sequence[Jet | float],
    *,
    curvature: bool = True,
    jet_order: int = 0,
    plane: tuple[int, int] = (0, 1),
) -> AmbientJets:
    """Evaluate ``h``, ``Γ`` and (optionally) ``R`` at ``u``.

    ``u`` holds jets of a composed map, or plain coordinates; plain coordinates
    are expanded to ``jet_order`` along the chart directions named by ``plane``.
    """
    if len(u) != manifold.dim:
        raise BadParameter(f"{manifold.label} needs {manifold.dim} coordinates, got {len(u)}")
    jets = _lift(u, jet_order, plane)
    template = jets[0]
    point = [float(j.coeffs[0]) for j in jets]
    if not manifold.chart_domain.contains(point):
        raise ChartViolation(f"{point} lies outside {manifold.chart_domain.description}")

    env = dict(zip(manifold.variables, jets))
    cache: dict = {}
    n = manifold.dim
    try:
        h = _matrix(manifold.metric, env, cache, template)
        dh_blocks = [_matrix(manifold._first_derivatives[c], env, cache, template) for c in range(n)]
        d2_blocks = None
        if curvature:
            d2_blocks = [
                [_matrix(manifold._second_derivatives[c][d], env, cache, template) for d in range(n)]
                for c in range(n)
            ]
    except SingularCompose as exc:
        raise ChartViolation(f"metric of {manifold.label} is singular at {point}") from exc

    h0 = np.asarray(h.value)
    if not np.all(np.isfinite(h0)):
        raise ChartViolation(f"metric of {manifold.label} is not finite at {point}")
    eig = np.linalg.eigvalsh(h0)
    if eig[0] <= _DEGENERACY_RTOL * max(1.0, float(np.abs(eig).max())):
        raise MetricDegenerate(f"metric of {manifold.label} is not positive definite at {point}")

    h_inv = jet_inv(h)
    dh = Jet(template.order, np.stack([b.coeffs for b in dh_blocks], axis=1), template.base_point)

    # t[d, b, c] = ∂_b h_dc + ∂_c h_db - ∂_d h_bc
    t = dh.transpose(1, 0, 2) + dh.transpose(1, 2, 0) - dh
    gamma = 0.5 * jet_contract("ad,dbc->abc", h_inv, t)

    if d2_blocks is None:
        return AmbientJets(h, h_inv, dh, gamma, None, None)

    d2h = Jet(
        template.order,
        np.stack([np.stack([blk.coeffs for blk in row], axis=1) for row in d2_blocks], axis=1),
        template.base_point,
    )  # d2h[c, d, a, b] = ∂_c ∂_d h_ab
    # ∂_c t[e, d, b] = ∂_c∂_d h_eb + ∂_c∂_b h_ed - ∂_c∂_e h_db
    dt = d2h.transpose(0, 2, 1, 3) + d2h.transpose(0, 2, 3, 1) - d2h
    # ∂_c h^{ae} = -h^{af} ∂_c h_fg h^{ge}
    dh_inv = -jet_contract("cag,ge->cae", jet_contract("af,cfg->cag", h_inv, dh), h_inv)
    # dgamma[c, a, d, b] = ∂_c Γ^a_db
    dgamma = 0.5 * (jet_contract("cae,edb->cadb", dh_inv, t) + jet_contract("ae,cedb->cadb", h_inv, dt))
    riemann13 = (
        dgamma.transpose(1, 3, 0, 2)
        - dgamma.transpose(1, 3, 2, 0)
        + jet_contract("ace,edb->abcd", gamma, gamma)
        - jet_contract("ade,ecb->abcd", gamma, gamma)
    )
    riemann = jet_contract("za,awxy->xyzw", h, riemann13)
    return AmbientJets(h, h_inv, dh, gamma, riemann13, riemann)


def christoffel_at(
    manifold: AmbientManifold,
    u: Sequence[Jet | float],
    jet_order: int = 0,
    plane: tuple[int, int] = (0, 1),
) -> Jet:
    """Γ^a_bc at ``u`` as a jet shaped ``(n, n, n)``; symmetric in ``(b, c)``."""
    return ambient_jets(manifold, u, curvature=False, jet_order=jet_order, plane=plane).gamma


@dataclass(frozen=True)
class CurvatureAt:
    """Point values of the metric and curvature tensors of ``N``."""

    point: tuple[float, ...]
    metric: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray

    def inner(self, a: Sequence[float], b: Sequence[float]) -> float:
        return float(np.asarray(a) @ self.metric @ np.asarray(b))

    def tensor(self, x: Sequence[float], y: Sequence[float], z: Sequence[float], w: Sequence[float]) -> float:
        return float(np.einsum("xyzw,x,y,z,w->", self.riemann, x, y, z, w))

    def sectional(self, u: Sequence[float], v: Sequence[float]) -> float:
        area2 = self.inner(u, u) * self.inner(v, v) - self.inner(u, v) ** 2
        if area2 <= 0.0:
            raise BadParameter("sectional curvature needs linearly independent vectors")
        return self.tensor(u, v, u, v) / area2

    def ricci_form(self, u: Sequence[float], v: Sequence[float]) -> float:
        return float(np.asarray(u) @ self.ricci @ np.asarray(v))


def ricci_from(riemann13: Jet) -> Jet:
    """Ric_db = R^a_bad (trace of X ↦ R(X, Y) Z)."""
    return Jet._wrap(riemann13.order, np.einsum("Zabad->Zdb", riemann13.coeffs), riemann13.base_point)


def curvature_at(manifold: AmbientManifold, u: Sequence[float]) -> CurvatureAt:
    """Riemann (0,4) tensor, Ricci tensor and sectional accessor at a chart point."""
    amb = ambient_jets(manifold, [float(c) for c in u], curvature=True)
    assert amb.riemann is not None and amb.riemann13 is not None
    return CurvatureAt(
        point=tuple(float(c) for c in u),
        metric=np.asarray(amb.h.value),
        christoffel=np.asarray(amb.gamma.value),
        riemann=np.asarray(amb.riemann.value),
        ricci=np.asarray(ricci_from(amb.riemann13).value),
    )


__all__ = [
    "AmbientJets",
    "AmbientManifold",
    "ChartDomain",
    "CurvatureAt",
    "ambient_jets",
    "christoffel_at",
    "conformal",
    "curvature_at",
    "euclidean",
    "hyperbolic",
    "make_builtin_manifold",
    "manifold_from_metric",
    "ricci_from",
    "sphere",
]
