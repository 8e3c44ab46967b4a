"""Maps and immersions of a parameter rectangle into a chart of ``(N, h)``.

All geometry is assembled in the coordinate basis ``(∂x, ∂y)`` from jets of
``φ`` at a point, then projected onto the Gram–Schmidt frame ``X1, X2``.

Order bookkeeping for a :class:`PointJets` of order ``K``::

    φ                K        g, h along φ, P      K-1
    dφ               K-1      Γ (domain), ∇dφ, τ   K-2
    ∇⊥H, ∇∇dφ        K-3      Δ⊥H                  K-4
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence

import numpy as np

from bitensionlab.ambient import AmbientJets, AmbientManifold, ambient_jets, ricci_from
from bitensionlab.errors import (
    BadParameter,
    ChartViolation,
    ImmersionDegenerate,
    OrderTooLow,
    SingularCompose,
)
from bitensionlab.exprdsl import Expr, eval_expr, free_variables, parse_expr
from bitensionlab.jets import MAX_ORDER, Jet, coordinate_jets, jet_contract, jet_extract, jet_inv, jet_stack

logger = logging.getLogger("bitensionlab.immersion")

MetricMode = Literal["induced", "prescribed"]

_RANK_RTOL = 1e-12
_COV_LETTERS = "pqrs"


# ───────────── domain / immersion types ─────────────


@dataclass(frozen=True)
class Domain:
    """Parameter rectangle ``[x0, x1] × [y0, y1]``.

    ``compact`` marks domains that cover a closed surface (both axes periodic,
    or a chart like the polar sphere whose boundary has measure zero).
    """

    x0: float
    x1: float
    y0: float
    y1: float
    periodic_x: bool = False
    periodic_y: bool = False
    compact: bool = False
    topology: str = "disk"

    def __post_init__(self) -> None:
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise BadParameter(f"empty domain [{self.x0}, {self.x1}] x [{self.y0}, {self.y1}]")

    def contains(self, p: Sequence[float]) -> bool:
        x, y = float(p[0]), float(p[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            return False
        inside_x = self.periodic_x or self.x0 < x < self.x1
        inside_y = self.periodic_y or self.y0 < y < self.y1
        return inside_x and inside_y

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


@dataclass(frozen=True)
class Immersion:
    ambient: AmbientManifold
    coords: tuple[Expr, ...]
    domain: Domain
    label: str = "immersion"
    metric_mode: MetricMode = "induced"
    # g11, g12, g22 when metric_mode == "prescribed"
    prescribed: tuple[Expr, Expr, Expr] | None = None
    params: dict[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if len(self.coords) != self.ambient.dim:
            raise BadParameter(f"{self.label}: {len(self.coords)} coordinates for a {self.ambient.dim}-dimensional ambient")
        stray = set().union(*(free_variables(e) for e in self.coords)) - {"x", "y"}
        if stray:
            raise BadParameter(f"{self.label}: coordinates use unknown variables {sorted(stray)}")
        if (self.metric_mode == "prescribed") != (self.prescribed is not None):
            raise BadParameter(f"{self.label}: prescribed metric_mode needs exactly three metric expressions")

    @property
    def is_immersion(self) -> bool:
        return self.metric_mode == "induced"


def make_immersion(
    ambient: AmbientManifold,
    coords: Sequence[str | Expr],
    domain: Domain,
    *,
    label: str = "immersion",
    prescribed: Sequence[str | Expr] | None = None,
    params: dict[str, float] | None = None,
) -> Immersion:
    exprs = tuple(parse_expr(c) if isinstance(c, str) else c for c in coords)
    metric = None
    if prescribed is not None:
        if len(prescribed) != 3:
            raise BadParameter("prescribed metric needs g11, g12, g22")
        metric = tuple(parse_expr(c) if isinstance(c, str) else c for c in prescribed)
    return Immersion(
        ambient,
        exprs,
        domain,
        label,
        "prescribed" if metric is not None else "induced",
        metric,  # type: ignore[arg-type]
        dict(params or {}),
    )


# ───────────── jets at a point ─────────────


class PointJets:
    """Lazily computed jets of every coordinate-basis quantity at one parameter point."""

    def __init__(self, immersion: Immersion, point: Sequence[float], order: int) -> None:
        if order > MAX_ORDER:
            raise BadParameter(f"jet order {order} exceeds the supported maximum {MAX_ORDER}")
        if order < 2:
            raise OrderTooLow("geometry", 2, order)
        p = (float(point[0]), float(point[1]))
        if not immersion.domain.contains(p):
            raise ChartViolation(f"{p} lies outside the parameter domain of {immersion.label}")
        self.immersion = immersion
        self.point = p
        self.order = order
        self.n = immersion.ambient.dim
        self._x, self._y = coordinate_jets(p, order)
        self._pullback: dict[int, Jet] = {}

    def require(self, operation: str, needed: int) -> None:
        if self.order < needed:
            raise OrderTooLow(operation, needed, self.order)

    def _env(self) -> dict[str, Jet]:
        return {"x": self._x, "y": self._y}

    def scalar(self, f: Expr | str) -> Jet:
        """Jet of a scalar expression in ``(x, y)`` at this point."""
        expr = parse_expr(f) if isinstance(f, str) else f
        return eval_expr(expr, self._env())

    # map and ambient

    @cached_property
    def phi(self) -> Jet:
        env, cache = self._env(), {}
        try:
            comps = [eval_expr(e, env, cache) for e in self.immersion.coords]
        except SingularCompose as exc:
            raise ChartViolation(f"{self.immersion.label} is singular at {self.point}") from exc
        return jet_stack(comps)

    @cached_property
    def dphi(self) -> Jet:
        # dphi[i, a] = ∂_i φ^a
        return self.phi.gradient()

    @cached_property
    def ambient(self) -> AmbientJets:
        top = self.order - 1
        return ambient_jets(self.immersion.ambient, [self.phi[a].truncate(top) for a in range(self.n)])

    def h(self, order: int) -> Jet:
        return self.ambient.h.truncate(order)

    @cached_property
    def dphi_lower(self) -> Jet:
        # h_ab ∂_j φ^b
        return jet_contract("ab,jb->ja", self.ambient.h, self.dphi)

    def pullback_connection(self, order: int) -> Jet:
        """``G[i, a, c] = Γ^a_bc ∂_i φ^b`` so that ``∇_i V = ∂_i V + G_i V``."""
        if order not in self._pullback:
            gamma = self.ambient.gamma.truncate(order)
            self._pullback[order] = jet_contract("abc,ib->iac", gamma, self.dphi.truncate(order))
        return self._pullback[order]

    # domain metric

    @cached_property
    def g(self) -> Jet:
        imm = self.immersion
        if imm.metric_mode == "prescribed":
            assert imm.prescribed is not None
            g11, g12, g22 = (eval_expr(e, self._env()).truncate(self.order - 1) for e in imm.prescribed)
            g = jet_stack([jet_stack([g11, g12]), jet_stack([g12, g22])])
        else:
            g = jet_contract("ia,ja->ij", self.dphi, self.dphi_lower)
        g0 = np.asarray(g.value)
        eig = np.linalg.eigvalsh(g0)
        if not np.all(np.isfinite(eig)) or eig[0] <= _RANK_RTOL * max(1.0, float(abs(eig[-1]))):
            what = "prescribed metric is not positive definite" if imm.metric_mode == "prescribed" else "dφ has rank < 2"
            raise ImmersionDegenerate(f"{imm.label}: {what} at {self.point}")
        return g

    @cached_property
    def g_inv(self) -> Jet:
        return jet_inv(self.g)

    @cached_property
    def conn(self) -> Jet:
        # conn[k, i, j] = Γ^k_ij of g
        dg = self.g.gradient()
        t = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
        return 0.5 * jet_contract("kl,lij->kij", self.g_inv.truncate(dg.order), t)

    def nabla(self, tensor: Jet, ncov: int, *, vector: bool) -> Jet:
        """Covariant derivative of a field with ``ncov`` domain slots and an optional ``φ^{-1}TN`` slot.

        The new derivative slot comes first: ``out[i, j1, .., (a)] = (∇_{∂i} T)(∂j1, .., )``.
        """
        m = min(tensor.order - 1, self.conn.order)
        if m < 0:
            raise OrderTooLow("covariant derivative", 1, tensor.order)
        field_ = tensor.truncate(m + 1)
        out = field_.gradient()
        conn = self.conn.truncate(m)
        t = field_.truncate(m)
        cov = _COV_LETTERS[:ncov]
        tail = "a" if vector else ""
        result = "i" + cov + tail
        for s in range(ncov):
            sub = cov[:s] + "l" + cov[s + 1 :] + tail
            out = out - jet_contract(f"li{cov[s]},{sub}->{result}", conn, t)
        if vector:
            out = out + jet_contract(f"iac,{cov}c->{result}", self.pullback_connection(m), t)
        return out

    # second fundamental form and friends

    @cached_property
    def hess_phi(self) -> Jet:
        # (∇dφ)[i, j, a]
        m = self.order - 2
        d = self.dphi.truncate(m)
        ddphi = self.dphi.gradient()
        bent = jet_contract("iac,jc->ija", self.pullback_connection(m), d)
        return ddphi + bent - jet_contract("kij,ka->ija", self.conn, d)

    @cached_property
    def tau(self) -> Jet:
        return jet_contract("ij,ija->a", self.g_inv.truncate(self.order - 2), self.hess_phi)

    @cached_property
    def normal_projector(self) -> Jet:
        # P^a_b = δ^a_b - ∂_i φ^a g^{ij} h_bc ∂_j φ^c
        raised = jet_contract("ia,ij->ja", self.dphi, self.g_inv)
        tangential = jet_contract("ja,jb->ab", raised, self.dphi_lower)
        return Jet.constant(np.eye(self.n), tangential.order, tangential.base_point) - tangential

    def project_normal(self, v: Jet) -> Jet:
        """Apply ``P`` on the trailing ambient index of ``v``."""
        p = self.normal_projector.truncate(v.order)
        lead = "ijkl"[: v.ndim - 1]
        return jet_contract(f"ab,{lead}b->{lead}a", p, v)

    @cached_property
    def second_fundamental(self) -> Jet:
        return self.project_normal(self.hess_phi)

    @cached_property
    def mean_curvature(self) -> Jet:
        return 0.5 * jet_contract("ij,ija->a", self.g_inv.truncate(self.order - 2), self.second_fundamental)

    def inner(self, u: Jet, v: Jet, u_sub: str = "a", v_sub: str = "a", out: str = "") -> Jet:
        """``h(u, v)`` over the trailing ambient index; ``u_sub``/``v_sub`` name all value axes."""
        m = min(u.order, v.order)
        lowered = jet_contract(f"{u_sub},ab->{u_sub[:-1]}b", u.truncate(m), self.h(m))
        return jet_contract(f"{u_sub[:-1]}b,{v_sub[:-1]}b->{out}", lowered, v.truncate(m))

    @cached_property
    def shape_operator(self) -> Jet:
        # A[i, j] = h(B_ij, H)
        return self.inner(self.second_fundamental, self.mean_curvature, "ija", "a", "ij")

    @cached_property
    def nabla_perp_h(self) -> Jet:
        return self.project_normal(self.nabla(self.mean_curvature, 0, vector=True))

    @cached_property
    def laplacian_perp_h(self) -> Jet:
        w = self.nabla_perp_h
        second = self.project_normal(self.nabla(w, 1, vector=True))
        return -jet_contract("ij,ija->a", self.g_inv.truncate(second.order), second)

    @cached_property
    def third_fundamental(self) -> Jet:
        # [i, j, k, a] = (∇_{∂i} ∇dφ)(∂j, ∂k)
        return self.nabla(self.hess_phi, 2, vector=True)


# ───────────── point values ─────────────


def frame_matrix(g: np.ndarray) -> np.ndarray:
    """Rows are the Gram–Schmidt frame ``X1, X2`` in the ``(∂x, ∂y)`` basis."""
    g11, g12, g22 = float(g[0, 0]), float(g[0, 1]), float(g[1, 1])
    a = math.sqrt(g11)
    s2 = g22 - g12 * g12 / g11
    if s2 <= 0.0:
        raise ImmersionDegenerate("metric is not positive definite")
    s = math.sqrt(s2)
    return np.array([[1.0 / a, 0.0], [-g12 / (g11 * s), 1.0 / s]])


def to_frame(t: np.ndarray, e: np.ndarray, slots: int = 2) -> np.ndarray:
    """Express the first ``slots`` covariant indices of ``t`` in the frame ``e``."""
    out = np.asarray(t, dtype=float)
    for k in range(slots):
        out = np.moveaxis(np.tensordot(e, out, axes=([1], [k])), 0, k)
    return out


def eigen_sym2(a: np.ndarray) -> tuple[float, float]:
    """Eigenvalues ``λ1 ≥ λ2`` of a symmetric 2×2 matrix."""
    mean = 0.5 * (float(a[0, 0]) + float(a[1, 1]))
    rad = math.hypot(0.5 * (float(a[0, 0]) - float(a[1, 1])), float(a[0, 1]))
    return mean + rad, mean - rad


def brioschi(g: Jet) -> float:
    """Gaussian curvature of ``g`` from its components and their derivatives up to order two."""
    if g.order < 2:
        raise OrderTooLow("Brioschi curvature", 2, g.order)

    e_, f_, g_ = (float(jet_extract(g[i, j], (0, 0))) for i, j in ((0, 0), (0, 1), (1, 1)))
    ex, ey = (float(jet_extract(g[0, 0], mi)) for mi in ((1, 0), (0, 1)))
    fx, fy = (float(jet_extract(g[0, 1], mi)) for mi in ((1, 0), (0, 1)))
    gx, gy = (float(jet_extract(g[1, 1], mi)) for mi in ((1, 0), (0, 1)))
    eyy = float(jet_extract(g[0, 0], (0, 2)))
    fxy = float(jet_extract(g[0, 1], (1, 1)))
    gxx = float(jet_extract(g[1, 1], (2, 0)))
    m1 = np.array(
        [
            [-0.5 * eyy + fxy - 0.5 * gxx, 0.5 * ex, fx - 0.5 * ey],
            [fy - 0.5 * gx, e_, f_],
            [0.5 * gy, f_, g_],
        ]
    )
    m2 = np.array([[0.0, 0.5 * ey, 0.5 * gx], [0.5 * ey, e_, f_], [0.5 * gx, f_, g_]])
    return float((np.linalg.det(m1) - np.linalg.det(m2)) / (e_ * g_ - f_ * f_) ** 2)


@dataclass(frozen=True)
class PointGeometry:
    p: tuple[float, float]
    frame: np.ndarray
    g: np.ndarray
    h: np.ndarray
    dphi_frame: np.ndarray
    B: np.ndarray
    H: np.ndarray
    normH2: float
    A_H: np.ndarray
    lambda1: float
    lambda2: float
    mu: float
    K: float
    K_gauss: float
    conn: np.ndarray
    tau: np.ndarray

    @property
    def gauss_residual(self) -> float:
        return abs(self.K - self.K_gauss)

    @property
    def pseudo_umbilic_residual(self) -> float:
        return float(np.linalg.norm(self.A_H - self.normH2 * np.eye(2)))

    @property
    def norm_AH2(self) -> float:
        return float(np.sum(self.A_H * self.A_H))


def _gauss_curvature(pj: PointJets, e: np.ndarray, b_frame: np.ndarray, dphi_frame: np.ndarray) -> float:
    riemann = pj.ambient.riemann
    assert riemann is not None
    rm = np.asarray(riemann.value)
    h0 = np.asarray(pj.ambient.h.value)
    v1, v2 = dphi_frame
    sec = float(np.einsum("xyzw,x,y,z,w->", rm, v1, v2, v1, v2))
    b11, b12, b22 = b_frame[0, 0], b_frame[0, 1], b_frame[1, 1]
    return sec + float(b11 @ h0 @ b22) - float(b12 @ h0 @ b12)


def point_geometry(pj: PointJets) -> PointGeometry:
    if not pj.immersion.is_immersion:
        raise BadParameter(f"{pj.immersion.label}: extrinsic geometry needs an induced metric")
    g0 = np.asarray(pj.g.value)
    e = frame_matrix(g0)
    dphi_frame = e @ np.asarray(pj.dphi.value)
    b_frame = to_frame(np.asarray(pj.second_fundamental.value), e)
    h_vec = np.asarray(pj.mean_curvature.value)
    h0 = np.asarray(pj.ambient.h.value)
    a_frame = to_frame(np.asarray(pj.shape_operator.value), e)
    a_frame = 0.5 * (a_frame + a_frame.T)
    lam1, lam2 = eigen_sym2(a_frame)
    k_gauss = _gauss_curvature(pj, e, b_frame, dphi_frame)
    k_intr = brioschi(pj.g) if pj.g.order >= 2 else k_gauss
    return PointGeometry(
        p=pj.point,
        frame=e,
        g=g0,
        h=h0,
        dphi_frame=dphi_frame,
        B=b_frame,
        H=h_vec,
        normH2=float(h_vec @ h0 @ h_vec),
        A_H=a_frame,
        lambda1=lam1,
        lambda2=lam2,
        mu=lam1 - lam2,
        K=k_intr,
        K_gauss=k_gauss,
        conn=np.asarray(pj.conn.value),
        tau=np.asarray(pj.tau.value),
    )


def geometry_at(phi: Immersion, p: Sequence[float], *, jet_order: int = 3) -> PointGeometry:
    """Frame, second fundamental form, mean curvature, ``A_H`` and ``K`` at ``p``.

    ``K`` comes from the Brioschi formula when ``jet_order >= 3``; at order 2
    the Gauss equation value is used for both ``K`` and ``K_gauss``.
    """
    return point_geometry(PointJets(phi, p, jet_order))


def pseudo_umbilic_residual(phi: Immersion, p: Sequence[float], *, jet_order: int = 2) -> float:
    """``‖A_H - |H|^2 Id‖_F`` in the orthonormal frame."""
    return geometry_at(phi, p, jet_order=jet_order).pseudo_umbilic_residual


def curvature_sum(pj: PointJets, vector: np.ndarray | None = None) -> float:
    """``Σ_i R^N(X_i, V, X_i, V)`` for ``V = H`` unless another ambient vector is given."""
    riemann = pj.ambient.riemann
    assert riemann is not None
    v = np.asarray(pj.mean_curvature.value) if vector is None else vector
    rm = np.asarray(riemann.value)
    d = np.asarray(pj.dphi.value)
    gi = np.asarray(pj.g_inv.value)
    return float(np.einsum("ij,xyzw,ix,y,jz,w->", gi, rm, d, v, d, v))


def ricci_hh(pj: PointJets) -> float:
    riemann13 = pj.ambient.riemann13
    assert riemann13 is not None
    ric = np.asarray(ricci_from(riemann13).value)
    v = np.asarray(pj.mean_curvature.value)
    return float(v @ ric @ v)


@dataclass(frozen=True)
class NormalDerivatives:
    nabla_perp_H: np.ndarray  # rows: ∇⊥_{X1} H, ∇⊥_{X2} H
    norm2: float
    laplacian: np.ndarray | None
    laplacian_dot_H: float | None


def normal_derivatives(pj: PointJets) -> NormalDerivatives:
    pj.require("normal derivative of H", 3)
    e = frame_matrix(np.asarray(pj.g.value))
    h0 = np.asarray(pj.ambient.h.value)
    w = e @ np.asarray(pj.nabla_perp_h.value)
    norm2 = float(np.einsum("ia,ab,ib->", w, h0, w))
    if pj.order < 4:
        return NormalDerivatives(w, norm2, None, None)
    lap = np.asarray(pj.laplacian_perp_h.value)
    return NormalDerivatives(w, norm2, lap, float(lap @ h0 @ np.asarray(pj.mean_curvature.value)))


def normal_derivatives_at(phi: Immersion, p: Sequence[float], *, jet_order: int = 4) -> NormalDerivatives:
    """``∇⊥H`` in the frame, ``|∇⊥H|^2`` and, from order 4, ``Δ⊥H`` and ``<Δ⊥H, H>``."""
    if not phi.is_immersion:
        raise BadParameter(f"{phi.label}: normal bundle needs an induced metric")
    return normal_derivatives(PointJets(phi, p, jet_order))


def nabla_ah_norm2(pj: PointJets) -> float:
    """``|∇A_H|^2`` of the (0,2) tensor ``<B(.,.), H>``."""
    pj.require("covariant derivative of A_H", 3)
    da = np.asarray(pj.nabla(pj.shape_operator, 2, vector=False).value)
    gi = np.asarray(pj.g_inv.value)
    return float(np.einsum("kij,kl,im,jn,lmn->", da, gi, gi, gi, da))


__all__ = [
    "Domain",
    "Immersion",
    "NormalDerivatives",
    "PointGeometry",
    "PointJets",
    "brioschi",
    "curvature_sum",
    "eigen_sym2",
    "frame_matrix",
    "geometry_at",
    "make_immersion",
    "nabla_ah_norm2",
    "normal_derivatives",
    "normal_derivatives_at",
    "point_geometry",
    "pseudo_umbilic_residual",
    "ricci_hh",
    "to_frame",
]
