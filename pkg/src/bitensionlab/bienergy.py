"""Tension, bitension and the biharmonic stress-energy tensor ``S2`` of a surface map.

Sign conventions: every Laplacian is ``∇*∇ = -trace ∇²`` (so ``Δf = -f''`` on
the line), ``τ = trace ∇dφ`` and ``τ2 = trace ∇²τ - trace R^N(dφ, τ)dφ``.
With these, ``div S2 = -<dφ, τ2>`` holds for every map.

Required jet orders: τ 2, S2 and T 3, τ2 / div S2 / Hess|τ|² 4, ΔᴿS2 5.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

from bitensionlab.errors import BadParameter
from bitensionlab.exprdsl import BinOp, Call, Expr, Neg, Num, Var, parse_expr
from bitensionlab.immersion import Immersion, PointJets, frame_matrix, point_geometry, to_frame
from bitensionlab.jets import Jet, jet_contract

logger = logging.getLogger("bitensionlab.bienergy")

ScalarField = Union[Expr, str, Callable[[PointJets], Jet], Jet]

_EXPR_TYPES = (Num, Var, Neg, BinOp, Call)

REQUIRED_ORDER = {
    "tension": 2,
    "stress_energy": 3,
    "bitension": 4,
    "divergence": 4,
    "hessian_tau": 4,
    "rough_laplacian": 5,
}


@dataclass(frozen=True)
class SymTensor2:
    """Symmetric 2-tensor by its frame components at one point.

    Entries are plain floats: the value part of a tensor field. Fields that are
    still differentiated stay as ``(2, 2)`` coordinate jets, as ``BienergyJets.s2`` does.
    """

    s11: float
    s12: float
    s22: float

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> SymTensor2:
        return cls(float(m[0, 0]), 0.5 * (float(m[0, 1]) + float(m[1, 0])), float(m[1, 1]))

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s12, self.s22]])

    @property
    def norm2(self) -> float:
        return self.s11 * self.s11 + 2.0 * self.s12 * self.s12 + self.s22 * self.s22

    @property
    def trace(self) -> float:
        return self.s11 + self.s22

    def __sub__(self, other: SymTensor2) -> SymTensor2:
        return SymTensor2(self.s11 - other.s11, self.s12 - other.s12, self.s22 - other.s22)

    def frobenius(self) -> float:
        return float(np.sqrt(self.norm2))


class BienergyJets(PointJets):
    """:class:`PointJets` extended with the bienergy quantities."""

    @cached_property
    def nabla_tau(self) -> Jet:
        return self.nabla(self.tau, 0, vector=True)

    @cached_property
    def nabla2_tau(self) -> Jet:
        return self.nabla(self.nabla_tau, 1, vector=True)

    @cached_property
    def tau_norm2(self) -> Jet:
        return self.inner(self.tau, self.tau)

    @cached_property
    def tau2(self) -> Jet:
        self.require("bitension", REQUIRED_ORDER["bitension"])
        m = self.nabla2_tau.order
        gi = self.g_inv.truncate(m)
        rough = jet_contract("ij,ija->a", gi, self.nabla2_tau)
        r13 = self.ambient.riemann13
        assert r13 is not None
        d = self.dphi.truncate(m)
        # R^N(dφ_i, τ) dφ_j = R^a_bcd ∂_j φ^b ∂_i φ^c τ^d
        rt = jet_contract("abcd,d->abc", r13.truncate(m), self.tau.truncate(m))
        rt = jet_contract("abc,ic->iab", rt, d)
        rt = jet_contract("iab,jb->ija", rt, d)
        return rough - jet_contract("ij,ija->a", gi, rt)

    @cached_property
    def _dphi_nabla_tau(self) -> Jet:
        # [i, j] = <dφ(∂i), ∇_j τ>
        self.require("stress-energy tensor", REQUIRED_ORDER["stress_energy"])
        m = self.nabla_tau.order
        return jet_contract("ia,ja->ij", self.dphi_lower.truncate(m), self.nabla_tau)

    @cached_property
    def t_tensor(self) -> Jet:
        x = self._dphi_nabla_tau
        return x + x.transpose(1, 0)

    @cached_property
    def s2(self) -> Jet:
        x = self._dphi_nabla_tau
        m = x.order
        gi, g = self.g_inv.truncate(m), self.g.truncate(m)
        density = 0.5 * self.tau_norm2.truncate(m) + jet_contract("ij,ij->", gi, x)
        return density * g - self.t_tensor

    @cached_property
    def nabla_s2(self) -> Jet:
        return self.nabla(self.s2, 2, vector=False)

    @cached_property
    def div_s2(self) -> Jet:
        self.require("divergence of S2", REQUIRED_ORDER["divergence"])
        ds = self.nabla_s2
        return jet_contract("ki,kij->j", self.g_inv.truncate(ds.order), ds)

    @cached_property
    def dphi_tau2(self) -> Jet:
        # <dφ(∂j), τ2>
        t2 = self.tau2
        return jet_contract("ja,a->j", self.dphi_lower.truncate(t2.order), t2)

    @cached_property
    def rough_laplacian_s2(self) -> Jet:
        self.require("rough Laplacian of S2", REQUIRED_ORDER["rough_laplacian"])
        dds = self.nabla(self.nabla_s2, 3, vector=False)
        return -jet_contract("kl,klij->ij", self.g_inv.truncate(dds.order), dds)

    # scalar calculus

    def scalar_field(self, f: ScalarField) -> Jet:
        if isinstance(f, Jet):
            return f
        if isinstance(f, (str, *_EXPR_TYPES)):
            return self.scalar(parse_expr(f) if isinstance(f, str) else f)
        return f(self)

    def hessian(self, f: Jet) -> Jet:
        return self.nabla(f.gradient(), 1, vector=False)

    def laplacian(self, f: Jet) -> Jet:
        hess = self.hessian(f)
        return -jet_contract("ij,ij->", self.g_inv.truncate(hess.order), hess)

    def sym_norm2(self, s: Jet) -> Jet:
        """``|S|^2 = g^{ik} g^{jl} S_ij S_kl`` as a jet."""
        mixed = jet_contract("ik,kl->il", self.g_inv.truncate(s.order), s)
        return jet_contract("il,li->", mixed, mixed)

    def tensor_norm2(self, t: np.ndarray) -> float:
        """Full ``g``-norm of a covariant tensor value of any rank."""
        gi = np.asarray(self.g_inv.value)
        out = np.asarray(t, dtype=float)
        raised = out
        for k in range(out.ndim):
            raised = np.moveaxis(np.tensordot(gi, raised, axes=([1], [k])), 0, k)
        return float(np.sum(raised * out))

    def frame(self) -> np.ndarray:
        return frame_matrix(np.asarray(self.g.value))


# ───────────── point operations ─────────────


def _frame_sym(pj: BienergyJets, t: Jet) -> SymTensor2:
    return SymTensor2.from_matrix(to_frame(np.asarray(t.value), pj.frame()))


def bienergy_jets(phi: Immersion, p: Sequence[float], jet_order: int) -> BienergyJets:
    return BienergyJets(phi, p, jet_order)


def tension_at(phi: Immersion, p: Sequence[float], *, jet_order: int = 2) -> np.ndarray:
    """``τ(φ) = trace ∇dφ`` as an ambient vector in chart components."""
    return np.asarray(BienergyJets(phi, p, jet_order).tau.value)


def bitension_at(phi: Immersion, p: Sequence[float], *, jet_order: int = 4) -> np.ndarray:
    return np.asarray(BienergyJets(phi, p, jet_order).tau2.value)


def s2_at(phi: Immersion, p: Sequence[float], *, jet_order: int = 3) -> SymTensor2:
    pj = BienergyJets(phi, p, jet_order)
    return _frame_sym(pj, pj.s2)


def t_tensor_at(phi: Immersion, p: Sequence[float], *, jet_order: int = 3) -> SymTensor2:
    pj = BienergyJets(phi, p, jet_order)
    return _frame_sym(pj, pj.t_tensor)


def div_s2_at(phi: Immersion, p: Sequence[float], *, jet_order: int = 4) -> np.ndarray:
    """``(div S2)(X_k)`` for the frame vectors ``X1, X2``."""
    pj = BienergyJets(phi, p, jet_order)
    return pj.frame() @ np.asarray(pj.div_s2.value)


def rough_laplacian_s2_at(phi: Immersion, p: Sequence[float], *, jet_order: int = 5) -> SymTensor2:
    pj = BienergyJets(phi, p, jet_order)
    return _frame_sym(pj, pj.rough_laplacian_s2)


def rough_laplacian_of(pj: BienergyJets, field: Jet) -> Jet:
    """``ΔᴿS`` of an arbitrary (0,2) tensor field given in coordinates."""
    dds = pj.nabla(pj.nabla(field, 2, vector=False), 3, vector=False)
    return -jet_contract("kl,klij->ij", pj.g_inv.truncate(dds.order), dds)


@dataclass(frozen=True)
class ScalarCalculus:
    value: float
    grad: np.ndarray  # frame components
    hess: SymTensor2
    laplacian: float


def scalar_calculus(pj: BienergyJets, f: ScalarField) -> ScalarCalculus:
    fj = pj.scalar_field(f)
    if fj.order < 2:
        raise BadParameter("scalar calculus needs a field known to order 2 at least")
    hess = pj.hessian(fj)
    e = pj.frame()
    lap = -float(np.einsum("ij,ij->", np.asarray(pj.g_inv.value), np.asarray(hess.value)))
    return ScalarCalculus(
        value=float(fj.value),
        grad=e @ np.asarray(fj.gradient().value),
        hess=SymTensor2.from_matrix(to_frame(np.asarray(hess.value), e)),
        laplacian=lap,
    )


def scalar_calculus_at(phi: Immersion, f: ScalarField, p: Sequence[float], *, jet_order: int = 4) -> ScalarCalculus:
    """Gradient, Hessian ``∇df`` and ``Δf = -trace ∇df`` of ``f`` at ``p``.

    ``f`` is an expression in ``(x, y)`` or a callable mapping the point's
    :class:`BienergyJets` to a scalar jet (``lambda pj: pj.tau_norm2``).
    """
    return scalar_calculus(BienergyJets(phi, p, jet_order), f)


@dataclass(frozen=True)
class BienergyBundle:
    tau: np.ndarray
    tau2: np.ndarray
    S2: SymTensor2
    div_s2: np.ndarray
    norm_tau2: float
    energy_density: float


def bundle_at(phi: Immersion, p: Sequence[float], *, jet_order: int = 4) -> BienergyBundle:
    pj = BienergyJets(phi, p, jet_order)
    n2 = float(pj.tau_norm2.value)
    return BienergyBundle(
        tau=np.asarray(pj.tau.value),
        tau2=np.asarray(pj.tau2.value),
        S2=_frame_sym(pj, pj.s2),
        div_s2=pj.frame() @ np.asarray(pj.div_s2.value),
        norm_tau2=n2,
        energy_density=0.5 * n2,
    )


def bienergy_total(phi: Immersion, grid, *, threads: int | None = None, refine_check: bool = True) -> float:
    """``E2 = 1/2 ∫ |τ|^2 v_g`` over a compact domain; the grid is checked against its doubling by default."""
    from bitensionlab.verify.quadrature import integrate_chart

    def density(p: tuple[float, float]) -> float:
        return 0.5 * float(BienergyJets(phi, p, 2).tau_norm2.value)

    return integrate_chart(phi, density, grid, threads=threads, refine_check=refine_check)


# ───────────── closed forms and identities ─────────────


def remark_quantity(s2: SymTensor2) -> tuple[float, float]:
    """``2|S2|^2 - (trace S2)^2`` computed directly and as ``(s11 - s22)^2 + 4 s12^2``."""
    direct = 2.0 * s2.norm2 - s2.trace**2
    squares = (s2.s11 - s2.s22) ** 2 + 4.0 * s2.s12**2
    return direct, squares


def s2_closed_form(pj: BienergyJets) -> SymTensor2:
    """``-2|H|^2 g + 4 A_H`` in the frame (immersions only)."""
    geo = point_geometry(pj)
    return SymTensor2.from_matrix(-2.0 * geo.normH2 * np.eye(2) + 4.0 * geo.A_H)


def s2_closed_form_residual(pj: BienergyJets) -> float:
    return (_frame_sym(pj, pj.s2) - s2_closed_form(pj)).frobenius()


def s2_norm_identity_residual(pj: BienergyJets) -> float:
    """``|S2|^2 - 8(2|A_H|^2 - 3|H|^4)`` for immersions."""
    geo = point_geometry(pj)
    s = _frame_sym(pj, pj.s2)
    return s.norm2 - 8.0 * (2.0 * geo.norm_AH2 - 3.0 * geo.normH2**2)


def bochner_residual(pj: BienergyJets) -> float:
    """``-1/2 Δ|S2|^2 + <ΔᴿS2, S2> - |∇S2|^2``; vanishes for every map."""
    pj.require("Bochner identity", REQUIRED_ORDER["rough_laplacian"])
    lap = float(pj.laplacian(pj.sym_norm2(pj.s2)).value)
    gi = np.asarray(pj.g_inv.value)
    rl = np.asarray(pj.rough_laplacian_s2.value)
    s = np.asarray(pj.s2.value)
    pairing = float(np.einsum("ik,jl,ij,kl->", gi, gi, rl, s))
    return -0.5 * lap + pairing - pj.tensor_norm2(np.asarray(pj.nabla_s2.value))


__all__ = [
    "REQUIRED_ORDER",
    "BienergyBundle",
    "BienergyJets",
    "ScalarCalculus",
    "SymTensor2",
    "bienergy_jets",
    "bienergy_total",
    "bitension_at",
    "bochner_residual",
    "bundle_at",
    "div_s2_at",
    "remark_quantity",
    "rough_laplacian_of",
    "rough_laplacian_s2_at",
    "s2_at",
    "s2_closed_form",
    "s2_closed_form_residual",
    "s2_norm_identity_residual",
    "scalar_calculus",
    "scalar_calculus_at",
    "t_tensor_at",
    "tension_at",
]
