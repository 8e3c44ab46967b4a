"""Identity checkers: each one turns a geometric identity into per-point residuals.

Residuals are relative: ``|lhs - rhs| / max(1, largest term)``.  Tolerances
are ``pointwise_tol`` (1e-7) or ``quadrature_tol`` (1e-6) times a factor.
"""
from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from bitensionlab.bienergy import BienergyJets, SymTensor2, remark_quantity, rough_laplacian_of, s2_closed_form
from bitensionlab.config import Settings, load_settings
from bitensionlab.errors import BadParameter, GridTooCoarse, NotCMC, NotIsothermal, SingularCompose
from bitensionlab.exprdsl import Expr, parse_expr
from bitensionlab.immersion import Immersion, brioschi, curvature_sum, frame_matrix, point_geometry, ricci_hh, to_frame
from bitensionlab.jets import Jet, jet_contract, jet_stack
from bitensionlab.verify.quadrature import QuadratureGrid, integrate_values, parallel_map, require_compact
from bitensionlab.verify.report import PointResidual, ResidualReport, Verdict, relative_residual

logger = logging.getLogger("bitensionlab.verify.checks")

Point = tuple[float, float]


class GridLike(Protocol):
    @property
    def points(self) -> list[Point]: ...

    @property
    def label(self) -> str: ...


class JetCache:
    """Per-run store of point jets keyed by ``(immersion, point, order)``."""

    def __init__(self) -> None:
        self._store: dict[tuple[int, Point, int], tuple[Immersion, BienergyJets]] = {}
        self._lock = threading.Lock()

    def get(self, phi: Immersion, p: Point, order: int) -> BienergyJets:
        key = (id(phi), (float(p[0]), float(p[1])), order)
        with self._lock:
            hit = self._store.get(key)
        if hit is not None:
            return hit[1]
        pj = BienergyJets(phi, p, order)
        with self._lock:
            self._store.setdefault(key, (phi, pj))
            return self._store[key][1]

    def __len__(self) -> int:
        return len(self._store)


@dataclass
class CheckOptions:
    jet_order: int | None = None
    tol_factor: float = 1.0
    threads: int | None = None
    cache: JetCache = field(default_factory=JetCache)
    settings: Settings = field(default_factory=load_settings)

    def order(self, required: int) -> int:
        if self.jet_order is None:
            return required
        return self.jet_order

    @property
    def pointwise_tol(self) -> float:
        return self.settings.pointwise_tol * self.tol_factor

    @property
    def quadrature_tol(self) -> float:
        return self.settings.quadrature_tol * self.tol_factor


# ───────────── shared helpers ─────────────


def _h_norm(v: np.ndarray, h: np.ndarray) -> float:
    return math.sqrt(max(0.0, float(v @ h @ v)))


def _values(pj: BienergyJets) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(g, g^{-1}, h)`` at the point."""
    return np.asarray(pj.g.value), np.asarray(pj.g_inv.value), np.asarray(pj.ambient.h.value)


def _run_pointwise(
    check: str,
    phi: Immersion,
    grid: GridLike,
    required: int,
    options: CheckOptions | None,
    evaluate: Callable[[BienergyJets], PointResidual],
    *,
    tolerance: float | None = None,
) -> ResidualReport:
    opts = options or CheckOptions()
    order = opts.order(required)
    tol = opts.pointwise_tol if tolerance is None else tolerance

    def one(p: Point) -> PointResidual:
        return evaluate(opts.cache.get(phi, p, order))

    report = ResidualReport(check, phi.label, grid.label, order, tol)
    report.points = parallel_map(one, grid.points, threads=opts.threads)
    report.decide()
    logger.info("%s on %s: %s (max residual %.3e)", check, phi.label, report.verdict.value, report.max_residual)
    return report


def tau2_norm(pj: BienergyJets) -> float:
    return _h_norm(np.asarray(pj.tau2.value), np.asarray(pj.ambient.h.value))


# ───────────── τ2 and Hilbert ─────────────


def check_tau2(phi: Immersion, grid: GridLike, options: CheckOptions | None = None) -> ResidualReport:
    """``‖τ2‖`` at every grid point; zero exactly for biharmonic maps."""

    def evaluate(pj: BienergyJets) -> PointResidual:
        n = tau2_norm(pj)
        return PointResidual(pj.point, n, {"tau2_norm": n, "tau_norm2": float(pj.tau_norm2.value)})

    return _run_pointwise("tau2", phi, grid, 4, options, evaluate)


def hilbert_residual(pj: BienergyJets) -> PointResidual:
    e = frame_matrix(np.asarray(pj.g.value))
    div = e @ np.asarray(pj.div_s2.value)
    rhs = -(e @ np.asarray(pj.dphi_tau2.value))
    a, b = float(np.linalg.norm(div)), float(np.linalg.norm(rhs))
    res = relative_residual(float(np.linalg.norm(div - rhs)), a, b)
    return PointResidual(pj.point, res, {"div_s2": a, "dphi_tau2": b})


def check_hilbert(phi: Immersion, grid: GridLike, options: CheckOptions | None = None) -> ResidualReport:
    """``div S2 = -<dφ, τ2>`` for every map."""
    return _run_pointwise("hilbert", phi, grid, 4, options, hilbert_residual)


# ───────────── commutation of the third fundamental form ─────────────


def commutation_residual(pj: BienergyJets, x: int, y: int, z: int) -> float:
    """Swap identity of ``∇²dφ`` on frame vectors ``X_x, X_y, X_z`` (indices 0 or 1)."""
    for idx in (x, y, z):
        if idx not in (0, 1):
            raise BadParameter(f"frame index must be 0 or 1, got {idx}")
    pj.require("commutation identity", 3)
    g0, _, h0 = _values(pj)
    e = frame_matrix(g0)
    d = to_frame(np.asarray(pj.third_fundamental.value), e, slots=3)
    dphi = e @ np.asarray(pj.dphi.value)
    r13 = pj.ambient.riemann13
    assert r13 is not None
    # R^N(dφX, dφZ) dφY
    rn = np.einsum("abcd,b,c,d->a", np.asarray(r13.value), dphi[y], dphi[x], dphi[z])
    k = brioschi(pj.g)
    # dφ(R^M(X, Z) Y) = K (<Z, Y> dφX - <X, Y> dφZ)
    rm = k * (float(z == y) * dphi[x] - float(x == y) * dphi[z])
    lhs = d[x, y, z] - d[z, y, x]
    diff = lhs - rn + rm
    return relative_residual(_h_norm(diff, h0), _h_norm(d[x, y, z], h0), _h_norm(d[z, y, x], h0), _h_norm(rn, h0))


def check_commutation(
    phi: Immersion, p: Sequence[float], x: int, y: int, z: int, *, jet_order: int = 3
) -> float:
    return commutation_residual(BienergyJets(phi, p, jet_order), x, y, z)


def check_lemma(phi: Immersion, grid: GridLike, options: CheckOptions | None = None) -> ResidualReport:
    """Commutation identity over all eight frame triples."""

    def evaluate(pj: BienergyJets) -> PointResidual:
        worst = max(commutation_residual(pj, x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1))
        return PointResidual(pj.point, worst)

    return _run_pointwise("lemma", phi, grid, 3, options, evaluate)


# ───────────── rough Laplacian of S2 ─────────────


def prop2_residual(pj: BienergyJets) -> PointResidual:
    g0, gi, _ = _values(pj)
    e = frame_matrix(g0)
    lhs = to_frame(np.asarray(pj.rough_laplacian_s2.value), e)
    s = to_frame(np.asarray(pj.s2.value), e)
    n2 = pj.tau_norm2
    hess = pj.hessian(n2)
    hess_f = to_frame(np.asarray(hess.value), e)
    lap = -float(np.einsum("ij,ij->", gi, np.asarray(hess.value)))
    k = brioschi(pj.g)
    scalar = k * float(n2.value) + lap
    rhs = -2.0 * k * s + hess_f + scalar * np.eye(2)
    res = relative_residual(
        float(np.linalg.norm(lhs - rhs)),
        float(np.linalg.norm(lhs)),
        2.0 * abs(k) * float(np.linalg.norm(s)),
        float(np.linalg.norm(hess_f)),
        abs(scalar) * math.sqrt(2.0),
    )
    return PointResidual(pj.point, res, {"tau2_norm": tau2_norm(pj), "lhs_norm": float(np.linalg.norm(lhs)), "K": k})


def check_prop2(phi: Immersion, grid: GridLike, options: CheckOptions | None = None) -> ResidualReport:
    """``ΔᴿS2 = -2K S2 + ∇d|τ|² + (K|τ|² + Δ|τ|²) g``, expected for biharmonic maps."""
    report = _run_pointwise("prop2", phi, grid, 5, options, prop2_residual)
    report.extras["tau2_max"] = report.column_max("tau2_norm")
    if report.verdict is Verdict.FAIL and report.extras["tau2_max"] > report.tolerance:
        report.notes.append(f"input is not biharmonic (max ‖τ2‖ = {report.extras['tau2_max']:.3e})")
    return report


# ───────────── integral formula ─────────────


def _synthetic_field(pj: BienergyJets, components: Sequence[Expr]) -> Jet:
    s11, s12, s22 = (pj.scalar(c) for c in components)
    return jet_stack([jet_stack([s11, s12]), jet_stack([s12, s22])])


def _integral_densities(pj: BienergyJets, synthetic: Sequence[Expr] | None) -> dict[str, float]:
    g0, gi, _ = _values(pj)
    k = brioschi(pj.g)
    n2 = pj.tau_norm2
    s = pj.s2
    grad = pj.tensor_norm2(np.asarray(pj.nabla_s2.value))
    s_norm2 = float(pj.sym_norm2(s).value)
    curv = 2.0 * k * (s_norm2 - 0.5 * float(n2.value) ** 2)
    dn2 = n2.gradient()
    dn2_v = np.asarray(dn2.value)
    rhs = float(dn2_v @ gi @ dn2_v)

    # ω_k = S_ik g^{ij} ∂_j |τ|²
    m = min(s.order, dn2.order)
    raised = jet_contract("ij,j->i", pj.g_inv.truncate(m), dn2.truncate(m))
    omega = jet_contract("ik,i->k", s.truncate(m), raised)
    d_omega = pj.nabla(omega, 1, vector=False)
    div_omega = float(np.einsum("lk,lk->", gi, np.asarray(d_omega.value)))

    if synthetic is None:
        field_, rough = s, pj.rough_laplacian_s2
        nabla_field = np.asarray(pj.nabla_s2.value)
    else:
        field_ = _synthetic_field(pj, synthetic)
        rough = rough_laplacian_of(pj, field_)
        nabla_field = np.asarray(pj.nabla(field_, 2, vector=False).value)
    pairing = float(np.einsum("ik,jl,ij,kl->", gi, gi, np.asarray(rough.value), np.asarray(field_.value)))
    parts = pairing - pj.tensor_norm2(nabla_field)

    area = math.sqrt(float(np.linalg.det(g0)))
    return {
        "grad": grad * area,
        "curv": curv * area,
        "rhs": rhs * area,
        "parts_laplacian": parts * area,
        "parts_divergence": div_omega * area,
        "omega_abs": abs(div_omega) * area,
        "field_grad": pj.tensor_norm2(nabla_field) * area,
    }


def check_thm1(
    phi: Immersion,
    grid: QuadratureGrid,
    options: CheckOptions | None = None,
    *,
    synthetic: Sequence[str | Expr] | None = None,
    refine_check: bool = True,
) -> ResidualReport:
    """Integral formula ``∫|∇S2|² + 2∫K(|S2|² - |τ|⁴/2) = ∫|d|τ|²|²`` on compact domains.

    The integration-by-parts ingredients (``∫<ΔᴿS, S> = ∫|∇S|²`` and
    ``∫ div ω = 0``) hold for every map and are reported as ``parts_*``.
    ``synthetic`` replaces ``S`` in the first one by coordinate components
    ``(S11, S12, S22)``. With ``refine_check`` every total is recomputed on the
    doubled grid and :class:`GridTooCoarse` is raised when one of them moves by
    more than ``10 × tolerance`` relative to its magnitude.
    """
    require_compact(phi)
    opts = options or CheckOptions()
    order = opts.order(5)
    tol = opts.quadrature_tol
    fields = None if synthetic is None else [parse_expr(c) if isinstance(c, str) else c for c in synthetic]

    def one(p: Point) -> dict[str, float]:
        return _integral_densities(opts.cache.get(phi, p, order), fields)

    def integrate(g: QuadratureGrid) -> tuple[list[dict[str, float]], dict[str, float]]:
        densities = parallel_map(one, g.points, threads=opts.threads)
        return densities, {key: integrate_values(g, [d[key] for d in densities]) for key in densities[0]}

    densities, totals = integrate(grid)
    shift = 0.0
    if refine_check:
        fine_grid = grid.doubled()
        _, fine = integrate(fine_grid)
        # |div ω| is only a residual scale
        shift = max(abs(fine[k] - totals[k]) / max(1.0, abs(fine[k])) for k in totals if k != "omega_abs")
        logger.debug("thm1 refinement %s -> %s moves totals by %.3e", grid.label, fine_grid.label, shift)
        if shift > 10.0 * tol:
            raise GridTooCoarse(f"{phi.label}: doubling {grid.label} moves the thm1 totals by {shift:.3e}")
    gap = totals["grad"] + totals["curv"] - totals["rhs"]

    report = ResidualReport("thm1", phi.label, grid.label, order, tol)
    report.points = [
        PointResidual(p, 0.0, {"grad": d["grad"], "curv": d["curv"], "rhs": d["rhs"]}) for p, d in zip(grid.points, densities)
    ]
    report.extras = {
        "I_grad": totals["grad"],
        "I_curv": totals["curv"],
        "I_rhs": totals["rhs"],
        "gap": gap,
        "parts_laplacian": totals["parts_laplacian"],
        "parts_divergence": totals["parts_divergence"],
        "refine_shift": shift,
    }
    report.summary_residual = max(
        relative_residual(gap, totals["grad"], totals["curv"], totals["rhs"]),
        relative_residual(totals["parts_laplacian"], totals["field_grad"]),
        relative_residual(totals["parts_divergence"], totals["omega_abs"]),
    )
    report.decide()
    logger.info("thm1 on %s: %s (gap %.3e)", phi.label, report.verdict.value, gap)
    return report


# ───────────── CMC immersions: discriminant formulas ─────────────


def _mean_norm2(pj: BienergyJets) -> Jet:
    return pj.inner(pj.mean_curvature, pj.mean_curvature)


def _require_immersion(phi: Immersion, check: str) -> None:
    if not phi.is_immersion:
        raise BadParameter(f"{check} applies to immersions only; {phi.label} has a prescribed metric")


def _safe_laplacian_ln(pj: BienergyJets, f: Jet) -> float:
    try:
        return float(pj.laplacian(f.ln()).value)
    except SingularCompose:
        return math.nan


def thm2_point(pj: BienergyJets, eps_mu: float | None) -> PointResidual:
    geo = point_geometry(pj)
    h0 = geo.h
    nh2 = geo.normH2
    w = pj.nabla_perp_h
    gi_w = pj.g_inv.truncate(w.order)
    perp2_jet = jet_contract("ij,ij->", gi_w, pj.inner(w, w, "ia", "ja", "ij"))
    perp2 = float(perp2_jet.value)
    d_prime = curvature_sum(pj)
    disc = d_prime - perp2 - 2.0 * nh2**2
    normal_eq = relative_residual(perp2 + geo.norm_AH2 - d_prime, perp2, geo.norm_AH2, d_prime)

    values = {"D": disc, "D_prime": d_prime, "normal_eq": normal_eq, "mu": geo.mu, "normH2": nh2, "K": geo.K}
    extra = [normal_eq]
    if pj.n == 3:
        ric = ricci_hh(pj)
        values["ricci_HH"] = ric
        extra.append(relative_residual(d_prime - ric, d_prime, ric))

    eps = 1e-6 * (1.0 + nh2) if eps_mu is None else eps_mu
    if geo.mu <= eps:
        branch = max(abs(disc), abs(geo.lambda1 - nh2), abs(geo.lambda2 - nh2))
        return PointResidual(pj.point, max(branch, *extra), values, degenerate=True)

    root = math.sqrt(disc) if disc > 0.0 else math.nan
    half = math.sqrt(2.0) / 2.0
    res_a = max(abs(geo.lambda1 - (nh2 + half * root)), abs(geo.lambda2 - (nh2 - half * root)))
    res_b = max(0.0, -disc)

    # D as a jet for Δ ln D = -4K
    m = perp2_jet.order
    d_jet = (
        _curvature_sum_jet(pj, m) - perp2_jet - 2.0 * _mean_norm2(pj).truncate(m) * _mean_norm2(pj).truncate(m)
    )
    res_c = relative_residual(_safe_laplacian_ln(pj, d_jet) + 4.0 * geo.K, 4.0 * geo.K)

    # sec^N(X1, X2) = K - 2|H|² + D'/(2|H|²)
    riemann = pj.ambient.riemann
    assert riemann is not None
    v1, v2 = geo.dphi_frame
    sec = float(np.einsum("xyzw,x,y,z,w->", np.asarray(riemann.value), v1, v2, v1, v2))
    gauss_form = geo.K - 2.0 * nh2 + (d_prime / (2.0 * nh2) if nh2 > 0.0 else math.nan)
    res_d = relative_residual(sec - gauss_form, sec, geo.K, 2.0 * nh2)

    # μ² = (tr A)² - 4 det A for the mixed tensor A^i_j = g^{ik} A_kj
    a = pj.shape_operator
    mixed = jet_contract("ik,kj->ij", pj.g_inv.truncate(a.order), a)
    tr = mixed[0, 0] + mixed[1, 1]
    det = mixed[0, 0] * mixed[1, 1] - mixed[0, 1] * mixed[1, 0]
    mu2 = tr * tr - 4.0 * det
    res_e = relative_residual(0.5 * _safe_laplacian_ln(pj, mu2) + 2.0 * geo.K, 2.0 * geo.K)

    values.update({"lambda_formula": res_a, "D_positive": res_b, "lnD": res_c, "gauss_form": res_d, "lnmu": res_e})
    worst = max(res_a, res_b, res_c, res_d, res_e, *extra)
    return PointResidual(pj.point, worst if math.isfinite(worst) else math.inf, values)


def _curvature_sum_jet(pj: BienergyJets, order: int) -> Jet:
    """``g^{ij} R^N(∂iφ, H, ∂jφ, H)`` as a jet."""
    riemann = pj.ambient.riemann
    assert riemann is not None
    h = pj.mean_curvature.truncate(order)
    d = pj.dphi.truncate(order)
    rm = riemann.truncate(order)
    t = jet_contract("xyzw,y->xzw", rm, h)
    t = jet_contract("xzw,w->xz", t, h)
    t = jet_contract("xz,ix->iz", t, d)
    t = jet_contract("iz,jz->ij", t, d)
    return jet_contract("ij,ij->", pj.g_inv.truncate(order), t)


def check_cmc(phi: Immersion, grid: GridLike, options: CheckOptions | None = None) -> float:
    """Largest ``|d|H|²|`` over the grid (relative); raises :class:`NotCMC` above tolerance."""
    opts = options or CheckOptions()
    order = opts.order(3)

    def one(p: Point) -> float:
        pj = opts.cache.get(phi, p, order)
        n2 = _mean_norm2(pj)
        return relative_residual(float(np.linalg.norm(np.asarray(n2.gradient().value))), float(n2.value))

    worst = max(parallel_map(one, grid.points, threads=opts.threads), default=0.0)
    if worst > opts.pointwise_tol:
        raise NotCMC(f"{phi.label}: |H| is not constant (|d|H|²| up to {worst:.3e})")
    return worst


def check_thm2(
    phi: Immersion,
    grid: GridLike,
    options: CheckOptions | None = None,
    *,
    eps_mu: float | None = None,
) -> ResidualReport:
    """Discriminant formulas for biharmonic CMC immersions, split at pseudo-umbilical points."""
    _require_immersion(phi, "thm2")
    check_cmc(phi, grid, options)
    report = _run_pointwise("thm2", phi, grid, 5, options, lambda pj: thm2_point(pj, eps_mu))
    report.extras["D_max"] = report.column_max("D")
    report.extras["normal_eq_max"] = report.column_max("normal_eq")
    report.notes.append(
        "no non-pseudo-umbilical biharmonic CMC surface is available; "
        "the non-degenerate formulas are checked for internal consistency only"
    )
    return report


def check_prop3_bound(phi: Immersion, grid: GridLike, k0: float, options: CheckOptions | None = None) -> ResidualReport:
    """``|A_H|² ≤ 2 K0 |H|²`` when the ambient sectional curvature is at most ``K0 > 0``."""
    if not k0 > 0.0:
        raise BadParameter(f"K0 must be positive, got {k0}")
    _require_immersion(phi, "prop3")

    def evaluate(pj: BienergyJets) -> PointResidual:
        geo = point_geometry(pj)
        gap = geo.norm_AH2 - 2.0 * k0 * geo.normH2
        return PointResidual(pj.point, max(0.0, gap), {"gap": gap, "AH2": geo.norm_AH2, "normH2": geo.normH2})

    report = _run_pointwise("prop3", phi, grid, 2, options, evaluate)
    report.metadata["K0"] = k0
    return report


# ───────────── Hopf function ─────────────


def hopf_point(pj: BienergyJets, tol: float) -> PointResidual:
    """``residual`` compares ``∂z̄ f`` with ``(A + iB)/4``; ``dbar_f`` is ``|∂z̄ f|`` itself."""
    g0 = np.asarray(pj.g.value)
    if abs(g0[0, 0] - g0[1, 1]) + abs(g0[0, 1]) > tol * abs(g0[0, 0]):
        raise NotIsothermal(f"{pj.immersion.label}: chart is not isothermal at {pj.point}")
    a = pj.shape_operator
    m = a.order
    lam2 = pj.g[0, 0].truncate(m)
    n2 = _mean_norm2(pj).truncate(m)
    re = 0.5 * (lam2 * n2 - a[1, 1])
    im = -0.5 * a[0, 1]
    dbar_re = 0.5 * (float(re.diff(0).value) - float(im.diff(1).value))
    dbar_im = 0.5 * (float(re.diff(1).value) + float(im.diff(0).value))
    dn2 = np.asarray(n2.gradient().value)
    big_a = -0.5 * float(lam2.value) * float(dn2[0])
    big_b = 0.5 * float(lam2.value) * float(dn2[1])
    f_abs = math.hypot(float(re.value), float(im.value))
    dbar_abs = math.hypot(dbar_re, dbar_im)
    res1 = relative_residual(math.hypot(dbar_re - 0.25 * big_a, dbar_im - 0.25 * big_b), dbar_abs, f_abs)
    values = {
        "f_abs": f_abs,
        "f_re": float(re.value),
        "f_im": float(im.value),
        "dbar_f": dbar_abs,
        "d_normH2": float(np.hypot(dn2[0], dn2[1])),
        "tau2_norm": tau2_norm(pj),
    }
    return PointResidual(pj.point, res1, values)


def check_thm3(phi: Immersion, grid: GridLike, options: CheckOptions | None = None) -> ResidualReport:
    """Hopf function ``f = <B(∂z, ∂z), H>`` in an isothermal chart.

    Point residuals measure ``∂z̄ f = (A + iB)/4``. The second residual
    ``|∂z̄ f|`` decides holomorphy; on biharmonic input holomorphy must
    coincide with constant ``|H|``, otherwise the report fails.
    """
    _require_immersion(phi, "thm3")
    opts = options or CheckOptions()
    tol = opts.pointwise_tol
    report = _run_pointwise("thm3", phi, grid, 4, opts, lambda pj: hopf_point(pj, 10.0 * tol))
    f_max = report.column_max("f_abs")
    dbar_max = report.column_max("dbar_f")
    report.extras["f_abs_max"] = f_max
    report.extras["dbar_f_max"] = dbar_max
    report.extras["d_normH2_max"] = report.column_max("d_normH2")
    report.extras["tau2_max"] = report.column_max("tau2_norm")

    holomorphic = dbar_max <= tol * max(1.0, f_max)
    cmc = report.extras["d_normH2_max"] <= tol
    report.extras["holomorphic"] = float(holomorphic)
    report.extras["cmc"] = float(cmc)
    report.notes.append(f"f is {'' if holomorphic else 'not '}holomorphic (max |∂z̄ f| {dbar_max:.3e})")
    if report.extras["tau2_max"] <= tol and holomorphic != cmc:
        report.verdict = Verdict.FAIL
        report.notes.append("biharmonic input: holomorphy of f disagrees with constancy of |H|")
    return report


# ───────────── closed form of S2 for immersions ─────────────


def s2form_point(pj: BienergyJets) -> PointResidual:
    geo = point_geometry(pj)
    s = to_frame(np.asarray(pj.s2.value), geo.frame)
    closed = s2_closed_form(pj).as_matrix()
    closed_res = relative_residual(float(np.linalg.norm(s - closed)), float(np.linalg.norm(s)))
    sym = SymTensor2.from_matrix(s)
    direct, squares = remark_quantity(sym)
    norm_id = sym.norm2 - 8.0 * (2.0 * geo.norm_AH2 - 3.0 * geo.normH2**2)
    trace_res = relative_residual(sym.trace - float(pj.tau_norm2.value), sym.trace)
    values = {
        "closed_form": closed_res,
        "remark": direct,
        "remark_squares": squares,
        "norm_identity": norm_id,
        "trace": trace_res,
        "pseudo_umbilic": geo.pseudo_umbilic_residual,
    }
    res = max(
        closed_res,
        relative_residual(direct - squares, direct, squares),
        relative_residual(norm_id, sym.norm2),
        trace_res,
    )
    return PointResidual(pj.point, res, values)


def check_s2form(phi: Immersion, grid: GridLike, options: CheckOptions | None = None) -> ResidualReport:
    """``S2 = -2|H|² g + 4 A_H`` with ``|S2|² = 8(2|A_H|² - 3|H|⁴)`` and the nonnegative remark quantity."""
    _require_immersion(phi, "s2form")
    report = _run_pointwise("s2form", phi, grid, 3, options, s2form_point)
    report.extras["remark_min"] = min(report.column("remark"), default=0.0)
    return report


# ───────────── registry ─────────────


@dataclass(frozen=True)
class CheckInfo:
    name: str
    required_order: int
    integral: bool
    immersion_only: bool
    anchor: str


CHECKS: dict[str, CheckInfo] = {
    info.name: info
    for info in (
        CheckInfo("tau2", 4, False, False, "biharmonic maps are the zeros of τ2 = trace ∇²τ - trace R^N(dφ, τ)dφ"),
        CheckInfo("hilbert", 4, False, False, "stress-energy tensor is divergence free at critical points: div S2 = -<dφ, τ2>"),
        CheckInfo("lemma", 3, False, False, "swapping vector positions in the third fundamental form brings in R^N and R^M"),
        CheckInfo("prop2", 5, False, False, "rough Laplacian of S2 on a surface: -2K S2 + ∇d|τ|² + (K|τ|² + Δ|τ|²) g"),
        CheckInfo("thm1", 5, True, False, "compact surfaces: ∫|∇S2|² + 2∫K(|S2|² - |τ|⁴/2) = ∫|d|τ|²|²"),
        CheckInfo("thm2", 5, False, True, "CMC biharmonic surfaces: λ1,2 = |H|² ± (√2/2)√D, Δ ln D = -4K, Δ ln μ = -2K"),
        CheckInfo("thm3", 4, False, True, "Hopf function <B(∂z, ∂z), H> is holomorphic iff |H| is constant"),
        CheckInfo("prop3", 2, False, True, "ambient curvature bounded by K0: |A_H|² ≤ 2 K0 |H|²"),
        CheckInfo("s2form", 3, False, True, "immersions: S2 = -2|H|² g + 4 A_H and 2|S2|² - |τ|⁴ ≥ 0"),
    )
}


__all__ = [
    "CHECKS",
    "CheckInfo",
    "CheckOptions",
    "JetCache",
    "check_cmc",
    "check_commutation",
    "check_hilbert",
    "check_lemma",
    "check_prop2",
    "check_prop3_bound",
    "check_s2form",
    "check_tau2",
    "check_thm1",
    "check_thm2",
    "check_thm3",
    "commutation_residual",
    "hilbert_residual",
    "prop2_residual",
    "tau2_norm",
]
