from __future__ import annotations

import numpy as np
import pytest

try:
    from bitensionlab.ambient import (
        ambient_jets,
        christoffel_at,
        conformal,
        curvature_at,
        euclidean,
        hyperbolic,
        make_builtin_manifold,
        manifold_from_metric,
        sphere,
    )
    from bitensionlab.errors import BadParameter, ChartViolation, MetricDegenerate
    from bitensionlab.exprdsl import eval_value
except Exception:
    from src.bitensionlab.ambient import (  # type: ignore
        ambient_jets,
        christoffel_at,
        conformal,
        curvature_at,
        euclidean,
        hyperbolic,
        make_builtin_manifold,
        manifold_from_metric,
        sphere,
    )
    from src.bitensionlab.errors import BadParameter, ChartViolation, MetricDegenerate  # type: ignore
    from src.bitensionlab.exprdsl import eval_value  # type: ignore


_POINTS = [(0.1, -0.2, 0.3), (0.0, 0.0, 0.0), (-0.35, 0.2, 0.1)]


@pytest.mark.parametrize("u", _POINTS)
@pytest.mark.parametrize("radius", [1.0, 0.5, 2.0])
def test_sphere_sectional_curvature(u, radius: float) -> None:
    """Every coordinate plane of the stereographic sphere has curvature 1/r²."""
    curv = curvature_at(sphere(3, radius), [c * radius for c in u])
    e = np.eye(3)
    for a, b in ((0, 1), (0, 2), (1, 2)):
        k = curv.sectional(e[a], e[b])
        assert k == pytest.approx(1.0 / radius**2, rel=1e-10), f"plane {a}{b}: {k}"


@pytest.mark.parametrize("u", _POINTS)
def test_hyperbolic_sectional_curvature(u) -> None:
    curv = curvature_at(hyperbolic(3, 1.0), u)
    k = curv.sectional([1.0, 0.3, 0.0], [0.0, 1.0, -0.4])
    assert k == pytest.approx(-1.0, rel=1e-10)


def test_euclidean_is_flat() -> None:
    curv = curvature_at(euclidean(4), (1.0, 2.0, -3.0, 0.5))
    assert np.allclose(curv.riemann, 0.0)
    assert np.allclose(curv.christoffel, 0.0)
    assert np.allclose(curv.metric, np.eye(4))


def test_sphere_ricci_is_einstein() -> None:
    """Ric = (n - 1)/r² h on the round sphere."""
    curv = curvature_at(sphere(4, 1.0), (0.2, 0.1, -0.3, 0.05))
    assert np.allclose(curv.ricci, 3.0 * curv.metric, atol=1e-10)


def test_riemann_symmetries() -> None:
    """Antisymmetry in both pairs and pair symmetry of R(x, y, z, w) on a non-conformal metric."""
    m = manifold_from_metric([["1 + u2^2", "0.1*u1"], ["2 + sin(u1)"]], label="warped")
    rm = curvature_at(m, (0.4, -0.3)).riemann
    assert np.allclose(rm, -rm.transpose(1, 0, 2, 3), atol=1e-12)
    assert np.allclose(rm, -rm.transpose(0, 1, 3, 2), atol=1e-12)
    assert np.allclose(rm, rm.transpose(2, 3, 0, 1), atol=1e-12)


def test_christoffel_against_finite_differences() -> None:
    """Γ from jets matches Γ assembled from central differences of the metric."""
    m = conformal(3, "exp(u1 - 0.5*u2) + u3^2")
    u = np.array([0.2, -0.1, 0.4])
    n = m.dim

    def metric(q):
        env = {f"u{k + 1}": float(q[k]) for k in range(n)}
        return np.array([[float(eval_value(m.metric[a][b], env)) for b in range(n)] for a in range(n)])

    step = 1e-5
    dh = np.zeros((n, n, n))
    for c in range(n):
        e = np.zeros(n)
        e[c] = step
        dh[c] = (metric(u + e) - metric(u - e)) / (2.0 * step)
    h_inv = np.linalg.inv(metric(u))
    t = dh.transpose(1, 0, 2) + dh.transpose(1, 2, 0) - dh
    expected = 0.5 * np.einsum("ad,dbc->abc", h_inv, t)
    gamma = np.asarray(christoffel_at(m, u).value)
    assert np.allclose(gamma, expected, atol=1e-8), f"max deviation {np.abs(gamma - expected).max()}"
    assert np.allclose(gamma, gamma.transpose(0, 2, 1))


def test_chart_violation_outside_ball() -> None:
    with pytest.raises(ChartViolation):
        ambient_jets(hyperbolic(2, 1.0), (0.8, 0.7))


def test_degenerate_metric() -> None:
    m = manifold_from_metric([["u1^2", "0"], ["1"]])
    with pytest.raises(MetricDegenerate):
        ambient_jets(m, (0.0, 0.3))


def test_bad_parameters() -> None:
    with pytest.raises(BadParameter):
        sphere(3, 0.0)
    with pytest.raises(BadParameter):
        make_builtin_manifold("torus", 3)
    with pytest.raises(BadParameter):
        euclidean(1)
    with pytest.raises(BadParameter):
        make_builtin_manifold("conformal", 2)
    with pytest.raises(BadParameter):
        ambient_jets(euclidean(3), (0.0, 0.0))
    with pytest.raises(BadParameter):
        curvature_at(euclidean(2), (0.0, 0.0)).sectional([1.0, 0.0], [2.0, 0.0])


def test_builtin_curvature_constants() -> None:
    assert sphere(3, 2.0).curvature == pytest.approx(0.25)
    assert hyperbolic(2, 0.5).curvature == pytest.approx(-4.0)
    assert euclidean(3).curvature == 0.0
    assert conformal(2, "1 + u1^2").curvature is None
