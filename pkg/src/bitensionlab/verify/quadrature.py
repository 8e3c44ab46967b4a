"""Tensor-product quadrature over the parameter rectangle and the per-point worker pool."""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Literal, Sequence, TypeVar

import numpy as np
from scipy.special import roots_legendre

from bitensionlab.config import load_settings
from bitensionlab.errors import BadParameter, GridTooCoarse, NotCompact
from bitensionlab.immersion import Domain, Immersion, PointJets

logger = logging.getLogger("bitensionlab.verify.quadrature")

RuleKind = Literal["periodic", "gauss"]
Point = tuple[float, float]
T = TypeVar("T")


# ───────────── worker pool ─────────────


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        return load_settings().worker_count()
    if threads < 0:
        raise BadParameter(f"thread count must be >= 0, got {threads}")
    return threads or (os.cpu_count() or 1)


def parallel_map(fn: Callable[[Point], T], points: Iterable[Point], *, threads: int | None = None) -> list[T]:
    """Evaluate ``fn`` at every point; results keep the input order."""
    items = list(points)
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers <= 1:
        return [fn(p) for p in items]
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="bitension") as pool:
        return list(pool.map(fn, items))


# ───────────── rules and grids ─────────────


@dataclass(frozen=True)
class AxisRule:
    kind: RuleKind
    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise BadParameter(f"quadrature needs at least one node, got {self.n}")
        if not self.a < self.b:
            raise BadParameter(f"empty interval [{self.a}, {self.b}]")

    @cached_property
    def _nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        length = self.b - self.a
        if self.kind == "periodic":
            step = length / self.n
            nodes = self.a + (np.arange(self.n) + 0.5) * step
            return nodes, np.full(self.n, step)
        x, w = roots_legendre(self.n)
        return self.a + 0.5 * length * (x + 1.0), 0.5 * length * w

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes_weights[0]

    @property
    def weights(self) -> np.ndarray:
        return self._nodes_weights[1]


@dataclass(frozen=True)
class QuadratureGrid:
    x_rule: AxisRule
    y_rule: AxisRule

    @classmethod
    def for_domain(cls, domain: Domain, nx: int, ny: int, *, x_kind: RuleKind | None = None, y_kind: RuleKind | None = None) -> QuadratureGrid:
        """Periodic trapezoid on periodic axes, Gauss–Legendre elsewhere."""
        kx = x_kind or ("periodic" if domain.periodic_x else "gauss")
        ky = y_kind or ("periodic" if domain.periodic_y else "gauss")
        if kx == "periodic" and not domain.periodic_x:
            raise BadParameter("periodic rule requested on the non-periodic x axis")
        if ky == "periodic" and not domain.periodic_y:
            raise BadParameter("periodic rule requested on the non-periodic y axis")
        return cls(AxisRule(kx, domain.x0, domain.x1, nx), AxisRule(ky, domain.y0, domain.y1, ny))

    @property
    def label(self) -> str:
        return f"{self.x_rule.n}x{self.y_rule.n}"

    @property
    def points(self) -> list[Point]:
        return [(float(x), float(y)) for x in self.x_rule.nodes for y in self.y_rule.nodes]

    @property
    def weights(self) -> list[float]:
        return [float(wx * wy) for wx in self.x_rule.weights for wy in self.y_rule.weights]

    def doubled(self) -> QuadratureGrid:
        return QuadratureGrid(
            AxisRule(self.x_rule.kind, self.x_rule.a, self.x_rule.b, 2 * self.x_rule.n),
            AxisRule(self.y_rule.kind, self.y_rule.a, self.y_rule.b, 2 * self.y_rule.n),
        )


@dataclass(frozen=True)
class SampleGrid:
    """Points for pointwise checks."""

    points: list[Point]
    label: str


def point_grid(domain: Domain, nx: int, ny: int) -> SampleGrid:
    """Cell midpoints of an ``nx × ny`` split of the domain."""
    if nx < 1 or ny < 1:
        raise BadParameter(f"grid must have positive sizes, got {nx}x{ny}")
    hx = (domain.x1 - domain.x0) / nx
    hy = (domain.y1 - domain.y0) / ny
    pts = [(domain.x0 + (i + 0.5) * hx, domain.y0 + (j + 0.5) * hy) for i in range(nx) for j in range(ny)]
    return SampleGrid(pts, f"{nx}x{ny}")


def parse_grid(text: str) -> tuple[int, int]:
    """``"24x24"`` → ``(24, 24)``."""
    parts = text.lower().replace("×", "x").split("x")
    if len(parts) != 2:
        raise BadParameter(f"grid must look like NxM, got {text!r}")
    try:
        nx, ny = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise BadParameter(f"grid must look like NxM, got {text!r}") from exc
    if nx < 1 or ny < 1:
        raise BadParameter(f"grid must have positive sizes, got {text!r}")
    return nx, ny


# ───────────── integration ─────────────


def area_element(pj: PointJets) -> float:
    return math.sqrt(float(np.linalg.det(np.asarray(pj.g.value))))


def integrate_values(grid: QuadratureGrid, values: Sequence[float]) -> float:
    """Weighted sum in fixed node order; ``values`` already include ``sqrt(det g)``."""
    weights = grid.weights
    if len(values) != len(weights):
        raise BadParameter(f"{len(values)} values for {len(weights)} nodes")
    return math.fsum(w * v for w, v in zip(weights, values))


def require_compact(phi: Immersion) -> None:
    if not phi.domain.compact:
        raise NotCompact(f"{phi.label}: domain is not compact, integral identities do not apply")


def integrate_chart(
    phi: Immersion,
    field: Callable[[Point], float],
    grid: QuadratureGrid,
    *,
    threads: int | None = None,
    refine_check: bool = False,
    tolerance: float = 1e-6,
) -> float:
    """``∫ field v_g`` over the parameter domain.

    With ``refine_check`` the integral is recomputed on a doubled grid and
    :class:`GridTooCoarse` is raised when the two differ by more than ``10 × tolerance``.
    """
    require_compact(phi)

    def weighted(p: Point) -> float:
        return field(p) * area_element(PointJets(phi, p, 2))

    value = integrate_values(grid, parallel_map(weighted, grid.points, threads=threads))
    if refine_check:
        fine_grid = grid.doubled()
        fine = integrate_values(fine_grid, parallel_map(weighted, fine_grid.points, threads=threads))
        shift = abs(fine - value)
        logger.debug("refinement %s -> %s shifts integral by %.3e", grid.label, fine_grid.label, shift)
        if shift > 10.0 * tolerance:
            raise GridTooCoarse(f"doubling {grid.label} shifts the integral by {shift:.3e}")
    return value


__all__ = [
    "AxisRule",
    "QuadratureGrid",
    "SampleGrid",
    "area_element",
    "integrate_chart",
    "integrate_values",
    "parallel_map",
    "parse_grid",
    "point_grid",
    "require_compact",
    "resolve_threads",
]
