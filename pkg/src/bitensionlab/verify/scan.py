"""One-parameter scans: sample a residual along a family and locate its zeros."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.optimize import minimize_scalar

from bitensionlab.errors import BadParameter, EmptyRange, NoSignChange
from bitensionlab.immersion import Immersion
from bitensionlab.verify.checks import CheckOptions, GridLike, check_prop2, check_tau2, tau2_norm

logger = logging.getLogger("bitensionlab.verify.scan")

ResidualKind = Literal["tau2", "tau2_l2", "prop2"]
Family = Callable[[float], Immersion]
GridFactory = Callable[[Immersion], GridLike]


@dataclass
class ScanResult:
    family: str
    residual: ResidualKind
    samples: list[tuple[float, float]]
    zeros: list[float] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    no_zero: NoSignChange | None = None

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["param", "residual"])
        for t, r in self.samples:
            writer.writerow([repr(t), repr(r)])
        return buffer.getvalue()

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "residual": self.residual,
            "samples": [[t, r] for t, r in self.samples],
            "zeros": list(self.zeros),
            "notes": list(self.notes),
            "no_zero": None if self.no_zero is None else str(self.no_zero),
        }


def family_residual(phi: Immersion, grid: GridLike, kind: ResidualKind, options: CheckOptions) -> float:
    """Scalar residual of one family member.

    ``tau2`` is the grid maximum of ``‖τ2‖``, ``tau2_l2`` its RMS and ``prop2``
    the largest rough-Laplacian residual.
    """
    if kind == "tau2":
        return check_tau2(phi, grid, options).max_residual
    if kind == "prop2":
        return check_prop2(phi, grid, options).max_residual
    if kind == "tau2_l2":
        norms = check_tau2(phi, grid, options).column("tau2_norm")
        return math.sqrt(math.fsum(v * v for v in norms) / max(1, len(norms)))
    raise BadParameter(f"unknown scan residual {kind!r}")


def scan_family(
    family: Family,
    interval: tuple[float, float],
    samples: int,
    grid: GridFactory,
    *,
    residual: ResidualKind = "tau2",
    tolerance: float = 1e-7,
    xtol: float = 1e-10,
    label: str = "family",
    options: CheckOptions | None = None,
    require_zero: bool = False,
) -> ScanResult:
    """Sample ``residual`` at ``samples`` evenly spaced parameters and refine near-zero minima.

    A local minimum of the sampled residual is refined with a bounded scalar
    minimisation between its neighbours; it is reported as a zero when the
    refined value is below ``tolerance``. Without any zero the result carries a
    :class:`NoSignChange` in ``no_zero``, raised instead when ``require_zero`` is set.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise EmptyRange(f"scan interval [{lo}, {hi}] is empty")
    if samples < 2:
        raise EmptyRange(f"a scan needs at least two samples, got {samples}")

    def value(t: float) -> float:
        # each member gets a fresh jet cache
        phi = family(t)
        base = options or CheckOptions()
        opts = CheckOptions(jet_order=base.jet_order, tol_factor=base.tol_factor, threads=base.threads, settings=base.settings)
        return family_residual(phi, grid(phi), residual, opts)

    params = np.linspace(lo, hi, samples)
    values = [value(float(t)) for t in params]
    result = ScanResult(label, residual, [(float(t), v) for t, v in zip(params, values)])

    for i, v in enumerate(values):
        left = values[i - 1] if i > 0 else math.inf
        right = values[i + 1] if i < samples - 1 else math.inf
        if not (v <= left and v <= right):
            continue
        a = float(params[max(i - 1, 0)])
        b = float(params[min(i + 1, samples - 1)])
        refined = minimize_scalar(value, bounds=(a, b), method="bounded", options={"xatol": xtol})
        best_t, best_v = (float(refined.x), float(refined.fun)) if refined.fun < v else (float(params[i]), v)
        logger.debug("minimum near %.6g refined to %.12g (residual %.3e)", params[i], best_t, best_v)
        if best_v <= tolerance and not any(abs(best_t - z) <= 10.0 * xtol for z in result.zeros):
            result.zeros.append(best_t)

    if not result.zeros:
        missing = NoSignChange(f"no zero of {residual} found in [{lo}, {hi}]")
        result.no_zero = missing
        result.notes.append(str(missing))
        if require_zero:
            raise missing
    logger.info("scan %s over [%g, %g]: %d zeros", label, lo, hi, len(result.zeros))
    return result


def point_residual(phi: Immersion, p: tuple[float, float], *, jet_order: int = 4) -> float:
    """``‖τ2‖`` at a single point."""
    return tau2_norm(CheckOptions(jet_order=jet_order).cache.get(phi, p, jet_order))


__all__ = ["ResidualKind", "ScanResult", "family_residual", "point_residual", "scan_family"]
