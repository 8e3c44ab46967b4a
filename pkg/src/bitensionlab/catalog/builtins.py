"""Built-in example immersions and the properties they are expected to have."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from bitensionlab.ambient import euclidean, sphere
from bitensionlab.errors import BadParameter, UnknownExample
from bitensionlab.immersion import Domain, Immersion, make_immersion

logger = logging.getLogger("bitensionlab.catalog")

TWO_PI = 2.0 * math.pi
BIHARMONIC_RADIUS = 1.0 / math.sqrt(2.0)

PROPERTY_NAMES = ("biharmonic", "harmonic", "cmc", "K", "normH2", "pseudo_umbilical", "flat")


@dataclass(frozen=True)
class Expected:
    value: bool | float
    tolerance: float = 1e-7


@dataclass(frozen=True)
class ExampleSpec:
    label: str
    immersion: Immersion
    expected: dict[str, Expected] = field(default_factory=dict)
    description: str = ""

    @property
    def domain(self) -> Domain:
        return self.immersion.domain

    @property
    def ambient_label(self) -> str:
        return self.immersion.ambient.label

    def expected_table(self) -> dict[str, bool | float]:
        return {k: self.expected[k].value for k in PROPERTY_NAMES if k in self.expected}


def _expect(**props: bool | float) -> dict[str, Expected]:
    unknown = set(props) - set(PROPERTY_NAMES)
    if unknown:
        raise BadParameter(f"unknown expected properties {sorted(unknown)}")
    return {k: Expected(v) for k, v in props.items()}


def _num(v: float) -> str:
    return repr(float(v))


# ───────────── polar and periodic domains ─────────────

_POLAR = Domain(0.0, math.pi, 0.0, TWO_PI, periodic_y=True, compact=True, topology="sphere")
_TORUS = Domain(0.0, TWO_PI, 0.0, TWO_PI, periodic_x=True, periodic_y=True, compact=True, topology="torus")
_SQUARE = Domain(-1.0, 1.0, -1.0, 1.0)


def plane_r3() -> ExampleSpec:
    phi = make_immersion(euclidean(3), ["x", "y", "0"], _SQUARE, label="plane-R3")
    return ExampleSpec(
        "plane-R3",
        phi,
        _expect(harmonic=True, biharmonic=True, cmc=True, K=0.0, normH2=0.0, flat=True, pseudo_umbilical=True),
        "totally geodesic plane",
    )


def unit_sphere_r3() -> ExampleSpec:
    phi = make_immersion(euclidean(3), ["sin(x)*cos(y)", "sin(x)*sin(y)", "cos(x)"], _POLAR, label="unit-sphere-R3")
    return ExampleSpec(
        "unit-sphere-R3",
        phi,
        _expect(biharmonic=False, harmonic=False, cmc=True, K=1.0, normH2=1.0, pseudo_umbilical=True, flat=False),
        "round sphere in Euclidean space, polar chart; CMC but not biharmonic",
    )


def cylinder_r3() -> ExampleSpec:
    domain = Domain(0.0, TWO_PI, -1.0, 1.0, periodic_x=True, topology="annulus")
    phi = make_immersion(euclidean(3), ["cos(x)", "sin(x)", "y"], domain, label="cylinder-R3")
    return ExampleSpec(
        "cylinder-R3",
        phi,
        _expect(biharmonic=False, harmonic=False, cmc=True, K=0.0, normH2=0.25, flat=True, pseudo_umbilical=False),
        "unit cylinder in an isothermal chart; constant nonzero Hopf function",
    )


def clifford_minimal_s3() -> ExampleSpec:
    # S1(1/√2) × S1(1/√2) ⊂ S3(1) through the stereographic chart
    den = "(sqrt(2) - sin(y))"
    phi = make_immersion(
        sphere(3),
        [f"cos(x)/{den}", f"sin(x)/{den}", f"cos(y)/{den}"],
        _TORUS,
        label="clifford-minimal-S3",
    )
    return ExampleSpec(
        "clifford-minimal-S3",
        phi,
        _expect(harmonic=True, biharmonic=True, cmc=True, K=0.0, normH2=0.0, flat=True, pseudo_umbilical=True),
        "minimal Clifford torus in the unit 3-sphere",
    )


def small_sphere_rho(r: float) -> float:
    """Stereographic radius of the hypersphere ``S2(r) ⊂ S3(1)`` centred on the chart origin."""
    return r / (1.0 + math.sqrt(1.0 - r * r))


def _check_radius(r: float) -> float:
    r = float(r)
    if not 0.0 < r <= 1.0:
        raise BadParameter(f"small sphere radius must lie in (0, 1], got {r}")
    return r


def _small_sphere_expected(r: float) -> dict[str, Expected]:
    biharmonic = math.isclose(r, BIHARMONIC_RADIUS, abs_tol=1e-8) or r == 1.0
    return _expect(
        biharmonic=biharmonic,
        harmonic=r == 1.0,
        cmc=True,
        K=1.0 / (r * r),
        normH2=(1.0 - r * r) / (r * r),
        pseudo_umbilical=True,
        flat=False,
    )


def small_sphere_s3(r: float = BIHARMONIC_RADIUS) -> ExampleSpec:
    r = _check_radius(r)
    rho = _num(small_sphere_rho(r))
    phi = make_immersion(
        sphere(3),
        [f"{rho}*sin(x)*cos(y)", f"{rho}*sin(x)*sin(y)", f"{rho}*cos(x)"],
        _POLAR,
        label="small-sphere-S3",
        params={"r": r},
    )
    return ExampleSpec(
        "small-sphere-S3",
        phi,
        _small_sphere_expected(r),
        "hypersphere of radius r in the unit 3-sphere; biharmonic exactly at r = 1/√2 and r = 1",
    )


def small_sphere_s3_mercator(r: float = BIHARMONIC_RADIUS, half_width: float = 2.0) -> ExampleSpec:
    """Same sphere in the isothermal Mercator chart ``(sech x cos y, sech x sin y, tanh x)``."""
    r = _check_radius(r)
    if half_width <= 0.0:
        raise BadParameter(f"half_width must be positive, got {half_width}")
    rho = _num(small_sphere_rho(r))
    cosh = "(exp(x) + exp(-x))"
    domain = Domain(-half_width, half_width, 0.0, TWO_PI, periodic_y=True, topology="annulus")
    phi = make_immersion(
        sphere(3),
        [f"2*{rho}*cos(y)/{cosh}", f"2*{rho}*sin(y)/{cosh}", f"{rho}*(exp(x) - exp(-x))/{cosh}"],
        domain,
        label="small-sphere-S3-mercator",
        params={"r": r},
    )
    return ExampleSpec("small-sphere-S3-mercator", phi, _small_sphere_expected(r), "isothermal chart of the small sphere")


def clifford_torus_s4() -> ExampleSpec:
    # S1(1/2) × S1(1/2) ⊂ S3(1/√2) ⊂ S4(1), the small hypersphere at height 1/√2
    c = _num(0.5 / (1.0 - BIHARMONIC_RADIUS))
    phi = make_immersion(
        sphere(4),
        [f"{c}*cos(x)", f"{c}*sin(x)", f"{c}*cos(y)", f"{c}*sin(y)"],
        _TORUS,
        label="clifford-torus-S4",
    )
    return ExampleSpec(
        "clifford-torus-S4",
        phi,
        _expect(biharmonic=True, harmonic=False, cmc=True, K=0.0, normH2=1.0, flat=True, pseudo_umbilical=True),
        "minimal torus of the biharmonic hypersphere S3(1/√2); flat and pseudo-umbilical",
    )


def flat_torus_r4() -> ExampleSpec:
    phi = make_immersion(euclidean(4), ["cos(x)", "sin(x)", "cos(y)", "sin(y)"], _TORUS, label="flat-torus-R4")
    return ExampleSpec(
        "flat-torus-R4",
        phi,
        _expect(biharmonic=False, harmonic=False, cmc=True, K=0.0, normH2=0.5, flat=True, pseudo_umbilical=True),
        "product of unit circles in R4",
    )


def perturbed_random(seed: int = 0, curved: bool = False, amplitude: float = 0.05, modes: int = 2) -> ExampleSpec:
    """Torus of revolution with seeded trigonometric perturbations of every coordinate.

    ``curved`` scales the torus into the unit ball of the stereographic chart of ``S3``.
    """
    if amplitude < 0.0 or amplitude > 0.2:
        raise BadParameter(f"amplitude must lie in [0, 0.2], got {amplitude}")
    rng = np.random.default_rng(int(seed))
    base = ["(2 + cos(y))*cos(x)", "(2 + cos(y))*sin(x)", "sin(y)"]
    coords = []
    for comp in base:
        terms = []
        for _ in range(int(modes)):
            k, l = (int(v) for v in rng.integers(0, 3, size=2))
            c = amplitude * float(rng.uniform(-1.0, 1.0))
            phase = float(rng.uniform(0.0, TWO_PI))
            terms.append(f"{_num(c)}*sin({k}*x + {l}*y + {_num(phase)})")
        coords.append(f"({comp} + {' + '.join(terms)})")
    if curved:
        coords = [f"0.2*{c}" for c in coords]
    ambient = sphere(3) if curved else euclidean(3)
    label = f"perturbed-random-{'S3' if curved else 'R3'}-{int(seed)}"
    phi = make_immersion(ambient, coords, _TORUS, label=label, params={"seed": float(seed), "amplitude": amplitude})
    return ExampleSpec(label, phi, _expect(biharmonic=False), "seeded generic control")


# ───────────── registry ─────────────

Builder = Callable[..., ExampleSpec]

EXAMPLES: Mapping[str, Builder] = {
    "plane-R3": plane_r3,
    "unit-sphere-R3": unit_sphere_r3,
    "cylinder-R3": cylinder_r3,
    "clifford-minimal-S3": clifford_minimal_s3,
    "small-sphere-S3": small_sphere_s3,
    "small-sphere-S3-mercator": small_sphere_s3_mercator,
    "clifford-torus-S4": clifford_torus_s4,
    "flat-torus-R4": flat_torus_r4,
    "perturbed-random": perturbed_random,
}

# family parameter scanned by default
FAMILY_PARAMS: Mapping[str, str] = {
    "small-sphere-S3": "r",
    "small-sphere-S3-mercator": "r",
    "perturbed-random": "amplitude",
}


def example_names() -> list[str]:
    return list(EXAMPLES)


def get_example(name: str, **params: float) -> ExampleSpec:
    """Look up a built-in example; keyword parameters go to its builder (``r=0.6``)."""
    try:
        builder = EXAMPLES[name]
    except KeyError:
        raise UnknownExample(name) from None
    try:
        spec = builder(**params)
    except TypeError as exc:
        raise BadParameter(f"{name}: {exc}") from exc
    logger.debug("built example %s with %s", name, params or "defaults")
    return spec


__all__ = [
    "BIHARMONIC_RADIUS",
    "EXAMPLES",
    "ExampleSpec",
    "Expected",
    "FAMILY_PARAMS",
    "PROPERTY_NAMES",
    "example_names",
    "get_example",
    "small_sphere_rho",
]
