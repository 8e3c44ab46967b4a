"""Exception hierarchy shared by every bitension-lab module."""
from __future__ import annotations


class BitensionError(RuntimeError):
    """Base class of all domain errors raised by the engine."""


# ───────────── jets ─────────────


class OrderMismatch(BitensionError):
    """Two jets of different truncation orders met in one operation."""


class SingularCompose(BitensionError):
    """Division by a jet with zero constant term, or ln/sqrt/pow outside their domain."""


class IndexOutOfOrder(BitensionError):
    """A multi-index asks for a derivative beyond the jet's order."""


# ───────────── exprdsl ─────────────


class ExprSyntaxError(BitensionError):
    """Malformed expression text. ``offset`` is the 1-based byte position of the problem."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownFunction(ExprSyntaxError):
    def __init__(self, name: str, offset: int) -> None:
        super().__init__(f"unknown function {name!r}", offset)
        self.name = name


class UnboundVariable(BitensionError):
    def __init__(self, name: str) -> None:
        super().__init__(f"variable {name!r} is not bound")
        self.name = name


# ───────────── ambient / immersion ─────────────


class BadParameter(BitensionError):
    """Invalid construction or checker parameter."""


class MetricDegenerate(BitensionError):
    """Metric matrix not positive definite at the evaluated point."""


class ChartViolation(BitensionError):
    """Point outside the chart (or the parameter domain)."""


class ImmersionDegenerate(BitensionError):
    """dφ does not have rank 2, or a prescribed metric is not positive definite."""


class OrderTooLow(BitensionError):
    def __init__(self, operation: str, required: int, available: int) -> None:
        super().__init__(f"{operation} needs jet order >= {required}, got {available}")
        self.operation = operation
        self.required = required
        self.available = available


# ───────────── verify ─────────────


class CheckNotApplicable(BitensionError):
    """The checker's hypothesis does not hold for the input; reported as skipped."""


class NotCompact(CheckNotApplicable):
    pass


class NotCMC(CheckNotApplicable):
    pass


class NotIsothermal(CheckNotApplicable):
    pass


class GridTooCoarse(BitensionError):
    pass


class EmptyRange(BitensionError):
    pass


class NoSignChange(BitensionError):
    """No scanned minimum fell below tolerance.

    Stored on :class:`ScanResult` as ``no_zero``; raised only when the caller asks for a zero.
    """


# ───────────── catalog ─────────────


class UnknownExample(BitensionError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unknown example {name!r}")
        self.name = name


class SpecParseError(BitensionError):
    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


__all__ = [
    "BadParameter",
    "BitensionError",
    "ChartViolation",
    "CheckNotApplicable",
    "EmptyRange",
    "ExprSyntaxError",
    "GridTooCoarse",
    "ImmersionDegenerate",
    "IndexOutOfOrder",
    "MetricDegenerate",
    "NoSignChange",
    "NotCMC",
    "NotCompact",
    "NotIsothermal",
    "OrderMismatch",
    "OrderTooLow",
    "SingularCompose",
    "SpecParseError",
    "UnboundVariable",
    "UnknownExample",
    "UnknownFunction",
]
