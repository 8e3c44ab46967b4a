"""Truncated bivariate Taylor jets.

A jet of order ``k`` at a base point stores the Taylor coefficients ``c_ij`` of
``f(x0 + dx, y0 + dy)`` for ``i + j <= k``.  Coefficients are kept in graded
order ``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`` so that truncating to a
lower order is a prefix slice.

A jet may carry a tensor value shape: its coefficient array is then shaped
``(ncoef, *shape)`` and every operation acts componentwise (``*``) or through
:func:`jet_contract` (index contraction).  Jets are immutable.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Final, Iterable, Literal, Sequence

import numpy as np

from bitensionlab.errors import IndexOutOfOrder, OrderMismatch, SingularCompose

logger = logging.getLogger("bitensionlab.jets")

MAX_ORDER: Final = 5

ArithKind = Literal["add", "sub", "mul", "div", "neg"]
FnKind = Literal["sin", "cos", "tan", "exp", "ln", "sqrt", "pow_real"]

# reserved einsum label for the coefficient axis
_COEF: Final = "Z"


def ncoef(order: int) -> int:
    return (order + 1) * (order + 2) // 2


@dataclass(frozen=True)
class _Tables:
    monomials: tuple[tuple[int, int], ...]
    index: dict[tuple[int, int], int]
    left: np.ndarray
    right: np.ndarray
    scatter: np.ndarray
    factorials: np.ndarray
    dx_src: np.ndarray
    dx_fac: np.ndarray
    dy_src: np.ndarray
    dy_fac: np.ndarray


@lru_cache(maxsize=None)
def _tables(order: int) -> _Tables:
    monomials = tuple((d - j, j) for d in range(order + 1) for j in range(d + 1))
    index = {m: k for k, m in enumerate(monomials)}

    left: list[int] = []
    right: list[int] = []
    target: list[int] = []
    for ka, (ia, ja) in enumerate(monomials):
        for kb, (ib, jb) in enumerate(monomials):
            if ia + ja + ib + jb <= order:
                left.append(ka)
                right.append(kb)
                target.append(index[(ia + ib, ja + jb)])
    scatter = np.zeros((len(monomials), len(left)))
    scatter[target, np.arange(len(left))] = 1.0

    factorials = np.array([math.factorial(i) * math.factorial(j) for i, j in monomials], dtype=float)

    # derivative maps onto the order-1 monomials
    lower = monomials[: ncoef(order - 1)] if order > 0 else ()
    dx_src = np.array([index[(i + 1, j)] for i, j in lower], dtype=int)
    dx_fac = np.array([i + 1 for i, _ in lower], dtype=float)
    dy_src = np.array([index[(i, j + 1)] for i, j in lower], dtype=int)
    dy_fac = np.array([j + 1 for _, j in lower], dtype=float)

    return _Tables(
        monomials=monomials,
        index=index,
        left=np.array(left, dtype=int),
        right=np.array(right, dtype=int),
        scatter=scatter,
        factorials=factorials,
        dx_src=dx_src,
        dx_fac=dx_fac,
        dy_src=dy_src,
        dy_fac=dy_fac,
    )


def monomials(order: int) -> tuple[tuple[int, int], ...]:
    """Multi-indices ``(i, j)`` in coefficient storage order."""
    return _tables(order).monomials


def _aligned(arr: np.ndarray, rank: int) -> np.ndarray:
    extra = rank - (arr.ndim - 1)
    if extra <= 0:
        return arr
    return arr.reshape((arr.shape[0],) + (1,) * extra + arr.shape[1:])


def _cauchy(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    t = _tables(order)
    return np.tensordot(t.scatter, a[t.left] * b[t.right], axes=1)


class Jet:
    """Truncated Taylor polynomial in the local offsets ``(dx, dy)``."""

    __slots__ = ("order", "coeffs", "base_point")
    __array_ufunc__ = None  # ndarray (op) Jet defers to the reflected Jet operator

    order: int
    coeffs: np.ndarray
    base_point: tuple[float, float]

    def __init__(self, order: int, coeffs: Sequence[float] | np.ndarray, base_point: Sequence[float] = (0.0, 0.0)):
        if not 0 <= int(order) <= MAX_ORDER:
            raise ValueError(f"jet order must be in [0, {MAX_ORDER}], got {order}")
        arr = np.array(coeffs, dtype=float)
        if arr.ndim == 0 or arr.shape[0] != ncoef(int(order)):
            raise ValueError(f"order {order} jets need {ncoef(int(order))} coefficients, got shape {arr.shape}")
        arr.flags.writeable = False
        self.order = int(order)
        self.coeffs = arr
        self.base_point = (float(base_point[0]), float(base_point[1]))

    @classmethod
    def _wrap(cls, order: int, arr: np.ndarray, base_point: tuple[float, float]) -> Jet:
        obj = object.__new__(cls)
        arr.flags.writeable = False
        obj.order = order
        obj.coeffs = arr
        obj.base_point = base_point
        return obj

    # ───────────── constructors ─────────────

    @classmethod
    def constant(cls, value: float | np.ndarray, order: int, base_point: Sequence[float] = (0.0, 0.0)) -> Jet:
        val = np.asarray(value, dtype=float)
        arr = np.zeros((ncoef(order),) + val.shape)
        arr[0] = val
        return cls(order, arr, base_point)

    @classmethod
    def variable(cls, axis: int, value: float, order: int, base_point: Sequence[float] = (0.0, 0.0)) -> Jet:
        arr = np.zeros(ncoef(order))
        arr[0] = value
        if order >= 1:
            arr[1 + axis] = 1.0
        return cls(order, arr, base_point)

    # ───────────── accessors ─────────────

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def value(self) -> float | np.ndarray:
        """Value of the function at the base point."""
        head = self.coeffs[0]
        if head.ndim == 0:
            return float(head)
        return np.array(head)

    def __getitem__(self, key) -> Jet:
        if not isinstance(key, tuple):
            key = (key,)
        return Jet._wrap(self.order, np.array(self.coeffs[(slice(None),) + key]), self.base_point)

    def transpose(self, *axes: int) -> Jet:
        perm = (0,) + tuple(a + 1 for a in axes)
        return Jet._wrap(self.order, np.ascontiguousarray(self.coeffs.transpose(perm)), self.base_point)

    def sum(self, axis: int | tuple[int, ...] | None = None) -> Jet:
        if axis is None:
            axes = tuple(range(1, self.coeffs.ndim))
        elif isinstance(axis, int):
            axes = (axis + 1,)
        else:
            axes = tuple(a + 1 for a in axis)
        return Jet._wrap(self.order, self.coeffs.sum(axis=axes), self.base_point)

    def truncate(self, order: int) -> Jet:
        if order > self.order or order < 0:
            raise OrderMismatch(f"cannot truncate an order-{self.order} jet to order {order}")
        if order == self.order:
            return self
        return Jet._wrap(order, np.array(self.coeffs[: ncoef(order)]), self.base_point)

    def diff(self, axis: int) -> Jet:
        """Partial derivative along ``x`` (axis 0) or ``y`` (axis 1); the order drops by one."""
        if self.order == 0:
            raise IndexOutOfOrder("an order-0 jet carries no derivative information")
        t = _tables(self.order)
        src, fac = (t.dx_src, t.dx_fac) if axis == 0 else (t.dy_src, t.dy_fac)
        arr = self.coeffs[src] * _aligned(fac, self.coeffs.ndim - 1)
        return Jet._wrap(self.order - 1, arr, self.base_point)

    def gradient(self) -> Jet:
        """Stack of both partials; the new leading value axis indexes ``(x, y)``."""
        return jet_stack([self.diff(0), self.diff(1)])

    # ───────────── arithmetic ─────────────

    def _same_order(self, other: Jet) -> None:
        if other.order != self.order:
            raise OrderMismatch(f"jet orders differ: {self.order} vs {other.order}")

    def _as_jet(self, other: object) -> Jet:
        if isinstance(other, Jet):
            self._same_order(other)
            return other
        return Jet.constant(np.asarray(other, dtype=float), self.order, self.base_point)

    def __add__(self, other: object) -> Jet:
        o = self._as_jet(other)
        rank = max(self.ndim, o.ndim)
        return Jet._wrap(self.order, _aligned(self.coeffs, rank) + _aligned(o.coeffs, rank), self.base_point)

    __radd__ = __add__

    def __sub__(self, other: object) -> Jet:
        o = self._as_jet(other)
        rank = max(self.ndim, o.ndim)
        return Jet._wrap(self.order, _aligned(self.coeffs, rank) - _aligned(o.coeffs, rank), self.base_point)

    def __rsub__(self, other: object) -> Jet:
        return (-self) + other

    def __neg__(self) -> Jet:
        return Jet._wrap(self.order, -self.coeffs, self.base_point)

    def __mul__(self, other: object) -> Jet:
        if isinstance(other, Jet):
            self._same_order(other)
            rank = max(self.ndim, other.ndim)
            arr = _cauchy(_aligned(self.coeffs, rank), _aligned(other.coeffs, rank), self.order)
            return Jet._wrap(self.order, arr, self.base_point)
        c = np.asarray(other, dtype=float)
        return Jet._wrap(self.order, _aligned(self.coeffs, max(self.ndim, c.ndim)) * c, self.base_point)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> Jet:
        if isinstance(other, Jet):
            return self * other.reciprocal()
        c = np.asarray(other, dtype=float)
        if np.any(c == 0.0):
            raise SingularCompose("division by zero constant")
        return self * (1.0 / c)

    def __rtruediv__(self, other: object) -> Jet:
        return self.reciprocal() * other

    def __pow__(self, exponent: float) -> Jet:
        return self.pow_real(float(exponent))

    # ───────────── elementary functions ─────────────

    def _compose(self, taylor: list[np.ndarray]) -> Jet:
        """Evaluate ``sum_k taylor[k] * (self - self(0))**k`` by Horner's rule."""
        nil = np.array(self.coeffs)
        nil[0] = 0.0
        out = np.zeros_like(nil)
        out[0] = taylor[self.order]
        for k in range(self.order - 1, -1, -1):
            out = _cauchy(nil, out, self.order)
            out[0] += taylor[k]
        return Jet._wrap(self.order, out, self.base_point)

    def exp(self) -> Jet:
        e = np.exp(self.coeffs[0])
        return self._compose([e / math.factorial(k) for k in range(self.order + 1)])

    def sin(self) -> Jet:
        s, c = np.sin(self.coeffs[0]), np.cos(self.coeffs[0])
        cycle = (s, c, -s, -c)
        return self._compose([cycle[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def cos(self) -> Jet:
        s, c = np.sin(self.coeffs[0]), np.cos(self.coeffs[0])
        cycle = (c, -s, -c, s)
        return self._compose([cycle[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def tan(self) -> Jet:
        return self.sin() / self.cos()

    def ln(self) -> Jet:
        a0 = self.coeffs[0]
        if np.any(a0 <= 0.0):
            raise SingularCompose("ln of a jet with nonpositive constant term")
        taylor = [np.log(a0)]
        taylor += [(-1.0) ** (k + 1) / (k * a0**k) for k in range(1, self.order + 1)]
        return self._compose(taylor)

    def sqrt(self) -> Jet:
        if np.any(self.coeffs[0] <= 0.0):
            raise SingularCompose("sqrt of a jet with nonpositive constant term")
        return self.pow_real(0.5)

    def reciprocal(self) -> Jet:
        if np.any(self.coeffs[0] == 0.0):
            raise SingularCompose("division by a jet with zero constant term")
        return self.pow_real(-1.0)

    def pow_real(self, p: float) -> Jet:
        a0 = self.coeffs[0]
        if float(p).is_integer() and p >= 0:
            out = Jet.constant(np.ones_like(a0), self.order, self.base_point)
            base, n = self, int(p)
            while n:
                if n & 1:
                    out = out * base
                n >>= 1
                if n:
                    base = base * base
            return out
        if float(p).is_integer():
            if np.any(a0 == 0.0):
                raise SingularCompose("negative power of a jet with zero constant term")
        elif np.any(a0 <= 0.0):
            raise SingularCompose("fractional power of a jet with nonpositive constant term")
        taylor = []
        binom = 1.0
        for k in range(self.order + 1):
            taylor.append(binom * a0 ** (p - k))
            binom *= (p - k) / (k + 1)
        return self._compose(taylor)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, shape={self.shape}, value={self.value!r})"


# ───────────── functional API ─────────────


def jet_arith(a: Jet, b: Jet | float | None, kind: ArithKind) -> Jet:
    if kind == "neg":
        return -a
    if b is None:
        raise ValueError(f"{kind} needs a second operand")
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def jet_fn(a: Jet, kind: FnKind, exponent: float | None = None) -> Jet:
    if kind == "pow_real":
        if exponent is None:
            raise ValueError("pow_real needs an exponent")
        return a.pow_real(exponent)
    fn = {"sin": a.sin, "cos": a.cos, "tan": a.tan, "exp": a.exp, "ln": a.ln, "sqrt": a.sqrt}.get(kind)
    if fn is None:
        raise ValueError(f"unknown jet function {kind!r}")
    return fn()


def jet_extract(a: Jet, multi_index: tuple[int, int]) -> float | np.ndarray:
    """Partial derivative ``d^(i+j) f / dx^i dy^j`` at the base point."""
    i, j = multi_index
    if i < 0 or j < 0 or i + j > a.order:
        raise IndexOutOfOrder(f"multi-index {multi_index} exceeds jet order {a.order}")
    t = _tables(a.order)
    k = t.index[(i, j)]
    out = a.coeffs[k] * t.factorials[k]
    if np.ndim(out) == 0:
        return float(out)
    return np.array(out)


def coordinate_jets(point: Sequence[float], order: int) -> tuple[Jet, Jet]:
    """Jets of the coordinate functions ``x`` and ``y`` at ``point``."""
    base = (float(point[0]), float(point[1]))
    return Jet.variable(0, base[0], order, base), Jet.variable(1, base[1], order, base)


def jet_stack(jets: Iterable[Jet], axis: int = 0) -> Jet:
    items = list(jets)
    if not items:
        raise ValueError("jet_stack needs at least one jet")
    head = items[0]
    for other in items[1:]:
        head._same_order(other)
    return Jet._wrap(head.order, np.stack([j.coeffs for j in items], axis=axis + 1), head.base_point)


def jet_contract(subscripts: str, a: Jet | np.ndarray, b: Jet | np.ndarray) -> Jet:
    """Truncated product with index contraction over value axes (``numpy.einsum`` notation).

    Subscripts must be explicit (``"ij,jk->ik"``) and must not use the letter ``Z``.
    """
    spec = subscripts.replace(" ", "")
    if _COEF in spec or "->" not in spec:
        raise ValueError(f"bad contraction subscripts {subscripts!r}")
    lhs, out = spec.split("->")
    sa, sb = lhs.split(",")
    z = _COEF
    if isinstance(a, Jet) and isinstance(b, Jet):
        a._same_order(b)
        t = _tables(a.order)
        prod = np.einsum(f"{z}{sa},{z}{sb}->{z}{out}", a.coeffs[t.left], b.coeffs[t.right])
        return Jet._wrap(a.order, np.tensordot(t.scatter, prod, axes=1), a.base_point)
    if isinstance(a, Jet):
        arr = np.einsum(f"{z}{sa},{sb}->{z}{out}", a.coeffs, np.asarray(b, dtype=float))
        return Jet._wrap(a.order, arr, a.base_point)
    if isinstance(b, Jet):
        arr = np.einsum(f"{sa},{z}{sb}->{z}{out}", np.asarray(a, dtype=float), b.coeffs)
        return Jet._wrap(b.order, arr, b.base_point)
    raise TypeError("jet_contract needs at least one Jet operand")


def jet_inv(a: Jet) -> Jet:
    """Inverse of a matrix-valued jet (last two value axes), exact through the jet order."""
    a0 = a.coeffs[0]
    try:
        inv0 = np.linalg.inv(a0)
    except np.linalg.LinAlgError as exc:
        raise SingularCompose("matrix jet with singular constant term") from exc
    if not np.all(np.isfinite(inv0)):
        raise SingularCompose("matrix jet with singular constant term")
    nil = np.array(a.coeffs)
    nil[0] = 0.0
    step = jet_contract("...ij,...jk->...ik", -inv0, Jet._wrap(a.order, nil, a.base_point))
    term = Jet.constant(inv0, a.order, a.base_point)
    out = term
    # step has zero constant term, so its powers vanish beyond the order
    for _ in range(a.order):
        term = jet_contract("...ij,...jk->...ik", step, term)
        out = out + term
    return out


__all__ = [
    "MAX_ORDER",
    "Jet",
    "coordinate_jets",
    "jet_arith",
    "jet_contract",
    "jet_extract",
    "jet_fn",
    "jet_inv",
    "jet_stack",
    "monomials",
    "ncoef",
]
