"""Scalar expression language for metrics, immersion coordinates and tensor fields.

Grammar (whitespace is insignificant)::

    expr    := sum
    sum     := product (("+" | "-") product)*
    product := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := atom ("^" unary)?            # right associative
    atom    := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"
    FUNC    := sin | cos | tan | exp | ln | sqrt

``pi`` is a named constant.  Parsing is a Pratt loop over binding powers
(``+ -`` 10, ``* /`` 20, prefix ``-`` 30, ``^`` 40).  Error offsets are
1-based byte positions in the UTF-8 encoded input; the end of input counts as
one past the last byte.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Final, Mapping, MutableMapping, Union

from bitensionlab.errors import ExprSyntaxError, SingularCompose, UnboundVariable, UnknownFunction
from bitensionlab.jets import Jet

logger = logging.getLogger("bitensionlab.exprdsl")

FUNCTIONS: Final = frozenset({"sin", "cos", "tan", "exp", "ln", "sqrt"})
CONSTANTS: Final = {"pi": math.pi}


# ───────────── AST ─────────────


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

_BINARY_BP: Final = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_PREFIX_BP: Final = 30
_ATOM_BP: Final = 100
# deeper nesting is a syntax error
MAX_DEPTH: Final = 100


# ───────────── tokenizer ─────────────

_TOKEN_RE: Final = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    offset: int  # 1-based byte offset


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    byte = 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", byte)
        kind = m.lastgroup or ""
        chunk = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, chunk, byte))
        byte += len(chunk.encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0
        self.depth = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.advance()
        if tok.text != text or tok.kind != "op":
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", tok.offset)
        return tok

    def parse(self, min_bp: int) -> Expr:
        if self.depth >= MAX_DEPTH:
            raise ExprSyntaxError(f"expression nested deeper than {MAX_DEPTH} levels", self.peek().offset)
        self.depth += 1
        try:
            return self._parse(min_bp)
        finally:
            self.depth -= 1

    def _parse(self, min_bp: int) -> Expr:
        left = self.nud(self.advance())
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in _BINARY_BP:
                return left
            bp = _BINARY_BP[tok.text]
            if bp <= min_bp:
                return left
            self.advance()
            # ^ binds right: its right operand may start with a prefix minus
            right = self.parse(_PREFIX_BP - 1 if tok.text == "^" else bp)
            left = BinOp(tok.text, left, right)

    def nud(self, tok: _Token) -> Expr:
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number {tok.text!r} is not finite", tok.offset)
            return self.postfix_power(Num(value))
        if tok.kind == "name":
            if self.peek().kind == "op" and self.peek().text == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownFunction(tok.text, tok.offset)
                self.advance()
                arg = self.parse(0)
                self.expect(")")
                return self.postfix_power(Call(tok.text, arg))
            if tok.text in FUNCTIONS:
                raise ExprSyntaxError(f"function {tok.text!r} needs an argument list", self.peek().offset)
            if tok.text in CONSTANTS:
                return self.postfix_power(Num(CONSTANTS[tok.text]))
            return self.postfix_power(Var(tok.text))
        if tok.kind == "op" and tok.text == "(":
            inner = self.parse(0)
            self.expect(")")
            return self.postfix_power(inner)
        if tok.kind == "op" and tok.text in {"-", "+"}:
            operand = self.parse(_PREFIX_BP)
            return Neg(operand) if tok.text == "-" else operand
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"unexpected {found}", tok.offset)

    def postfix_power(self, atom: Expr) -> Expr:
        # atoms bind ^ tighter than the prefix minus that may precede them
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            return BinOp("^", atom, self.parse(_PREFIX_BP - 1))
        return atom


def parse_expr(text: str | bytes) -> Expr:
    """Parse ``text`` into an :data:`Expr`; raises :class:`ExprSyntaxError` on bad input."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ExprSyntaxError("input is not valid UTF-8", exc.start + 1) from exc
    parser = _Parser(text)
    expr = parser.parse(0)
    tok = parser.peek()
    if tok.kind != "end":
        raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset)
    return expr


# ───────────── printing ─────────────


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _BINARY_BP[e.op]
    if isinstance(e, Neg):
        return _PREFIX_BP
    if isinstance(e, Num) and e.value < 0:
        return _PREFIX_BP
    return _ATOM_BP


def to_text(e: Expr) -> str:
    """Pretty-print with the fewest parentheses that re-parse to the same tree."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        if _prec(e.operand) < _PREFIX_BP:
            inner = f"({inner})"
        return f"-{inner}"
    p = _BINARY_BP[e.op]
    left = to_text(e.left)
    right = to_text(e.right)
    if e.op == "^":
        if _prec(e.left) <= p:
            left = f"({left})"
        if _prec(e.right) < p and not isinstance(e.right, Neg):
            right = f"({right})"
    else:
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
    return f"{left} {e.op} {right}" if p == 10 else f"{left}{e.op}{right}"


def free_variables(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset({e.name})
    if isinstance(e, Num):
        return frozenset()
    if isinstance(e, Neg):
        return free_variables(e.operand)
    if isinstance(e, Call):
        return free_variables(e.arg)
    return free_variables(e.left) | free_variables(e.right)


# ───────────── evaluation ─────────────

Value = Union[Jet, float]


def _apply(func: str, v: Value) -> Value:
    if isinstance(v, Jet):
        return getattr(v, func)()
    if func in {"ln", "sqrt"} and v <= 0.0:
        raise SingularCompose(f"{func} of nonpositive constant {v!r}")
    if func == "tan" and math.cos(v) == 0.0:
        raise SingularCompose("tan at a pole")
    return {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp, "ln": math.log, "sqrt": math.sqrt}[
        func
    ](v)


def _power(base: Value, exponent: Value) -> Value:
    if isinstance(exponent, Jet):
        if isinstance(base, Jet):
            return (exponent * base.ln()).exp()
        if base <= 0.0:
            raise SingularCompose("non-constant power of a nonpositive base")
        return (exponent * math.log(base)).exp()
    if isinstance(base, Jet):
        return base.pow_real(exponent)
    if base == 0.0 and exponent < 0:
        raise SingularCompose("negative power of zero")
    if base < 0.0 and not float(exponent).is_integer():
        raise SingularCompose("fractional power of a negative constant")
    return float(base) ** float(exponent)


def _eval(e: Expr, env: Mapping[str, Value], cache: MutableMapping[int, Value]) -> Value:
    key = id(e)
    hit = cache.get(key)
    if hit is not None:
        return hit
    out: Value
    if isinstance(e, Num):
        out = float(e.value)
    elif isinstance(e, Var):
        if e.name not in env:
            raise UnboundVariable(e.name)
        out = env[e.name]
    elif isinstance(e, Neg):
        out = -_eval(e.operand, env, cache)
    elif isinstance(e, Call):
        out = _apply(e.func, _eval(e.arg, env, cache))
    else:
        a = _eval(e.left, env, cache)
        b = _eval(e.right, env, cache)
        if e.op == "+":
            out = a + b
        elif e.op == "-":
            out = a - b
        elif e.op == "*":
            out = a * b
        elif e.op == "/":
            if not isinstance(b, Jet) and b == 0.0:
                raise SingularCompose("division by zero constant")
            out = a / b
        else:
            out = _power(a, b)
    cache[key] = out
    return out


def eval_value(e: Expr, env: Mapping[str, Value], cache: MutableMapping[int, Value] | None = None) -> Value:
    """Evaluate to a jet, or to a float when no jet reaches the expression.

    ``cache`` memoises subtrees by identity; share one dict across expressions
    that reuse nodes (symbolic derivatives do) and are evaluated on the same env.
    """
    return _eval(e, env, {} if cache is None else cache)


def eval_expr(e: Expr, env: Mapping[str, Value], cache: MutableMapping[int, Value] | None = None) -> Jet:
    """Evaluate ``e`` in jet arithmetic; constants are lifted to the env's jet order."""
    out = eval_value(e, env, cache)
    if isinstance(out, Jet):
        return out
    template = next((v for v in env.values() if isinstance(v, Jet)), None)
    if template is None:
        return Jet.constant(out, 0)
    return Jet.constant(out, template.order, template.base_point)


def eval_constant(e: Expr) -> float:
    """Evaluate an expression without free variables."""
    value = eval_value(e, {})
    assert not isinstance(value, Jet)
    return float(value)


# ───────────── symbolic differentiation ─────────────

_ZERO: Final = Num(0.0)
_ONE: Final = Num(1.0)


def _is(e: Expr, v: float) -> bool:
    return isinstance(e, Num) and e.value == v


def _add(a: Expr, b: Expr) -> Expr:
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return BinOp("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return BinOp("-", a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is(a, 0.0) or _is(b, 0.0):
        return _ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return BinOp("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is(a, 0.0):
        return _ZERO
    if _is(b, 1.0):
        return a
    return BinOp("/", a, b)


def _pow(a: Expr, b: Expr) -> Expr:
    if _is(b, 0.0):
        return _ONE
    if _is(b, 1.0):
        return a
    return BinOp("^", a, b)


def derivative(e: Expr, name: str) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to the variable ``name``.

    The result shares subtrees with ``e``; evaluate both with one cache.
    """
    if name not in free_variables(e):
        return _ZERO
    if isinstance(e, Var):
        return _ONE
    if isinstance(e, Neg):
        return _neg(derivative(e.operand, name))
    if isinstance(e, Call):
        du = derivative(e.arg, name)
        u = e.arg
        if e.func == "sin":
            return _mul(Call("cos", u), du)
        if e.func == "cos":
            return _neg(_mul(Call("sin", u), du))
        if e.func == "tan":
            return _div(du, _pow(Call("cos", u), Num(2.0)))
        if e.func == "exp":
            return _mul(e, du)
        if e.func == "ln":
            return _div(du, u)
        return _div(du, _mul(Num(2.0), e))  # sqrt
    assert isinstance(e, BinOp)
    a, b = e.left, e.right
    da, db = derivative(a, name), derivative(b, name)
    if e.op == "+":
        return _add(da, db)
    if e.op == "-":
        return _sub(da, db)
    if e.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if e.op == "/":
        return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, Num(2.0)))
    # ^
    if name not in free_variables(b):
        lowered = Num(b.value - 1.0) if isinstance(b, Num) else _sub(b, _ONE)
        return _mul(_mul(b, _pow(a, lowered)), da)
    return _mul(e, _add(_mul(db, Call("ln", a)), _div(_mul(b, da), a)))


__all__ = [
    "BinOp",
    "Call",
    "Expr",
    "FUNCTIONS",
    "MAX_DEPTH",
    "Neg",
    "Num",
    "Var",
    "derivative",
    "eval_constant",
    "eval_expr",
    "eval_value",
    "free_variables",
    "parse_expr",
    "to_text",
]
