"""Field files: a small text format for analytic forms on a grid.

::

    dim 3
    axis 1 -4 4 32
    axis 2 -4 4 32
    axis 3 -4 4 32
    component 1 : -2*x1*exp(-r2)     # dx^1 coefficient
    component 23 : x2^2              # dx^2 ^ dx^3

Expressions use ``+ - * / ^``, unary minus, parentheses, the functions
``exp sin cos sqrt log``, the coordinates ``x1..xn`` and ``r2 = sum xi^2``.
Precedence is ``^`` over unary minus over ``* /`` over ``+ -``; ``^`` is
right-associative and its exponent must be constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .algebra import index_label
from .fields import FormField, GridSpec

E_SYNTAX = "E_SYNTAX"
E_IDENT = "E_IDENT"
E_BASIS = "E_BASIS"
E_DIM = "E_DIM"
E_VALUE = "E_VALUE"
E_DOMAIN = "E_DOMAIN"

FUNCTIONS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt, "log": np.log}


class FieldFileError(ValueError):
    """Parse or evaluation failure with a diagnostic code and position."""

    def __init__(self, code: str, message: str, line: int | None = None, column: int | None = None):
        self.code = code
        self.message = message
        self.line = line
        self.column = column
        super().__init__(self.record())

    def record(self) -> str:
        """One-line machine-readable form, ``code:line:column: message``."""
        line = "" if self.line is None else str(self.line)
        col = "" if self.column is None else str(self.column)
        return f"{self.code}:{line}:{col}: {self.message}"


# -- expression tree ---------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    axis: int


@dataclass(frozen=True)
class R2:
    pass


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    arg: object


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


def _tokenize(text: str, line: int, col0: int) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FieldFileError(E_SYNTAX, f"unexpected character {text[pos]!r}", line, col0 + pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), col0 + pos))
        pos = m.end()
    tokens.append(("end", "", col0 + len(text)))
    return tokens


class _ExprParser:
    def __init__(self, text: str, n: int, line: int, col0: int):
        self.tokens = _tokenize(text, line, col0)
        self.i = 0
        self.n = n
        self.line = line

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, tok, message=None):
        kind, text, col = tok
        if message is None:
            message = "unexpected end of expression" if kind == "end" else f"unexpected {text!r}"
        return FieldFileError(E_SYNTAX, message, self.line, col)

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise self.error(self.peek())
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            start = self.peek()
            exponent = self.unary()
            if not _is_constant(exponent):
                raise self.error(start, "exponent must be constant")
            return BinOp("^", base, exponent)
        return base

    def primary(self):
        kind, text, col = tok = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "op" and text == "(":
            node = self.expr()
            if self.peek()[1] != ")":
                raise self.error(self.peek(), "expected ')'")
            self.take()
            return node
        if kind == "name":
            if text in FUNCTIONS:
                if self.peek()[1] != "(":
                    raise self.error(self.peek(), f"expected '(' after {text}")
                self.take()
                arg = self.expr()
                if self.peek()[1] != ")":
                    raise self.error(self.peek(), "expected ')'")
                self.take()
                return Call(text, arg)
            if text == "r2":
                return R2()
            m = re.fullmatch(r"x([1-9]\d*)", text)
            if m:
                axis = int(m.group(1))
                if axis > self.n:
                    raise FieldFileError(E_DIM, f"variable {text} exceeds dimension {self.n}", self.line, col)
                return Var(axis)
            raise FieldFileError(E_IDENT, f"unknown identifier {text!r}", self.line, col)
        raise self.error(tok)


def _is_constant(node) -> bool:
    if isinstance(node, Num):
        return True
    if isinstance(node, (Var, R2)):
        return False
    if isinstance(node, Neg):
        return _is_constant(node.operand)
    if isinstance(node, BinOp):
        return _is_constant(node.left) and _is_constant(node.right)
    if isinstance(node, Call):
        return _is_constant(node.arg)
    raise TypeError(node)


def parse_expression(text: str, n: int, line: int = 1, column: int = 1):
    """Parse one expression for dimension ``n``; columns are 1-based."""
    return _ExprParser(text, n, line, column).parse()


# -- evaluation ----------------------------------------------------------------

class _DomainError(Exception):
    def __init__(self, what: str, mask):
        self.what = what
        self.mask = mask


def _checked(values, inputs_ok, what):
    bad = ~np.isfinite(values) & inputs_ok
    if np.any(bad):
        raise _DomainError(what, bad)
    return values


def evaluate(node, coords: list):
    """Evaluate a tree on broadcastable coordinate arrays ``[x1, ..., xn]``."""
    with np.errstate(all="ignore"):
        return _eval(node, [np.asarray(c, dtype=float) for c in coords])


def _eval(node, coords):
    if isinstance(node, Num):
        return np.float64(node.value) + np.zeros(np.broadcast(*coords).shape) if coords else np.float64(node.value)
    if isinstance(node, Var):
        return coords[node.axis - 1]
    if isinstance(node, R2):
        total = 0.0
        for c in coords:
            total = total + c * c
        return total
    if isinstance(node, Neg):
        return -_eval(node.operand, coords)
    if isinstance(node, BinOp):
        a = _eval(node.left, coords)
        b = _eval(node.right, coords)
        ok = np.isfinite(a) & np.isfinite(b)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return _checked(a / b, ok, "division by zero")
        return _checked(np.power(a, b), ok, "invalid power")
    if isinstance(node, Call):
        a = _eval(node.arg, coords)
        return _checked(FUNCTIONS[node.name](a), np.isfinite(a), f"{node.name} outside its domain")
    raise TypeError(node)


# -- field specification -------------------------------------------------------

@dataclass(frozen=True)
class Component:
    index: tuple
    expression: object
    source: str
    line: int


@dataclass(frozen=True)
class FieldSpec:
    """Parsed field file: dimension, axes and component expressions."""

    n: int
    axes: tuple
    components: tuple

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.axes)


_DIM = re.compile(r"\s*dim\s+(\S+)\s*$")
_AXIS = re.compile(r"\s*axis\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)\s*$")
_COMPONENT = re.compile(r"(\s*component\s*)([^:\s]*)(\s*:)(.*)$")


def _strip_comment(raw: str) -> str:
    cut = raw.find("#")
    return raw if cut < 0 else raw[:cut]


def _parse_basis(label: str, n: int, line: int, col: int) -> tuple:
    if not label.isdigit():
        raise FieldFileError(E_BASIS, f"basis index {label!r} is not a digit string", line, col)
    if label == "0":
        return ()
    axes = tuple(int(ch) for ch in label)
    if any(a < 1 or a > n for a in axes):
        raise FieldFileError(E_BASIS, f"basis index {label} has an axis outside 1..{n}", line, col)
    if len(set(axes)) != len(axes):
        raise FieldFileError(E_BASIS, f"basis index {label} repeats an axis", line, col)
    if list(axes) != sorted(axes):
        raise FieldFileError(E_BASIS, f"basis index {label} is not in increasing order", line, col)
    return axes


def _number(text: str, kind, line: int, what: str):
    try:
        return kind(text)
    except ValueError:
        raise FieldFileError(E_VALUE, f"{what} {text!r} is not a valid number", line, 1) from None


def parse_field_spec(text: str) -> FieldSpec:
    """Parse a field file. Raises :class:`FieldFileError` with a diagnostic code."""
    lines = [(i + 1, _strip_comment(raw)) for i, raw in enumerate(text.splitlines())]
    lines = [(no, body) for no, body in lines if body.strip()]
    if not lines:
        raise FieldFileError(E_SYNTAX, "empty field file", 1, 1)
    no, body = lines[0]
    m = _DIM.match(body)
    if m is None:
        raise FieldFileError(E_SYNTAX, "first line must be 'dim <n>'", no, 1)
    n = _number(m.group(1), int, no, "dimension")
    if not 1 <= n <= 9:
        raise FieldFileError(E_DIM, f"dimension must be in 1..9, got {n}", no, m.start(1) + 1)
    axes = []
    rest = lines[1:]
    while rest and _AXIS.match(rest[0][1]):
        no, body = rest.pop(0)
        m = _AXIS.match(body)
        i = _number(m.group(1), int, no, "axis")
        if i != len(axes) + 1:
            raise FieldFileError(E_DIM, f"expected axis {len(axes) + 1}, got axis {i}", no, m.start(1) + 1)
        if i > n:
            raise FieldFileError(E_DIM, f"axis {i} exceeds dimension {n}", no, m.start(1) + 1)
        lo = _number(m.group(2), float, no, "axis min")
        hi = _number(m.group(3), float, no, "axis max")
        pts = _number(m.group(4), int, no, "point count")
        if not lo < hi or pts < 3:
            raise FieldFileError(E_VALUE, f"axis {i} needs min < max and points >= 3", no, 1)
        axes.append((lo, hi, pts))
    if len(axes) != n:
        where = rest[0][0] if rest else lines[-1][0]
        raise FieldFileError(E_DIM, f"expected {n} axis lines, got {len(axes)}", where, 1)
    components = []
    seen = set()
    for no, body in rest:
        m = _COMPONENT.match(body)
        if m is None:
            raise FieldFileError(E_SYNTAX, "expected 'component <index> : <expression>'", no, 1)
        label_col = m.start(2) + 1
        index = _parse_basis(m.group(2), n, no, label_col)
        if index in seen:
            raise FieldFileError(E_BASIS, f"duplicate component {m.group(2)}", no, label_col)
        seen.add(index)
        expr = parse_expression(m.group(4), n, no, m.start(4) + 1)
        components.append(Component(index, expr, m.group(4).strip(), no))
    return FieldSpec(n, tuple(axes), tuple(components))


def evaluate_spec(spec: FieldSpec) -> FormField:
    """Sample every component on the grid; domain failures name the node."""
    grid = spec.grid
    mesh = grid.mesh()
    comps = {}
    for comp in spec.components:
        try:
            comps[comp.index] = np.broadcast_to(evaluate(comp.expression, mesh), grid.shape).copy()
        except _DomainError as exc:
            node = tuple(int(k) for k in np.argwhere(exc.mask)[0])
            coords = ", ".join(f"{float(c[node]):.17g}" for c in mesh)
            raise FieldFileError(
                E_DOMAIN, f"component {index_label(comp.index)}: {exc.what} at node {node} (x = {coords})",
                comp.line, None) from None
    return FormField(grid, comps)


def load_field(path) -> FormField:
    with open(path, encoding="utf-8") as fh:
        return evaluate_spec(parse_field_spec(fh.read()))


__all__ = [
    "FieldFileError", "FieldSpec", "Component", "parse_field_spec", "parse_expression",
    "evaluate", "evaluate_spec", "load_field",
    "E_SYNTAX", "E_IDENT", "E_BASIS", "E_DIM", "E_VALUE", "E_DOMAIN",
]
