"""Expression and metric-file parsing.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | atom ("^" integer)?
    atom   := number | ident | ident "(" expr ")" | "(" expr ")"

Unary minus binds looser than ``^`` (as in ordinary notation), so ``-x^2``
reads as ``-(x^2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import expr as E


class ParseError(E.ExprError):
    def __init__(self, message: str, offset: int | None = None, text: str | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} at byte offset {offset}"
        super().__init__(message)


class MetricFileError(E.ExprError):
    pass


_NUMBER = re.compile(r"\d+(\.\d*)?([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?")


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, coords: Sequence[str]):
        self.text = text
        self.pos = 0
        self.coords = {name: i for i, name in enumerate(coords)}

    def error(self, message, pos=None):
        p = self.pos if pos is None else pos
        return ParseError(message, _byte_offset(self.text, p), self.text)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise self.error(f"expected '{ch}', found '{found}'")
        self.pos += 1

    def parse(self) -> E.Expr:
        e = self.expr()
        if self.peek():
            raise self.error(f"unexpected '{self.peek()}'")
        return e

    def expr(self):
        terms = [self.term()]
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            t = self.term()
            terms.append(t if op == "+" else E.neg(t))
        return E.add(*terms)

    def term(self):
        start = self.pos
        factors = [self.factor()]
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            pos = self.pos
            f = self.factor()
            if op == "/":
                try:
                    f = E.inv(f)
                except E.DomainError:
                    raise self.error("division by zero", pos) from None
            factors.append(f)
        try:
            return E.mul(*factors)
        except E.DomainError as exc:
            raise self.error(str(exc), start) from None

    def factor(self):
        if self.peek() == "-":
            self.pos += 1
            return E.neg(self.factor())
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            n = self.integer()
            try:
                return E.power(base, n)
            except E.DomainError as exc:
                raise self.error(str(exc)) from None
        return base

    def integer(self) -> int:
        self.skip()
        paren = False
        if self.peek() == "(":
            paren = True
            self.pos += 1
            self.skip()
        sign = 1
        if self.peek() == "-":
            sign = -1
            self.pos += 1
            self.skip()
        start = self.pos
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            raise self.error("expected an integer exponent")
        lit = m.group(0)
        if not lit.isdigit():
            raise self.error(f"non-integer exponent literal '{lit}'", start)
        self.pos = m.end()
        if paren:
            self.expect(")")
        return sign * int(lit)

    def atom(self):
        ch = self.peek()
        if not ch:
            raise self.error("unexpected end of input")
        if ch == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        m = _NUMBER.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return E.const(Fraction(m.group(0)))
        if ch.isidentifier():
            start = self.pos
            end = start
            while end < len(self.text) and (self.text[start:end + 1]).isidentifier():
                end += 1
            name = self.text[start:end]
            self.pos = end
            if self.peek() == "(":
                if name not in E.FUNCTIONS:
                    raise self.error(f"unknown function '{name}'", start)
                self.pos += 1
                arg = self.expr()
                self.expect(")")
                try:
                    return E.func(name, arg)
                except E.DomainError as exc:
                    raise self.error(str(exc), start) from None
            if name not in self.coords:
                raise self.error(f"unknown identifier '{name}'", start)
            return E.var(self.coords[name])
        raise self.error(f"unexpected character '{ch}'")


def parse_expr(text: str, coords: Sequence[str]) -> E.Expr:
    """Parse ``text`` into an Expr whose variables index into ``coords``."""
    return _Parser(text, coords).parse()


@dataclass(frozen=True)
class MetricSpec:
    """A coordinate chart with closed-form metric components."""

    dim: int
    coords: tuple
    components: tuple  # dim x dim tuple of tuples of Expr, symmetric
    signature: str = "lorentzian"
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.dim < 3:
            raise MetricFileError("metric dimension must be at least 3")
        if len(self.coords) != self.dim:
            raise MetricFileError(f"dim = {self.dim} but {len(self.coords)} coordinate names given")
        if len(self.components) != self.dim or any(len(r) != self.dim for r in self.components):
            raise MetricFileError("component array must be dim x dim")
        for a in range(self.dim):
            for b in range(a):
                if self.components[a][b] is not self.components[b][a]:
                    raise MetricFileError(f"component array not symmetric at ({b},{a})")
        for row in self.components:
            for c in row:
                if E.max_var(c) >= self.dim:
                    raise MetricFileError("component uses a variable outside the chart")

    def g(self, a: int, b: int) -> E.Expr:
        return self.components[a][b]

    def parse(self, text: str) -> E.Expr:
        return parse_expr(text, self.coords)

    def to_text(self) -> str:
        lines = []
        if self.name:
            lines.append(f"# {self.name}")
        lines.append(f"dim = {self.dim}")
        lines.append("coords = " + " ".join(self.coords))
        if self.signature != "lorentzian":
            lines.append(f"signature = {self.signature}")
        for a in range(self.dim):
            for b in range(a, self.dim):
                c = self.components[a][b]
                if c is not E.ZERO:
                    lines.append(f"g[{a}][{b}] = {E.to_string(c, self.coords)}")
        return "\n".join(lines) + "\n"


def metric_from_exprs(coords: Sequence[str], entries: dict, signature="lorentzian", name="") -> MetricSpec:
    """Build a MetricSpec from ``{(i, j): Expr-or-text}`` with i <= j."""
    n = len(coords)
    comps = [[E.ZERO] * n for _ in range(n)]
    for (i, j), val in entries.items():
        e = parse_expr(val, coords) if isinstance(val, str) else E.lift(val)
        comps[i][j] = e
        comps[j][i] = e
    return MetricSpec(n, tuple(coords), tuple(tuple(r) for r in comps), signature, name)


_ASSIGN = re.compile(r"^g\s*\[\s*(\d+)\s*\]\s*\[\s*(\d+)\s*\]\s*=(.*)$")


def parse_metric(text: str, name: str = "") -> MetricSpec:
    """Parse the line-based metric file format."""
    dim = None
    coords = None
    signature = "lorentzian"
    assigned: dict = {}
    pending = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _ASSIGN.match(line)
        if m:
            pending.append((lineno, int(m.group(1)), int(m.group(2)), m.group(3).strip()))
            continue
        if "=" not in line:
            raise MetricFileError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "dim":
            try:
                dim = int(value)
            except ValueError:
                raise MetricFileError(f"line {lineno}: dim must be an integer") from None
        elif key == "coords":
            coords = value.split()
        elif key == "signature":
            signature = value
        else:
            raise MetricFileError(f"line {lineno}: unknown key '{key}'")
    if dim is None or coords is None:
        raise MetricFileError("metric file must declare both 'dim' and 'coords'")
    if len(coords) != dim:
        raise MetricFileError(f"dim = {dim} but {len(coords)} coordinate names given")
    if len(set(coords)) != dim:
        raise MetricFileError("duplicate coordinate names")
    for lineno, i, j, body in pending:
        if i >= dim or j >= dim:
            raise MetricFileError(f"line {lineno}: index out of range for dim {dim}")
        try:
            e = parse_expr(body, coords)
        except ParseError as exc:
            raise MetricFileError(f"line {lineno}: {exc}") from None
        key = (min(i, j), max(i, j))
        if key in assigned and assigned[key] is not e:
            raise MetricFileError(
                f"line {lineno}: conflicting symmetric assignment for g[{key[0]}][{key[1]}]"
            )
        assigned[key] = e
    return metric_from_exprs(coords, assigned, signature, name)
