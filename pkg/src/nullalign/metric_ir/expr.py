"""Immutable expression trees over chart coordinates.

Nodes are interned: two structurally identical trees built through the
constructors below are the same Python object, so equality is identity and
large derivative tables share their common subtrees.  Every constructor applies
constant folding and the trivial identities (0*x, 1*x, x^0, x^1, --x); nothing
else is simplified.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

NODE_CAP = 1_000_000

UNARY = ("neg", "exp", "log", "sin", "cos", "sinh", "cosh", "sqrt", "inv")
FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "sqrt")
TRANSCENDENTAL = frozenset({"exp", "log", "sin", "cos", "sinh", "cosh", "sqrt"})


class ExprError(Exception):
    pass


class DomainError(ExprError):
    """Evaluation left the real domain of a subexpression."""

    def __init__(self, message: str, subtree: "Expr | None" = None):
        self.reason = message
        self.subtree = subtree
        if subtree is not None:
            message = f"{message} in subexpression '{to_string(subtree)}'"
        super().__init__(message)

    def describe(self, names=None) -> str:
        """The message with coordinate names substituted into the subexpression."""
        if self.subtree is None:
            return self.reason
        return f"{self.reason} in subexpression '{to_string(self.subtree, names)}'"


class NotRational(ExprError):
    pass


class NodeCapExceeded(ExprError):
    pass


class Expr:
    """A node of an interned expression DAG.

    ``kind`` is one of ``const``, ``var``, ``add``, ``mul``, ``pow`` or a unary
    name from ``UNARY``.  ``value`` holds the Fraction of a constant, the index
    of a variable or the integer exponent of a power.
    """

    __slots__ = ("kind", "value", "args", "_hash", "__weakref__")

    def __init__(self, kind, value, args):
        self.kind = kind
        self.value = value
        self.args = args
        self._hash = hash((kind, value, tuple(id(a) for a in args)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        return f"Expr({to_string(self)})"

    def __str__(self):
        return to_string(self)

    # Operator sugar; keeps tests and the catalog readable.
    def __add__(self, other):
        return add(self, lift(other))

    def __radd__(self, other):
        return add(lift(other), self)

    def __sub__(self, other):
        return add(self, neg(lift(other)))

    def __rsub__(self, other):
        return add(lift(other), neg(self))

    def __mul__(self, other):
        return mul(self, lift(other))

    def __rmul__(self, other):
        return mul(lift(other), self)

    def __truediv__(self, other):
        return mul(self, inv(lift(other)))

    def __rtruediv__(self, other):
        return mul(lift(other), inv(self))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise ExprError("exponents must be integers")
        return power(self, n)

    @property
    def is_const(self) -> bool:
        return self.kind == "const"


_table: dict = {}
_lock = threading.Lock()


def _make(kind, value, args=()) -> Expr:
    key = (kind, value, tuple(id(a) for a in args))
    node = _table.get(key)
    if node is not None:
        return node
    with _lock:
        node = _table.get(key)
        if node is None:
            node = Expr(kind, value, tuple(args))
            _table[key] = node
    return node


def const(q) -> Expr:
    if isinstance(q, float):
        q = Fraction(q).limit_denominator(10**12) if not q.is_integer() else Fraction(int(q))
    return _make("const", Fraction(q))


ZERO = const(0)
ONE = const(1)


def var(index: int) -> Expr:
    if index < 0:
        raise ExprError("variable index must be non-negative")
    return _make("var", int(index))


def lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction, float)):
        return const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def add(*terms: Expr) -> Expr:
    flat = []
    total = Fraction(0)
    for t in terms:
        if t.kind == "add":
            items = t.args
        else:
            items = (t,)
        for s in items:
            if s.kind == "const":
                total += s.value
            else:
                flat.append(s)
    if total != 0:
        flat.append(const(total))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return _make("add", None, flat)


def mul(*factors: Expr) -> Expr:
    flat = []
    coeff = Fraction(1)
    for f in factors:
        items = f.args if f.kind == "mul" else (f,)
        for s in items:
            if s.kind == "const":
                coeff *= s.value
            else:
                flat.append(s)
    if coeff == 0:
        return ZERO
    if not flat:
        return const(coeff)
    if coeff != 1:
        flat.insert(0, const(coeff))
    if len(flat) == 1:
        return flat[0]
    return _make("mul", None, flat)


def neg(a: Expr) -> Expr:
    if a.kind == "const":
        return const(-a.value)
    if a.kind == "neg":
        return a.args[0]
    if a.kind == "mul" and a.args[0].kind == "const":
        return mul(const(-a.args[0].value), *a.args[1:])
    return _make("neg", None, (a,))


def power(a: Expr, n: int) -> Expr:
    if not isinstance(n, int):
        raise ExprError(f"non-integer exponent {n!r}")
    if n == 0:
        return ONE
    if n == 1:
        return a
    if a.kind == "const":
        if a.value == 0 and n < 0:
            raise DomainError("zero raised to a negative power", a)
        return const(a.value**n)
    if a.kind == "pow":
        return power(a.args[0], a.value * n)
    if a.kind == "inv":
        return power(a.args[0], -n)
    return _make("pow", n, (a,))


def inv(a: Expr) -> Expr:
    if a.kind == "const":
        if a.value == 0:
            raise DomainError("division by zero", a)
        return const(1 / a.value)
    if a.kind == "inv":
        return a.args[0]
    if a.kind == "pow":
        return power(a.args[0], -a.value)
    return _make("inv", None, (a,))


def _exact_sqrt(q: Fraction):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def func(name: str, a: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function '{name}'")
    if a.kind == "const":
        q = a.value
        if q == 0 and name in ("sin", "sinh"):
            return ZERO
        if q == 0 and name in ("cos", "cosh", "exp"):
            return ONE
        if q == 1 and name == "log":
            return ZERO
        if name == "sqrt":
            r = _exact_sqrt(q)
            if r is not None:
                return const(r)
            if q < 0:
                raise DomainError("square root of a negative constant", a)
        if name == "log" and q <= 0:
            raise DomainError("logarithm of a non-positive constant", a)
    return _make(name, None, (a,))


def exp(a):
    return func("exp", lift(a))


def log(a):
    return func("log", lift(a))


def sin(a):
    return func("sin", lift(a))


def cos(a):
    return func("cos", lift(a))


def sinh(a):
    return func("sinh", lift(a))


def cosh(a):
    return func("cosh", lift(a))


def sqrt(a):
    return func("sqrt", lift(a))


def rebuild(e: Expr, args: Sequence[Expr]) -> Expr:
    k = e.kind
    if k in ("const", "var"):
        return e
    if k == "add":
        return add(*args)
    if k == "mul":
        return mul(*args)
    if k == "pow":
        return power(args[0], e.value)
    if k == "neg":
        return neg(args[0])
    if k == "inv":
        return inv(args[0])
    return func(k, args[0])


def fold(e: Expr) -> Expr:
    """Re-run constant folding bottom-up (idempotent on constructor-built trees)."""
    memo: dict = {}

    def go(x):
        r = memo.get(id(x))
        if r is None:
            r = rebuild(x, [go(a) for a in x.args])
            memo[id(x)] = r
        return r

    return go(e)


# ---------------------------------------------------------------- traversal


def topo_order(roots: Iterable[Expr]) -> list[Expr]:
    """Unique nodes reachable from ``roots``, children before parents."""
    seen: set = set()
    order: list = []
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for a in node.args:
                if id(a) not in seen:
                    stack.append((a, False))
    return order


def node_count(*roots: Expr) -> int:
    return len(topo_order(roots))


def max_var(e: Expr) -> int:
    return max((n.value for n in topo_order([e]) if n.kind == "var"), default=-1)


def is_rational(e: Expr) -> bool:
    return not any(n.kind in TRANSCENDENTAL for n in topo_order([e]))


# ---------------------------------------------------------------- calculus


@lru_cache(maxsize=None)
def _diff(e: Expr, i: int) -> Expr:
    k = e.kind
    if k == "const":
        return ZERO
    if k == "var":
        return ONE if e.value == i else ZERO
    if k == "add":
        return add(*(_diff(a, i) for a in e.args))
    if k == "mul":
        terms = []
        for j, a in enumerate(e.args):
            da = _diff(a, i)
            if da is ZERO:
                continue
            terms.append(mul(*e.args[:j], da, *e.args[j + 1:]))
        return add(*terms)
    a = e.args[0]
    da = _diff(a, i)
    if da is ZERO:
        return ZERO
    if k == "pow":
        return mul(const(e.value), power(a, e.value - 1), da)
    if k == "neg":
        return neg(da)
    if k == "inv":
        return neg(mul(power(a, -2), da))
    if k == "exp":
        return mul(e, da)
    if k == "log":
        return mul(inv(a), da)
    if k == "sin":
        return mul(cos(a), da)
    if k == "cos":
        return neg(mul(sin(a), da))
    if k == "sinh":
        return mul(cosh(a), da)
    if k == "cosh":
        return mul(sinh(a), da)
    if k == "sqrt":
        return mul(const(Fraction(1, 2)), inv(e), da)
    raise ExprError(f"cannot differentiate node kind {k}")


def diff(e: Expr, index: int, times: int = 1) -> Expr:
    """Exact partial derivative with respect to coordinate ``index``."""
    if index < 0:
        raise ExprError("coordinate index must be non-negative")
    for _ in range(times):
        e = _diff(e, index)
    return e


# ---------------------------------------------------------------- evaluation

_FLOAT_FUNCS = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "sinh": math.sinh,
    "cosh": math.cosh,
}


def _eval_float_node(node: Expr, vals: list, point) -> float:
    k = node.kind
    if k == "const":
        return float(node.value)
    if k == "var":
        return float(point[node.value])
    if k == "add":
        return math.fsum(vals)
    if k == "mul":
        r = 1.0
        for v in vals:
            r *= v
        return r
    a = vals[0]
    if k == "neg":
        return -a
    if k == "pow":
        if a == 0.0 and node.value < 0:
            raise DomainError("pole (zero raised to a negative power)", node)
        return a**node.value
    if k == "inv":
        if a == 0.0:
            raise DomainError("pole (division by zero)", node)
        return 1.0 / a
    if k == "log":
        if a <= 0.0:
            raise DomainError("logarithm of a non-positive value", node)
        return math.log(a)
    if k == "sqrt":
        if a < 0.0:
            raise DomainError("square root of a negative value", node)
        return math.sqrt(a)
    try:
        return _FLOAT_FUNCS[k](a)
    except OverflowError:
        raise DomainError("overflow", node) from None


def _eval_exact_node(node: Expr, vals: list, point) -> Fraction:
    k = node.kind
    if k == "const":
        return node.value
    if k == "var":
        return Fraction(point[node.value])
    if k == "add":
        return sum(vals, Fraction(0))
    if k == "mul":
        r = Fraction(1)
        for v in vals:
            r *= v
        return r
    a = vals[0]
    if k == "neg":
        return -a
    if k == "pow":
        if a == 0 and node.value < 0:
            raise DomainError("pole (zero raised to a negative power)", node)
        return a**node.value
    if k == "inv":
        if a == 0:
            raise DomainError("pole (division by zero)", node)
        return 1 / a
    if k == "sqrt":
        r = _exact_sqrt(a)
        if r is not None:
            return r
        if a < 0:
            raise DomainError("square root of a negative value", node)
    raise NotRational(k)


def _run(roots, point, node_eval):
    vals: dict = {}
    for node in topo_order(roots):
        vals[id(node)] = node_eval(node, [vals[id(a)] for a in node.args], point)
    return [vals[id(r)] for r in roots]


def _check_point(e: Expr, point) -> None:
    mv = max_var(e)
    if mv >= len(point):
        raise ExprError(f"expression uses coordinate {mv} but point has {len(point)} entries")


def eval_float(e: Expr, point: Sequence) -> float:
    _check_point(e, point)
    return _run([e], point, _eval_float_node)[0]


def eval_exact(e: Expr, point: Sequence) -> Fraction:
    """Exact rational value; raises NotRational on transcendental nodes."""
    _check_point(e, point)
    return _run([e], [Fraction(p) for p in point], _eval_exact_node)[0]


def evaluate(e: Expr, point: Sequence) -> float:
    """Double-precision value, computed exactly first when tree and point are rational."""
    if all(isinstance(p, (int, Fraction)) for p in point) and is_rational(e):
        try:
            return float(eval_exact(e, point))
        except NotRational:
            pass
    return eval_float(e, point)


def compile_exprs(exprs: Sequence[Expr]):
    """Straight-line Python code for many expressions sharing subtrees.

    Returns ``f(point) -> list[float]``.  A failing evaluation is re-run through
    the interpreter so the raised DomainError names the offending subtree.
    """
    exprs = list(exprs)
    order = topo_order(exprs)
    names: dict = {}
    lines = ["def _f(x):"]
    consts = {}
    for j, node in enumerate(order):
        nm = f"t{j}"
        names[id(node)] = nm
        k = node.kind
        args = [names[id(a)] for a in node.args]
        if k == "const":
            cname = f"c{j}"
            consts[cname] = float(node.value)
            rhs = cname
        elif k == "var":
            rhs = f"x[{node.value}]"
        elif k == "add":
            rhs = " + ".join(args)
        elif k == "mul":
            rhs = " * ".join(args)
        elif k == "neg":
            rhs = f"-{args[0]}"
        elif k == "pow":
            rhs = f"{args[0]} ** {node.value}" if node.value > 0 else f"1.0 / ({args[0]} ** {-node.value})"
        elif k == "inv":
            rhs = f"1.0 / {args[0]}"
        else:
            rhs = f"_m.{k}({args[0]})"
        lines.append(f"    {nm} = {rhs}")
    lines.append("    return [" + ", ".join(names[id(e)] for e in exprs) + "]")
    namespace = {"_m": math, **consts}
    exec(compile("\n".join(lines), "<nullalign-expr>", "exec"), namespace)
    raw = namespace["_f"]
    nvar = max((max_var(e) for e in exprs), default=-1) + 1

    def f(point):
        if len(point) < nvar:
            raise ExprError(f"point has {len(point)} entries, expressions need {nvar}")
        try:
            return raw(point)
        except (ZeroDivisionError, ValueError, OverflowError):
            _run(exprs, point, _eval_float_node)
            raise DomainError("evaluation failed") from None

    f.node_count = len(order)
    return f


# ---------------------------------------------------------------- printing

_PREC = {"add": 1, "mul": 2, "neg": 3, "pow": 4}


def _const_str(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def to_string(e: Expr, names: Sequence[str] | None = None) -> str:
    def vname(i):
        return names[i] if names is not None and i < len(names) else f"x{i}"

    def atomic(x):
        s = go(x)
        if x.kind in ("var",) + FUNCTIONS:
            return s
        if x.kind == "const" and x.value >= 0 and x.value.denominator == 1:
            return s
        return f"({s})"

    def go(x):
        k = x.kind
        if k == "const":
            return _const_str(x.value)
        if k == "var":
            return vname(x.value)
        if k == "add":
            parts = [go(x.args[0])]
            for a in x.args[1:]:
                if a.kind == "neg":
                    parts.append(" - " + atomic(a.args[0]))
                else:
                    s = go(a)
                    parts.append(" + " + (f"({s})" if s.startswith("-") else s))
            return "".join(parts)
        if k == "mul":
            num = []
            den = []
            for a in x.args:
                if a.kind == "inv":
                    den.append(atomic(a.args[0]))
                elif a.kind == "add":
                    num.append(f"({go(a)})")
                else:
                    num.append(atomic(a) if a.kind not in ("pow",) else go(a))
            s = "*".join(num) if num else "1"
            for d in den:
                s += "/" + d
            return s
        if k == "neg":
            return "-" + atomic(x.args[0])
        if k == "pow":
            n = x.value
            return f"{atomic(x.args[0])}^{n}" if n >= 0 else f"{atomic(x.args[0])}^(-{-n})"
        if k == "inv":
            return f"1/{atomic(x.args[0])}"
        return f"{k}({go(x.args[0])})"

    return go(e)
