"""A minimal arithmetic expression language for metric and field files.

Grammar (``^`` binds tighter than unary minus and is right associative)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/' | '×' | '÷') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Names are the variables allowed by the caller (``x1..xn``, ``y1..yn``,
``t``), the constant ``pi`` and the functions ``sqrt sin cos exp log``.
Compiled expressions evaluate through the :mod:`ad` primitives, so they
accept floats and Taylor numbers alike.
"""

from __future__ import annotations

import math
import re

from . import ad
from .errors import DomainError, ExpressionError

FUNCTIONS = {"sqrt": ad.sqrt, "sin": ad.sin, "cos": ad.cos, "exp": ad.exp, "log": ad.log}
CONSTANTS = {"pi": math.pi}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()×÷]))"
)


def tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ExpressionError("unexpected character", text, col)
        kind = m.lastgroup
        col = m.start(kind) + 1
        out.append((kind, m.group(kind), col))
        pos = m.end()
    out.append(("end", "", len(text) + 1))
    return out


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.variables = set(variables)
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ExpressionError(msg, self.text, tok[2])

    def expect(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            self.fail(f"expected {op!r}", tok)

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail("unexpected trailing input")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/×÷":
            op = self.take()[1]
            op = {"×": "*", "÷": "/"}.get(op, op)
            node = (op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            inner = self.unary()
            return ("neg", inner) if tok[1] == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return ("^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return ("num", float(val))
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", val, arg)
            if val in CONSTANTS:
                return ("num", CONSTANTS[val])
            if val in self.variables:
                return ("var", val)
            self.fail(f"unknown name {val!r}", tok)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expected a number, name or '('", tok)


def parse(text, variables):
    """Parse ``text`` into a tuple tree; unknown names are rejected."""
    return _Parser(text, variables).parse()


def evaluate(node, env):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        return env[node[1]]
    if kind == "neg":
        return -evaluate(node[1], env)
    if kind == "call":
        return FUNCTIONS[node[1]](evaluate(node[2], env))
    a = evaluate(node[1], env)
    b = evaluate(node[2], env)
    if kind == "+":
        return a + b
    if kind == "-":
        return a - b
    if kind == "*":
        return a * b
    if kind == "/":
        if not ad.is_jet(b) and b == 0:
            raise DomainError("division", 0.0, "division by zero")
        return a / b
    if kind == "^":
        return ad.power(a, b)
    raise ExpressionError(f"bad node {kind!r}")


def uses(node):
    """Set of variable names referenced by ``node``."""
    kind = node[0]
    if kind == "var":
        return {node[1]}
    if kind == "num":
        return set()
    if kind == "neg":
        return uses(node[1])
    if kind == "call":
        return uses(node[2])
    return uses(node[1]) | uses(node[2])


def base_names(n):
    return [f"x{i}" for i in range(1, n + 1)]


def fiber_names(n):
    return [f"y{i}" for i in range(1, n + 1)]


def compile_base(text, n):
    """Function ``x -> value`` for an expression in ``x1..xn``."""
    names = base_names(n)
    tree = parse(text, names)

    def fn(x):
        return evaluate(tree, dict(zip(names, x)))

    return fn


def compile_fiber(text, n):
    """Function ``(x, v) -> value`` for an expression in ``x1..xn, y1..yn``."""
    xs, ys = base_names(n), fiber_names(n)
    tree = parse(text, xs + ys)

    def fn(x, v):
        env = dict(zip(xs, x))
        env.update(zip(ys, v))
        return evaluate(tree, env)

    return fn


def compile_spacetime(text, n):
    """Function ``z -> value`` for an expression in ``t, x1..xn``."""
    names = ["t"] + base_names(n)
    tree = parse(text, names)

    def fn(z):
        return evaluate(tree, dict(zip(names, z)))

    return fn
