"""A small expression language for period matrices and sections.

The grammar only offers sums, products, integer powers, exp, and complex
constants, so any expression in the complex variables u1..ug is holomorphic
by construction; real-analytic counterexample fields instead use the real
variables x1..x2g and never mix with u-variables. Evaluation is vectorized
over numpy arrays of sample points.

Grammar (infix, standard precedence):

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := "-" unary | power
    power  := atom ("^" integer)?
    atom   := number | "i" | variable | "exp" "(" expr ")" | "(" expr ")"

Numbers accept decimal and scientific notation; "i" is the imaginary unit;
variables are u1, u2, ... or x1, x2, ...
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*^()]))"
)


class Expr:
    """Base class; concrete nodes implement evaluate and variables."""

    def evaluate(self, env):
        raise NotImplementedError

    def variables(self):
        raise NotImplementedError

    def __add__(self, other):
        return Add((self, _as_expr(other)))

    def __radd__(self, other):
        return Add((_as_expr(other), self))

    def __mul__(self, other):
        return Mul((self, _as_expr(other)))

    def __rmul__(self, other):
        return Mul((_as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Mul((Const(-1), _as_expr(other)))))

    def __neg__(self):
        return Mul((Const(-1), self))

    def __pow__(self, k):
        return Pow(self, int(k))


def _as_expr(value):
    if isinstance(value, Expr):
        return value
    return Const(complex(value))


@dataclass(frozen=True)
class Const(Expr):
    value: complex

    def evaluate(self, env):
        return self.value

    def variables(self):
        return frozenset()

    def __str__(self):
        v = complex(self.value)
        if v.imag == 0:
            return _fmt(v.real)
        if v.real == 0:
            return f"{_fmt(v.imag)}*i" if v.imag != 1 else "i"
        return f"({_fmt(v.real)} + {_fmt(v.imag)}*i)"


def _fmt(x):
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def evaluate(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise ValueError(f"unbound variable {self.name!r}") from None

    def variables(self):
        return frozenset((self.name,))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Add(Expr):
    children: tuple

    def evaluate(self, env):
        total = self.children[0].evaluate(env)
        for child in self.children[1:]:
            total = total + child.evaluate(env)
        return total

    def variables(self):
        out = frozenset()
        for child in self.children:
            out |= child.variables()
        return out

    def __str__(self):
        return "(" + " + ".join(str(c) for c in self.children) + ")"


@dataclass(frozen=True)
class Mul(Expr):
    children: tuple

    def evaluate(self, env):
        total = self.children[0].evaluate(env)
        for child in self.children[1:]:
            total = total * child.evaluate(env)
        return total

    def variables(self):
        out = frozenset()
        for child in self.children:
            out |= child.variables()
        return out

    def __str__(self):
        return "*".join(str(c) for c in self.children)


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError("only nonnegative integer powers are allowed")

    def evaluate(self, env):
        return self.base.evaluate(env) ** self.exponent

    def variables(self):
        return self.base.variables()

    def __str__(self):
        return f"{self.base}^{self.exponent}"


@dataclass(frozen=True)
class ExpNode(Expr):
    arg: Expr

    def evaluate(self, env):
        return np.exp(self.arg.evaluate(env))

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"exp({self.arg})"


_VARIABLE = re.compile(r"^[ux][1-9][0-9]*$")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ValueError(
                f"unexpected character {rest[0]!r} at position {pos}"
            )
        pos = m.end()
        if m.group("num") is not None:
            tokens.append(("num", m.group("num")))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
    tokens.append(("end", ""))
    return tokens


class _Parser:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.text = text
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, value = self.take()
        if kind != "op" or value != op:
            raise ValueError(
                f"expected {op!r} in {self.text!r}, found {value!r}"
            )

    def parse_expr(self):
        node = self.parse_term()
        terms = [node]
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            rhs = self.parse_term()
            terms.append(rhs if op == "+" else Mul((Const(-1), rhs)))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def parse_term(self):
        factors = [self.parse_unary()]
        while self.peek() == ("op", "*"):
            self.take()
            factors.append(self.parse_unary())
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def parse_unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return Mul((Const(-1), self.parse_unary()))
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, value = self.take()
            if kind != "num" or not value.isdigit():
                raise ValueError(
                    f"exponent must be a nonnegative integer, found {value!r}"
                )
            return Pow(base, int(value))
        return base

    def parse_atom(self):
        kind, value = self.take()
        if kind == "num":
            return Const(complex(float(value)))
        if kind == "name":
            if value == "i":
                return Const(1j)
            if value == "exp":
                self.expect_op("(")
                arg = self.parse_expr()
                self.expect_op(")")
                return ExpNode(arg)
            if _VARIABLE.match(value):
                return Var(value)
            raise ValueError(f"unknown name {value!r} in {self.text!r}")
        if kind == "op" and value == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ValueError(f"unexpected token {value!r} in {self.text!r}")


def parse_expression(text):
    """Parse the infix grammar into an Expr tree."""
    parser = _Parser(_tokenize(text), text)
    node = parser.parse_expr()
    if parser.peek() != ("end", ""):
        raise ValueError(
            f"trailing input after expression in {text!r}"
        )
    return node


def holomorphic_variables(expr):
    """Names used, split into (u-variables, x-variables)."""
    names = expr.variables()
    return (
        frozenset(n for n in names if n.startswith("u")),
        frozenset(n for n in names if n.startswith("x")),
    )


def evaluate_on(expr, env):
    """Evaluate with plain-ndarray broadcasting; constants stay scalars."""
    return expr.evaluate(env)
