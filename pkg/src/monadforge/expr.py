"""Small closed-form expression trees in the chart coordinates x0..x3.

Nodes are tuples: ("c", value), ("x", i), ("+", a, b), ("*", a, b),
("/", a, b), ("^", a, k) with k an int, ("neg", a).  Serialization is a
prefix S-expression, e.g. "(+ (* x0 x1) 2.0)".
"""
from __future__ import annotations

import re

ZERO = ("c", 0.0)
ONE = ("c", 1.0)


def const(v):
    v = complex(v)
    return ("c", v if v.imag else v.real)


def var(i):
    if i not in range(4):
        raise ValueError("chart coordinates are x0..x3")
    return ("x", i)


def _is_const(e, v=None):
    return e[0] == "c" and (v is None or e[1] == v)


def add(a, b):
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if _is_const(a) and _is_const(b):
        return const(a[1] + b[1])
    return ("+", a, b)


def mul(a, b):
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a) and _is_const(b):
        return const(a[1] * b[1])
    return ("*", a, b)


def div(a, b):
    if _is_const(b, 0):
        raise ZeroDivisionError("division by the zero expression")
    if _is_const(a, 0):
        return ZERO
    if _is_const(b, 1):
        return a
    return ("/", a, b)


def power(a, k):
    if not isinstance(k, int):
        raise TypeError("only integer powers")
    if k == 0:
        return ONE
    if k == 1:
        return a
    return ("^", a, k)


def neg(a):
    if _is_const(a):
        return const(-a[1])
    return ("neg", a)


def sub(a, b):
    return add(a, neg(b))


def total(terms):
    out = ZERO
    for t in terms:
        out = add(out, t)
    return out


def evaluate(e, x):
    op = e[0]
    if op == "c":
        return e[1]
    if op == "x":
        return x[e[1]]
    if op == "+":
        return evaluate(e[1], x) + evaluate(e[2], x)
    if op == "*":
        return evaluate(e[1], x) * evaluate(e[2], x)
    if op == "/":
        return evaluate(e[1], x) / evaluate(e[2], x)
    if op == "^":
        return evaluate(e[1], x) ** e[2]
    if op == "neg":
        return -evaluate(e[1], x)
    raise ValueError(f"unknown node {op!r}")


def _fmt_const(v):
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}j"
    return repr(float(v))


def to_sexpr(e):
    op = e[0]
    if op == "c":
        return _fmt_const(e[1])
    if op == "x":
        return f"x{e[1]}"
    if op == "^":
        return f"(^ {to_sexpr(e[1])} {e[2]})"
    return "(" + " ".join([op] + [to_sexpr(a) for a in e[1:]]) + ")"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def tokenize(text):
    return _TOKEN.findall(text)


def parse_tokens(tokens, pos=0):
    tok = tokens[pos]
    if tok == "(":
        op = tokens[pos + 1]
        pos += 2
        args = []
        while tokens[pos] != ")":
            if op == "^" and len(args) == 1:
                args.append(int(tokens[pos]))
                pos += 1
                continue
            a, pos = parse_tokens(tokens, pos)
            args.append(a)
        node = (op, *args)
        if op not in ("+", "*", "/", "^", "neg") or len(args) != (1 if op == "neg" else 2):
            raise ValueError(f"malformed node ({op} ...)")
        return node, pos + 1
    if tok.startswith("x") and tok[1:].isdigit():
        return var(int(tok[1:])), pos + 1
    if tok.endswith("j"):
        return ("c", complex(tok)), pos + 1
    return ("c", float(tok)), pos + 1


def from_sexpr(text):
    tokens = tokenize(text)
    node, pos = parse_tokens(tokens, 0)
    if pos != len(tokens):
        raise ValueError("trailing tokens")
    return node


X = tuple(var(i) for i in range(4))
