"""A minimal expression DSL with symbolic differentiation.

Grammar (infix, standard precedence):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' integer)?
    base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base

Function names: tanh, sin, cos, exp. Exponents are integer literals only.
ASTs are immutable; evaluation and differentiation are pure. Simplification
is limited to constant folding and 0/1 identities.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import EvalError, ParseError

FUNCTIONS = {
    "tanh": np.tanh,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
}


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object


_NUMBER_RE = re.compile(r"(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _NUMBER_RE.match(text, pos)
        if m:
            tokens.append(("num", float(m.group(0)), pos))
            pos = m.end()
            continue
        m = re.match(r"[A-Za-z_][A-Za-z_0-9]*", text[pos:])
        if m:
            tokens.append(("ident", m.group(0), pos))
            pos += m.end()
            continue
        if text[pos] in "+-*/^()":
            tokens.append((text[pos], text[pos], pos))
            pos += 1
            continue
        raise ParseError(f"unexpected character {text[pos]!r}", pos,
                         {"number", "identifier", "operator"})
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2], {kind})
        return self.advance()

    def parse(self):
        ast = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"trailing input {tok[1]!r}", tok[2], {"end of input"})
        return ast

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        node = self.base()
        if self.peek()[0] == "^":
            self.advance()
            tok = self.peek()
            sign = 1
            if tok[0] == "-":
                self.advance()
                sign = -1
                tok = self.peek()
            if tok[0] != "num" or tok[1] != int(tok[1]):
                raise ParseError("exponent must be an integer literal", tok[2],
                                 {"integer"})
            self.advance()
            return Pow(node, sign * int(tok[1]))
        return node

    def base(self):
        tok = self.peek()
        if tok[0] == "-":
            self.advance()
            return Neg(self.base())
        if tok[0] == "num":
            self.advance()
            return Const(tok[1])
        if tok[0] == "ident":
            self.advance()
            if self.peek()[0] == "(":
                if tok[1] not in FUNCTIONS:
                    raise ParseError(f"unknown function {tok[1]!r}", tok[2],
                                     set(FUNCTIONS))
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(tok[1], arg)
            return Var(tok[1])
        if tok[0] == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected token {tok[1]!r}", tok[2],
                         {"number", "identifier", "(", "-"})


def parse_expr(text):
    """Parse DSL source to an AST. Raises ParseError with position info."""
    return _Parser(text).parse()


def free_vars(ast):
    if isinstance(ast, Var):
        return {ast.name}
    if isinstance(ast, Const):
        return set()
    if isinstance(ast, BinOp):
        return free_vars(ast.left) | free_vars(ast.right)
    if isinstance(ast, (Neg, Call)):
        return free_vars(ast.arg)
    if isinstance(ast, Pow):
        return free_vars(ast.base)
    raise TypeError(f"not an AST node: {ast!r}")


def evaluate(ast, env):
    """Evaluate with variable bindings from env (floats or numpy arrays)."""
    if isinstance(ast, Const):
        return ast.value
    if isinstance(ast, Var):
        try:
            return env[ast.name]
        except KeyError:
            raise EvalError(f"unbound variable {ast.name!r}") from None
    if isinstance(ast, Neg):
        return -evaluate(ast.arg, env)
    if isinstance(ast, Call):
        return FUNCTIONS[ast.fn](evaluate(ast.arg, env))
    if isinstance(ast, Pow):
        base = evaluate(ast.base, env)
        if ast.exponent < 0 and np.any(base == 0):
            raise EvalError("zero base with negative exponent")
        return base ** ast.exponent
    if isinstance(ast, BinOp):
        a = evaluate(ast.left, env)
        b = evaluate(ast.right, env)
        if ast.op == "+":
            return a + b
        if ast.op == "-":
            return a - b
        if ast.op == "*":
            return a * b
        if np.any(b == 0):
            raise EvalError("division by zero")
        return a / b
    raise TypeError(f"not an AST node: {ast!r}")


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_string(ast, parent_prec=0):
    """Print to DSL source; parse(to_string(ast)) is equivalent to ast."""
    if isinstance(ast, Const):
        v = ast.value
        s = repr(int(v)) if v == int(v) and abs(v) < 1e15 else repr(v)
        return f"({s})" if v < 0 and parent_prec > 0 else s
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Call):
        return f"{ast.fn}({to_string(ast.arg)})"
    if isinstance(ast, Neg):
        return f"(-{to_string(ast.arg, 3)})"
    if isinstance(ast, Pow):
        base = to_string(ast.base, 4)
        exp = ast.exponent if ast.exponent >= 0 else f"-{-ast.exponent}"
        return f"{base}^{exp}"
    if isinstance(ast, BinOp):
        prec = _PRECEDENCE[ast.op]
        left = to_string(ast.left, prec)
        # subtraction and division are left-associative: tighten the right side
        right = to_string(ast.right, prec + (1 if ast.op in ("-", "/") else 0))
        s = f"{left} {ast.op} {right}"
        return f"({s})" if prec < parent_prec else s
    raise TypeError(f"not an AST node: {ast!r}")


def _is_const(ast, value=None):
    return isinstance(ast, Const) and (value is None or ast.value == value)


def simplify(ast):
    """Constant folding plus 0/1 identities; no algebraic rewriting."""
    if isinstance(ast, (Const, Var)):
        return ast
    if isinstance(ast, Neg):
        a = simplify(ast.arg)
        if _is_const(a):
            return Const(-a.value)
        if isinstance(a, Neg):
            return a.arg
        return Neg(a)
    if isinstance(ast, Call):
        a = simplify(ast.arg)
        if _is_const(a):
            return Const(float(FUNCTIONS[ast.fn](a.value)))
        return Call(ast.fn, a)
    if isinstance(ast, Pow):
        base = simplify(ast.base)
        if ast.exponent == 0:
            return Const(1.0)
        if ast.exponent == 1:
            return base
        if _is_const(base):
            return Const(base.value ** ast.exponent)
        return Pow(base, ast.exponent)
    a = simplify(ast.left)
    b = simplify(ast.right)
    op = ast.op
    if _is_const(a) and _is_const(b):
        if op == "/" and b.value == 0:
            return BinOp(op, a, b)  # leave the error for evaluation time
        return Const({"+": a.value + b.value, "-": a.value - b.value,
                      "*": a.value * b.value,
                      "/": a.value / b.value if b.value != 0 else 0.0}[op])
    if op == "+":
        if _is_const(a, 0):
            return b
        if _is_const(b, 0):
            return a
    elif op == "-":
        if _is_const(b, 0):
            return a
        if _is_const(a, 0):
            return simplify(Neg(b))
    elif op == "*":
        if _is_const(a, 0) or _is_const(b, 0):
            return Const(0.0)
        if _is_const(a, 1):
            return b
        if _is_const(b, 1):
            return a
    elif op == "/":
        if _is_const(a, 0):
            return Const(0.0)
        if _is_const(b, 1):
            return a
    return BinOp(op, a, b)


def diff_expr(ast, var):
    """Symbolic partial derivative with respect to the named variable."""
    return simplify(_diff(ast, var))


def _diff(ast, var):
    if isinstance(ast, Const):
        return Const(0.0)
    if isinstance(ast, Var):
        return Const(1.0 if ast.name == var else 0.0)
    if isinstance(ast, Neg):
        return Neg(_diff(ast.arg, var))
    if isinstance(ast, Pow):
        # d(u^n) = n * u^(n-1) * u'
        du = _diff(ast.base, var)
        return BinOp("*", BinOp("*", Const(float(ast.exponent)),
                                Pow(ast.base, ast.exponent - 1)), du)
    if isinstance(ast, Call):
        du = _diff(ast.arg, var)
        u = ast.arg
        if ast.fn == "tanh":
            outer = BinOp("-", Const(1.0), Pow(Call("tanh", u), 2))
        elif ast.fn == "sin":
            outer = Call("cos", u)
        elif ast.fn == "cos":
            outer = Neg(Call("sin", u))
        else:  # exp
            outer = Call("exp", u)
        return BinOp("*", outer, du)
    if isinstance(ast, BinOp):
        da = _diff(ast.left, var)
        db = _diff(ast.right, var)
        if ast.op in ("+", "-"):
            return BinOp(ast.op, da, db)
        if ast.op == "*":
            return BinOp("+", BinOp("*", da, ast.right), BinOp("*", ast.left, db))
        # quotient rule
        num = BinOp("-", BinOp("*", da, ast.right), BinOp("*", ast.left, db))
        return BinOp("/", num, Pow(ast.right, 2))
    raise TypeError(f"not an AST node: {ast!r}")


def compile_expr(ast, var_names):
    """Compile an AST to a fast python function of positional arguments
    (one per name in var_names); works on floats and numpy arrays alike."""
    src = _numpy_source(ast)
    code = f"lambda {', '.join(var_names)}: ({src})"
    return eval(code, {"np": np, "__builtins__": {}})  # source generated from our own AST


def _numpy_source(ast):
    if isinstance(ast, Const):
        return repr(ast.value)
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Neg):
        return f"(-{_numpy_source(ast.arg)})"
    if isinstance(ast, Call):
        return f"np.{ast.fn}({_numpy_source(ast.arg)})"
    if isinstance(ast, Pow):
        return f"({_numpy_source(ast.base)})**({ast.exponent})"
    if isinstance(ast, BinOp):
        return f"({_numpy_source(ast.left)} {ast.op} {_numpy_source(ast.right)})"
    raise TypeError(f"not an AST node: {ast!r}")
