"""Text form of operators.

Grammar (whitespace is insignificant)::

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := primary ('^' (nat | '(' ['-'] rational ')'))*
    primary:= rational | ident | 'i' | 'D' ident
            | ('exp' | 'sin' | 'cos') '(' expr ')' | '(' expr ')'
    rational := digits ['/' digits]     (parsed as integer division)

A product is operator composition, so ``Dx*x`` means ``x*Dx + 1``.  Division
and rational powers are only allowed on coefficients.  The printer emits
canonical text that parses back to an equal operator.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import sympy

from .coeff import AtomError, CoeffExpr
from .gauss import GaussQ
from .operator import DiffOperator
from .poly import Poly

RESERVED = {"i", "exp", "sin", "cos"}
FUNCTIONS = ("exp", "sin", "cos")


class DSLError(ValueError):
    """Parse failure carrying the character offset of the problem."""

    def __init__(self, message: str, position: int):
        self.message = message
        self.position = position
        super().__init__(f"{message} at position {position}")


class UnknownVariableError(DSLError):
    pass


class NonRationalLiteralError(DSLError):
    pass


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise DSLError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        tok = m.group(kind)
        if kind == "num" and not tok.isdigit():
            raise NonRationalLiteralError(f"non-rational literal {tok!r}", start)
        out.append((kind, tok, start))
        pos = m.end()
    out.append(("end", "", n))
    return out


# AST nodes are tuples: (kind, pos, payload...)

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, op: str):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            found = "end of input" if t[0] == "end" else repr(t[1])
            raise DSLError(f"expected {op!r}, found {found}", t[2])
        return t

    def at_op(self, *ops) -> bool:
        t = self.peek()
        return t[0] == "op" and t[1] in ops

    def parse(self):
        if self.peek()[0] == "end":
            raise DSLError("empty expression", 0)
        node = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise DSLError(f"unexpected {t[1]!r}", t[2])
        return node

    def expr(self):
        pos = self.peek()[2]
        if self.at_op("-"):
            self.take()
            node = ("neg", pos, self.term())
        else:
            node = self.term()
        while self.at_op("+", "-"):
            op = self.take()
            rhs = self.term()
            node = ("add" if op[1] == "+" else "sub", op[2], node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.at_op("*", "/"):
            op = self.take()
            rhs = self.factor()
            node = ("mul" if op[1] == "*" else "div", op[2], node, rhs)
        return node

    def factor(self):
        node = self.primary()
        while self.at_op("^"):
            op = self.take()
            t = self.peek()
            if t[0] == "num":
                self.take()
                node = ("pow", op[2], node, Fraction(int(t[1])))
            elif self.at_op("("):
                self.take()
                sign = 1
                if self.at_op("-"):
                    self.take()
                    sign = -1
                num = self.take()
                if num[0] != "num":
                    raise DSLError("expected a rational exponent", num[2])
                val = Fraction(int(num[1]))
                if self.at_op("/"):
                    self.take()
                    den = self.take()
                    if den[0] != "num":
                        raise DSLError("expected a denominator", den[2])
                    if int(den[1]) == 0:
                        raise DSLError("zero denominator", den[2])
                    val = val / int(den[1])
                self.expect(")")
                node = ("pow", op[2], node, sign * val)
            else:
                raise DSLError("expected an exponent", t[2])
        return node

    def primary(self):
        t = self.take()
        kind, tok, pos = t
        if kind == "num":
            return ("num", pos, int(tok))
        if kind == "id":
            if tok in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("fn", pos, tok, arg)
            if tok == "i":
                return ("imag", pos)
            if tok.startswith("D") and len(tok) > 1:
                return ("deriv", pos, tok[1:])
            if tok == "D":
                raise DSLError("D must be followed by a variable name", pos)
            return ("var", pos, tok)
        if kind == "op" and tok == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise DSLError("unexpected end of input", pos)
        raise DSLError(f"unexpected {tok!r}", pos)


def _collect_names(node, acc: List[Tuple[str, int]]):
    kind = node[0]
    if kind in ("var", "deriv"):
        acc.append((node[2], node[1]))
    elif kind == "fn":
        _collect_names(node[3], acc)
    elif kind in ("neg",):
        _collect_names(node[2], acc)
    elif kind == "pow":
        _collect_names(node[2], acc)
    elif kind in ("add", "sub", "mul", "div"):
        _collect_names(node[2], acc)
        _collect_names(node[3], acc)


class _Eval:
    def __init__(self, variables: Tuple[str, ...]):
        self.variables = variables

    def lift(self, v) -> DiffOperator:
        if isinstance(v, DiffOperator):
            return v
        return DiffOperator.multiplication(v, self.variables)

    def run(self, node):
        kind, pos = node[0], node[1]
        try:
            return self._run(node)
        except DSLError:
            raise
        except (AtomError, ZeroDivisionError) as exc:
            raise DSLError(str(exc), pos) from exc

    def _run(self, node):
        kind, pos = node[0], node[1]
        if kind == "num":
            return CoeffExpr.const(node[2])
        if kind == "imag":
            return CoeffExpr.const(GaussQ(0, 1))
        if kind == "var":
            return CoeffExpr.var(node[2])
        if kind == "deriv":
            return DiffOperator.derivative(node[2], self.variables)
        if kind == "fn":
            arg = self.run(node[3])
            if isinstance(arg, DiffOperator):
                raise DSLError(f"derivative inside {node[2]}()", pos)
            return getattr(CoeffExpr, node[2])(arg)
        if kind == "neg":
            return -self.run(node[2])
        if kind in ("add", "sub"):
            a, b = self.run(node[2]), self.run(node[3])
            if isinstance(a, CoeffExpr) and isinstance(b, CoeffExpr):
                return a + b if kind == "add" else a - b
            a, b = self.lift(a), self.lift(b)
            return a + b if kind == "add" else a - b
        if kind == "mul":
            a, b = self.run(node[2]), self.run(node[3])
            if isinstance(a, CoeffExpr) and isinstance(b, CoeffExpr):
                return a * b
            if isinstance(a, CoeffExpr):
                return b.left_multiply(a)
            return a.compose(self.lift(b))
        if kind == "div":
            a, b = self.run(node[2]), self.run(node[3])
            if isinstance(b, DiffOperator):
                raise DSLError("cannot divide by an operator", pos)
            if b.is_zero():
                raise DSLError("division by zero", pos)
            inv = _inverse(b)
            if isinstance(a, CoeffExpr):
                return a * inv
            return a.compose(self.lift(inv))
        if kind == "pow":
            base, e = self.run(node[2]), node[3]
            if isinstance(base, DiffOperator):
                if e.denominator != 1 or e < 0:
                    raise DSLError("operator powers must be natural numbers", pos)
                return base ** int(e)
            if e.denominator == 1 and e >= 0:
                return base ** int(e)
            return base.rpow(e)
        raise AssertionError(kind)


def _inverse(c: CoeffExpr) -> CoeffExpr:
    if c.is_constant() and c.is_polynomial():
        return CoeffExpr.const(c.poly.constant_term().inverse())
    return c.rpow(Fraction(-1))


def parse_operator(text: str, variables: Optional[Sequence[str]] = None) -> DiffOperator:
    """Parse operator text into a canonical DiffOperator.

    With ``variables`` given, any other identifier is rejected; otherwise the
    ambient variables are the sorted names that occur in ``text``.
    """
    ast = _Parser(text).parse()
    names: List[Tuple[str, int]] = []
    _collect_names(ast, names)
    for name, pos in names:
        if name in RESERVED:
            raise DSLError(f"reserved name {name!r} used as a variable", pos)
    if variables is None:
        variables = tuple(sorted({n for n, _ in names}))
    else:
        variables = tuple(variables)
        for name, pos in names:
            if name not in variables:
                raise UnknownVariableError(f"unknown variable {name!r}", pos)
    return _Eval(variables).lift(_Eval(variables).run(ast))


def parse_coeff(text: str, variables: Optional[Sequence[str]] = None) -> CoeffExpr:
    """Parse a coefficient expression (no derivatives)."""
    ast = _Parser(text).parse()
    names: List[Tuple[str, int]] = []
    _collect_names(ast, names)
    for name, pos in names:
        if name in RESERVED:
            raise DSLError(f"reserved name {name!r} used as a variable", pos)
        if variables is not None and name not in variables:
            raise UnknownVariableError(f"unknown variable {name!r}", pos)
    val = _Eval(tuple(sorted({n for n, _ in names}))).run(ast)
    if isinstance(val, DiffOperator):
        if val.order() > 0:
            raise DSLError("expected a coefficient, found a differential operator", 0)
        val = val.coefficient((0,) * len(val.variables))
    return val


# printing

def format_gauss(c: GaussQ) -> str:
    if c.is_real():
        return str(c.re)
    if not c.re:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{c.im}*i"
    sign = "+" if c.im > 0 else "-"
    mag = abs(c.im)
    imag = "i" if mag == 1 else f"{mag}*i"
    return f"({c.re} {sign} {imag})"


def _format_monomial(m) -> str:
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


def _join(parts: List[str]) -> str:
    out = ""
    for k, p in enumerate(parts):
        if k == 0:
            out = p
        elif p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out


def format_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for m, c in p.sorted_terms():
        if not m:
            parts.append(format_gauss(c))
            continue
        mono = _format_monomial(m)
        if c.is_one():
            parts.append(mono)
        elif c == GaussQ(-1):
            parts.append("-" + mono)
        else:
            parts.append(f"{format_gauss(c)}*{mono}")
    return _join(parts)


def _sx(e) -> str:
    if e.is_Integer:
        return str(int(e))
    if e.is_Rational:
        return f"{e.p}/{e.q}"
    if e is sympy.I:
        return "i"
    if e.is_Symbol:
        return e.name
    if isinstance(e, (sympy.exp, sympy.sin, sympy.cos)):
        return f"{type(e).__name__}({_sx(e.args[0])})"
    if isinstance(e, sympy.Add):
        return _join([_sx(t) for t in e.as_ordered_terms()])
    if isinstance(e, sympy.Mul):
        c, rest = e.as_coeff_Mul()
        factors = [_sx_factor(f) for f in rest.as_ordered_factors()]
        body = "*".join(factors)
        if c == 1:
            return body
        if c == -1:
            return "-" + body
        return f"{_sx(c)}*{body}"
    if isinstance(e, sympy.Pow):
        b, x = e.args
        base = _sx_factor(b)
        if x.is_Integer and x > 0:
            return f"{base}^{int(x)}"
        return f"{base}^({_sx(x)})"
    raise AtomError(f"cannot print {e}")


def _sx_factor(e) -> str:
    s = _sx(e)
    if isinstance(e, sympy.Add) or (e.is_Number and e < 0) or (e.is_Rational and not e.is_Integer):
        return f"({s})"
    return s


def format_coeff(c: CoeffExpr) -> str:
    if c.is_polynomial():
        return format_poly(c.poly)
    return _sx(c.to_sympy())


def _is_sum(text: str) -> bool:
    depth = 0
    for k, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and ch in "+-" and k > 0:
            return True
    return False


def format_operator(P: DiffOperator) -> str:
    if P.is_zero():
        return "0"
    parts = []
    for alpha, c in P.items():
        deriv = "*".join(
            (f"D{v}" if a == 1 else f"D{v}^{a}") for v, a in zip(P.variables, alpha) if a
        )
        cs = format_coeff(c)
        if not deriv:
            parts.append(cs)
            continue
        if cs == "1":
            parts.append(deriv)
        elif cs == "-1":
            parts.append("-" + deriv)
        elif _is_sum(cs):
            parts.append(f"({cs})*{deriv}")
        else:
            parts.append(f"{cs}*{deriv}")
    return _join(parts)
