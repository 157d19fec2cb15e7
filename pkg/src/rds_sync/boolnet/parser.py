"""Parser for the Boolean-network description language.

Grammar::

    network   := decl* rule*
    decl      := "node" NAME ";"
    rule      := NAME "'" "=" expr ";"
    expr      := xor ("OR" xor)*
    xor       := conj ("XOR" conj)*
    conj      := unary ("AND" unary)*
    unary     := "NOT" unary | atom
    atom      := "0" | "1" | NAME | "(" expr ")"

Operators also accept the symbols ``!``/``~`` (NOT), ``&`` (AND), ``^`` (XOR)
and ``|`` (OR).  Keywords are case-insensitive; ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

__all__ = [
    "BoolNetSyntaxError",
    "Const",
    "Var",
    "Not",
    "BinOp",
    "BoolExpr",
    "BooleanNetwork",
    "parse_network",
    "parse_expr",
    "format_expr",
    "format_network",
]


class BoolNetSyntaxError(ValueError):
    """Parse or validation error located at ``line``:``column`` (1-based)."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # "AND" | "XOR" | "OR"
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Const | Var | Not | BinOp


@dataclass(frozen=True)
class BooleanNetwork:
    nodes: tuple[str, ...]
    rules: tuple[BoolExpr, ...]

    def __post_init__(self):
        if len(self.nodes) != len(self.rules):
            raise ValueError("one rule per node is required")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("node names must be distinct")
        declared = set(self.nodes)
        for rule in self.rules:
            for name in variables(rule):
                if name not in declared:
                    raise ValueError(f"rule references undeclared node {name!r}")

    @property
    def n(self) -> int:
        return len(self.nodes)

    def rule(self, name: str) -> BoolExpr:
        return self.rules[self.nodes.index(name)]


def variables(expr: BoolExpr) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Not):
        return variables(expr.operand)
    if isinstance(expr, BinOp):
        return variables(expr.left) | variables(expr.right)
    return set()


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<const>[01](?![0-9A-Za-z_]))
  | (?P<sym>[;=()'!~&|^])
""", re.VERBOSE)

_KEYWORDS = {"NODE", "NOT", "AND", "OR", "XOR"}
_SYMBOL_OPS = {"!": "NOT", "~": "NOT", "&": "AND", "|": "OR", "^": "XOR"}


@dataclass(frozen=True)
class _Tok:
    kind: str  # NAME, CONST, or the keyword / symbol itself, EOF
    text: str
    line: int
    column: int


def _tokenize(text: str) -> Iterator[_Tok]:
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise BoolNetSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        pos = m.end()
        if kind == "newline":
            line += 1
            line_start = pos
        elif kind == "name":
            up = tok.upper()
            yield _Tok(up if up in _KEYWORDS else "NAME", tok, line, col)
        elif kind == "const":
            yield _Tok("CONST", tok, line, col)
        elif kind == "sym":
            yield _Tok(_SYMBOL_OPS.get(tok, tok), tok, line, col)
    yield _Tok("EOF", "", line, pos - line_start + 1)


class _Parser:
    def __init__(self, text: str):
        self.toks = list(_tokenize(text))
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Tok:
        tok = self.tok
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise BoolNetSyntaxError(f"expected {kind!r}, found {found!r}", tok.line, tok.column)
        return self.advance()

    def expr(self) -> BoolExpr:
        left = self.xor()
        while self.tok.kind == "OR":
            self.advance()
            left = BinOp("OR", left, self.xor())
        return left

    def xor(self) -> BoolExpr:
        left = self.conj()
        while self.tok.kind == "XOR":
            self.advance()
            left = BinOp("XOR", left, self.conj())
        return left

    def conj(self) -> BoolExpr:
        left = self.unary()
        while self.tok.kind == "AND":
            self.advance()
            left = BinOp("AND", left, self.unary())
        return left

    def unary(self) -> BoolExpr:
        if self.tok.kind == "NOT":
            self.advance()
            return Not(self.unary())
        return self.atom()

    def atom(self) -> BoolExpr:
        tok = self.tok
        if tok.kind == "CONST":
            self.advance()
            return Const(tok.text == "1")
        if tok.kind == "NAME":
            self.advance()
            return Var(tok.text, tok.line, tok.column)
        if tok.kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        found = tok.text or "end of input"
        raise BoolNetSyntaxError(f"expected an expression, found {found!r}", tok.line, tok.column)

    def network(self) -> BooleanNetwork:
        nodes: list[str] = []
        where: dict[str, _Tok] = {}
        while self.tok.kind == "NODE":
            self.advance()
            name = self.expect("NAME")
            if name.text in where:
                raise BoolNetSyntaxError(f"node {name.text!r} declared twice", name.line, name.column)
            where[name.text] = name
            nodes.append(name.text)
            self.expect(";")
        rules: dict[str, BoolExpr] = {}
        while self.tok.kind != "EOF":
            target = self.expect("NAME")
            if target.text not in where:
                raise BoolNetSyntaxError(f"rule for undeclared node {target.text!r}",
                                         target.line, target.column)
            if target.text in rules:
                raise BoolNetSyntaxError(f"duplicate rule for {target.text!r}", target.line, target.column)
            self.expect("'")
            self.expect("=")
            rhs = self.expr()
            self.expect(";")
            for ref in _var_refs(rhs):
                if ref.name not in where:
                    raise BoolNetSyntaxError(f"undeclared variable {ref.name!r}", ref.line, ref.column)
            rules[target.text] = rhs
        missing = [n for n in nodes if n not in rules]
        if missing:
            tok = where[missing[0]]
            raise BoolNetSyntaxError(f"missing rule for node {missing[0]!r}", tok.line, tok.column)
        return BooleanNetwork(tuple(nodes), tuple(rules[n] for n in nodes))


def _var_refs(expr: BoolExpr) -> Iterator[Var]:
    if isinstance(expr, Var):
        yield expr
    elif isinstance(expr, Not):
        yield from _var_refs(expr.operand)
    elif isinstance(expr, BinOp):
        yield from _var_refs(expr.left)
        yield from _var_refs(expr.right)


def parse_network(text: str) -> BooleanNetwork:
    return _Parser(text).network()


def parse_expr(text: str) -> BoolExpr:
    p = _Parser(text)
    expr = p.expr()
    p.expect("EOF")
    return expr


_PREC = {"OR": 1, "XOR": 2, "AND": 3}


def format_expr(expr: BoolExpr, parent: int = 0) -> str:
    """Render with the minimum parentheses needed to reparse to the same tree."""
    if isinstance(expr, Const):
        return "1" if expr.value else "0"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Not):
        return "NOT " + format_expr(expr.operand, 4)
    prec = _PREC[expr.op]
    # operators are parsed left-associatively, so a same-precedence right child needs parentheses
    text = f"{format_expr(expr.left, prec)} {expr.op} {format_expr(expr.right, prec + 1)}"
    return f"({text})" if prec < parent else text


def format_network(net: BooleanNetwork) -> str:
    lines = [f"node {n};" for n in net.nodes]
    lines += [f"{n}' = {format_expr(r)};" for n, r in zip(net.nodes, net.rules)]
    return "\n".join(lines) + "\n"
