"""Classical propositional formulas: AST, parser, evaluation, CNF conversion.

Shared by the probabilistic solver directly and by the counting-quantifier
solver, which reuses these trees as one-variable formula bodies over unary
predicate names.

Grammar (bit-exact across the package):
    identifiers  [A-Za-z_][A-Za-z0-9_]*
    unary        !
    binary       &  |  ->  <->
    precedence   ! > & > | > -> > <->   (-> and <-> right-associative)
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError


class SymbolTable:
    """Interns symbol names to dense indices, in first-seen order."""

    def __init__(self, names=()):
        self.names: list[str] = []
        self._index: dict[str, int] = {}
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> int:
        idx = self._index.get(name)
        if idx is None:
            idx = len(self.names)
            self.names.append(name)
            self._index[name] = idx
        return idx

    def index(self, name: str) -> int:
        return self._index[name]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)


@dataclass(frozen=True)
class Formula:
    """Base class; nodes are immutable and safe to share."""

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


def symbols_of(f: Formula) -> set[str]:
    out: set[str] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, Not):
            stack.append(node.child)
        else:
            stack.append(node.left)
            stack.append(node.right)
    return out


# --- parsing ---------------------------------------------------------------

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")


def _tokenize(text: str):
    """Yield (kind, value, column) tokens; kind in ident/op/lparen/rparen."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch in _IDENT_START:
            j = i + 1
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
        elif ch == "(":
            tokens.append(("lparen", "(", i))
            i += 1
        elif ch == ")":
            tokens.append(("rparen", ")", i))
            i += 1
        elif ch == "!":
            tokens.append(("op", "!", i))
            i += 1
        elif ch == "&":
            tokens.append(("op", "&", i))
            i += 1
        elif ch == "|":
            tokens.append(("op", "|", i))
            i += 1
        elif text.startswith("<->", i):
            tokens.append(("op", "<->", i))
            i += 3
        elif text.startswith("->", i):
            tokens.append(("op", "->", i))
            i += 2
        else:
            raise ParseError(f"unknown operator or character {ch!r}", column=i)
    return tokens


class _Parser:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.pos = 0
        self.text = text

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of formula", column=len(self.text))
        self.pos += 1
        return tok

    def expect_op(self, value) -> bool:
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == value:
            self.pos += 1
            return True
        return False

    # precedence climbing, lowest first
    def parse_iff(self):
        left = self.parse_implies()
        if self.expect_op("<->"):
            return Iff(left, self.parse_iff())
        return left

    def parse_implies(self):
        left = self.parse_or()
        if self.expect_op("->"):
            return Implies(left, self.parse_implies())
        return left

    def parse_or(self):
        left = self.parse_and()
        while self.expect_op("|"):
            left = Or(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_unary()
        while self.expect_op("&"):
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self):
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == "!":
            self.pos += 1
            return Not(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self):
        tok = self.take()
        kind, value, col = tok
        if kind == "ident":
            return Var(value)
        if kind == "lparen":
            inner = self.parse_iff()
            closing = self.peek()
            if closing is None or closing[0] != "rparen":
                raise ParseError("expected ')'", column=col)
            self.pos += 1
            return inner
        raise ParseError(f"unexpected token {value!r}", column=col)


def parse_formula(text: str, symbols: SymbolTable | None = None) -> Formula:
    """Parse a classical formula; every identifier is registered in `symbols`."""
    parser = _Parser(_tokenize(text), text)
    f = parser.parse_iff()
    tok = parser.peek()
    if tok is not None:
        raise ParseError(f"trailing input {tok[1]!r}", column=tok[2])
    if symbols is not None:
        for name in sorted(symbols_of(f)):
            symbols.intern(name)
    return f


# --- printing ----------------------------------------------------------------

_LEVEL = {Var: 5, Not: 4, And: 3, Or: 2, Implies: 1, Iff: 0}


def format_formula(f: Formula) -> str:
    """Grammar-conformant text; parse_formula(format_formula(f)) == f."""

    def wrap(node, min_level):
        text, level = fmt(node)
        return f"({text})" if level < min_level else text

    def fmt(node):
        level = _LEVEL[type(node)]
        if isinstance(node, Var):
            return node.name, level
        if isinstance(node, Not):
            return "!" + wrap(node.child, 4), level
        ops = {And: "&", Or: "|", Implies: "->", Iff: "<->"}
        op = ops[type(node)]
        if isinstance(node, (Implies, Iff)):  # right-associative
            left = wrap(node.left, level + 1)
            right = wrap(node.right, level)
        else:  # left-associative
            left = wrap(node.left, level)
            right = wrap(node.right, level + 1)
        return f"{left} {op} {right}", level

    return fmt(f)[0]


# --- evaluation ------------------------------------------------------------

def eval_classical(f: Formula, v: dict[str, int]) -> int:
    """Two-valued semantics; `v` must be total over the symbols of `f`."""
    if isinstance(f, Var):
        try:
            return 1 if v[f.name] else 0
        except KeyError:
            raise KeyError(f"valuation does not map symbol {f.name!r}") from None
    if isinstance(f, Not):
        return 1 - eval_classical(f.child, v)
    a = eval_classical(f.left, v)
    b = eval_classical(f.right, v)
    if isinstance(f, And):
        return min(a, b)
    if isinstance(f, Or):
        return max(a, b)
    if isinstance(f, Implies):
        return max(1 - a, b)
    if isinstance(f, Iff):
        return 1 if a == b else 0
    raise TypeError(f"not a formula node: {f!r}")


# --- CNF -------------------------------------------------------------------

@dataclass
class CnfFormula:
    """Clause list over variables 1..num_vars; literals are signed indices.

    Variables 1..num_input_vars correspond to symbol indices 0..n-1 of the
    symbol table the CNF was built from; the rest are Tseitin auxiliaries.
    """

    clauses: list[list[int]]
    num_vars: int
    num_input_vars: int = 0

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        for clause in self.clauses:
            lines.append(" ".join(str(lit) for lit in clause) + " 0")
        return "\n".join(lines) + "\n"


class _Tseitin:
    """Definitional CNF translation; one auxiliary per internal node."""

    def __init__(self, symbols: SymbolTable):
        self.symbols = symbols
        self.num_vars = len(symbols)
        self.clauses: list[list[int]] = []

    def fresh(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def literal(self, f: Formula) -> int:
        if isinstance(f, Var):
            # all symbols are interned before encoding starts
            return self.symbols.index(f.name) + 1
        if isinstance(f, Not):
            return -self.literal(f.child)
        a = self.literal(f.left)
        b = self.literal(f.right)
        t = self.fresh()
        if isinstance(f, And):
            self.clauses += [[-t, a], [-t, b], [t, -a, -b]]
        elif isinstance(f, Or):
            self.clauses += [[-t, a, b], [t, -a], [t, -b]]
        elif isinstance(f, Implies):
            self.clauses += [[-t, -a, b], [t, a], [t, -b]]
        elif isinstance(f, Iff):
            self.clauses += [[-t, -a, b], [-t, a, -b], [t, -a, -b], [t, a, b]]
        else:
            raise TypeError(f"not a formula node: {f!r}")
        return t

    def assert_true(self, f: Formula):
        self.clauses.append([self.literal(f)])


def to_cnf(f: Formula, symbols: SymbolTable | None = None) -> CnfFormula:
    """Equisatisfiable CNF of `f`; models project to exactly the models of `f`."""
    return cnf_of_set([f], symbols)


def cnf_of_set(formulas, symbols: SymbolTable | None = None) -> CnfFormula:
    """CNF of a conjunction of formulas over a shared symbol table."""
    if symbols is None:
        symbols = SymbolTable()
        for f in formulas:
            for name in sorted(symbols_of(f)):
                symbols.intern(name)
    else:
        for f in formulas:
            for name in sorted(symbols_of(f)):
                symbols.intern(name)
    enc = _Tseitin(symbols)
    num_input = len(symbols)
    for f in formulas:
        enc.assert_true(f)
    return CnfFormula(enc.clauses, enc.num_vars, num_input)
