"""Lukasiewicz infinitely-valued formulas and value-1 satisfiability.

Evaluation is exact rational. Satisfiability of a set of formulas at value 1
(optionally under a rational linear constraint over symbol values) is decided
by a mixed-integer encoding: one [0,1] variable per subformula, one binary
branch selector per connective with big-M=1 linearizations, solved with the
shared exact branch-and-bound. Returned valuations are exact rationals and
re-verified by evaluation before they leave this module.

Grammar (bit-exact):
    ~ negation, (*) strong conjunction, (+) strong disjunction,
    & lattice min, | lattice max, -> implication, <-> biconditional;
    precedence ~ > (*) > (+) > & > | > -> > <-> with -> right-associative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bnb import BnbOutcome, BnbPolicy, bnb_feasible
from .errors import BudgetExceeded, ParseError
from .lp import LpProblem

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class LFormula:
    pass


@dataclass(frozen=True)
class LVar(LFormula):
    name: str


@dataclass(frozen=True)
class LNot(LFormula):
    child: LFormula


@dataclass(frozen=True)
class OPlus(LFormula):
    left: LFormula
    right: LFormula


@dataclass(frozen=True)
class OTimes(LFormula):
    left: LFormula
    right: LFormula


@dataclass(frozen=True)
class LImplies(LFormula):
    left: LFormula
    right: LFormula


@dataclass(frozen=True)
class LMin(LFormula):
    left: LFormula
    right: LFormula


@dataclass(frozen=True)
class LMax(LFormula):
    left: LFormula
    right: LFormula


@dataclass(frozen=True)
class LIff(LFormula):
    left: LFormula
    right: LFormula


def lsymbols_of(f: LFormula) -> set[str]:
    out: set[str] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, LVar):
            out.add(node.name)
        elif isinstance(node, LNot):
            stack.append(node.child)
        else:
            stack.append(node.left)
            stack.append(node.right)
    return out


# --- parsing ---------------------------------------------------------------

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
        elif text.startswith("(+)", i):
            tokens.append(("op", "(+)", i))
            i += 3
        elif text.startswith("(*)", i):
            tokens.append(("op", "(*)", i))
            i += 3
        elif ch in _IDENT_START:
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
        elif ch == "~":
            tokens.append(("op", "~", i))
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


class _LParser:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.pos = 0
        self.text = text

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def expect_op(self, value) -> bool:
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == value:
            self.pos += 1
            return True
        return False

    def parse_iff(self):
        left = self.parse_implies()
        if self.expect_op("<->"):
            return LIff(left, self.parse_iff())
        return left

    def parse_implies(self):
        left = self.parse_max()
        if self.expect_op("->"):
            return LImplies(left, self.parse_implies())
        return left

    def parse_max(self):
        left = self.parse_min()
        while self.expect_op("|"):
            left = LMax(left, self.parse_min())
        return left

    def parse_min(self):
        left = self.parse_oplus()
        while self.expect_op("&"):
            left = LMin(left, self.parse_oplus())
        return left

    def parse_oplus(self):
        left = self.parse_otimes()
        while self.expect_op("(+)"):
            left = OPlus(left, self.parse_otimes())
        return left

    def parse_otimes(self):
        left = self.parse_unary()
        while self.expect_op("(*)"):
            left = OTimes(left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.expect_op("~"):
            return LNot(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of formula", column=len(self.text))
        kind, value, col = tok
        self.pos += 1
        if kind == "ident":
            return LVar(value)
        if kind == "lparen":
            inner = self.parse_iff()
            closing = self.peek()
            if closing is None or closing[0] != "rparen":
                raise ParseError("expected ')'", column=col)
            self.pos += 1
            return inner
        raise ParseError(f"unexpected token {value!r}", column=col)


def parse_luka(text: str) -> LFormula:
    parser = _LParser(_tokenize(text), text)
    f = parser.parse_iff()
    tok = parser.peek()
    if tok is not None:
        raise ParseError(f"trailing input {tok[1]!r}", column=tok[2])
    return f


# --- printing ----------------------------------------------------------------

_LEVEL = {LVar: 7, LNot: 6, OTimes: 5, OPlus: 4, LMin: 3, LMax: 2, LImplies: 1, LIff: 0}
_OPS = {OTimes: "(*)", OPlus: "(+)", LMin: "&", LMax: "|", LImplies: "->", LIff: "<->"}


def format_luka(f: LFormula) -> str:
    """Grammar-conformant text; parse_luka(format_luka(f)) == f."""

    def wrap(node, min_level):
        text, level = fmt(node)
        return f"({text})" if level < min_level else text

    def fmt(node):
        level = _LEVEL[type(node)]
        if isinstance(node, LVar):
            return node.name, level
        if isinstance(node, LNot):
            return "~" + wrap(node.child, 6), level
        op = _OPS[type(node)]
        if isinstance(node, (LImplies, LIff)):  # right-associative
            left = wrap(node.left, level + 1)
            right = wrap(node.right, level)
        else:  # left-associative
            left = wrap(node.left, level)
            right = wrap(node.right, level + 1)
        return f"{left} {op} {right}", level

    return fmt(f)[0]


# --- evaluation ------------------------------------------------------------

def eval_luka(f: LFormula, v: dict) -> Fraction:
    """Exact truth value of `f` under the [0,1]-valuation `v`."""
    if isinstance(f, LVar):
        try:
            return Fraction(v[f.name])
        except KeyError:
            raise KeyError(f"valuation does not map symbol {f.name!r}") from None
    if isinstance(f, LNot):
        return ONE - eval_luka(f.child, v)
    a = eval_luka(f.left, v)
    b = eval_luka(f.right, v)
    if isinstance(f, OPlus):
        return min(ONE, a + b)
    if isinstance(f, OTimes):
        return max(ZERO, a + b - ONE)
    if isinstance(f, LImplies):
        return min(ONE, ONE - a + b)
    if isinstance(f, LMin):
        return min(a, b)
    if isinstance(f, LMax):
        return max(a, b)
    if isinstance(f, LIff):
        return ONE - abs(a - b)
    raise TypeError(f"not a Lukasiewicz formula node: {f!r}")


# --- MILP encoding ----------------------------------------------------------

class _Encoder:
    """Rows over variables; variables are symbols, subformula values, binaries."""

    def __init__(self):
        self.var_names: list = []  # ("sym", name) | ("node", k) | ("bin", k)
        self.rows: list[tuple[dict, str, Fraction]] = []
        self.binaries: list[int] = []
        self._sym_index: dict[str, int] = {}
        self._counter = 0

    def sym(self, name: str) -> int:
        idx = self._sym_index.get(name)
        if idx is None:
            idx = self._new(("sym", name))
            self._sym_index[name] = idx
            self.row({idx: ONE}, "<=", ONE)
        return idx

    def _new(self, tag) -> int:
        self.var_names.append(tag)
        return len(self.var_names) - 1

    def node(self) -> int:
        self._counter += 1
        idx = self._new(("node", self._counter))
        self.row({idx: ONE}, "<=", ONE)
        return idx

    def binary(self) -> int:
        self._counter += 1
        idx = self._new(("bin", self._counter))
        self.row({idx: ONE}, "<=", ONE)
        self.binaries.append(idx)
        return idx

    def row(self, coeffs, rel: str, rhs):
        """`coeffs` is (var, coefficient) pairs; repeated variables add up
        (both children of a connective can be the same variable)."""
        acc: dict[int, Fraction] = {}
        for var, c in (coeffs.items() if isinstance(coeffs, dict) else coeffs):
            acc[var] = acc.get(var, ZERO) + c
        self.rows.append((acc, rel, Fraction(rhs)))

    def encode(self, f: LFormula) -> int:
        """Returns the variable carrying the value of `f`."""
        if isinstance(f, LVar):
            return self.sym(f.name)
        if isinstance(f, LNot):
            a = self.encode(f.child)
            t = self.node()
            self.row([(t, ONE), (a, ONE)], "=", ONE)
            return t
        a = self.encode(f.left)
        b = self.encode(f.right)
        t = self.node()
        s = self.binary()
        TWO = Fraction(2)
        if isinstance(f, OPlus):
            self.row([(t, ONE), (a, -ONE), (b, -ONE)], "<=", ZERO)
            self.row([(t, ONE), (a, -ONE), (b, -ONE), (s, ONE)], ">=", ZERO)
            self.row([(t, ONE), (s, -ONE)], ">=", ZERO)
            self.row([(a, ONE), (b, ONE), (s, -ONE)], "<=", ONE)
        elif isinstance(f, OTimes):
            self.row([(t, ONE), (a, -ONE), (b, -ONE)], ">=", -ONE)
            self.row([(t, ONE), (a, -ONE), (b, -ONE), (s, ONE)], "<=", ZERO)
            self.row([(t, ONE), (s, -ONE)], "<=", ZERO)
        elif isinstance(f, LImplies):
            self.row([(t, ONE), (a, ONE), (b, -ONE)], "<=", ONE)
            self.row([(t, ONE), (a, ONE), (b, -ONE), (s, ONE)], ">=", ONE)
            self.row([(t, ONE), (s, -ONE)], ">=", ZERO)
            self.row([(a, -ONE), (b, ONE), (s, -ONE)], "<=", ZERO)
        elif isinstance(f, LMin):
            self.row([(t, ONE), (a, -ONE)], "<=", ZERO)
            self.row([(t, ONE), (b, -ONE)], "<=", ZERO)
            self.row([(t, ONE), (a, -ONE), (s, ONE)], ">=", ZERO)
            self.row([(t, ONE), (b, -ONE), (s, -ONE)], ">=", -ONE)
        elif isinstance(f, LMax):
            self.row([(t, ONE), (a, -ONE)], ">=", ZERO)
            self.row([(t, ONE), (b, -ONE)], ">=", ZERO)
            self.row([(t, ONE), (a, -ONE), (s, -ONE)], "<=", ZERO)
            self.row([(t, ONE), (b, -ONE), (s, ONE)], "<=", ONE)
        elif isinstance(f, LIff):
            d = self.node()
            self.row([(d, ONE), (a, -ONE), (b, ONE)], ">=", ZERO)
            self.row([(d, ONE), (a, ONE), (b, -ONE)], ">=", ZERO)
            self.row([(d, ONE), (a, -ONE), (b, ONE), (s, TWO)], "<=", TWO)
            self.row([(d, ONE), (a, ONE), (b, -ONE), (s, -TWO)], "<=", ZERO)
            self.row([(t, ONE), (d, ONE)], "=", ONE)
        else:
            raise TypeError(f"not a Lukasiewicz formula node: {f!r}")
        return t

    def to_problem(self, costs: dict | None = None) -> LpProblem:
        relations = [rel for _, rel, _ in self.rows]
        rhs = [r for _, _, r in self.rows]
        problem = LpProblem(relations, rhs)
        nrows = len(self.rows)
        for j, tag in enumerate(self.var_names):
            vec = [ZERO] * nrows
            for i, (coeffs, _, _) in enumerate(self.rows):
                c = coeffs.get(j)
                if c is not None:
                    vec[i] = c
            cost = (costs or {}).get(j, ZERO)
            problem.add_column(vec, cost, tag)
        return problem


def _build(gammas, symbols=None, pins=None, cut=None):
    """Encoder with value-1 roots, optional symbol pins and linear cut row."""
    enc = _Encoder()
    for name in symbols or ():
        enc.sym(name)
    for g in gammas:
        root = enc.encode(g)
        enc.row({root: ONE}, "=", ONE)
    for name, value in (pins or {}).items():
        enc.row({enc.sym(name): ONE}, "=", Fraction(value))
    if cut is not None:
        weights, bound = cut
        coeffs = {enc.sym(name): Fraction(w) for name, w in weights.items()}
        enc.row(coeffs, ">=", Fraction(bound))
    return enc


def _extract(enc: _Encoder, solution) -> dict[str, Fraction]:
    values = {}
    for j, tag in enumerate(enc.var_names):
        if tag[0] == "sym":
            values[tag[1]] = solution.primal[j]
    return values


def luka_sat(gammas, cut=None, symbols=None, pins=None,
             policy: BnbPolicy | None = None) -> dict[str, Fraction] | None:
    """A valuation giving value 1 to every formula in `gammas`, or None.

    `cut` is an optional ({symbol: weight}, bound) linear restriction
    sum(w * v(sym)) >= bound; `pins` fixes symbol values exactly.
    Raises BudgetExceeded distinctly when the node budget runs out.
    """
    gammas = list(gammas)
    enc = _build(gammas, symbols=symbols, pins=pins, cut=cut)
    outcome = bnb_feasible(enc.to_problem(), enc.binaries, policy=policy)
    if outcome.status == "budget":
        raise BudgetExceeded("luka_sat node budget exceeded")
    if outcome.status != "feasible":
        return None
    valuation = _extract(enc, outcome.solution)
    for g in gammas:
        if eval_luka(g, valuation) != 1:
            raise AssertionError("MILP returned a non-satisfying valuation")
    if cut is not None:
        weights, bound = cut
        total = sum(Fraction(w) * valuation[name] for name, w in weights.items())
        if total < Fraction(bound):
            raise AssertionError("MILP returned a cut-violating valuation")
    return valuation


def luka_improving(gammas, weights: dict, threshold, symbols=None,
                   policy: BnbPolicy | None = None):
    """A Gamma-satisfying valuation with sum(w * v(sym)) strictly above
    `threshold`, or None when no such valuation exists.

    Used by column generation to request strictly improving columns; plain
    luka_sat can only express the non-strict inequality.
    """
    enc = _build(list(gammas), symbols=symbols)
    costs = {enc.sym(name): -Fraction(w) for name, w in weights.items()}
    problem = enc.to_problem(costs)
    outcome = bnb_feasible(problem, enc.binaries, policy=policy,
                           objective_below=-Fraction(threshold))
    if outcome.status == "budget":
        raise BudgetExceeded("luka_improving node budget exceeded")
    if outcome.status != "feasible":
        return None
    valuation = _extract(enc, outcome.solution)
    for g in gammas:
        if eval_luka(g, valuation) != 1:
            raise AssertionError("MILP returned a non-satisfying valuation")
    total = sum(Fraction(w) * valuation[name] for name, w in weights.items())
    if total <= Fraction(threshold):
        raise AssertionError("improving column fails its strict bound")
    return valuation
