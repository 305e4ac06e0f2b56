"""Desk-scale reference deciders, independent of the column-generation path.

PSAT: dense LP over every valuation of the instance symbols.
CQU (unary-only): reachability over capped count vectors of susceptible
elementary terms — pure enumeration, no simplex and no branching.
LIPSAT: dense LP over the grid of valuations with bounded denominators that
give every certainty formula value 1; sat verdicts are trusted, unsat is
advisory (the grid may simply miss the witness).
"""

from __future__ import annotations

from fractions import Fraction

from .cquel import Inclusion, NormalFormCquel, predicates_of
from .errors import QuantsatError
from .formulas import Implies, Not, Var, eval_classical
from .lipsat import LipAssignment, NormalFormLip, nf_symbols, normalize_lip
from .lp import LpProblem, solve_lp
from .luka import eval_luka, lsymbols_of
from .psat import PsatInstance

ONE = Fraction(1)


class OracleLimit(QuantsatError):
    """The instance falls outside the oracle's enumeration limits."""


def psat_oracle(inst: PsatInstance, symbol_limit: int = 12) -> bool:
    """Feasibility of the dense system over all 2^n valuations."""
    names = list(inst.symbols.names)
    if len(names) > symbol_limit:
        raise OracleLimit(f"psat oracle limited to {symbol_limit} symbols")
    relations = ["="] + [a.relation for a in inst.assignments]
    rhs = [ONE] + [a.value for a in inst.assignments]
    problem = LpProblem(relations, rhs)
    for mask in range(1 << len(names)):
        v = {names[i]: (mask >> i) & 1 for i in range(len(names))}
        problem.add_column([ONE] + [Fraction(eval_classical(a.formula, v))
                                    for a in inst.assignments])
    return solve_lp(problem).status == "optimal"


def cqu_oracle(nf: NormalFormCquel, pred_limit: int = 10) -> bool:
    """Exhaustive search over capped per-row counts of susceptible terms.

    Handles unary-only instances: EL constraints must be inclusions over
    predicate basics (they join the propositional universals); anything else
    is outside the oracle's limits.
    """
    universals = list(nf.u)
    for c in nf.e:
        if not isinstance(c, Inclusion):
            raise OracleLimit("cqu oracle handles unary-only instances")
        if c.lhs[0] != "pred" or any(b[0] != "pred" for _, b in c.rhs):
            raise OracleLimit("cqu oracle handles unary-only instances")
        for negated, basic in c.rhs:
            rhs = Not(Var(basic[1])) if negated else Var(basic[1])
            universals.append(Implies(Var(c.lhs[1]), rhs))

    preds = predicates_of(nf)
    if len(preds) > pred_limit:
        raise OracleLimit(f"cqu oracle limited to {pred_limit} predicates")
    q_preds = [s.body.name for s in nf.q]
    k = len(nf.q)

    projections = set()
    for mask in range(1 << len(preds)):
        v = {preds[i]: (mask >> i) & 1 for i in range(len(preds))}
        if all(eval_classical(f, v) == 1 for f in universals):
            projections.add(tuple(v[p] for p in q_preds))
    if k == 0:
        return bool(projections)

    bounds = [s.bound for s in nf.q]
    geq = [s.relation == ">=" for s in nf.q]

    def achieved(state) -> bool:
        return all((state[i] >= bounds[i]) if geq[i] else True for i in range(k))

    # counts capped at their bounds: adding one element of a term either
    # advances capped rows or dies on an exceeded <= row
    start = tuple(0 for _ in range(k))
    seen = {start}
    frontier = [start]
    while frontier:
        state = frontier.pop()
        if achieved(state):
            return True
        for term in projections:
            nxt = []
            dead = False
            for i in range(k):
                c = state[i] + term[i]
                if geq[i]:
                    c = min(c, bounds[i])
                elif c > bounds[i]:
                    dead = True
                    break
                nxt.append(c)
            if dead:
                continue
            nxt = tuple(nxt)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return False


def _farey(max_den: int):
    values = {Fraction(0), Fraction(1)}
    for d in range(1, max_den + 1):
        for n in range(d + 1):
            values.add(Fraction(n, d))
    return sorted(values)


def lipsat_grid_oracle(nf: NormalFormLip, max_denominator: int = 6,
                       symbol_limit: int = 3) -> str:
    """'sat' when some convex combination of grid valuations works,
    'advisory-unsat' otherwise (one-sided)."""
    symbols = nf_symbols(nf)
    if len(symbols) > symbol_limit:
        raise OracleLimit(f"lipsat oracle limited to {symbol_limit} symbols")
    grid = _farey(max_denominator)
    columns = set()
    stack = [()]
    while stack:
        partial = stack.pop()
        if len(partial) == len(symbols):
            v = dict(zip(symbols, partial))
            if all(eval_luka(g, v) == 1 for g in nf.gammas):
                columns.add(tuple(v[e.symbol] for e in nf.psi))
            continue
        for val in grid:
            stack.append(partial + (val,))
    if not columns:
        return "advisory-unsat"
    relations = ["="] * (len(nf.psi) + 1)
    rhs = [e.value for e in nf.psi] + [ONE]
    problem = LpProblem(relations, rhs)
    for col in sorted(columns):
        problem.add_column(list(col) + [ONE])
    return "sat" if solve_lp(problem).status == "optimal" else "advisory-unsat"


def lipsat_oracle(assignment: LipAssignment, max_denominator: int = 6,
                  symbol_limit: int = 3) -> str:
    """Dense LP directly over the assignment: columns are grid valuations
    evaluated on every assigned formula (value-1 rows filter themselves)."""
    names = sorted({n for f, _ in assignment.entries for n in lsymbols_of(f)})
    if len(names) > symbol_limit:
        raise OracleLimit(f"lipsat oracle limited to {symbol_limit} symbols")
    grid = _farey(max_denominator)
    relations = ["="] * (len(assignment.entries) + 1)
    rhs = [q for _, q in assignment.entries] + [ONE]
    problem = LpProblem(relations, rhs)

    seen = set()
    stack = [()]
    while stack:
        partial = stack.pop()
        if len(partial) == len(names):
            v = dict(zip(names, partial))
            col = tuple(eval_luka(f, v) for f, _ in assignment.entries)
            if col not in seen:
                seen.add(col)
                problem.add_column(list(col) + [ONE])
            continue
        for val in grid:
            stack.append(partial + (val,))
    return "sat" if solve_lp(problem).status == "optimal" else "advisory-unsat"
