"""Boolean satisfiability engine and 0-1 linear inequality encoding.

The solver is a deterministic complete backtracking search with unit
propagation (fixed branching order, no randomness), so golden tests are
stable. It sits behind `solve_cnf` so an external solver could substitute.

`encode_linear_geq` translates a rational-weighted inequality over 0-1
variables into CNF through a ripple-carry binary adder network plus a
constant comparator (Tseitin-encoded with constant folding) — the linear-size
adder choice, fixed here as an implementation constant. Weights are scaled to
integers exactly via the LCM of denominators; no floating point anywhere.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .errors import BudgetExceeded
from .formulas import CnfFormula

_TRUE = "T"
_FALSE = "F"


@dataclass
class SatResult:
    status: str  # "sat" | "unsat"
    model: dict[int, int] | None = None  # var -> 0/1, total over cnf vars when sat


@dataclass
class LinearCut:
    """Sum(weights[i] * y_i) >= bound over designated 0-1 variables."""

    weights: list[Fraction]
    bound: Fraction
    relation: str = ">="


@dataclass
class SatStats:
    calls: int = 0
    conflicts: int = 0


def solve_cnf(cnf: CnfFormula, assumptions=(), conflict_budget: int | None = None,
              stats: SatStats | None = None) -> SatResult:
    """Complete decision for `cnf` under unit-literal assumptions.

    Raises BudgetExceeded (distinct from unsat) when the conflict budget
    runs out.
    """
    if stats is not None:
        stats.calls += 1
    if os.environ.get("QLR_EMIT_DIMACS"):
        import sys

        sys.stderr.write(cnf.to_dimacs())

    nvars = cnf.num_vars
    clauses = [list(c) for c in cnf.clauses]
    for lit in assumptions:
        clauses.append([lit])
    for clause in clauses:
        if not clause:
            return SatResult("unsat")

    occur: list[list[int]] = [[] for _ in range(2 * nvars + 1)]

    def slot(lit: int) -> int:
        return lit if lit > 0 else nvars - lit

    for ci, clause in enumerate(clauses):
        for lit in clause:
            occur[slot(lit)].append(ci)

    assign: list[int] = [-1] * (nvars + 1)  # -1 unassigned, else 0/1
    trail: list[int] = []
    conflicts = 0

    def value(lit: int) -> int:
        v = assign[abs(lit)]
        if v == -1:
            return -1
        return v if lit > 0 else 1 - v

    def propagate(start: int) -> bool:
        """Unit propagation from trail position `start`; False on conflict."""
        qi = start
        while qi < len(trail):
            lit = trail[qi]
            qi += 1
            for ci in occur[slot(-lit)]:
                unassigned = None
                satisfied = False
                for other in clauses[ci]:
                    val = value(other)
                    if val == 1:
                        satisfied = True
                        break
                    if val == -1:
                        if unassigned is None:
                            unassigned = other
                        else:
                            unassigned = 0  # two free literals, nothing to do
                            break
                if satisfied or unassigned == 0:
                    continue
                if unassigned is None:
                    return False
                var = abs(unassigned)
                assign[var] = 1 if unassigned > 0 else 0
                trail.append(unassigned)
        return True

    # seed units (includes assumptions)
    for clause in clauses:
        if len(clause) == 1:
            lit = clause[0]
            val = value(lit)
            if val == 0:
                return SatResult("unsat")
            if val == -1:
                assign[abs(lit)] = 1 if lit > 0 else 0
                trail.append(lit)
    if not propagate(0):
        return SatResult("unsat")

    # decision stack: (trail length before decision, literal tried, flipped?)
    decisions: list[tuple[int, int, bool]] = []

    def next_var() -> int:
        for v in range(1, nvars + 1):
            if assign[v] == -1:
                return v
        return 0

    while True:
        var = next_var()
        if var == 0:
            model = {v: assign[v] if assign[v] != -1 else 0 for v in range(1, nvars + 1)}
            return SatResult("sat", model)
        mark = len(trail)
        lit = -var  # try False first; deterministic
        assign[var] = 0
        trail.append(lit)
        decisions.append((mark, lit, False))
        while not propagate(len(trail) - 1):
            conflicts += 1
            if stats is not None:
                stats.conflicts += 1
            if conflict_budget is not None and conflicts > conflict_budget:
                raise BudgetExceeded(f"SAT conflict budget {conflict_budget} exceeded")
            # backtrack to the most recent unflipped decision
            while decisions and decisions[-1][2]:
                mark, lit, _ = decisions.pop()
                for t in trail[mark:]:
                    assign[abs(t)] = -1
                del trail[mark:]
            if not decisions:
                return SatResult("unsat")
            mark, lit, _ = decisions.pop()
            for t in trail[mark:]:
                assign[abs(t)] = -1
            del trail[mark:]
            flipped = -lit
            assign[abs(flipped)] = 1 if flipped > 0 else 0
            trail.append(flipped)
            decisions.append((mark, flipped, True))


# --- linear inequality to CNF ------------------------------------------------


class _Circuit:
    """CNF builder over bits that are literals or the constants _TRUE/_FALSE."""

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self.clauses: list[list[int]] = []

    def fresh(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def neg(self, a):
        if a == _TRUE:
            return _FALSE
        if a == _FALSE:
            return _TRUE
        return -a

    def and2(self, a, b):
        if a == _FALSE or b == _FALSE:
            return _FALSE
        if a == _TRUE:
            return b
        if b == _TRUE:
            return a
        t = self.fresh()
        self.clauses += [[-t, a], [-t, b], [t, -a, -b]]
        return t

    def or2(self, a, b):
        if a == _TRUE or b == _TRUE:
            return _TRUE
        if a == _FALSE:
            return b
        if b == _FALSE:
            return a
        t = self.fresh()
        self.clauses += [[-t, a, b], [t, -a], [t, -b]]
        return t

    def xor2(self, a, b):
        if a == _FALSE:
            return b
        if b == _FALSE:
            return a
        if a == _TRUE:
            return self.neg(b)
        if b == _TRUE:
            return self.neg(a)
        t = self.fresh()
        self.clauses += [[-t, a, b], [-t, -a, -b], [t, -a, b], [t, a, -b]]
        return t

    def full_adder(self, a, b, cin):
        """Returns (sum, carry) bits of a + b + cin."""
        axb = self.xor2(a, b)
        s = self.xor2(axb, cin)
        carry = self.or2(self.and2(a, b), self.and2(axb, cin))
        return s, carry

    def add_numbers(self, x: list, y: list) -> list:
        """Ripple-carry sum of little-endian bit vectors."""
        out = []
        carry = _FALSE
        for i in range(max(len(x), len(y))):
            a = x[i] if i < len(x) else _FALSE
            b = y[i] if i < len(y) else _FALSE
            s, carry = self.full_adder(a, b, carry)
            out.append(s)
        out.append(carry)
        return out

    def assert_geq_const(self, bits: list, c: int):
        """Assert that the little-endian number `bits` is >= constant c >= 0."""
        if c <= 0:
            return
        width = max(len(bits), c.bit_length())
        bits = bits + [_FALSE] * (width - len(bits))
        cbits = [(c >> i) & 1 for i in range(width)]
        gt = _FALSE
        eq = _TRUE
        for i in range(width - 1, -1, -1):
            b = bits[i]
            if cbits[i] == 0:
                gt = self.or2(gt, self.and2(eq, b))
            else:
                eq = self.and2(eq, b)
        ge = self.or2(gt, eq)
        if ge == _FALSE:
            self.clauses.append([])
        elif ge != _TRUE:
            self.clauses.append([ge])


def _scale_to_integers(cut: LinearCut) -> tuple[list[int], int]:
    denom_lcm = 1
    for w in list(cut.weights) + [cut.bound]:
        f = Fraction(w)
        denom_lcm = denom_lcm * f.denominator // gcd(denom_lcm, f.denominator)
    weights = [int(Fraction(w) * denom_lcm) for w in cut.weights]
    bound = int(Fraction(cut.bound) * denom_lcm)
    return weights, bound


def encode_linear_geq(cut: LinearCut, vars: list[int], num_vars: int | None = None) -> CnfFormula:
    """CNF whose models, projected to `vars`, are exactly {y : w.y >= bound}.

    Auxiliary variables are allocated above `num_vars` (defaults to
    max(vars)). Negative weights are folded through y -> 1-y.
    """
    if len(cut.weights) != len(vars):
        raise ValueError("weights and vars must align")
    if cut.relation != ">=":
        raise ValueError("only >= cuts are supported")
    weights, bound = _scale_to_integers(cut)
    if num_vars is None:
        num_vars = max(vars, default=0)

    terms = []  # (positive weight, literal)
    shift = 0
    for w, v in zip(weights, vars):
        if w > 0:
            terms.append((w, v))
        elif w < 0:
            terms.append((-w, -v))
            shift += -w
    bound += shift

    circuit = _Circuit(num_vars)
    if bound <= 0:
        return CnfFormula([], num_vars, num_vars)
    total = sum(w for w, _ in terms)
    if bound > total:
        return CnfFormula([[]], num_vars, num_vars)

    numbers = []
    for w, lit in terms:
        numbers.append([lit if (w >> i) & 1 else _FALSE for i in range(w.bit_length())])
    acc = numbers[0]
    for number in numbers[1:]:
        acc = circuit.add_numbers(acc, number)
    circuit.assert_geq_const(acc, bound)
    return CnfFormula(circuit.clauses, circuit.num_vars, num_vars)


def conjoin(base: CnfFormula, extra: CnfFormula) -> CnfFormula:
    """Conjunction of two CNFs; `extra`'s auxiliaries must start above base vars."""
    return CnfFormula(base.clauses + extra.clauses,
                      max(base.num_vars, extra.num_vars), base.num_input_vars)


def generate_valuation_under_cut(gamma_cnf: CnfFormula, cut: LinearCut,
                                 project_to: list[int], cut_vars: list[int] | None = None,
                                 assumptions=(), conflict_budget=None,
                                 stats: SatStats | None = None) -> dict[int, int] | None:
    """Model of gamma_cnf /\\ (w.y >= bound) projected to `project_to`, or None.

    `cut_vars` names the CNF variables the cut weights apply to (defaults to
    `project_to`). Returned valuations are re-checked against the cut.
    """
    if cut_vars is None:
        cut_vars = list(project_to)
    cut_cnf = encode_linear_geq(cut, cut_vars, num_vars=gamma_cnf.num_vars)
    combined = conjoin(gamma_cnf, cut_cnf)
    result = solve_cnf(combined, assumptions=assumptions,
                       conflict_budget=conflict_budget, stats=stats)
    if result.status != "sat":
        return None
    model = result.model
    assert model is not None
    total = sum(Fraction(w) * model[v] for w, v in zip(cut.weights, cut_vars))
    if total < cut.bound:
        raise AssertionError("cut encoding returned a violating model")
    return {v: model[v] for v in project_to}
