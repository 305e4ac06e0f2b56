"""Probabilistic satisfiability: normal form, column-generation solve,
coherence reporting with Dutch-book extraction, witness verification.

The solve keeps a growing pool of valuation columns over the normal form
rows (one convexity row, then one row per atomic probability assignment,
sorted by decreasing value) and alternates exact LP re-optimization with
SAT-based column generation. The solver requests strictly improving columns
(z'y > 0); failure of that query certifies unsatisfiability because a
satisfiable instance always admits a column with positive dual product while
the pool objective is positive. The public `generate_column_psat` keeps the
non-strict z'y >= 0 contract.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .errors import BudgetExceeded
from .formulas import (CnfFormula, Formula, Implies, Not, SymbolTable, Var,
                       cnf_of_set, eval_classical, symbols_of)
from .lp import LpProblem, merge_column, solve_lp, verify_farkas
from .sat import LinearCut, SatStats, generate_valuation_under_cut, solve_cnf

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class PsatAssignment:
    formula: Formula
    relation: str  # "=", "<=", ">="
    value: Fraction


@dataclass
class PsatInstance:
    assignments: list[PsatAssignment]
    symbols: SymbolTable

    def __post_init__(self):
        for a in self.assignments:
            if not (0 <= a.value <= 1):
                raise ValueError(f"probability {a.value} outside [0,1]")
            if a.relation not in ("=", "<=", ">="):
                raise ValueError(f"bad relation {a.relation!r}")


@dataclass(frozen=True)
class PsiEntry:
    symbol: str
    relation: str
    value: Fraction  # strictly inside (0,1)


@dataclass
class NormalFormPsat:
    gammas: list[Formula]
    psi: list[PsiEntry]
    symbols: SymbolTable


@dataclass
class ProbabilityWitness:
    """Weighted valuations over all normal-form symbols; weights sum to 1."""

    entries: list[tuple[dict[str, int], Fraction]]


@dataclass
class SolveStats:
    iterations: int = 0
    columns_generated: int = 0
    sat_calls: int = 0
    lp_pivots: int = 0
    objective_trace: list = field(default_factory=list)
    wall_ms: float = 0.0


@dataclass
class CoherenceReport:
    coherent: bool
    witness: ProbabilityWitness | None = None
    dutch_book: list[tuple[int, int]] | None = None  # (assignment index, integer stake)
    book_verified: bool | None = None


def normalize_psat(inst: PsatInstance) -> NormalFormPsat:
    """Partition into certainty formulas and atomic interior assignments.

    Probability-1 rows move to Gamma, probability-0 rows contribute the
    negated formula, fresh symbols carry non-atomic or repeated assignments
    with one-sided linking implications as the relation requires.
    """
    symbols = SymbolTable(inst.symbols.names)
    gammas: list[Formula] = []
    psi: list[PsiEntry] = []
    used: set[str] = set()
    fresh_counter = 0

    def fresh() -> str:
        nonlocal fresh_counter
        while True:
            fresh_counter += 1
            name = f"y{fresh_counter}"
            if name not in symbols and name not in used:
                return name

    for a in inst.assignments:
        f, rel, p = a.formula, a.relation, a.value
        if p == 1:
            if rel in ("=", ">="):
                gammas.append(f)
            # P(f) <= 1 is vacuous
            continue
        if p == 0:
            if rel in ("=", "<="):
                gammas.append(Not(f))
            # P(f) >= 0 is vacuous
            continue
        if isinstance(f, Var) and f.name not in used and rel == "=":
            used.add(f.name)
            psi.append(PsiEntry(f.name, rel, p))
            continue
        y = fresh()
        used.add(y)
        symbols.intern(y)
        if rel in ("=", ">="):
            gammas.append(Implies(Var(y), f))
        if rel in ("=", "<="):
            gammas.append(Implies(f, Var(y)))
        psi.append(PsiEntry(y, rel, p))

    for g in gammas:
        for name in sorted(symbols_of(g)):
            symbols.intern(name)
    return NormalFormPsat(gammas, psi, symbols)


def _scale_dual(z) -> list[int]:
    denom_lcm = 1
    for v in z:
        f = Fraction(v)
        denom_lcm = denom_lcm * f.denominator // gcd(denom_lcm, f.denominator)
    return [int(Fraction(v) * denom_lcm) for v in z]


def generate_column_psat(z, gammas, symbols: SymbolTable, psi_symbols,
                         strict: bool = False, conflict_budget=None,
                         sat_stats: SatStats | None = None):
    """A Gamma-consistent 0-1 column y = (1, v(psi)) with z'y >= 0, or None.

    With strict=True the requirement tightens to z'y > 0 (z is scaled to
    integers, so that is z'y >= 1). Returns (bits, full valuation).
    """
    if len(z) != len(psi_symbols) + 1:
        raise ValueError("dual vector length must be k+1")
    zi = _scale_dual(z)
    bound = (1 if strict else 0) - zi[0]
    cut = LinearCut([Fraction(w) for w in zi[1:]], Fraction(bound))
    gamma_cnf = cnf_of_set(gammas, symbols)
    psi_vars = [symbols.index(s) + 1 for s in psi_symbols]
    all_vars = list(range(1, len(symbols) + 1))
    model = generate_valuation_under_cut(gamma_cnf, cut, project_to=all_vars,
                                         cut_vars=psi_vars,
                                         conflict_budget=conflict_budget,
                                         stats=sat_stats)
    if model is None:
        return None
    valuation = {name: model[i + 1] for i, name in enumerate(symbols.names)}
    bits = [valuation[s] for s in psi_symbols]
    return bits, valuation


class _PsatSession:
    """One column-generation run; keeps the pool for coherence reporting."""

    def __init__(self, nf: NormalFormPsat, iteration_budget=None,
                 conflict_budget=None, stats: SolveStats | None = None):
        self.nf = nf
        self.iteration_budget = iteration_budget
        self.conflict_budget = conflict_budget
        self.stats = stats if stats is not None else SolveStats()
        self.sat_stats = SatStats()
        self.pool_valuations: list[dict[str, int] | None] = []

        self.order = sorted(range(len(nf.psi)), key=lambda i: nf.psi[i].value, reverse=True)
        self.psi_sorted = [nf.psi[i] for i in self.order]
        self.psi_symbols = [e.symbol for e in self.psi_sorted]
        self.gamma_cnf = cnf_of_set(nf.gammas, nf.symbols)

    def _pin_column(self, bits) -> dict[str, int] | None:
        """Gamma-consistent full extension of a psi-bit pattern, or None."""
        assumptions = []
        for sym, bit in zip(self.psi_symbols, bits):
            var = self.nf.symbols.index(sym) + 1
            assumptions.append(var if bit else -var)
        res = solve_cnf(self.gamma_cnf, assumptions=assumptions,
                        conflict_budget=self.conflict_budget, stats=self.sat_stats)
        if res.status != "sat":
            return None
        return {name: res.model[i + 1] for i, name in enumerate(self.nf.symbols.names)}

    def solve(self) -> ProbabilityWitness | None:
        start = time.perf_counter()
        try:
            return self._solve()
        finally:
            self.stats.sat_calls = self.sat_stats.calls
            self.stats.wall_ms = (time.perf_counter() - start) * 1000.0

    def _solve(self) -> ProbabilityWitness | None:
        k = len(self.psi_sorted)
        relations = ["="] + [e.relation for e in self.psi_sorted]
        rhs = [ONE] + [e.value for e in self.psi_sorted]
        problem = LpProblem(relations, rhs)

        # T_up initial columns: column j sets the j largest-probability symbols
        for j in range(k + 1):
            bits = [1 if t < j else 0 for t in range(k)]
            extension = self._pin_column(bits)
            cost = ZERO if extension is not None else ONE
            problem.add_column([ONE] + [Fraction(b) for b in bits], cost, ("init", j))
            self.pool_valuations.append(extension)

        sol = solve_lp(problem, warm_basis=[("col", j) for j in range(k + 1)])
        assert sol.status == "optimal"
        self.stats.lp_pivots += sol.pivots
        self.stats.objective_trace.append(sol.objective)

        while sol.objective > 0:
            if self.iteration_budget is not None and self.stats.iterations >= self.iteration_budget:
                raise BudgetExceeded("psat column-generation iteration budget exceeded")
            self.stats.iterations += 1
            generated = generate_column_psat(sol.dual, self.nf.gammas, self.nf.symbols,
                                             self.psi_symbols, strict=True,
                                             conflict_budget=self.conflict_budget,
                                             sat_stats=self.sat_stats)
            if generated is None:
                return None
            bits, valuation = generated
            self.stats.columns_generated += 1
            self.pool_valuations.append(valuation)
            vec = [ONE] + [Fraction(b) for b in bits]
            previous = sol.objective
            sol = merge_column(sol, vec, ZERO, ident=("gen", self.stats.columns_generated))
            assert sol.status == "optimal"
            self.stats.lp_pivots += sol.pivots
            self.stats.objective_trace.append(sol.objective)
            if sol.objective > previous:
                raise AssertionError("objective increased across a merge")

        entries = []
        for j, weight in enumerate(sol.primal):
            if weight > 0:
                valuation = self.pool_valuations[j]
                assert valuation is not None  # cost-0 at optimum means consistent
                entries.append((valuation, weight))
        if len(entries) > k + 1:
            raise AssertionError("witness exceeds the k+1 support bound")
        return ProbabilityWitness(entries)


def psat_solve(nf: NormalFormPsat, iteration_budget=None, conflict_budget=None,
               stats: SolveStats | None = None) -> ProbabilityWitness | None:
    """Decide the normal-form instance; a witness on sat, None on unsat."""
    return _PsatSession(nf, iteration_budget, conflict_budget, stats).solve()


def verify_witness_psat(nf: NormalFormPsat, witness: ProbabilityWitness):
    """Exact re-check of all witness invariants; (True, None) or (False, reason)."""
    total = ZERO
    for valuation, weight in witness.entries:
        if weight < 0:
            return False, f"negative weight {weight}"
        total += weight
        for name in nf.symbols.names:
            if name not in valuation:
                return False, f"valuation misses symbol {name!r}"
        for g in nf.gammas:
            if eval_classical(g, valuation) != 1:
                return False, "valuation violates a certainty formula"
    if total != 1:
        return False, f"weights sum to {total}, not 1"
    for entry in nf.psi:
        s = sum(weight * valuation[entry.symbol] for valuation, weight in witness.entries)
        ok = (s == entry.value if entry.relation == "=" else
              s <= entry.value if entry.relation == "<=" else s >= entry.value)
        if not ok:
            return False, (f"assignment {entry.symbol} {entry.relation} {entry.value} "
                           f"violated: weighted sum {s}")
    return True, None


def probability_of(witness: ProbabilityWitness, f: Formula) -> Fraction:
    """Probability the witness distribution gives to a formula."""
    return sum(w for v, w in witness.entries if eval_classical(f, v) == 1)


def _integer_stakes(values) -> list[int]:
    denom_lcm = 1
    for v in values:
        denom_lcm = denom_lcm * v.denominator // gcd(denom_lcm, v.denominator)
    scaled = [int(v * denom_lcm) for v in values]
    g = 0
    for s in scaled:
        g = gcd(g, abs(s))
    if g > 1:
        scaled = [s // g for s in scaled]
    return scaled


def _all_valuations(names):
    n = len(names)
    for mask in range(1 << n):
        yield {names[i]: (mask >> i) & 1 for i in range(n)}


def dutch_book_holds(inst: PsatInstance, stakes) -> bool:
    """Enumerative check: sum stake_i * (p_i - v(alpha_i)) < 0 for every valuation."""
    names = list(inst.symbols.names)
    for v in _all_valuations(names):
        balance = sum(Fraction(s) * (a.value - eval_classical(a.formula, v))
                      for s, a in zip(stakes, inst.assignments))
        if balance >= 0:
            return False
    return True


def check_coherence(inst: PsatInstance, iteration_budget=None, conflict_budget=None,
                    dense_limit: int = 12, verify_limit: int = 20,
                    stats: SolveStats | None = None) -> CoherenceReport:
    """Coherent iff satisfiable (all relations must be equalities).

    On incoherence, stakes come from the Farkas certificate of the instance
    system over all valuations at desk scale (or the generated pool above it),
    normalized to integers, and the book is verified by enumeration when the
    symbol count allows.
    """
    for a in inst.assignments:
        if a.relation != "=":
            raise ValueError("coherence checking requires point-valued assignments")
    nf = normalize_psat(inst)
    session = _PsatSession(nf, iteration_budget, conflict_budget, stats)
    witness = session.solve()
    if witness is not None:
        return CoherenceReport(True, witness=witness)

    names = list(inst.symbols.names)
    k = len(inst.assignments)
    relations = ["="] * (k + 1)
    rhs = [ONE] + [a.value for a in inst.assignments]
    problem = LpProblem(relations, rhs)
    if len(names) <= dense_limit:
        for v in _all_valuations(names):
            problem.add_column([ONE] + [Fraction(eval_classical(a.formula, v))
                                        for a in inst.assignments], ZERO)
    else:
        for valuation in session.pool_valuations:
            if valuation is None:
                continue
            problem.add_column([ONE] + [Fraction(eval_classical(a.formula, valuation))
                                        for a in inst.assignments], ZERO)
    sol = solve_lp(problem)
    if sol.status != "infeasible":
        # pool too sparse to carry a certificate; verdict still stands
        return CoherenceReport(False, dutch_book=None, book_verified=False)
    assert verify_farkas(problem, sol.farkas)
    stakes = _integer_stakes([-w for w in sol.farkas[1:]])
    book = list(enumerate(stakes))
    verified = None
    if len(names) <= verify_limit:
        verified = dutch_book_holds(inst, stakes)
        if len(names) <= dense_limit and not verified:
            raise AssertionError("dense Farkas stakes failed the enumeration check")
    return CoherenceReport(False, dutch_book=book, book_verified=verified)
