"""Lukasiewicz probabilistic satisfiability via column generation.

Normal form splits an assignment into value-1 formulas and atomic interior
values; the solve keeps a pool of [0,1]-valued valuation columns over the
rows (atomic assignments in ascending value order, convexity row last,
initialized with the lower-triangular matrix), re-optimizes exactly after
each generated column, and asks the Lukasiewicz oracle for strictly
improving columns. Generation failure certifies unsatisfiability; coherence
equals satisfiability, with Dutch-book stakes extracted from a Farkas
certificate over the accumulated column pool and validated by a second
oracle query.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .bnb import BnbPolicy
from .errors import BudgetExceeded
from .lp import LpProblem, mat_inverse, merge_column, solve_lp, verify_farkas
from .luka import (LFormula, LIff, LNot, LVar, eval_luka, lsymbols_of,
                   luka_improving, luka_sat)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LipAssignment:
    entries: list[tuple[LFormula, Fraction]]

    def __post_init__(self):
        for _, q in self.entries:
            if not (0 <= q <= 1):
                raise ValueError(f"assigned value {q} outside [0,1]")


@dataclass(frozen=True)
class LipPsiEntry:
    symbol: str
    value: Fraction  # strictly inside (0,1)


@dataclass
class NormalFormLip:
    gammas: list[LFormula]
    psi: list[LipPsiEntry]


@dataclass
class ConvexWitness:
    """Weighted [0,1]-valuations; weights are a convex combination."""

    entries: list[tuple[dict[str, Fraction], Fraction]]


@dataclass
class LipStats:
    iterations: int = 0
    columns_generated: int = 0
    oracle_calls: int = 0
    lp_pivots: int = 0
    objective_trace: list = field(default_factory=list)
    wall_ms: float = 0.0


@dataclass
class LCoherenceReport:
    coherent: bool
    witness: ConvexWitness | None = None
    dutch_book: list[tuple[int, int]] | None = None
    book_verified: bool | None = None


def normalize_lip(assignment: LipAssignment) -> NormalFormLip:
    """Value-1 entries move to Gamma, value-0 entries contribute the negation,
    interior values bind fresh symbols through Lukasiewicz biconditionals."""
    gammas: list[LFormula] = []
    psi: list[LipPsiEntry] = []
    used: set[str] = set()
    names: set[str] = set()
    for f, _ in assignment.entries:
        names |= lsymbols_of(f)
    counter = 0

    def fresh() -> str:
        nonlocal counter
        while True:
            counter += 1
            name = f"a{counter}"
            if name not in names and name not in used:
                return name

    for f, q in assignment.entries:
        if q == 1:
            gammas.append(f)
            continue
        if q == 0:
            gammas.append(LNot(f))
            continue
        if isinstance(f, LVar) and f.name not in used:
            used.add(f.name)
            psi.append(LipPsiEntry(f.name, q))
            continue
        a = fresh()
        used.add(a)
        gammas.append(LIff(LVar(a), f))
        psi.append(LipPsiEntry(a, q))
    return NormalFormLip(gammas, psi)


def nf_symbols(nf: NormalFormLip) -> list[str]:
    names = {e.symbol for e in nf.psi}
    for g in nf.gammas:
        names |= lsymbols_of(g)
    return sorted(names)


class _LipSession:
    def __init__(self, nf: NormalFormLip, iteration_budget=None,
                 node_budget=None, stats: LipStats | None = None):
        self.nf = nf
        self.iteration_budget = iteration_budget
        self.policy = BnbPolicy(max_nodes=node_budget)
        self.stats = stats if stats is not None else LipStats()
        self.symbols = nf_symbols(nf)
        self.order = sorted(range(len(nf.psi)), key=lambda i: nf.psi[i].value)
        self.psi_sorted = [nf.psi[i] for i in self.order]
        self.psi_symbols = [e.symbol for e in self.psi_sorted]
        self.pool_valuations: list[dict[str, Fraction] | None] = []

    def _pin_column(self, values) -> dict[str, Fraction] | None:
        pins = dict(zip(self.psi_symbols, values))
        self.stats.oracle_calls += 1
        return luka_sat(self.nf.gammas, symbols=self.symbols, pins=pins,
                        policy=self.policy)

    def solve(self) -> ConvexWitness | None:
        start = time.perf_counter()
        try:
            return self._solve()
        finally:
            self.stats.wall_ms = (time.perf_counter() - start) * 1000.0

    def _solve(self) -> ConvexWitness | None:
        k = len(self.psi_sorted)
        relations = ["="] * (k + 1)
        rhs = [e.value for e in self.psi_sorted] + [ONE]
        problem = LpProblem(relations, rhs)

        # lower-triangular initial basis: column j sets the j smallest-value
        # symbols to 0 and the rest to 1; the convexity coordinate is 1
        for j in range(k + 1):
            values = [ONE if t >= j else ZERO for t in range(k)]
            extension = self._pin_column(values)
            cost = ZERO if extension is not None else ONE
            problem.add_column(list(values) + [ONE], cost, ("init", j))
            self.pool_valuations.append(extension)

        sol = solve_lp(problem, warm_basis=[("col", j) for j in range(k + 1)])
        assert sol.status == "optimal"
        self.stats.lp_pivots += sol.pivots
        self.stats.objective_trace.append(sol.objective)

        while sol.objective > 0:
            if self.iteration_budget is not None and self.stats.iterations >= self.iteration_budget:
                raise BudgetExceeded("lipsat column-generation iteration budget exceeded")
            self.stats.iterations += 1
            z = sol.dual
            weights = {sym: z[i] for i, sym in enumerate(self.psi_symbols)}
            self.stats.oracle_calls += 1
            valuation = luka_improving(self.nf.gammas, weights, -z[k],
                                       symbols=self.symbols, policy=self.policy)
            if valuation is None:
                return None
            self.stats.columns_generated += 1
            self.pool_valuations.append(valuation)
            vec = [valuation[sym] for sym in self.psi_symbols] + [ONE]
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
                assert valuation is not None
                entries.append((valuation, weight))
        if len(entries) > k + 1:
            raise AssertionError("witness exceeds the k+1 support bound")
        return ConvexWitness(entries)


def lipsat_solve(nf: NormalFormLip, iteration_budget=None, node_budget=None,
                 stats: LipStats | None = None) -> ConvexWitness | None:
    """Decide the normal-form assignment; a convex witness on sat, None on unsat."""
    return _LipSession(nf, iteration_budget, node_budget, stats).solve()


def lip_generate_column(basis_matrix, costs, gammas, psi_symbols, strict=False,
                        symbols=None, policy: BnbPolicy | None = None):
    """A column y in [0,1]^k x {1} with (c'B^-1) y >= 0 whose symbol part
    extends to a Gamma-value-1 valuation, or None.

    The dual row vector is computed exactly from the basis inverse. With
    strict=True the inequality is strictly positive (used for progress).
    """
    k = len(psi_symbols)
    binv = mat_inverse(basis_matrix)
    m = len(binv)
    z = [sum(Fraction(costs[i]) * binv[i][t] for i in range(m)) for t in range(m)]
    weights = {sym: z[i] for i, sym in enumerate(psi_symbols)}
    if strict:
        valuation = luka_improving(gammas, weights, -z[k], symbols=symbols, policy=policy)
    else:
        valuation = luka_sat(gammas, cut=(weights, -z[k]), symbols=symbols, policy=policy)
    if valuation is None:
        return None
    return [valuation[s] for s in psi_symbols] + [ONE], valuation


def verify_witness_lip(nf: NormalFormLip, witness: ConvexWitness):
    """Exact re-check of the convex witness invariants."""
    symbols = nf_symbols(nf)
    total = ZERO
    nonzero = 0
    for valuation, weight in witness.entries:
        if weight < 0:
            return False, f"negative weight {weight}"
        if weight > 0:
            nonzero += 1
        total += weight
        for name in symbols:
            if name not in valuation:
                return False, f"valuation misses symbol {name!r}"
            if not (0 <= Fraction(valuation[name]) <= 1):
                return False, f"value for {name!r} outside [0,1]"
        for g in nf.gammas:
            if eval_luka(g, valuation) != 1:
                return False, "valuation gives a certainty formula value below 1"
    if total != 1:
        return False, f"weights sum to {total}, not 1"
    if nonzero > len(nf.psi) + 1:
        return False, f"support {nonzero} exceeds k+1 = {len(nf.psi) + 1}"
    for entry in nf.psi:
        s = sum(weight * Fraction(valuation[entry.symbol])
                for valuation, weight in witness.entries)
        if s != entry.value:
            return False, (f"assignment {entry.symbol} = {entry.value} violated: "
                           f"weighted sum {s}")
    return True, None


def lip_value_of(witness: ConvexWitness, f: LFormula) -> Fraction:
    """The convex combination's value on a formula."""
    return sum(w * eval_luka(f, v) for v, w in witness.entries)


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


def _book_is_valid(assignment: LipAssignment, stakes, policy=None) -> bool:
    """A stake vector is a Dutch book iff no valuation at all reaches
    sum stake_i (q_i - v(alpha_i)) >= 0; asked as one oracle query over
    definitional symbols."""
    names = set()
    for f, _ in assignment.entries:
        names |= lsymbols_of(f)
    defs = []
    weights = {}
    bound = ZERO
    for i, (f, q) in enumerate(assignment.entries):
        d = f"_d{i}"
        while d in names:
            d += "_"
        names.add(d)
        defs.append(LIff(LVar(d), f))
        weights[d] = -Fraction(stakes[i])
        bound += -Fraction(stakes[i]) * q
    counterexample = luka_sat(defs, cut=(weights, bound), policy=policy)
    return counterexample is None


def check_l_coherence(assignment: LipAssignment, iteration_budget=None,
                      node_budget=None, grid_limit: int = 12,
                      stats: LipStats | None = None) -> LCoherenceReport:
    """Coherent iff the assignment is satisfiable.

    On incoherence, stakes come from a Farkas certificate over the solve
    pool plus the two-valued valuation grid; the candidate book is validated
    by a Lukasiewicz oracle query and flagged if validation fails.
    """
    nf = normalize_lip(assignment)
    session = _LipSession(nf, iteration_budget, node_budget, stats)
    witness = session.solve()
    if witness is not None:
        return LCoherenceReport(True, witness=witness)

    names = sorted({n for f, _ in assignment.entries for n in lsymbols_of(f)})
    k = len(assignment.entries)
    problem = LpProblem(["="] * (k + 1), [q for _, q in assignment.entries] + [ONE])

    def add_column(valuation):
        problem.add_column([eval_luka(f, valuation) for f, _ in assignment.entries] + [ONE], ZERO)

    for valuation in session.pool_valuations:
        if valuation is not None:
            add_column(valuation)
    if len(names) <= grid_limit:
        for mask in range(1 << len(names)):
            add_column({name: Fraction((mask >> i) & 1) for i, name in enumerate(names)})

    sol = solve_lp(problem)
    if sol.status != "infeasible":
        return LCoherenceReport(False, dutch_book=None, book_verified=False)
    assert verify_farkas(problem, sol.farkas)
    stakes = _integer_stakes([-w for w in sol.farkas[:k]])
    book = list(enumerate(stakes))
    verified = _book_is_valid(assignment, stakes,
                              policy=BnbPolicy(max_nodes=node_budget))
    return LCoherenceReport(False, dutch_book=book, book_verified=verified)
