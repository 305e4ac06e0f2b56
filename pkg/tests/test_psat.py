import itertools
from fractions import Fraction as F

import pytest

from quantsat.formulas import (Implies, Not, SymbolTable, Var, eval_classical,
                               parse_formula)
from quantsat.generators import generate_psat
from quantsat.lp import LpProblem, solve_lp
from quantsat.oracles import psat_oracle
from quantsat.psat import (NormalFormPsat, ProbabilityWitness, PsatAssignment,
                           PsatInstance, PsiEntry, SolveStats, check_coherence,
                           dutch_book_holds, generate_column_psat, normalize_psat,
                           probability_of, psat_solve, verify_witness_psat)


def ant_instance() -> PsatInstance:
    syms = SymbolTable()
    return PsatInstance([
        PsatAssignment(parse_formula("x1 | x2", syms), ">=", F(3, 4)),
        PsatAssignment(parse_formula("x1 | !x2", syms), "<=", F(1, 3)),
        PsatAssignment(parse_formula("x1", syms), "<=", F(3, 20)),
    ], syms)


def gene_instance() -> PsatInstance:
    syms = SymbolTable()
    hypothesis = [PsatAssignment(parse_formula(t, syms), "=", F(1))
                  for t in ["x1 | x2", "x1 | x3", "x2 | x3"]]
    data = [PsatAssignment(parse_formula(t, syms), "=", F(3, 5))
            for t in ["x1", "x2", "x3"]]
    return PsatInstance(hypothesis + data, syms)


def paper_distribution_witness() -> ProbabilityWitness:
    """The worked four-valuation distribution (0.20, 0.05, 0.70, 0.05),
    extended to the fresh symbols by their defining formulas."""
    entries = []
    for (x1, x2), weight in zip([(0, 0), (1, 0), (0, 1), (1, 1)],
                                [F(1, 5), F(1, 20), F(7, 10), F(1, 20)]):
        v = {"x1": x1, "x2": x2, "y1": max(x1, x2), "y2": max(x1, 1 - x2), "y3": x1}
        entries.append((v, weight))
    return ProbabilityWitness(entries)


class TestNormalize:
    def test_ant_golden(self):
        nf = normalize_psat(ant_instance())
        assert nf.gammas == [
            Implies(Var("y1"), parse_formula("x1 | x2")),
            Implies(parse_formula("x1 | !x2"), Var("y2")),
            Implies(Var("x1"), Var("y3")),
        ]
        assert [(e.symbol, e.value) for e in nf.psi] == \
            [("y1", F(3, 4)), ("y2", F(1, 3)), ("y3", F(3, 20))]
        assert [e.relation for e in nf.psi] == [">=", "<=", "<="]

    def test_gene_already_normal(self):
        nf = normalize_psat(gene_instance())
        assert nf.gammas == [parse_formula(t) for t in ["x1 | x2", "x1 | x3", "x2 | x3"]]
        assert [(e.symbol, e.relation, e.value) for e in nf.psi] == \
            [(f"x{i}", "=", F(3, 5)) for i in (1, 2, 3)]

    def test_probability_one_moves_to_gamma(self):
        syms = SymbolTable()
        inst = PsatInstance([PsatAssignment(parse_formula("x1", syms), "=", F(1))], syms)
        nf = normalize_psat(inst)
        assert nf.gammas == [Var("x1")] and nf.psi == []

    def test_probability_zero_negates(self):
        syms = SymbolTable()
        inst = PsatInstance([PsatAssignment(parse_formula("x1", syms), "=", F(0))], syms)
        nf = normalize_psat(inst)
        assert nf.gammas == [Not(Var("x1"))] and nf.psi == []

    def test_vacuous_rows_dropped(self):
        syms = SymbolTable()
        inst = PsatInstance([
            PsatAssignment(parse_formula("x1", syms), "<=", F(1)),
            PsatAssignment(parse_formula("x2", syms), ">=", F(0)),
        ], syms)
        nf = normalize_psat(inst)
        assert nf.gammas == [] and nf.psi == []

    def test_repeated_symbol_gets_fresh_link(self):
        syms = SymbolTable()
        inst = PsatInstance([
            PsatAssignment(parse_formula("x1", syms), "=", F(1, 3)),
            PsatAssignment(parse_formula("x1", syms), "=", F(1, 2)),
        ], syms)
        nf = normalize_psat(inst)
        assert [e.symbol for e in nf.psi] == ["x1", "y1"]
        assert nf.gammas == [Implies(Var("y1"), Var("x1")), Implies(Var("x1"), Var("y1"))]
        # contradictory point values on one symbol are unsatisfiable
        assert psat_solve(nf) is None

    def test_fresh_symbols_bounded_by_k(self):
        inst = ant_instance()
        nf = normalize_psat(inst)
        fresh = set(nf.symbols.names) - set(inst.symbols.names)
        assert len(fresh) <= len(inst.assignments)


class TestSolve:
    def test_ant_satisfiable_with_verified_witness(self):
        nf = normalize_psat(ant_instance())
        witness = psat_solve(nf)
        assert witness is not None
        ok, reason = verify_witness_psat(nf, witness)
        assert ok, reason
        # witness satisfies the original three relations as stated
        assert probability_of(witness, parse_formula("x1 | x2")) >= F(3, 4)
        assert probability_of(witness, parse_formula("x1 | !x2")) <= F(1, 3)
        assert probability_of(witness, parse_formula("x1")) <= F(3, 20)

    def test_gene_unsatisfiable(self):
        assert psat_solve(normalize_psat(gene_instance())) is None

    def test_symmetric_split(self):
        nf = NormalFormPsat([], [PsiEntry("y", "=", F(1, 2))], SymbolTable(["y"]))
        witness = psat_solve(nf)
        assert witness is not None
        assert sorted((v["y"], w) for v, w in witness.entries) == \
            [(0, F(1, 2)), (1, F(1, 2))]

    def test_caratheodory_bound(self):
        for seed in range(40):
            inst = generate_psat(seed, symbols=4, assignments=3, clauses=2).psat
            nf = normalize_psat(inst)
            witness = psat_solve(nf)
            if witness is not None:
                assert len(witness.entries) <= len(nf.psi) + 1

    def test_monotone_objective_trace(self):
        for seed in range(30):
            inst = generate_psat(seed, symbols=4, assignments=3, clauses=3).psat
            stats = SolveStats()
            psat_solve(normalize_psat(inst), stats=stats)
            trace = stats.objective_trace
            assert all(a >= b for a, b in zip(trace, trace[1:]))

    def test_oracle_equivalence_corpus(self):
        for seed in range(60):
            inst = generate_psat(seed, symbols=4, assignments=3, clauses=2,
                                 composite=True).psat
            got = psat_solve(normalize_psat(inst)) is not None
            assert got == psat_oracle(inst), f"seed {seed}"

    def test_cost_strictly_decreases_after_merge(self):
        # initial triangular columns are mostly inconsistent here, so the
        # first generated column must strictly reduce the objective
        syms = SymbolTable(["y1", "y2"])
        nf = NormalFormPsat([parse_formula("y1 <-> !y2", syms)],
                            [PsiEntry("y1", "=", F(3, 5)), PsiEntry("y2", "=", F(2, 5))],
                            syms)
        stats = SolveStats()
        witness = psat_solve(nf, stats=stats)
        assert witness is not None
        trace = stats.objective_trace
        assert trace[0] > 0
        assert trace[1] < trace[0]

    def test_dense_lp_cross_check_ant(self):
        # solver verdict equals feasibility of the dense system over all 2^5
        # extended valuations with zero-cost Gamma-consistent columns
        nf = normalize_psat(ant_instance())
        names = list(nf.symbols.names)
        relations = ["="] + [e.relation for e in sorted(nf.psi, key=lambda e: e.value,
                                                        reverse=True)]
        psi_sorted = sorted(nf.psi, key=lambda e: e.value, reverse=True)
        rhs = [F(1)] + [e.value for e in psi_sorted]
        problem = LpProblem(relations, rhs)
        for bits in itertools.product([0, 1], repeat=len(names)):
            v = dict(zip(names, bits))
            cost = F(0) if all(eval_classical(g, v) == 1 for g in nf.gammas) else F(1)
            problem.add_column([F(1)] + [F(v[e.symbol]) for e in psi_sorted], cost)
        sol = solve_lp(problem)
        dense_sat = sol.status == "optimal" and sol.objective == 0
        assert dense_sat == (psat_solve(nf) is not None) == True  # noqa: E712


class TestGenerateColumn:
    def test_zero_dual_returns_any_consistent(self):
        nf = normalize_psat(ant_instance())
        psi_symbols = [e.symbol for e in nf.psi]
        out = generate_column_psat([F(0)] * 4, nf.gammas, nf.symbols, psi_symbols)
        assert out is not None
        bits, valuation = out
        assert all(eval_classical(g, valuation) == 1 for g in nf.gammas)

    def test_zero_dual_fails_iff_gamma_unsat(self):
        syms = SymbolTable(["y1"])
        gammas = [parse_formula("y1 & !y1", syms)]
        assert generate_column_psat([F(0), F(0)], gammas, syms, ["y1"]) is None

    def test_forced_negative_dual_fails(self):
        syms = SymbolTable(["y1"])
        gammas = [parse_formula("y1", syms)]
        # z = (0, -1): forced y1=1 gives z'y = -1 < 0
        assert generate_column_psat([F(0), F(-1)], gammas, syms, ["y1"]) is None

    def test_nonstrict_accepts_zero_product(self):
        syms = SymbolTable(["y1"])
        gammas = [parse_formula("y1", syms)]
        out = generate_column_psat([F(0), F(0)], gammas, syms, ["y1"])
        assert out is not None and out[0] == [1]
        # strict requires z'y > 0, which is unreachable here
        assert generate_column_psat([F(0), F(0)], gammas, syms, ["y1"],
                                    strict=True) is None


class TestCoherence:
    def test_gene_book_matches_worked_stakes(self):
        report = check_coherence(gene_instance())
        assert not report.coherent
        assert report.book_verified
        stakes = [s for _, s in report.dutch_book]
        assert dutch_book_holds(gene_instance(), stakes)

    def test_worked_column_sums_are_coherent(self):
        syms = SymbolTable()
        inst = PsatInstance([
            PsatAssignment(parse_formula("x1 | x2", syms), "=", F(4, 5)),
            PsatAssignment(parse_formula("x1 | !x2", syms), "=", F(3, 10)),
            PsatAssignment(parse_formula("x1", syms), "=", F(1, 10)),
        ], syms)
        report = check_coherence(inst)
        assert report.coherent
        ok, reason = verify_witness_psat(normalize_psat(inst), report.witness)
        assert ok, reason

    def test_contradictory_certainties(self):
        syms = SymbolTable()
        inst = PsatInstance([
            PsatAssignment(parse_formula("x", syms), "=", F(1)),
            PsatAssignment(parse_formula("!x", syms), "=", F(1)),
        ], syms)
        report = check_coherence(inst)
        assert not report.coherent
        assert report.book_verified
        # naive stakes (1,1) fail the book test, yet some integer book in
        # [-2,2]^2 exists; assert existence, not a specific vector
        assert not dutch_book_holds(inst, [1, 1])
        books = [s for s in itertools.product(range(-2, 3), repeat=2)
                 if dutch_book_holds(inst, list(s))]
        assert books
        assert dutch_book_holds(inst, [s for _, s in report.dutch_book])

    def test_requires_equalities(self):
        with pytest.raises(ValueError):
            check_coherence(ant_instance())

    def test_kolmogorov_properties_on_witness(self):
        report = check_coherence(gene_instance().__class__(
            [PsatAssignment(parse_formula("x1 | x2"), "=", F(1, 2))],
            SymbolTable(["x1", "x2"])))
        witness = report.witness
        # K1 on random formulas
        for text in ["x1", "x2", "x1 & x2", "x1 | !x2"]:
            assert 0 <= probability_of(witness, parse_formula(text)) <= 1
        # K2: tautology has probability 1
        assert probability_of(witness, parse_formula("x1 | !x1")) == 1
        # K3: finite additivity for incompatible formulas
        a = parse_formula("x1 & x2")
        b = parse_formula("!x1 & x2")
        assert probability_of(witness, parse_formula("(x1 & x2) | (!x1 & x2)")) == \
            probability_of(witness, a) + probability_of(witness, b)


class TestVerifyWitness:
    def test_paper_distribution_accepted(self):
        nf = normalize_psat(ant_instance())
        ok, reason = verify_witness_psat(nf, paper_distribution_witness())
        assert ok, reason

    def test_broken_weight_sum_rejected(self):
        nf = normalize_psat(ant_instance())
        bad = paper_distribution_witness()
        bad.entries[0] = (bad.entries[0][0], bad.entries[0][1] + F(1, 100))
        ok, reason = verify_witness_psat(nf, bad)
        assert not ok and "sum" in reason

    def test_gamma_violation_rejected(self):
        nf = normalize_psat(ant_instance())
        bad = paper_distribution_witness()
        v = dict(bad.entries[0][0])
        v["y1"], v["x1"], v["x2"] = 1, 0, 0  # y1 -> (x1 | x2) broken
        bad.entries[0] = (v, bad.entries[0][1])
        ok, reason = verify_witness_psat(nf, bad)
        assert not ok and "certainty" in reason
