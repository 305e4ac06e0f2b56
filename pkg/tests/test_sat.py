import itertools
import random
from fractions import Fraction as F

import pytest

from quantsat.errors import BudgetExceeded
from quantsat.formulas import CnfFormula, SymbolTable, cnf_of_set, parse_formula
from quantsat.sat import (LinearCut, encode_linear_geq, generate_valuation_under_cut,
                          solve_cnf)


def enumerate_models(cnf: CnfFormula):
    for bits in itertools.product([0, 1], repeat=cnf.num_vars):
        assign = dict(enumerate(bits, start=1))
        if all(any((lit > 0) == bool(assign[abs(lit)]) for lit in clause)
               for clause in cnf.clauses):
            yield assign


def projected(cnf: CnfFormula, vars):
    """Projection onto `vars` by probing each assignment under assumptions
    (the auxiliary space is functionally determined, so this equals the
    brute-force projection while staying tractable)."""
    out = set()
    for bits in itertools.product([0, 1], repeat=len(vars)):
        assumptions = [v if b else -v for v, b in zip(vars, bits)]
        if solve_cnf(cnf, assumptions=assumptions).status == "sat":
            out.add(bits)
    return out


class TestSolveCnf:
    def test_contradiction(self):
        assert solve_cnf(CnfFormula([[1], [-1]], 1)).status == "unsat"

    def test_forced_model(self):
        res = solve_cnf(CnfFormula([[1, 2], [-1]], 2))
        assert res.status == "sat"
        assert res.model == {1: 0, 2: 1}

    def test_example_gamma_clauses_sat(self):
        # {x1|x2|!y1, !x1|y2, x2|y2, !x1|y3}
        table = SymbolTable(["x1", "x2", "y1", "y2", "y3"])
        cnf = cnf_of_set([parse_formula(t) for t in
                          ["x1 | x2 | !y1", "!x1 | y2", "x2 | y2", "!x1 | y3"]], table)
        assert solve_cnf(cnf).status == "sat"

    def test_assumptions(self):
        cnf = CnfFormula([[1, 2]], 2)
        assert solve_cnf(cnf, assumptions=[-1]).model[2] == 1
        assert solve_cnf(cnf, assumptions=[-1, -2]).status == "unsat"

    def test_empty_clause(self):
        assert solve_cnf(CnfFormula([[]], 0)).status == "unsat"

    def test_budget_distinct_from_unsat(self):
        # a hard-ish pigeonhole keeps the search busy long enough to trip a tiny budget
        clauses = []
        holes, pigeons = 4, 5
        def var(p, h):
            return p * holes + h + 1
        for p in range(pigeons):
            clauses.append([var(p, h) for h in range(holes)])
        for h in range(holes):
            for p1 in range(pigeons):
                for p2 in range(p1 + 1, pigeons):
                    clauses.append([-var(p1, h), -var(p2, h)])
        cnf = CnfFormula(clauses, pigeons * holes)
        with pytest.raises(BudgetExceeded):
            solve_cnf(cnf, conflict_budget=3)
        assert solve_cnf(cnf).status == "unsat"

    def test_deterministic(self):
        rng = random.Random(5)
        for _ in range(20):
            n = 6
            clauses = [[rng.choice([1, -1]) * rng.randint(1, n) for _ in range(3)]
                       for _ in range(10)]
            cnf = CnfFormula(clauses, n)
            first = solve_cnf(cnf)
            second = solve_cnf(cnf)
            assert first.status == second.status
            assert first.model == second.model


class TestEncodeLinearGeq:
    def test_forced_corner(self):
        cnf = encode_linear_geq(LinearCut([F(1), F(1)], F(2)), [1, 2])
        assert projected(cnf, [1, 2]) == {(1, 1)}

    def test_vacuous(self):
        cnf = encode_linear_geq(LinearCut([F(1), F(1)], F(0)), [1, 2])
        assert projected(cnf, [1, 2]) == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_rational_negative_weight(self):
        # 1/2 y1 - 1/3 y2 >= 0 scales to 3 y1 - 2 y2 >= 0: models 00, 10, 11
        cnf = encode_linear_geq(LinearCut([F(1, 2), F(-1, 3)], F(0)), [1, 2])
        assert projected(cnf, [1, 2]) == {(0, 0), (1, 0), (1, 1)}

    def test_unreachable_bound(self):
        cnf = encode_linear_geq(LinearCut([F(1), F(1)], F(3)), [1, 2])
        assert projected(cnf, [1, 2]) == set()

    def test_random_cuts_match_enumeration(self):
        rng = random.Random(11)
        for _ in range(60):
            n = rng.randint(1, 4)
            weights = [F(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(n)]
            bound = F(rng.randint(-8, 8), rng.randint(1, 4))
            vars = list(range(1, n + 1))
            cnf = encode_linear_geq(LinearCut(weights, bound), vars)
            want = {bits for bits in itertools.product([0, 1], repeat=n)
                    if sum(w * b for w, b in zip(weights, bits)) >= bound}
            assert projected(cnf, vars) == want


class TestGenerateValuationUnderCut:
    def test_unconstrained_never_fails(self):
        gamma = CnfFormula([], 3)
        cut = LinearCut([F(1), F(1), F(1)], F(0))
        v = generate_valuation_under_cut(gamma, cut, [1, 2, 3])
        assert v is not None

    def test_forced_contradiction(self):
        gamma = CnfFormula([[-1]], 1)
        cut = LinearCut([F(1)], F(1))
        assert generate_valuation_under_cut(gamma, cut, [1]) is None

    def test_soundness_and_completeness_small(self):
        rng = random.Random(23)
        for _ in range(40):
            n = rng.randint(2, 5)
            clauses = [[rng.choice([1, -1]) * rng.randint(1, n) for _ in range(2)]
                       for _ in range(rng.randint(0, 4))]
            gamma = CnfFormula(clauses, n)
            weights = [F(rng.randint(-3, 3)) for _ in range(n)]
            bound = F(rng.randint(-2, 3))
            cut = LinearCut(weights, bound)
            got = generate_valuation_under_cut(gamma, cut, list(range(1, n + 1)))
            want = None
            for m in enumerate_models(gamma):
                if sum(w * m[i + 1] for i, w in enumerate(weights)) >= bound:
                    want = m
                    break
            assert (got is None) == (want is None)
            if got is not None:
                # soundness re-checked by evaluation
                assert sum(w * got[i + 1] for i, w in enumerate(weights)) >= bound
                assert all(any((lit > 0) == bool(got.get(abs(lit), 0)) for lit in clause)
                           for clause in clauses)

    def test_dimacs_dump_flag(self, monkeypatch, capsys):
        monkeypatch.setenv("QLR_EMIT_DIMACS", "1")
        solve_cnf(CnfFormula([[1]], 1))
        err = capsys.readouterr().err
        assert "p cnf 1 1" in err
