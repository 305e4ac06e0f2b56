"""Exact solvers for three quantitative satisfiability problems:
classical probabilistic satisfiability, counting quantifiers over unary
predicates with extended-light binary constraints, and Lukasiewicz
infinitely-valued probabilistic satisfiability — all by exact-rational
linear programming with lazy column generation, plus witness verification,
coherence reporting and desk-scale brute-force oracles.
"""

from .formulas import (CnfFormula, Formula, SymbolTable, eval_classical,
                       parse_formula, to_cnf)
from .luka import LFormula, eval_luka, luka_sat, parse_luka
from .psat import (NormalFormPsat, ProbabilityWitness, PsatAssignment,
                   PsatInstance, check_coherence, normalize_psat, psat_solve,
                   verify_witness_psat)
from .lipsat import (ConvexWitness, LipAssignment, NormalFormLip,
                     check_l_coherence, lipsat_solve, normalize_lip,
                     verify_witness_lip)
from .cquel import (CountWitness, CountingSentence, NormalFormCquel, RawCquel,
                    build_model, cquel_solve, joint_sat, model_check,
                    ni_closure, normalize_cquel)
from .lp import LpProblem, LpSolution, farkas_certificate, merge_column, solve_lp
from .bnb import BnbOutcome, BnbPolicy, bnb_feasible
from .sat import LinearCut, SatResult, encode_linear_geq, generate_valuation_under_cut, solve_cnf

__all__ = [name for name in dir() if not name.startswith("_")]
