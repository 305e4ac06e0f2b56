"""Counting-quantifier satisfiability over unary predicates with
extended-light binary constraints.

Pipeline: normal form (fresh predicates for non-atomic counting bodies),
negative-inclusion closure of the EL constraints, joint satisfiability of the
universal formulas with the closure (SAT over the propositional core, with
existential basics aliased by fresh unary predicates so every inclusion
becomes propositional), relaxed integer system solved by column generation,
branch-and-bound on fractional counts, and finite-model materialization with
skolemizing update propagation. Model checking of the built model against the
original sentences is the end-to-end oracle used by the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .bnb import search
from .errors import BudgetExceeded
from .formulas import (And, Formula, Iff, Implies, Not, SymbolTable, Var,
                       cnf_of_set, eval_classical, symbols_of)
from .lp import LpProblem, merge_column, solve_lp
from .sat import LinearCut, SatStats, conjoin, encode_linear_geq, solve_cnf

ZERO = Fraction(0)
ONE = Fraction(1)

# --- EL constraint vocabulary -------------------------------------------------
# Basic concepts: ("pred", name) | ("exists", role, inverse: bool)
# Concept literals: (negated: bool, basic); a concept is a tuple of literals.


def pred(name: str):
    return ("pred", name)


def exists(role: str, inverse: bool = False):
    return ("exists", role, inverse)


@dataclass(frozen=True)
class Inclusion:
    lhs: tuple
    rhs: tuple  # tuple of (negated, basic) literals


@dataclass(frozen=True)
class Functionality:
    role: str
    inverse: bool = False


@dataclass(frozen=True)
class Fact:
    predicate: str
    constant: str


@dataclass(frozen=True)
class RoleFact:
    role: str
    source: str
    target: str


@dataclass(frozen=True)
class CountingSentence:
    relation: str  # "<=" | ">="
    bound: int
    body: Formula

    def __post_init__(self):
        if self.relation not in ("<=", ">="):
            raise ValueError(f"bad counting relation {self.relation!r}")
        if self.bound < 0:
            raise ValueError("counting bound must be non-negative")


@dataclass
class RawCquel:
    counting: list[CountingSentence]
    universals: list[Formula]
    constraints: list


@dataclass
class NormalFormCquel:
    q: list[CountingSentence]  # bodies are single Var nodes
    u: list[Formula]
    e: list


@dataclass
class Model:
    domain: list[str]
    preds: dict[str, set[str]]
    roles: dict[str, set[tuple[str, str]]]
    constants: dict[str, str]


@dataclass
class CountWitness:
    entries: list[tuple[dict[str, int], int]]  # (valuation over unary preds, count)
    model: Model | None = None


@dataclass
class CquelStats:
    nodes: int = 0
    iterations: int = 0
    columns_generated: int = 0
    sat_calls: int = 0
    lp_pivots: int = 0


def predicates_of(nf_or_raw) -> list[str]:
    """All unary predicate names, in deterministic first-use order."""
    table = SymbolTable()
    for s in nf_or_raw.q if hasattr(nf_or_raw, "q") else nf_or_raw.counting:
        for name in sorted(symbols_of(s.body)):
            table.intern(name)
    universals = nf_or_raw.u if hasattr(nf_or_raw, "u") else nf_or_raw.universals
    for f in universals:
        for name in sorted(symbols_of(f)):
            table.intern(name)
    constraints = nf_or_raw.e if hasattr(nf_or_raw, "e") else nf_or_raw.constraints
    for c in constraints:
        if isinstance(c, Inclusion):
            for basic in [c.lhs] + [b for _, b in c.rhs]:
                if basic[0] == "pred":
                    table.intern(basic[1])
        elif isinstance(c, Fact):
            table.intern(c.predicate)
    return list(table.names)


def normalize_cquel(raw: RawCquel) -> NormalFormCquel:
    """Fresh predicates replace non-atomic counting bodies (Q over atoms only)."""
    existing = set(predicates_of(raw))
    q: list[CountingSentence] = []
    u = list(raw.universals)
    counter = 0

    def fresh() -> str:
        nonlocal counter
        while True:
            counter += 1
            name = f"q{counter}"
            if name not in existing:
                existing.add(name)
                return name

    used: set[str] = set()
    for sentence in raw.counting:
        # counting predicates must be pairwise distinct: matrix row i and the
        # i-th bit of every column belong to one predicate
        if isinstance(sentence.body, Var) and sentence.body.name not in used:
            used.add(sentence.body.name)
            q.append(sentence)
            continue
        p_new = fresh()
        used.add(p_new)
        u.append(Iff(Var(p_new), sentence.body))
        q.append(CountingSentence(sentence.relation, sentence.bound, Var(p_new)))
    return NormalFormCquel(q, u, list(raw.constraints))


# --- NI closure ----------------------------------------------------------------


@dataclass
class ElClosure:
    pis: set  # (lhs basic, rhs basic) positive inclusions, single literal
    nis: set  # (lhs basic, rhs basic) meaning lhs -> not rhs
    functs: set  # (role, inverse)
    pred_facts: set
    role_facts: set
    inconsistent: bool = False
    reason: str | None = None


def _split_constraints(constraints):
    pis, nis = set(), set()
    functs, pred_facts, role_facts = set(), set(), set()
    for c in constraints:
        if isinstance(c, Inclusion):
            for negated, basic in c.rhs:
                (nis if negated else pis).add((c.lhs, basic))
        elif isinstance(c, Functionality):
            functs.add((c.role, c.inverse))
        elif isinstance(c, Fact):
            pred_facts.add((c.predicate, c.constant))
        elif isinstance(c, RoleFact):
            role_facts.add((c.role, c.source, c.target))
        else:
            raise TypeError(f"not an EL constraint: {c!r}")
    return pis, nis, functs, pred_facts, role_facts


def _member(basic, constant, pred_facts, role_facts, alias_of=None) -> bool:
    """Basic-concept membership of a constant, from asserted facts only."""
    if alias_of and basic in alias_of:
        basic = alias_of[basic]
    kind = basic[0]
    if kind == "pred":
        return (basic[1], constant) in pred_facts
    _, role, inverse = basic
    for r, s, t in role_facts:
        if r != role:
            continue
        if (t if inverse else s) == constant:
            return True
    return False


def _saturate(pis, nis, universe=None, max_rounds=None):
    """Smallest NI-closed superset under symmetry, PI-composition, the
    empty-role flip, and emptiness propagation (an empty basic is disjoint
    from every basic in the universe); returns the closed NI set."""
    if universe is None:
        universe = set()
        for a, b in pis | nis:
            universe.update((a, b))
    universe = set(universe)
    for basic in list(universe):
        if basic[0] == "exists":
            universe.add(("exists", basic[1], not basic[2]))
    closed = set(nis)
    changed = True
    rounds = 0
    bound = (len(universe) * len(universe) + len(nis) + 2) if max_rounds is None else max_rounds
    while changed:
        changed = False
        rounds += 1
        if rounds > bound:
            raise AssertionError("NI closure failed to stabilize polynomially")
        for a, b in list(closed):
            if (b, a) not in closed:
                closed.add((b, a))
                changed = True
        for a, b in pis:
            for c, d in list(closed):
                if c == b and (a, d) not in closed:
                    closed.add((a, d))
                    changed = True
        for a, b in list(closed):
            if a == b:
                if a[0] == "exists":
                    flipped = ("exists", a[1], not a[2])
                    if (flipped, flipped) not in closed:
                        closed.add((flipped, flipped))
                        changed = True
                for other in universe:
                    if (a, other) not in closed:
                        closed.add((a, other))
                        changed = True
    return closed


def ni_closure(constraints) -> ElClosure:
    """Negative-inclusion closure plus data/functionality clash detection."""
    pis, nis, functs, pred_facts, role_facts = _split_constraints(constraints)
    basics = set()
    for a, b in pis | nis:
        basics.update((a, b))
    # quadratic NI universe bounds the saturation rounds
    closed = _saturate(pis, nis, max_rounds=len(basics) * len(basics) + len(nis) + 2)
    closure = ElClosure(pis, closed, functs, pred_facts, role_facts)

    constants = {c for _, c in pred_facts} | {s for _, s, _ in role_facts} | {t for _, _, t in role_facts}
    for a, b in closed:
        for constant in constants:
            if _member(a, constant, pred_facts, role_facts) and \
               _member(b, constant, pred_facts, role_facts):
                closure.inconsistent = True
                closure.reason = f"constant {constant} violates a negative inclusion"
                return closure
    for role, inverse in functs:
        seen = {}
        for r, s, t in role_facts:
            if r != role:
                continue
            key, other = (t, s) if inverse else (s, t)
            if key in seen and seen[key] != other:
                closure.inconsistent = True
                closure.reason = f"functionality of {role}{'-' if inverse else ''} violated"
                return closure
            seen[key] = other
    return closure


# --- joint satisfiability (Algorithm JointSAT) ----------------------------------


class _ElContext:
    """E with existential basics aliased to fresh unary predicates.

    Every inclusion becomes propositional after rewriting; the defining
    equivalences alias <-> basic stay in the constraint set for the closure,
    the data checks and model building.
    """

    def __init__(self, constraints, pred_names):
        self.constraints = list(constraints)
        pis, nis, self.functs, self.pred_facts, self.role_facts = _split_constraints(constraints)
        self.orig_pis, self.orig_nis = pis, nis

        existentials = sorted({b for pair in (pis | nis) for b in pair if b[0] == "exists"})
        self.alias_name = {}
        self.alias_of = {}
        taken = set(pred_names)
        for basic in existentials:
            _, role, inverse = basic
            name = f"_ex_{'i_' if inverse else ''}{role}"
            while name in taken:
                name += "_"
            taken.add(name)
            self.alias_name[basic] = name
            self.alias_of[("pred", name)] = basic

        def rewrite(basic):
            if basic[0] == "exists":
                return ("pred", self.alias_name[basic])
            return basic

        self.rw_pis = {(rewrite(a), rewrite(b)) for a, b in pis}
        self.rw_nis = {(rewrite(a), rewrite(b)) for a, b in nis}
        # equivalences: alias <-> existential
        eq_pis = set()
        for basic, name in self.alias_name.items():
            eq_pis.add((("pred", name), basic))
            eq_pis.add((basic, ("pred", name)))
        self.all_pis = self.rw_pis | eq_pis
        self.closed_nis = _saturate(
            self.all_pis, self.rw_nis,
            max_rounds=(2 * len(existentials) + len(pred_names) + 4) ** 2 + len(self.rw_nis) + 2)

        self.inconsistent = False
        self.reason = None
        constants = ({c for _, c in self.pred_facts} |
                     {s for _, s, _ in self.role_facts} | {t for _, _, t in self.role_facts})
        self.constants = sorted(constants)
        for a, b in self.closed_nis:
            for constant in self.constants:
                if _member(a, constant, self.pred_facts, self.role_facts, self.alias_of) and \
                   _member(b, constant, self.pred_facts, self.role_facts, self.alias_of):
                    self.inconsistent = True
                    self.reason = f"constant {constant} violates a negative inclusion"
                    return
        for role, inverse in self.functs:
            seen = {}
            for r, s, t in self.role_facts:
                if r != role:
                    continue
                key, other = (t, s) if inverse else (s, t)
                if key in seen and seen[key] != other:
                    self.inconsistent = True
                    self.reason = f"functionality of {role}{'-' if inverse else ''} violated"
                    return
                seen[key] = other

    def propositional_ias(self) -> list[Formula]:
        """Unary-only inclusions: rewritten positives plus closed negatives."""
        out = []
        for a, b in sorted(self.rw_pis):
            out.append(Implies(Var(a[1]), Var(b[1])))
        for a, b in sorted(self.closed_nis):
            if a[0] == "pred" and b[0] == "pred":
                out.append(Implies(Var(a[1]), Not(Var(b[1]))))
        return out

    def constant_pins(self, constant) -> dict[str, int]:
        pins = {}
        for p, c in self.pred_facts:
            if c == constant:
                pins[p] = 1
        for basic, name in self.alias_name.items():
            if _member(basic, constant, self.pred_facts, self.role_facts):
                pins[name] = 1
        return pins


def _joint_sat(universals, context: _ElContext, pred_names, pins=None,
               cut=None, q_pred_names=None, conflict_budget=None,
               sat_stats: SatStats | None = None):
    """Susceptible-term search: SAT over U + propositional closure core.

    `cut` is an optional (weights, bound) integer inequality over
    `q_pred_names`. Returns a valuation over pred_names plus aliases, or None.
    """
    if context.inconsistent:
        return None
    table = SymbolTable(pred_names)
    for name in sorted(context.alias_of):
        table.intern(name[1])
    formulas = list(universals) + context.propositional_ias()
    cnf = cnf_of_set(formulas, table)

    # each constant's asserted type must remain completable under U'
    for constant in context.constants:
        assumptions = []
        for name, bit in context.constant_pins(constant).items():
            var = table.index(name) + 1
            assumptions.append(var if bit else -var)
        res = solve_cnf(cnf, assumptions=assumptions,
                        conflict_budget=conflict_budget, stats=sat_stats)
        if res.status != "sat":
            return None

    if cut is not None:
        weights, bound = cut
        cut_vars = [table.index(p) + 1 for p in q_pred_names]
        extra = encode_linear_geq(LinearCut([Fraction(w) for w in weights], Fraction(bound)),
                                  cut_vars, num_vars=cnf.num_vars)
        cnf = conjoin(cnf, extra)

    assumptions = []
    for name, bit in (pins or {}).items():
        var = table.index(name) + 1
        assumptions.append(var if bit else -var)
    res = solve_cnf(cnf, assumptions=assumptions,
                    conflict_budget=conflict_budget, stats=sat_stats)
    if res.status != "sat":
        return None
    return {name: res.model[table.index(name) + 1] for name in table.names}


def joint_sat(universals, constraints, pred_names=None, conflict_budget=None,
              sat_stats: SatStats | None = None):
    """Valuation over all unary predicates consistent with U and E, or None."""
    if pred_names is None:
        pred_names = predicates_of(RawCquel([], list(universals), list(constraints)))
    context = _ElContext(constraints, pred_names)
    valuation = _joint_sat(universals, context, pred_names,
                           conflict_budget=conflict_budget, sat_stats=sat_stats)
    if valuation is None:
        return None
    return {name: valuation[name] for name in pred_names}


# --- relaxed solve via column generation -----------------------------------------


def _scale_dual(z):
    denom_lcm = 1
    for v in z:
        f = Fraction(v)
        denom_lcm = denom_lcm * f.denominator // gcd(denom_lcm, f.denominator)
    return [int(Fraction(v) * denom_lcm) for v in z]


def cquel_generate_column(z, universals, constraints_or_context, pred_names,
                          q_pred_names, strict=False, conflict_budget=None,
                          sat_stats: SatStats | None = None):
    """A susceptible 0-1 column y over the counting predicates with z'y >= 0
    (strictly positive when strict=True), or None.

    Encodes the dual inequality propositionally and runs the joint
    satisfiability check with that extra universal constraint.
    """
    context = constraints_or_context
    if not isinstance(context, _ElContext):
        context = _ElContext(context, pred_names)
    zi = _scale_dual(z)
    bound = 1 if strict else 0
    valuation = _joint_sat(universals, context, pred_names,
                           cut=(zi, bound), q_pred_names=q_pred_names,
                           conflict_budget=conflict_budget, sat_stats=sat_stats)
    if valuation is None:
        return None
    bits = [valuation[p] for p in q_pred_names]
    return bits, {name: valuation[name] for name in pred_names}


def solve_relaxed_via_colgen(q, universals, context: _ElContext, pred_names,
                             iteration_budget=None, conflict_budget=None,
                             stats: CquelStats | None = None):
    """Cost-0 relaxed solution of the counting system, or None.

    Starts from identity columns costed by (U u E)-satisfiability of the
    corresponding elementary terms and generates susceptible columns until
    the objective reaches zero. Returns (columns, x) where each column is
    (bits, valuation or None).
    """
    stats = stats if stats is not None else CquelStats()
    sat_stats = SatStats()
    q_pred_names = [s.body.name for s in q]
    if len(set(q_pred_names)) != len(q_pred_names):
        raise ValueError("counting predicates must be pairwise distinct (normalize first)")
    k = len(q)
    relations = [s.relation for s in q]
    rhs = [Fraction(s.bound) for s in q]
    problem = LpProblem(relations, rhs)
    columns: list[tuple[list[int], dict | None]] = []

    for j in range(k):
        bits = [1 if t == j else 0 for t in range(k)]
        pins = {p: b for p, b in zip(q_pred_names, bits)}
        valuation = _joint_sat(universals, context, pred_names, pins=pins,
                               conflict_budget=conflict_budget, sat_stats=sat_stats)
        cost = ZERO if valuation is not None else ONE
        problem.add_column([Fraction(b) for b in bits], cost, ("init", j))
        columns.append((bits, valuation))

    sol = solve_lp(problem, warm_basis=[("col", j) for j in range(k)])
    assert sol.status == "optimal"
    stats.lp_pivots += sol.pivots

    iterations = 0
    while sol.objective > 0:
        if iteration_budget is not None and iterations >= iteration_budget:
            raise BudgetExceeded("cquel column-generation iteration budget exceeded")
        iterations += 1
        stats.iterations += 1
        generated = cquel_generate_column(sol.dual, universals, context, pred_names,
                                          q_pred_names, strict=True,
                                          conflict_budget=conflict_budget,
                                          sat_stats=sat_stats)
        if generated is None:
            stats.sat_calls += sat_stats.calls
            return None
        bits, valuation = generated
        stats.columns_generated += 1
        columns.append((bits, valuation))
        previous = sol.objective
        sol = merge_column(sol, [Fraction(b) for b in bits], ZERO,
                           ident=("gen", len(columns)))
        assert sol.status == "optimal"
        stats.lp_pivots += sol.pivots
        if sol.objective > previous:
            raise AssertionError("objective increased across a merge")

    stats.sat_calls += sat_stats.calls
    return columns, list(sol.primal)


# --- branch and bound -------------------------------------------------------------


def size_bound(k: int) -> int:
    """Ceil((5/2)(k log2 k + 1)); prunes branch nodes and caps witness support."""
    if k <= 0:
        return 1
    return math.ceil(2.5 * (k * math.log2(k) + 1))


@dataclass
class _CquelNode:
    q: list
    u: list
    depth: int = 0
    parent_int_count: int = 0


def _term_formula(bits, q_pred_names) -> Formula:
    literals = []
    for bit, name in zip(bits, q_pred_names):
        literals.append(Var(name) if bit else Not(Var(name)))
    f = literals[0]
    for lit in literals[1:]:
        f = And(f, lit)
    return f


def cquel_solve(nf: NormalFormCquel, node_budget=None, iteration_budget=None,
                conflict_budget=None, stats: CquelStats | None = None,
                build_model_too: bool = False, model_budget: int = 10000):
    """Branch-and-bound over relaxed column-generation solves.

    Returns a CountWitness or None; raises BudgetExceeded distinctly when the
    node budget runs out.
    """
    stats = stats if stats is not None else CquelStats()
    pred_names = predicates_of(nf)
    context = _ElContext(nf.e, pred_names)
    k_root = len(nf.q)
    bound = size_bound(k_root)

    if k_root == 0:
        valuation = _joint_sat(nf.u, context, pred_names)
        if valuation is None:
            return None
        entries = [({name: valuation[name] for name in pred_names}, 1)]
        witness = CountWitness(entries)
        if build_model_too:
            witness.model = build_model(witness, nf.e, pred_names, nf.u,
                                        context=context, element_budget=model_budget)
        return witness

    fresh_counter = [0]
    taken = set(pred_names)

    def fresh_pred() -> str:
        while True:
            fresh_counter[0] += 1
            name = f"_b{fresh_counter[0]}"
            if name not in taken:
                taken.add(name)
                return name

    def expand(node: _CquelNode):
        stats.nodes += 1
        node_preds = pred_names + [n for n in node_pred_names if n not in pred_names]
        result = solve_relaxed_via_colgen(node.q, node.u, context, node_preds,
                                          iteration_budget=iteration_budget,
                                          conflict_budget=conflict_budget, stats=stats)
        if result is None:
            return "closed", None
        columns, x = result
        fractional = [(j, v) for j, v in enumerate(x) if v.denominator != 1]
        if not fractional:
            entries = []
            for (bits, valuation), v in zip(columns, x):
                if v > 0:
                    assert valuation is not None
                    entries.append(({name: valuation[name] for name in pred_names}, int(v)))
            return "sat", entries

        def dist(item):
            _, v = item
            frac = v - math.floor(v)
            return min(frac, 1 - frac)

        j_star, v_star = min(fractional, key=lambda it: (dist(it), it[0]))
        bits = columns[j_star][0]
        q_pred_names = [s.body.name for s in node.q]
        p_new = fresh_pred()
        node_pred_names.append(p_new)
        equiv = Iff(Var(p_new), _term_formula(bits, q_pred_names))
        u_child = node.u + [equiv]
        lo = math.floor(v_star)
        int_count = len(x) - len(fractional)
        children = [
            _CquelNode(node.q + [CountingSentence("<=", lo, Var(p_new))],
                       u_child, node.depth + 1, int_count),
            _CquelNode(node.q + [CountingSentence(">=", lo + 1, Var(p_new))],
                       u_child, node.depth + 1, int_count),
        ]
        return "branch", children

    node_pred_names: list[str] = []
    status, entries, nodes = search(
        _CquelNode(list(nf.q), list(nf.u)), expand,
        max_nodes=node_budget, admit=lambda child: len(child.q) <= bound)
    if status == "budget":
        raise BudgetExceeded("cquel branch-and-bound node budget exceeded")
    if status != "feasible":
        return None
    if len([e for e in entries if e[1] > 0]) > bound:
        raise AssertionError("witness support exceeds the size bound")
    witness = CountWitness([(val, c) for val, c in entries if c > 0])
    if build_model_too:
        witness.model = build_model(witness, nf.e, pred_names, nf.u,
                                    context=context, element_budget=model_budget)
    return witness


# --- model construction and checking ------------------------------------------------


def build_model(witness: CountWitness, constraints, pred_names, universals=(),
                context: _ElContext | None = None, element_budget: int = 10000) -> Model:
    """Materialize a finite model: witness counts populate elementary terms,
    constants are interpreted, and update propagation adds skolem successors
    for existential inclusions (reusing witnesses, respecting functionality).
    """
    if context is None:
        context = _ElContext(constraints, pred_names)
    if context.inconsistent:
        raise ValueError("cannot build a model for inconsistent constraints")

    pis, _, functs, pred_facts, role_facts = _split_constraints(constraints)
    roles = sorted({r for r, _, _ in role_facts} |
                   {b[1] for pair in (context.orig_pis | context.orig_nis)
                    for b in pair if b[0] == "exists"})
    model = Model([], {p: set() for p in pred_names}, {r: set() for r in roles}, {})

    def new_element(tag) -> str:
        if len(model.domain) >= element_budget:
            raise BudgetExceeded("model construction element budget exceeded")
        name = f"{tag}{len(model.domain)}"
        model.domain.append(name)
        return name

    counter = 0
    for valuation, count in witness.entries:
        for _ in range(count):
            d = new_element("d")
            counter += 1
            for p in pred_names:
                if valuation.get(p):
                    model.preds[p].add(d)

    for constant in context.constants:
        d = new_element("c_")
        model.constants[constant] = d
    for p, c in pred_facts:
        model.preds.setdefault(p, set()).add(model.constants[c])
    for r, s, t in role_facts:
        model.roles.setdefault(r, set()).add((model.constants[s], model.constants[t]))

    # constants additionally take a completing type so U holds on them
    for constant in context.constants:
        valuation = _joint_sat(universals, context, pred_names,
                               pins=context.constant_pins(constant))
        if valuation is None:
            raise ValueError("constants admit no completing type")
        d = model.constants[constant]
        for p in pred_names:
            if valuation.get(p):
                model.preds[p].add(d)

    def holds_basic(basic, d) -> bool:
        if basic[0] == "pred":
            return d in model.preds.get(basic[1], ())
        _, role, inverse = basic
        pairs = model.roles.get(role, ())
        return any((t == d) if inverse else (s == d) for s, t in pairs)

    queue = list(model.domain)
    while queue:
        d = queue.pop(0)
        for lhs, rhs in sorted(pis):
            if not holds_basic(lhs, d):
                continue
            if rhs[0] == "pred":
                if d not in model.preds.setdefault(rhs[1], set()):
                    model.preds[rhs[1]].add(d)
                    queue.append(d)
            else:
                _, role, inverse = rhs
                if holds_basic(rhs, d):
                    continue
                fresh = new_element("s")
                edge = (fresh, d) if inverse else (d, fresh)
                model.roles.setdefault(role, set()).add(edge)
                queue.append(d)
                queue.append(fresh)
    return model


def eval_body(body: Formula, model: Model, d) -> int:
    """One-variable formula over unary predicates, evaluated at element d."""
    return eval_classical(body, {p: (1 if d in members else 0)
                                 for p, members in model.preds.items()})


def model_check(model: Model, counting, universals, constraints) -> bool:
    """Direct first-order evaluation of every sentence on the model."""
    valuations = {d: {p: (1 if d in members else 0) for p, members in model.preds.items()}
                  for d in model.domain}
    for s in counting:
        n = sum(1 for d in model.domain if eval_classical(s.body, valuations[d]))
        if s.relation == "<=" and n > s.bound:
            return False
        if s.relation == ">=" and n < s.bound:
            return False
    for f in universals:
        if any(eval_classical(f, valuations[d]) != 1 for d in model.domain):
            return False

    def holds_basic(basic, d) -> bool:
        if basic[0] == "pred":
            return d in model.preds.get(basic[1], ())
        _, role, inverse = basic
        pairs = model.roles.get(role, ())
        return any((t == d) if inverse else (s == d) for s, t in pairs)

    for c in constraints:
        if isinstance(c, Inclusion):
            for d in model.domain:
                if holds_basic(c.lhs, d):
                    for negated, basic in c.rhs:
                        if holds_basic(basic, d) == negated:
                            return False
        elif isinstance(c, Functionality):
            seen = {}
            for s, t in model.roles.get(c.role, ()):
                key, other = (t, s) if c.inverse else (s, t)
                if key in seen and seen[key] != other:
                    return False
                seen[key] = other
        elif isinstance(c, Fact):
            if model.constants[c.constant] not in model.preds.get(c.predicate, ()):
                return False
        elif isinstance(c, RoleFact):
            if (model.constants[c.source], model.constants[c.target]) not in model.roles.get(c.role, ()):
                return False
    return True
