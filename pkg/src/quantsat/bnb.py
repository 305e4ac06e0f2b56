"""Shared exact branch-and-bound driver over LP relaxations.

Feasibility-oriented: the search stops at the first admitted node whose
relaxation is integral on the designated variables (optionally with objective
strictly below a threshold — used to search for strictly improving columns).
Node selection is best-parent first (most integer components in the parent's
relaxed solution), FIFO on ties; branching picks the fractional variable
closest to its floor or ceiling, lowest index on ties. Single-worker and
fully deterministic.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .lp import LpProblem, LpSolution, solve_lp


@dataclass
class BnbPolicy:
    max_nodes: Optional[int] = None
    admit: Optional[Callable] = None  # callable(node) -> bool; failing children are not inserted
    max_pivots_per_node: Optional[int] = None


@dataclass
class BnbOutcome:
    status: str  # "feasible" | "no" | "budget"
    solution: LpSolution | None = None
    nodes: int = 0


def search(root, expand, *, max_nodes=None, admit=None):
    """Generic problem-set loop shared by the integer-count and MILP solvers.

    `expand(node)` returns ("sat", payload), ("closed", None) or
    ("branch", [children]); children carry their parent's integer-component
    count via `parent_int_count` for the removal heuristic. Returns
    (status, payload, processed) with status in feasible/no/budget.
    """
    heap = []
    seq = 0
    heapq.heappush(heap, (0, seq, root))
    processed = 0
    while heap:
        _, _, node = heapq.heappop(heap)
        processed += 1
        if max_nodes is not None and processed > max_nodes:
            return "budget", None, processed
        verdict, payload = expand(node)
        if verdict == "sat":
            return "feasible", payload, processed
        if verdict == "closed":
            continue
        for child in payload:
            if admit is not None and not admit(child):
                continue
            seq += 1
            pref = -getattr(child, "parent_int_count", 0)
            heapq.heappush(heap, (pref, seq, child))
    return "no", None, processed


@dataclass
class _LpNode:
    bounds: list  # (var index, "<="|">=", int bound)
    depth: int = 0
    parent_int_count: int = 0


def _with_bounds(root: LpProblem, bounds) -> LpProblem:
    relations = list(root.relations)
    rhs = list(root.rhs)
    extra = []
    for var, rel, val in bounds:
        relations.append(rel)
        rhs.append(Fraction(val))
        extra.append(var)
    problem = LpProblem(relations, rhs)
    for j, col in enumerate(root.columns):
        vec = list(col) + [Fraction(1 if j == v else 0) for v in extra]
        problem.add_column(vec, root.costs[j], root.column_ids[j])
    return problem


def bnb_feasible(root: LpProblem, integral_vars, policy: BnbPolicy | None = None,
                 objective_below: Fraction | None = None) -> BnbOutcome:
    """First solution integral on `integral_vars`, or proof of none.

    With `objective_below` set, only solutions with objective strictly below
    the threshold count, and nodes whose relaxation cannot beat it are pruned.
    Budget exhaustion is a distinct "budget" outcome, not a "no".
    """
    policy = policy or BnbPolicy()
    integral_vars = sorted(set(integral_vars))

    def expand(node: _LpNode):
        problem = _with_bounds(root, node.bounds)
        sol = solve_lp(problem, max_pivots=policy.max_pivots_per_node)
        if sol.status == "infeasible":
            return "closed", None
        if sol.status == "unbounded":
            raise ValueError("bnb_feasible requires a bounded relaxation")
        if objective_below is not None and sol.objective >= objective_below:
            return "closed", None
        fractional = [(v, sol.primal[v]) for v in integral_vars
                      if sol.primal[v].denominator != 1]
        if not fractional:
            return "sat", sol
        # branch on the value closest to its floor or ceiling; tie on index
        def dist(item):
            _, val = item
            frac = val - math.floor(val)
            return min(frac, 1 - frac)
        var, val = min(fractional, key=lambda it: (dist(it), it[0]))
        lo = math.floor(val)
        int_count = len(integral_vars) - len(fractional)
        children = [
            _LpNode(node.bounds + [(var, "<=", lo)], node.depth + 1, int_count),
            _LpNode(node.bounds + [(var, ">=", lo + 1)], node.depth + 1, int_count),
        ]
        return "branch", children

    status, payload, nodes = search(_LpNode([]), expand,
                                    max_nodes=policy.max_nodes, admit=policy.admit)
    return BnbOutcome(status if status != "feasible" else "feasible",
                      payload if status == "feasible" else None, nodes)
