"""Exact rational two-phase revised simplex.

Minimizes c'x subject to rowwise A x {=, <=, >=} b and x >= 0, entirely in
Fraction arithmetic: re-substitution holds exactly, coherence verdicts are
never tolerance-dependent. Bland's rule (lowest-index entering, lowest-index
tie-break on leaving) gives anti-cycling and determinism. The basis inverse is
maintained explicitly so dual vectors z = c_B B^-1 are available on demand.

Inequality rows get internal slack columns; the external relation vector is
preserved for reporting. An infeasible problem yields a Farkas certificate w
with w_i >= 0 on >= rows, w_i <= 0 on <= rows, w'A_j <= 0 for every column
and w'b > 0 — verified by multiplication before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BudgetExceeded

ZERO = Fraction(0)
ONE = Fraction(1)


class LpProblem:
    """Column-major exact LP; columns may be appended during column generation."""

    def __init__(self, relations, rhs, costs=None, columns=None, column_ids=None):
        self.relations = list(relations)
        for rel in self.relations:
            if rel not in ("=", "<=", ">="):
                raise ValueError(f"bad row relation {rel!r}")
        self.rhs = [Fraction(v) for v in rhs]
        if len(self.rhs) != len(self.relations):
            raise ValueError("rhs/relations length mismatch")
        self.columns: list[list[Fraction]] = []
        self.costs: list[Fraction] = []
        self.column_ids: list = []
        for j, col in enumerate(columns or []):
            cost = costs[j] if costs else ZERO
            ident = column_ids[j] if column_ids else None
            self.add_column(col, cost, ident)

    @property
    def num_rows(self) -> int:
        return len(self.rhs)

    @property
    def num_cols(self) -> int:
        return len(self.columns)

    def add_column(self, vec, cost=ZERO, ident=None) -> int:
        vec = [Fraction(v) for v in vec]
        if len(vec) != self.num_rows:
            raise ValueError("column/row dimension mismatch")
        self.columns.append(vec)
        self.costs.append(Fraction(cost))
        self.column_ids.append(ident)
        return len(self.columns) - 1


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    primal: list[Fraction] | None = None
    objective: Fraction | None = None
    dual: list[Fraction] | None = None
    basis: list[tuple] | None = None  # ("col", j) | ("slack", i) | ("art", i)
    farkas: list[Fraction] | None = None
    pivots: int = 0
    problem: LpProblem | None = field(default=None, repr=False)


def farkas_certificate(sol: LpSolution):
    """The infeasibility certificate, or None for feasible solves."""
    return sol.farkas if sol.status == "infeasible" else None


def verify_farkas(problem: LpProblem, w) -> bool:
    """Check the certificate by multiplication: signs, w'A <= 0, w'b > 0."""
    if len(w) != problem.num_rows:
        return False
    for wi, rel in zip(w, problem.relations):
        if rel == "<=" and wi > 0:
            return False
        if rel == ">=" and wi < 0:
            return False
    for col in problem.columns:
        if sum(wi * a for wi, a in zip(w, col)) > 0:
            return False
    return sum(wi * b for wi, b in zip(w, problem.rhs)) > 0


class _Simplex:
    """One solve session over an LpProblem snapshot; columns held sparse."""

    def __init__(self, problem: LpProblem, max_pivots=None):
        self.p = problem
        self.m = problem.num_rows
        self.max_pivots = max_pivots
        self.pivots = 0

        self.row_sign = [ONE if b >= 0 else -ONE for b in problem.rhs]
        self.b = [s * v for s, v in zip(self.row_sign, problem.rhs)]

        # internal column layout: originals, then slacks, then artificials
        self.n_orig = problem.num_cols
        self.slack_rows = [i for i, rel in enumerate(problem.relations) if rel != "="]
        self.n_slack = len(self.slack_rows)
        self.n_real = self.n_orig + self.n_slack
        self.n_total = self.n_real + self.m  # one artificial per row
        self._cache: dict[int, list] = {}

    def column(self, j):
        """Internal column j as sparse (row, value) pairs in flipped row space."""
        col = self._cache.get(j)
        if col is None:
            col = self._column(j)
            self._cache[j] = col
        return col

    def _column(self, j):
        if j < self.n_orig:
            raw = self.p.columns[j]
            return [(i, self.row_sign[i] * v) for i, v in enumerate(raw) if v != 0]
        if j < self.n_real:
            i = self.slack_rows[j - self.n_orig]
            unit = ONE if self.p.relations[i] == "<=" else -ONE
            return [(i, self.row_sign[i] * unit)]
        return [(j - self.n_real, ONE)]

    def tag(self, j) -> tuple:
        if j < self.n_orig:
            return ("col", j)
        if j < self.n_real:
            return ("slack", self.slack_rows[j - self.n_orig])
        return ("art", j - self.n_real)

    def untag(self, tag) -> int:
        kind, idx = tag
        if kind == "col":
            if idx >= self.n_orig:
                raise ValueError("warm basis references a missing column")
            return idx
        if kind == "slack":
            return self.n_orig + self.slack_rows.index(idx)
        return self.n_real + idx

    def _bump(self):
        self.pivots += 1
        if self.max_pivots is not None and self.pivots > self.max_pivots:
            raise BudgetExceeded(f"simplex pivot budget {self.max_pivots} exceeded")

    def _direction(self, col) -> list[Fraction]:
        binv = self.Binv
        return [sum(binv[i][t] * v for t, v in col) for i in range(self.m)]

    def _pivot(self, r: int, j: int, d: list[Fraction], theta: Fraction):
        piv = d[r]
        self.xB = [xi - theta * di for xi, di in zip(self.xB, d)]
        self.xB[r] = theta
        binv_r = [v / piv for v in self.Binv[r]]
        self.Binv[r] = binv_r
        for i in range(self.m):
            if i != r and d[i] != 0:
                di = d[i]
                row = self.Binv[i]
                self.Binv[i] = [row[t] - di * binv_r[t] for t in range(self.m)]
        self.basis[r] = j

    def _dual(self, costs) -> list[Fraction]:
        cB = [costs[j] for j in self.basis]
        binv = self.Binv
        return [sum(cB[i] * binv[i][t] for i in range(self.m) if cB[i] != 0)
                for t in range(self.m)]

    def _optimize(self, costs, enter_limit) -> str:
        """Bland's rule loop; returns 'optimal' or 'unbounded'."""
        while True:
            z = self._dual(costs)
            enter = -1
            for j in range(enter_limit):
                if j in self.basis_set:
                    continue
                col = self.column(j)
                rc = costs[j] - sum(z[i] * v for i, v in col)
                if rc < 0:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            d = self._direction(self.column(enter))
            r = -1
            best = None
            for i in range(self.m):
                if d[i] > 0:
                    ratio = self.xB[i] / d[i]
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[r]):
                        best = ratio
                        r = i
            if r < 0:
                return "unbounded"
            self._bump()
            self.basis_set.discard(self.basis[r])
            self.basis_set.add(enter)
            self._pivot(r, enter, d, best)

    def solve(self, warm_basis=None) -> LpSolution:
        started = warm_basis is not None and self._try_warm(warm_basis)
        if not started:
            infeasible = self._phase1()
            if infeasible is not None:
                return infeasible

        costs2 = list(self.p.costs) + [ZERO] * (self.n_slack + self.m)
        status = self._optimize(costs2, self.n_real)
        if status == "unbounded":
            return LpSolution("unbounded", pivots=self.pivots, problem=self.p)

        primal = [ZERO] * self.n_orig
        for j, x in zip(self.basis, self.xB):
            if j < self.n_orig:
                primal[j] = x
        objective = sum(c * x for c, x in zip(self.p.costs, primal) if x != 0)
        z = self._dual(costs2)
        dual = [s * zi for s, zi in zip(self.row_sign, z)]
        basis = [self.tag(j) for j in self.basis]
        return LpSolution("optimal", primal=primal, objective=objective, dual=dual,
                          basis=basis, pivots=self.pivots, problem=self.p)

    def _phase1(self) -> LpSolution | None:
        """Install a feasible basis; an LpSolution return means infeasible."""
        # slack columns serve as basis wherever their flipped entry is +1
        self.basis = []
        artificial_rows = []
        for i in range(self.m):
            rel = self.p.relations[i]
            sign = self.row_sign[i]
            if (rel == "<=" and sign > 0) or (rel == ">=" and sign < 0):
                self.basis.append(self.n_orig + self.slack_rows.index(i))
            else:
                self.basis.append(self.n_real + i)
                artificial_rows.append(i)
        self.basis_set = set(self.basis)
        self.Binv = [[ONE if i == t else ZERO for t in range(self.m)] for i in range(self.m)]
        self.xB = list(self.b)
        if not artificial_rows:
            return None
        costs1 = [ZERO] * self.n_real + [ONE] * self.m
        status = self._optimize(costs1, self.n_real)
        assert status == "optimal"  # phase 1 objective is bounded below by 0
        obj1 = sum(self.xB[i] for i in range(self.m) if self.basis[i] >= self.n_real)
        if obj1 > 0:
            y = self._dual(costs1)
            w = [s * yi for s, yi in zip(self.row_sign, y)]
            if not verify_farkas(self.p, w):
                raise AssertionError("Farkas certificate failed verification")
            return LpSolution("infeasible", farkas=w, pivots=self.pivots, problem=self.p)
        self._expel_artificials()
        return None

    def _expel_artificials(self):
        """Degenerate-pivot basic artificials out where a real column can replace them."""
        for r in range(self.m):
            if self.basis[r] < self.n_real:
                continue
            for j in range(self.n_real):
                if j in self.basis_set:
                    continue
                col = self.column(j)
                piv = sum(self.Binv[r][t] * v for t, v in col)
                if piv != 0:
                    d = self._direction(col)
                    self._bump()
                    self.basis_set.discard(self.basis[r])
                    self.basis_set.add(j)
                    self._pivot(r, j, d, self.xB[r] / d[r])
                    break
            # no real pivot available: the row is redundant and the
            # artificial stays basic at value 0

    def _try_warm(self, warm_basis) -> bool:
        """Install a caller-provided basis; False if unusable."""
        try:
            cols = [self.untag(t) for t in warm_basis]
        except ValueError:
            return False
        if len(cols) != self.m:
            return False
        B = [[ZERO] * self.m for _ in range(self.m)]
        for pos, j in enumerate(cols):
            for i, v in self.column(j):
                B[i][pos] = v
        inv = _invert(B)
        if inv is None:
            return False
        xB = [sum(inv[i][t] * self.b[t] for t in range(self.m) if self.b[t] != 0)
              for i in range(self.m)]
        if any(x < 0 for x in xB):
            return False
        self.basis = cols
        self.basis_set = set(cols)
        self.Binv = inv
        self.xB = xB
        return True


def _invert(matrix):
    """Exact Gauss-Jordan inverse; None when singular."""
    m = len(matrix)
    aug = [list(row) + [ONE if i == t else ZERO for t in range(m)] for i, row in enumerate(matrix)]
    for col in range(m):
        piv = next((r for r in range(col, m) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        f = aug[col][col]
        if f != 1:
            aug[col] = [v / f for v in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                fr = aug[r][col]
                aug[r] = [a - fr * b for a, b in zip(aug[r], aug[col])]
    return [row[m:] for row in aug]


def mat_inverse(matrix):
    """Exact inverse of a square rational matrix; raises on singular input."""
    inv = _invert([[Fraction(v) for v in row] for row in matrix])
    if inv is None:
        raise ValueError("matrix is singular")
    return inv


def solve_lp(problem: LpProblem, warm_basis=None, max_pivots: int | None = None) -> LpSolution:
    """Exact optimum of min c'x s.t. A x {=,<=,>=} b, x >= 0."""
    return _Simplex(problem, max_pivots=max_pivots).solve(warm_basis=warm_basis)


def merge_column(sol: LpSolution, y, cost_y, ident=None, max_pivots=None) -> LpSolution:
    """Append column y and re-optimize from sol's basis.

    The ratio test pivots y in when it improves the objective; the result is
    feasible with objective <= sol.objective and equals a from-scratch solve
    in value.
    """
    if sol.status != "optimal" or sol.problem is None:
        raise ValueError("merge_column needs a feasible solution with its problem attached")
    problem = sol.problem
    problem.add_column(y, cost_y, ident)
    return solve_lp(problem, warm_basis=sol.basis, max_pivots=max_pivots)
