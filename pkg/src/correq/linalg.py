"""Exact dense linear algebra and linear programming over the rationals.

Everything here is tolerance-free: ranks, kernels, and simplex pivots are
computed with exact rational arithmetic.  Elimination keeps rows rescaled
to primitive integer vectors (a fraction-free discipline in the spirit of
Bareiss) so that intermediate entries stay small; the simplex method uses
Bland's anti-cycling rule throughout, which also makes every solve
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

from .rational import ONE, ZERO, Rat, rat

__all__ = [
    "RationalMatrix",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "rank",
    "null_space",
    "solve_linear_system",
    "lp_solve",
]


@dataclass(frozen=True)
class RationalMatrix:
    """Dense matrix of exact rationals, row-major."""

    rows: int
    cols: int
    entries: tuple[Rat, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], cols: Optional[int] = None) -> "RationalMatrix":
        data = [[rat(v) for v in row] for row in rows]
        if data:
            ncols = len(data[0])
            if any(len(row) != ncols for row in data):
                raise ValueError("ragged rows")
        else:
            ncols = 0 if cols is None else cols
        flat = tuple(v for row in data for v in row)
        return cls(len(data), ncols, flat)

    def row(self, i: int) -> tuple[Rat, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def at(self, i: int, j: int) -> Rat:
        return self.entries[i * self.cols + j]

    def to_lists(self) -> list[list[Rat]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def mul_vector(self, x: Sequence[Rat]) -> list[Rat]:
        if len(x) != self.cols:
            raise ValueError("dimension mismatch")
        out = []
        for i in range(self.rows):
            base = i * self.cols
            acc = ZERO
            for j, xj in enumerate(x):
                if xj:
                    acc += self.entries[base + j] * xj
            out.append(acc)
        return out


def _primitive(row: list[Rat]) -> list[Rat]:
    """Rescale a rational row to a primitive integer vector (gcd 1).

    Positive rescaling preserves row spaces, kernels, and sign patterns.
    """
    denom_lcm = 1
    for v in row:
        if v:
            denom_lcm = math.lcm(denom_lcm, int(v.denominator))
    num_gcd = 0
    for v in row:
        if v:
            num_gcd = math.gcd(num_gcd, abs(int(v.numerator * (denom_lcm // int(v.denominator)))))
    if num_gcd == 0:
        return [ZERO] * len(row)
    scale = rat(denom_lcm, num_gcd)
    return [v * scale for v in row]


def _echelon(rows: list[list[Rat]]) -> tuple[list[list[Rat]], list[int]]:
    """Row echelon form with primitive-row rescaling.

    Returns the nonzero echelon rows and their pivot columns.  Pivot choice
    is the first nonzero entry in column order, so the result is
    deterministic.
    """
    work = [_primitive(list(r)) for r in rows]
    work = [r for r in work if any(r)]
    if not work:
        return [], []
    ncols = len(work[0])
    echelon: list[list[Rat]] = []
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv_idx = None
        for i in range(r, len(work)):
            if work[i][c]:
                piv_idx = i
                break
        if piv_idx is None:
            continue
        work[r], work[piv_idx] = work[piv_idx], work[r]
        piv_row = work[r]
        piv_val = piv_row[c]
        for i in range(r + 1, len(work)):
            v = work[i][c]
            if v:
                row_i = work[i]
                # cross-multiplied update keeps integer entries integer
                work[i] = _primitive(
                    [piv_val * a - v * b for a, b in zip(row_i, piv_row)]
                )
        echelon.append(piv_row)
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return echelon, pivots


def rank(matrix: RationalMatrix) -> int:
    """Exact rank via fraction-free elimination."""
    _, pivots = _echelon(matrix.to_lists())
    return len(pivots)


def null_space(matrix: RationalMatrix) -> list[list[Rat]]:
    """Basis of the exact kernel of ``matrix``.

    Returns ``cols - rank`` vectors; the basis is canonical: each vector has
    a 1 in one free column and 0 in the others, with pivot coordinates
    back-solved.  Empty list means trivial kernel.
    """
    echelon, pivots = _echelon(matrix.to_lists())
    ncols = matrix.cols
    pivot_set = set(pivots)
    free_cols = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for f in free_cols:
        vec = [ZERO] * ncols
        vec[f] = ONE
        for r in range(len(pivots) - 1, -1, -1):
            p = pivots[r]
            row = echelon[r]
            acc = ZERO
            for c in range(p + 1, ncols):
                if vec[c] and row[c]:
                    acc += row[c] * vec[c]
            if acc:
                vec[p] = -acc / row[p]
        basis.append(vec)
    return basis


def solve_linear_system(
    matrix: RationalMatrix, rhs: Sequence[Rat]
) -> Optional[tuple[list[Rat], list[list[Rat]]]]:
    """Solve ``matrix @ x = rhs`` exactly.

    Returns ``None`` when inconsistent, else ``(particular, kernel_basis)``
    describing the full affine solution set.
    """
    if len(rhs) != matrix.rows:
        raise ValueError("rhs length mismatch")
    aug_rows = [list(matrix.row(i)) + [rat(rhs[i])] for i in range(matrix.rows)]
    echelon, pivots = _echelon(aug_rows)
    ncols = matrix.cols
    if ncols in pivots:  # pivot in the rhs column: inconsistent
        return None
    particular = [ZERO] * ncols
    for r in range(len(pivots) - 1, -1, -1):
        p = pivots[r]
        row = echelon[r]
        acc = row[ncols]
        for c in range(p + 1, ncols):
            if particular[c] and row[c]:
                acc -= row[c] * particular[c]
        particular[p] = acc / row[p]
    kernel = null_space(matrix)
    return particular, kernel


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """Maximize ``objective @ x`` subject to exact linear constraints.

    ``eq`` rows hold with equality, ``ineq`` rows as ``row @ x <= rhs``.
    ``nonneg[j]`` marks variable ``j`` as sign-constrained; unconstrained
    variables are handled by an internal split.
    """

    objective: tuple[Rat, ...]
    eq: Optional[RationalMatrix] = None
    eq_rhs: tuple[Rat, ...] = ()
    ineq: Optional[RationalMatrix] = None
    ineq_rhs: tuple[Rat, ...] = ()
    nonneg: Optional[tuple[bool, ...]] = None

    def __post_init__(self):
        n = len(self.objective)
        if self.eq is not None and (self.eq.cols != n or self.eq.rows != len(self.eq_rhs)):
            raise ValueError("equality block dimensions inconsistent")
        if self.ineq is not None and (self.ineq.cols != n or self.ineq.rows != len(self.ineq_rhs)):
            raise ValueError("inequality block dimensions inconsistent")
        if self.nonneg is not None and len(self.nonneg) != n:
            raise ValueError("nonneg flag length mismatch")

    @property
    def num_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    value: Optional[Rat] = None
    point: Optional[tuple[Rat, ...]] = None
    #: Original-variable indices that are basic at the optimum.
    basis: Optional[tuple[int, ...]] = None


class _Tableau:
    """Dense simplex tableau with Bland's rule.

    Columns are never physically removed; retired artificials are banned
    from entering instead, which keeps indices stable.
    """

    def __init__(self):
        self.rows: list[list[Rat]] = []
        self.rhs: list[Rat] = []
        self.basis: list[int] = []
        self.allowed: list[bool] = []

    @property
    def ncols(self) -> int:
        return len(self.allowed)

    def pivot(self, i: int, j: int) -> None:
        piv = self.rows[i][j]
        row_i = self.rows[i]
        if piv != 1:
            inv = ONE / piv
            self.rows[i] = row_i = [v * inv for v in row_i]
            self.rhs[i] *= inv
        for k in range(len(self.rows)):
            if k == i:
                continue
            f = self.rows[k][j]
            if f:
                row_k = self.rows[k]
                self.rows[k] = [a - f * b for a, b in zip(row_k, row_i)]
                self.rhs[k] -= f * self.rhs[i]
        self.basis[i] = j

    def priced_cost(self, cost: list[Rat]) -> tuple[list[Rat], Rat]:
        """Reduced-cost row for maximizing ``cost @ x`` given the basis."""
        red = list(cost)
        val = ZERO
        for i, b in enumerate(self.basis):
            cb = red[b]
            if cb:
                row = self.rows[i]
                red = [a - cb * v for a, v in zip(red, row)]
                val += cb * self.rhs[i]
        return red, val

    def run(self, cost: list[Rat]) -> tuple[str, Rat]:
        """Bland simplex on the current basis.  Returns (status, value)."""
        red, val = self.priced_cost(cost)
        nrows = len(self.rows)
        while True:
            enter = -1
            for j in range(len(red)):
                if self.allowed[j] and red[j] > 0:
                    enter = j
                    break
            if enter < 0:
                return "optimal", val
            leave = -1
            best_ratio: Optional[Rat] = None
            best_var = -1
            for i in range(nrows):
                a = self.rows[i][enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < best_var)
                    ):
                        best_ratio = ratio
                        best_var = self.basis[i]
                        leave = i
            if leave < 0:
                return "unbounded", val
            self.pivot(leave, enter)
            cb = red[enter]
            if cb:
                row = self.rows[leave]
                red = [a - cb * v for a, v in zip(red, row)]
                val += cb * self.rhs[leave]


def lp_solve(problem: LpProblem) -> LpSolution:
    """Exact two-phase simplex with Bland's anti-cycling rule.

    Optimal solutions are basic feasible points, i.e. vertices of the
    feasible polyhedron; pivot order is fixed, so the returned vertex is
    deterministic even for degenerate problems.
    """
    n = problem.num_vars
    nonneg = problem.nonneg if problem.nonneg is not None else tuple([True] * n)

    # column layout: nonneg var -> one column; free var -> (plus, minus)
    col_of_var: list[tuple[int, Optional[int]]] = []
    ncols = 0
    for j in range(n):
        if nonneg[j]:
            col_of_var.append((ncols, None))
            ncols += 1
        else:
            col_of_var.append((ncols, ncols + 1))
            ncols += 2
    num_structural = ncols

    raw_rows: list[tuple[list[Rat], Rat, bool]] = []
    if problem.eq is not None:
        for i in range(problem.eq.rows):
            raw_rows.append((list(problem.eq.row(i)), rat(problem.eq_rhs[i]), True))
    if problem.ineq is not None:
        for i in range(problem.ineq.rows):
            raw_rows.append((list(problem.ineq.row(i)), rat(problem.ineq_rhs[i]), False))

    num_slacks = sum(1 for _, _, is_eq in raw_rows if not is_eq)
    tab = _Tableau()
    total_cols = num_structural + num_slacks  # artificials appended later
    slack_at = num_structural

    expanded_rows: list[list[Rat]] = []
    rhs_list: list[Rat] = []
    slack_cols: list[Optional[int]] = []
    for coeffs, b, is_eq in raw_rows:
        row = [ZERO] * total_cols
        for j, v in enumerate(coeffs):
            if v:
                pos, neg = col_of_var[j]
                row[pos] = v
                if neg is not None:
                    row[neg] = -v
        if is_eq:
            slack_cols.append(None)
        else:
            row[slack_at] = ONE
            slack_cols.append(slack_at)
            slack_at += 1
        # normalize to nonnegative rhs
        if b < 0:
            row = [-v for v in row]
            b = -b
        expanded_rows.append(row)
        rhs_list.append(b)

    # initial basis: slack columns that survived with +1; otherwise artificial
    artificial_cols: list[int] = []
    basis: list[int] = []
    art_needed: list[bool] = []
    for i, row in enumerate(expanded_rows):
        sc = slack_cols[i]
        if sc is not None and row[sc] == 1:
            basis.append(sc)
            art_needed.append(False)
        else:
            basis.append(-1)  # placeholder
            art_needed.append(True)
    num_art = sum(art_needed)
    full_cols = total_cols + num_art
    art_at = total_cols
    for i in range(len(expanded_rows)):
        expanded_rows[i] = expanded_rows[i] + [ZERO] * num_art
        if art_needed[i]:
            expanded_rows[i][art_at] = ONE
            basis[i] = art_at
            artificial_cols.append(art_at)
            art_at += 1

    tab.rows = expanded_rows
    tab.rhs = rhs_list
    tab.basis = basis
    tab.allowed = [True] * full_cols

    if num_art:
        phase1_cost = [ZERO] * full_cols
        for c in artificial_cols:
            phase1_cost[c] = -ONE
        status, val = tab.run(phase1_cost)
        if val < 0:
            return LpSolution(status=LpStatus.INFEASIBLE)
        # drive any zero-level artificials out of the basis
        art_set = set(artificial_cols)
        drop_rows = []
        for i in range(len(tab.rows)):
            if tab.basis[i] in art_set:
                enter = -1
                for j in range(total_cols):
                    if tab.rows[i][j]:
                        enter = j
                        break
                if enter >= 0:
                    tab.pivot(i, enter)
                else:
                    drop_rows.append(i)  # redundant constraint
        if drop_rows:
            for i in reversed(drop_rows):
                del tab.rows[i]
                del tab.rhs[i]
                del tab.basis[i]
        for c in artificial_cols:
            tab.allowed[c] = False

    cost = [ZERO] * full_cols
    for j in range(n):
        cj = rat(problem.objective[j])
        if cj:
            pos, neg = col_of_var[j]
            cost[pos] = cj
            if neg is not None:
                cost[neg] = -cj
    status, _ = tab.run(cost)
    if status == "unbounded":
        return LpSolution(status=LpStatus.UNBOUNDED)

    col_values = [ZERO] * full_cols
    for i, b in enumerate(tab.basis):
        col_values[b] = tab.rhs[i]
    point = []
    for j in range(n):
        pos, neg = col_of_var[j]
        v = col_values[pos]
        if neg is not None:
            v = v - col_values[neg]
        point.append(v)
    value = sum((rat(problem.objective[j]) * point[j] for j in range(n)), ZERO)

    basic_vars = set(tab.basis)
    basis_out = sorted(
        j
        for j in range(n)
        if col_of_var[j][0] in basic_vars
        or (col_of_var[j][1] is not None and col_of_var[j][1] in basic_vars)
    )
    return LpSolution(
        status=LpStatus.OPTIMAL,
        value=value,
        point=tuple(point),
        basis=tuple(basis_out),
    )
