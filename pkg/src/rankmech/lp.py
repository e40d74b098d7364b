"""A small exact-rational linear programming solver.

Dense two-phase tableau simplex over ``gmpy2.mpq`` with Bland's smallest-index
rule, which cannot cycle, so degenerate optima are handled without any
tolerance. Intended for the few-dozen-variable programs built in
:mod:`rankmech.optimal`, not as a general-purpose solver.

Problems are stated as::

    maximize    c . x
    subject to  A_eq x  = b_eq
                A_ub x <= b_ub
                lo_j <= x_j <= hi_j      (lo_j = None means unbounded below)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .exactnum import ONE, ZERO, Rational, as_rational


class LPError(ArithmeticError):
    """Base class for solver failures."""


class InfeasibleError(LPError):
    """The constraints admit no point."""


class UnboundedError(LPError):
    """The objective is unbounded over the feasible set."""


def _vec(xs) -> tuple:
    return tuple(as_rational(x) for x in xs)


@dataclass(frozen=True)
class LinearProgram:
    """Exact LP data in maximization form.

    ``bounds`` defaults to ``x >= 0`` for every variable; each entry is a
    ``(lo, hi)`` pair where either side may be ``None``.
    """

    objective: tuple
    eq_rows: tuple = ()
    eq_rhs: tuple = ()
    ub_rows: tuple = ()
    ub_rhs: tuple = ()
    bounds: Optional[tuple] = None
    names: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        c = _vec(self.objective)
        nv = len(c)
        eq = tuple(_vec(r) for r in self.eq_rows)
        ub = tuple(_vec(r) for r in self.ub_rows)
        if any(len(r) != nv for r in eq + ub):
            raise ValueError("every constraint row must have one coefficient per variable")
        if len(eq) != len(self.eq_rhs) or len(ub) != len(self.ub_rhs):
            raise ValueError("constraint rows and right-hand sides differ in length")
        bounds = self.bounds
        if bounds is None:
            bounds = tuple((ZERO, None) for _ in range(nv))
        else:
            bounds = tuple(
                (None if lo is None else as_rational(lo), None if hi is None else as_rational(hi))
                for lo, hi in bounds
            )
            if len(bounds) != nv:
                raise ValueError("need one (lo, hi) bound pair per variable")
            for lo, hi in bounds:
                if lo is not None and hi is not None and lo > hi:
                    raise InfeasibleError(f"empty variable range [{lo}, {hi}]")
        if self.names is not None and len(self.names) != nv:
            raise ValueError("need one name per variable")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "eq_rows", eq)
        object.__setattr__(self, "eq_rhs", _vec(self.eq_rhs))
        object.__setattr__(self, "ub_rows", ub)
        object.__setattr__(self, "ub_rhs", _vec(self.ub_rhs))
        object.__setattr__(self, "bounds", bounds)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def is_feasible_point(self, x: Sequence) -> bool:
        """Check a candidate point exactly against every constraint."""
        x = _vec(x)
        if len(x) != self.num_vars:
            return False
        dot = lambda row: sum((a * b for a, b in zip(row, x)), ZERO)
        if any(dot(r) != b for r, b in zip(self.eq_rows, self.eq_rhs)):
            return False
        if any(dot(r) > b for r, b in zip(self.ub_rows, self.ub_rhs)):
            return False
        for xi, (lo, hi) in zip(x, self.bounds):
            if (lo is not None and xi < lo) or (hi is not None and xi > hi):
                return False
        return True

    def value_at(self, x: Sequence) -> Rational:
        return sum((a * as_rational(b) for a, b in zip(self.objective, x)), ZERO)

    def with_objective(self, objective: Sequence) -> "LinearProgram":
        return LinearProgram(
            objective, self.eq_rows, self.eq_rhs, self.ub_rows, self.ub_rhs, self.bounds, self.names
        )

    def with_equality(self, row: Sequence, rhs) -> "LinearProgram":
        return LinearProgram(
            self.objective,
            self.eq_rows + (_vec(row),),
            self.eq_rhs + (as_rational(rhs),),
            self.ub_rows,
            self.ub_rhs,
            self.bounds,
            self.names,
        )


@dataclass(frozen=True)
class LPSolution:
    value: Rational
    x: tuple
    pivots: int


class _Tableau:
    """Rows ``[a_1 .. a_N | rhs]`` with an explicit basis."""

    def __init__(self, rows: list, basis: list):
        self.rows = rows
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        inv = ONE / row[c]
        row[:] = [a * inv for a in row]
        for i, other in enumerate(self.rows):
            if i != r:
                f = other[c]
                if f:
                    other[:] = [a - f * b for a, b in zip(other, row)]
        self.basis[r] = c
        self.pivots += 1

    def optimize(self, cost: list, allowed: int) -> None:
        """Maximize ``cost . x`` over columns ``< allowed`` with Bland's rule."""
        while True:
            # reduced cost d_j = c_j - c_B B^-1 A_j; enter the first positive one
            entering = None
            for j in range(allowed):
                d = cost[j]
                for i, b in enumerate(self.basis):
                    a = self.rows[i][j]
                    if a:
                        d -= cost[b] * a
                if d > 0:
                    entering = j
                    break
            if entering is None:
                return
            leave = None
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and self.basis[i] < self.basis[leave])
                    ):
                        best, leave = ratio, i
            if leave is None:
                raise UnboundedError("objective is unbounded above")
            self.pivot(leave, entering)


def solve_lp(lp: LinearProgram) -> LPSolution:
    """Exact optimum of ``lp``.

    Raises :class:`InfeasibleError` or :class:`UnboundedError`.
    """
    nv = lp.num_vars
    # Substitute bounded variables so every working column is >= 0:
    #   lo finite:           x = lo + x'
    #   lo None, hi finite:  x = hi - x'
    #   free:                x = x+ - x-
    # Each original variable maps to columns with signs, plus a constant shift.
    columns = []  # (original index, sign)
    shift = [ZERO] * nv
    extra_ub = []  # upper bounds that remain as rows: (col, limit)
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            shift[j] = lo
            columns.append((j, ONE))
            if hi is not None:
                extra_ub.append((len(columns) - 1, hi - lo))
        elif hi is not None:
            shift[j] = hi
            columns.append((j, -ONE))
        else:
            columns.append((j, ONE))
            columns.append((j, -ONE))
    ncols = len(columns)

    def transform(row, rhs):
        new_rhs = rhs - sum((a * s for a, s in zip(row, shift)), ZERO)
        return [row[j] * sign for j, sign in columns], new_rhs

    eq = [transform(r, b) for r, b in zip(lp.eq_rows, lp.eq_rhs)]
    ub = [transform(r, b) for r, b in zip(lp.ub_rows, lp.ub_rhs)]
    for col, limit in extra_ub:
        row = [ZERO] * ncols
        row[col] = ONE
        ub.append((row, limit))

    n_slack = len(ub)
    m = len(eq) + n_slack
    total = ncols + n_slack + m  # structural, slack, artificial
    rows = []
    basis = []
    for i, (row, rhs) in enumerate(ub + eq):
        full = row + [ZERO] * (n_slack + m) + [rhs]
        if i < n_slack:
            full[ncols + i] = ONE
        if rhs < 0:
            full = [-a for a in full]
        full[ncols + n_slack + i] = ONE
        rows.append(full)
        basis.append(ncols + n_slack + i)

    tab = _Tableau(rows, basis)
    phase1 = [ZERO] * (ncols + n_slack) + [-ONE] * m
    tab.optimize(phase1, total)
    infeasibility = sum((tab.rows[i][-1] for i, b in enumerate(tab.basis) if b >= ncols + n_slack), ZERO)
    if infeasibility != 0:
        raise InfeasibleError("constraints are infeasible")

    # drive remaining (zero-level) artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] >= ncols + n_slack:
            pivot_col = next((j for j in range(ncols + n_slack) if tab.rows[i][j] != 0), None)
            if pivot_col is None:
                del tab.rows[i]
                del tab.basis[i]
                continue
            tab.pivot(i, pivot_col)
        i += 1

    cost = [ZERO] * total
    for k, (j, sign) in enumerate(columns):
        cost[k] = lp.objective[j] * sign
    tab.optimize(cost, ncols + n_slack)

    work = [ZERO] * total
    for i, b in enumerate(tab.basis):
        work[b] = tab.rows[i][-1]
    x = list(shift)
    for k, (j, sign) in enumerate(columns):
        x[j] += sign * work[k]
    x = tuple(x)
    return LPSolution(lp.value_at(x), x, tab.pivots)


def optimal_vertices(lp: LinearProgram) -> tuple:
    """Distinct optimal basic solutions found by probing the optimal face.

    The objective is pinned at its optimum and each coordinate is pushed to
    its maximum and minimum over that face. Every probe returns a vertex of
    the face, so more than one result certifies a non-unique optimum; a
    single result means the optimum is unique (a polytope face with one
    extreme point in every coordinate direction is a point).
    """
    best = solve_lp(lp)
    face = lp.with_equality(lp.objective, best.value)
    found = {best.x: None}
    for j in range(lp.num_vars):
        for sign in (ONE, -ONE):
            direction = [ZERO] * lp.num_vars
            direction[j] = sign
            found.setdefault(solve_lp(face.with_objective(direction)).x, None)
    return best.value, tuple(sorted(found))
