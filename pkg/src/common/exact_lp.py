"""
Exact rational arithmetic and the linear-programming kernel.

Every geometric predicate in the lab (membership, edges, gauges, witness
decompositions) is an LP over Fraction, so this module is the floor
everything else stands on.

Solver: dense two-phase tableau simplex.
  - variables are shifted/split so the tableau only sees y >= 0
  - one artificial per row in phase one, driven out of the basis before phase two
  - Bland's rule for both the entering and the leaving variable, so degenerate
    systems (the common case for polytopes with many coplanar vertices) terminate

Roots are never materialised. p-th roots are compared through p-th powers
(compare_pth_power); when a rational bracket around a real root is needed
it comes from bisection (root_bracket).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from config import ROOT_BRACKET_BITS
from src.common.errors import DomainError, StructuralError, UnsupportedError

logger = logging.getLogger(__name__)

Scalar = Fraction
ScalarLike = Union[Fraction, int, str]

LE = "<="
EQ = "="
GE = ">="
SENSES = (LE, EQ, GE)


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


# -------------------------
# Scalars
# -------------------------
def to_scalar(value: ScalarLike) -> Fraction:
    """
    Coerce an int, Fraction or "p/q" string into an exact Scalar.

    Raises:
        DomainError: floats, booleans and unparsable strings
    """
    if isinstance(value, bool):
        raise DomainError(f"Booleans are not scalars: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise DomainError(f"Cannot parse scalar {value!r}: {e}")
    raise DomainError(f"Expected int, Fraction or 'p/q' string, got {type(value).__name__}: {value!r}")


def scalar_str(value: Fraction) -> str:
    """Canonical lowest-terms rendering, "p/q" or "n"."""
    return str(Fraction(value))


def check_power(p) -> int:
    if isinstance(p, bool) or not isinstance(p, int):
        raise UnsupportedError(f"Only integer p is supported exactly, got {p!r}")
    if p < 1:
        raise DomainError(f"p must be a positive integer, got {p}")
    return p


def compare_pth_power(a: Fraction, b: Fraction, p: int) -> Ordering:
    """
    Order a^(1/p) against b without taking a root: compare a with b^p.

    Args:
        a, b: nonnegative Scalars
        p: positive integer

    Returns:
        Ordering of a^(1/p) relative to b
    """
    p = check_power(p)
    a, b = to_scalar(a), to_scalar(b)
    if a < 0 or b < 0:
        raise DomainError(f"compare_pth_power needs nonnegative inputs, got a={a}, b={b}")
    bp = b ** p
    if a < bp:
        return Ordering.LESS
    if a > bp:
        return Ordering.GREATER
    return Ordering.EQUAL


def root_bracket(value: Fraction, num: int, den: int, bits: int = ROOT_BRACKET_BITS) -> tuple[Fraction, Fraction]:
    """
    Rational bracket (lo, hi) around value^(num/den).

    Guarantees lo^den <= value^num <= hi^den. When the root is rational and
    lands on the bisection grid, lo == hi.
    """
    value = to_scalar(value)
    if value < 0:
        raise DomainError(f"root_bracket needs a nonnegative value, got {value}")
    if num < 0 or den < 1:
        raise DomainError(f"Exponent must be num/den with num >= 0, den >= 1, got {num}/{den}")
    target = value ** num
    if den == 1 or target == 0:
        return target, target
    lo, hi = Fraction(0), max(Fraction(1), target)
    if hi ** den == target:
        return hi, hi
    for _ in range(bits):
        mid = (lo + hi) / 2
        mid_pow = mid ** den
        if mid_pow == target:
            return mid, mid
        if mid_pow < target:
            lo = mid
        else:
            hi = mid
    return lo, hi


# -------------------------
# LP model
# -------------------------
@dataclass(frozen=True)
class LpProblem:
    """
    optimize objective . x  subject to  matrix x (senses) rhs,  bounds on x.

    bounds: one (lower, upper) pair per variable, None meaning unbounded on
    that side. Omitted bounds default to x >= 0.
    """

    objective: tuple
    matrix: tuple
    senses: tuple
    rhs: tuple
    bounds: Optional[tuple] = None
    maximize: bool = True

    def __post_init__(self):
        objective = tuple(to_scalar(c) for c in self.objective)
        matrix = tuple(tuple(to_scalar(v) for v in row) for row in self.matrix)
        rhs = tuple(to_scalar(v) for v in self.rhs)
        senses = tuple(self.senses)
        n = len(objective)

        if len(matrix) != len(senses) or len(matrix) != len(rhs):
            raise StructuralError(
                f"LP has {len(matrix)} rows, {len(senses)} senses and {len(rhs)} right-hand sides"
            )
        for i, row in enumerate(matrix):
            if len(row) != n:
                raise StructuralError(f"LP row {i} has {len(row)} columns, objective has {n}")
        for i, sense in enumerate(senses):
            if sense not in SENSES:
                raise StructuralError(f"LP row {i} has unknown sense {sense!r}")

        if self.bounds is None:
            bounds = tuple((Fraction(0), None) for _ in range(n))
        else:
            if len(self.bounds) != n:
                raise StructuralError(f"LP has {len(self.bounds)} bounds for {n} variables")
            bounds = tuple(
                (None if lo is None else to_scalar(lo), None if hi is None else to_scalar(hi))
                for lo, hi in self.bounds
            )

        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "bounds", bounds)

    @property
    def num_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    optimum: Optional[Fraction] = None
    assignment: Optional[tuple] = None

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def satisfies(problem: LpProblem, assignment: Sequence[Fraction]) -> bool:
    """True iff the assignment meets every row and bound of the problem exactly."""
    if len(assignment) != problem.num_vars:
        return False
    for (lo, hi), x in zip(problem.bounds, assignment):
        if lo is not None and x < lo:
            return False
        if hi is not None and x > hi:
            return False
    for row, sense, b in zip(problem.matrix, problem.senses, problem.rhs):
        lhs = sum((a * x for a, x in zip(row, assignment) if a), Fraction(0))
        if sense == LE and lhs > b:
            return False
        if sense == GE and lhs < b:
            return False
        if sense == EQ and lhs != b:
            return False
    return True


# -------------------------
# Tableau
# -------------------------
class _Tableau:
    """Canonical-form tableau: rows[i] . y = b[i] with basis[i] basic in row i."""

    def __init__(self, rows: list, b: list, basis: list):
        self.rows = rows
        self.b = b
        self.basis = basis
        self.reduced: list = []
        self.pivots = 0

    def set_costs(self, costs: Sequence[Fraction]):
        """reduced_j = c_j - sum_i c_basis(i) * rows[i][j]."""
        reduced = list(costs)
        for i, row in enumerate(self.rows):
            cb = costs[self.basis[i]]
            if cb:
                for j, v in enumerate(row):
                    if v:
                        reduced[j] -= cb * v
        self.reduced = reduced

    def pivot(self, row: int, col: int):
        prow = self.rows[row]
        piv = prow[col]
        if piv != 1:
            prow = [v / piv for v in prow]
            self.rows[row] = prow
            self.b[row] /= piv
        nonzero = [j for j, v in enumerate(prow) if v]
        brow = self.b[row]
        for k, other in enumerate(self.rows):
            if k == row:
                continue
            f = other[col]
            if f:
                for j in nonzero:
                    other[j] -= f * prow[j]
                self.b[k] -= f * brow
        f = self.reduced[col] if self.reduced else 0
        if f:
            for j in nonzero:
                self.reduced[j] -= f * prow[j]
        self.basis[row] = col
        self.pivots += 1

    def run(self, allowed: int) -> LpStatus:
        """Bland's rule on columns [0, allowed); maximises the current costs."""
        while True:
            entering = -1
            for j in range(allowed):
                if self.reduced[j] > 0:
                    entering = j
                    break
            if entering < 0:
                return LpStatus.OPTIMAL

            leave = -1
            best_ratio = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = self.b[i] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[leave])
                    ):
                        best_ratio = ratio
                        leave = i
            if leave < 0:
                return LpStatus.UNBOUNDED
            self.pivot(leave, entering)


def _standardize(problem: LpProblem):
    """
    Rewrite x in terms of y >= 0.

    Returns (columns, offsets, rows, senses, rhs) where x_j = offsets[j] +
    sum(sign * y_col for col, sign in columns[j]).
    """
    columns = []
    offsets = []
    extra_rows = []
    ny = 0
    for lo, hi in problem.bounds:
        if lo is not None:
            columns.append([(ny, 1)])
            offsets.append(lo)
            if hi is not None:
                extra_rows.append((ny, hi - lo))
            ny += 1
        elif hi is not None:
            columns.append([(ny, -1)])
            offsets.append(hi)
            ny += 1
        else:
            columns.append([(ny, 1), (ny + 1, -1)])
            offsets.append(Fraction(0))
            ny += 2

    rows, senses, rhs = [], [], []
    for row, sense, b in zip(problem.matrix, problem.senses, problem.rhs):
        new_row = [Fraction(0)] * ny
        shift = Fraction(0)
        for j, a in enumerate(row):
            if not a:
                continue
            shift += a * offsets[j]
            for col, sign in columns[j]:
                new_row[col] += sign * a
        rows.append(new_row)
        senses.append(sense)
        rhs.append(b - shift)
    for col, cap in extra_rows:
        new_row = [Fraction(0)] * ny
        new_row[col] = Fraction(1)
        rows.append(new_row)
        senses.append(LE)
        rhs.append(cap)
    return columns, offsets, rows, senses, rhs, ny


def solve_lp(problem: LpProblem) -> LpResult:
    """
    Solve an LP exactly.

    Returns:
        LpResult with status optimal (optimum and assignment set), infeasible or unbounded
    """
    columns, offsets, rows, senses, rhs, ny = _standardize(problem)
    m = len(rows)

    slack_count = sum(1 for s in senses if s != EQ)
    n_struct = ny + slack_count
    tab_rows = []
    b = []
    slack = ny
    for i in range(m):
        row = rows[i] + [Fraction(0)] * (slack_count + m)
        if senses[i] == LE:
            row[slack] = Fraction(1)
            slack += 1
        elif senses[i] == GE:
            row[slack] = Fraction(-1)
            slack += 1
        bi = rhs[i]
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        row[n_struct + i] = Fraction(1)
        tab_rows.append(row)
        b.append(bi)

    tableau = _Tableau(tab_rows, b, [n_struct + i for i in range(m)])

    # phase one: maximise -(sum of artificials)
    phase_one = [Fraction(0)] * n_struct + [Fraction(-1)] * m
    tableau.set_costs(phase_one)
    tableau.run(n_struct + m)
    infeasibility = sum(
        (tableau.b[i] for i in range(m) if tableau.basis[i] >= n_struct), Fraction(0)
    )
    if infeasibility > 0:
        logger.debug("LP infeasible after %d phase-one pivots", tableau.pivots)
        return LpResult(LpStatus.INFEASIBLE)

    # drive zero-valued artificials out; rows with no structural entry are redundant
    i = 0
    while i < len(tableau.rows):
        if tableau.basis[i] >= n_struct:
            row = tableau.rows[i]
            col = next((j for j in range(n_struct) if row[j]), -1)
            if col >= 0:
                tableau.reduced = []
                tableau.pivot(i, col)
            else:
                del tableau.rows[i]
                del tableau.b[i]
                del tableau.basis[i]
                continue
        i += 1
    tableau.rows = [row[:n_struct] for row in tableau.rows]

    # phase two
    sign = 1 if problem.maximize else -1
    costs = [Fraction(0)] * n_struct
    for j, c in enumerate(problem.objective):
        for col, s in columns[j]:
            costs[col] += sign * s * c
    tableau.set_costs(costs)
    status = tableau.run(n_struct)
    if status is LpStatus.UNBOUNDED:
        logger.debug("LP unbounded after %d pivots", tableau.pivots)
        return LpResult(LpStatus.UNBOUNDED)

    y = [Fraction(0)] * n_struct
    for i, col in enumerate(tableau.basis):
        y[col] = tableau.b[i]
    assignment = tuple(
        offsets[j] + sum((s * y[col] for col, s in columns[j]), Fraction(0))
        for j in range(problem.num_vars)
    )
    if not satisfies(problem, assignment):
        raise RuntimeError("simplex produced an assignment that violates the problem")
    optimum = sum((c * x for c, x in zip(problem.objective, assignment)), Fraction(0))
    logger.debug("LP optimal after %d pivots: %s", tableau.pivots, optimum)
    return LpResult(LpStatus.OPTIMAL, optimum, assignment)
