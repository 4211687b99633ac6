"""
Exact V-representation polytope engine.

A VPolytope is a vertex list in a SpaceModel; every question about it is
answered by an LP over convex weights:

  contains     x in co(V)                       feasibility
  prune        v kept iff v not in co(V \\ {v})  one feasibility LP per candidate
  is_edge      max weight off {v, w} in a representation of (v + w)/2 is 0
  clip         kept vertices plus edge crossings of the hyperplane
  gauge        min sum(nu) with x = sum nu_j v_j
  diameter     max over vertex pairs (norms are convex)

Slices are closed half-spaces (>= threshold); empty clips are returned as
None rather than raised.
"""

from __future__ import annotations

import functools
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from config import EXACT_COMBO_CAP, MAX_CANDIDATE_SUMS, PRUNE_SAMPLE_DIRECTIONS
from src.common.errors import CapExceededError, DomainError, PreconditionError, StructuralError, UnsupportedError
from src.common.exact_lp import EQ, GE, LE, LpProblem, solve_lp, to_scalar
from src.common.seqspace import (
    GAUGE,
    L1SUM,
    PRODUCT_P,
    SUP,
    Functional,
    PNormHandle,
    SeqVector,
    SpaceModel,
    check_vector,
    pair,
    vector_norm,
)

logger = logging.getLogger(__name__)

# Fixed so pruning output never depends on global random state.
_DIRECTION_SEED = 7


@dataclass(frozen=True)
class VPolytope:
    """
    Convex hull of a nonempty vertex list.

    canonical is True only when every listed vertex is extreme; builders
    that guarantee this (prune, clip, minkowski_combo) set it.
    """

    model: SpaceModel
    vertices: tuple
    canonical: bool = False

    def __post_init__(self):
        vertices = tuple(self.vertices)
        if not vertices:
            raise StructuralError("A VPolytope needs at least one vertex")
        for v in vertices:
            check_vector(self.model, v)
        object.__setattr__(self, "vertices", vertices)

    def points(self) -> list:
        return [v.point(self.model) for v in self.vertices]

    def __len__(self) -> int:
        return len(self.vertices)

    def with_model(self, model: SpaceModel) -> "VPolytope":
        """Same vertices, different declared norm (dimensions must agree)."""
        if model.dim != self.model.dim or model.has_limit != self.model.has_limit:
            raise StructuralError("with_model cannot change dimensions")
        return VPolytope(model, self.vertices, self.canonical)


@dataclass(frozen=True)
class HalfSpace:
    """{x : f(x) >= bound} or {x : f(x) <= bound}."""

    functional: Functional
    bound: Fraction
    sense: str = GE

    def __post_init__(self):
        if self.functional.is_zero():
            raise StructuralError("HalfSpace functional must be nonzero")
        if self.sense not in (GE, LE):
            raise StructuralError(f"HalfSpace sense must be '>=' or '<=', got {self.sense!r}")
        object.__setattr__(self, "bound", to_scalar(self.bound))

    def slack(self, x: SeqVector) -> Fraction:
        """Nonnegative exactly on the half-space."""
        value = pair(self.functional, x)
        return value - self.bound if self.sense == GE else self.bound - value


@dataclass(frozen=True)
class DiameterResult:
    """
    value is a Fraction, or a PNormHandle for product_p norms with p >= 2.
    exact is False only for combination diameters that fell back to the
    sum-of-diameters upper bound.
    """

    value: object
    witness: tuple
    exact: bool = True


# -------------------------
# Hull LPs
# -------------------------
def _same_space(model: SpaceModel, other: SpaceModel):
    if model.dim != other.dim or model.has_limit != other.has_limit:
        raise StructuralError(
            f"Model mismatch: dim {model.dim}/{other.dim}, has_limit {model.has_limit}/{other.has_limit}"
        )


def _weights_lp(points: Sequence[tuple], target: tuple, objective=None, affine: bool = True, maximize: bool = True):
    """
    LP over weights lambda >= 0 with sum lambda_j p_j = target (and sum lambda = 1 if affine).

    Coordinates that vanish on every point are dropped; if the target is
    nonzero there the problem is infeasible and None is returned.
    """
    n = len(points)
    rows, rhs = [], []
    for c in range(len(target)):
        column = [p[c] for p in points]
        if not any(column):
            if target[c]:
                return None
            continue
        rows.append(column)
        rhs.append(target[c])
    if affine:
        rows.append([Fraction(1)] * n)
        rhs.append(Fraction(1))
    problem = LpProblem(
        objective=tuple(objective) if objective is not None else (Fraction(0),) * n,
        matrix=tuple(tuple(r) for r in rows),
        senses=(EQ,) * len(rows),
        rhs=tuple(rhs),
        maximize=maximize,
    )
    return solve_lp(problem)


def _outside_box(points: Sequence[tuple], target: tuple) -> bool:
    for c, t in enumerate(target):
        lo = min(p[c] for p in points)
        hi = max(p[c] for p in points)
        if t < lo or t > hi:
            return True
    return False


def in_hull(points: Sequence[tuple], target: tuple) -> bool:
    """Membership of a raw coordinate tuple in the hull of raw tuples."""
    if not points:
        return False
    if target in points:
        return True
    if _outside_box(points, target):
        return False
    result = _weights_lp(points, target)
    return result is not None and result.is_optimal


def contains(P: VPolytope, x: SeqVector) -> bool:
    """Exact membership of x in co(P.vertices)."""
    check_vector(P.model, x)
    return in_hull(P.points(), x.point(P.model))


def convex_weights(P: VPolytope, x: SeqVector, objective=None, maximize: bool = True) -> Optional[tuple]:
    """
    Convex weights over P.vertices reproducing x, or None if x is outside.

    An objective over the weights picks among several representations.
    """
    check_vector(P.model, x)
    result = _weights_lp(P.points(), x.point(P.model), objective=objective, maximize=maximize)
    if result is None or not result.is_optimal:
        return None
    return result.assignment


def _dedupe_sorted(vertices: Sequence[SeqVector]) -> list:
    return sorted(set(vertices))


def _sampled_extremes(points: list) -> set:
    """Indices that uniquely maximise a coordinate or a fixed pseudo-random direction."""
    if not points:
        return set()
    dim = len(points[0])
    directions = []
    for c in range(dim):
        for s in (1, -1):
            d = [0] * dim
            d[c] = s
            directions.append(d)
    rng = random.Random(_DIRECTION_SEED)
    for _ in range(PRUNE_SAMPLE_DIRECTIONS):
        directions.append([rng.randint(-7, 7) for _ in range(dim)])

    extremes = set()
    for d in directions:
        best, arg, unique = None, -1, False
        for i, p in enumerate(points):
            val = sum((a * b for a, b in zip(d, p) if a), Fraction(0))
            if best is None or val > best:
                best, arg, unique = val, i, True
            elif val == best:
                unique = False
        if unique:
            extremes.add(arg)
    return extremes


def _prune_points(model: SpaceModel, vertices: Sequence[SeqVector]) -> list:
    unique = _dedupe_sorted(vertices)
    if len(unique) <= 2:
        return unique
    points = [v.point(model) for v in unique]
    known = _sampled_extremes(points)
    alive = set(range(len(points)))
    for i in range(len(points)):
        if i in known:
            continue
        certified = [points[j] for j in sorted(known)]
        if certified and in_hull(certified, points[i]):
            alive.discard(i)
            continue
        others = [points[j] for j in sorted(alive) if j != i]
        if in_hull(others, points[i]):
            alive.discard(i)
        else:
            known.add(i)
    logger.debug("prune kept %d of %d points", len(alive), len(points))
    return [unique[i] for i in sorted(alive)]


def prune(P: VPolytope) -> VPolytope:
    """Canonical form: only extreme points, sorted lexicographically."""
    if P.canonical:
        return P
    return VPolytope(P.model, tuple(_prune_points(P.model, P.vertices)), canonical=True)


def hull_of(model: SpaceModel, vertices: Sequence[SeqVector]) -> VPolytope:
    """prune(co(vertices)) in one call."""
    return prune(VPolytope(model, tuple(vertices)))


def hull_equal(P: VPolytope, Q: VPolytope) -> bool:
    _same_space(P.model, Q.model)
    return all(contains(Q, v) for v in P.vertices) and all(contains(P, v) for v in Q.vertices)


# -------------------------
# Edges and clipping
# -------------------------
def _require_canonical(P: VPolytope, op: str):
    if not P.canonical:
        raise PreconditionError(f"{op} needs a canonical polytope; call prune first")


def is_edge(P: VPolytope, v: SeqVector, w: SeqVector) -> bool:
    """
    True iff [v, w] is an edge of P.

    Decided on the primal side: [v, w] is an edge exactly when no convex
    representation of (v + w)/2 puts weight on another vertex.
    """
    _require_canonical(P, "is_edge")
    if v == w:
        raise PreconditionError("is_edge needs two distinct vertices")
    if len(P.vertices) == 2:
        return True
    points = P.points()
    pv, pw = v.point(P.model), w.point(P.model)
    if pv not in points or pw not in points:
        raise PreconditionError("is_edge arguments must be vertices of P")
    midpoint = tuple((a + b) / 2 for a, b in zip(pv, pw))
    objective = [Fraction(0) if p in (pv, pw) else Fraction(1) for p in points]
    result = _weights_lp(points, midpoint, objective=objective)
    return result.optimum == 0


def edge_witness(P: VPolytope, v: SeqVector, w: SeqVector) -> Optional[tuple]:
    """
    Exposing functional for the segment [v, w] and its attainment gap.

    Maximises delta subject to c.v = c.w = t, c.u <= t - delta for every
    other vertex u, |c_j| <= 1, delta <= 1.

    Returns:
        (Functional, gap) when gap > 0, else None
    """
    _require_canonical(P, "edge_witness")
    points = P.points()
    pv, pw = v.point(P.model), w.point(P.model)
    dim = len(pv)
    # variables: c_0..c_{dim-1}, t, delta
    n = dim + 2
    rows, senses, rhs = [], [], []
    for p, sense in ((pv, EQ), (pw, EQ)):
        rows.append(list(p) + [Fraction(-1), Fraction(0)])
        senses.append(sense)
        rhs.append(Fraction(0))
    for p in points:
        if p in (pv, pw):
            continue
        rows.append(list(p) + [Fraction(-1), Fraction(1)])
        senses.append(LE)
        rhs.append(Fraction(0))
    bounds = [(Fraction(-1), Fraction(1))] * dim + [(None, None), (None, Fraction(1))]
    objective = [Fraction(0)] * (n - 1) + [Fraction(1)]
    result = solve_lp(LpProblem(tuple(objective), tuple(map(tuple, rows)), tuple(senses), tuple(rhs), tuple(bounds)))
    if not result.is_optimal or result.optimum <= 0:
        return None
    c = result.assignment[:dim]
    if P.model.has_limit:
        functional = Functional(tuple(c[:-1]), c[-1])
    else:
        functional = Functional(tuple(c))
    return functional, result.optimum


def clip(P: VPolytope, H: HalfSpace) -> Optional[VPolytope]:
    """
    V-representation of P intersected with H, or None when empty.

    Vertices of P satisfying H are extreme in the intersection, and so is the
    crossing point of every edge cut by the hyperplane; together they are the
    full vertex set, so no pruning pass is needed.
    """
    _require_canonical(P, "clip")
    if H.functional.dim != P.model.dim:
        raise StructuralError(f"HalfSpace has {H.functional.dim} coefficients, polytope has dim {P.model.dim}")
    slacks = [H.slack(v) for v in P.vertices]
    kept = [v for v, s in zip(P.vertices, slacks) if s >= 0]
    if not kept:
        return None
    if len(kept) == len(P.vertices):
        return P

    positive = [(v, s) for v, s in zip(P.vertices, slacks) if s > 0]
    negative = [(w, s) for w, s in zip(P.vertices, slacks) if s < 0]
    crossings = []
    for v, sv in positive:
        for w, sw in negative:
            if is_edge(P, v, w):
                t = sv / (sv - sw)
                crossings.append(v + (w - v).scale(t))
    logger.debug("clip kept %d vertices, %d edge crossings", len(kept), len(crossings))
    return VPolytope(P.model, tuple(_dedupe_sorted(kept + crossings)), canonical=True)


# -------------------------
# Minkowski combinations
# -------------------------
def _check_parts(parts, convex: bool):
    if not parts:
        raise PreconditionError("minkowski_combo needs at least one part")
    weights = [to_scalar(w) for w, _ in parts]
    if any(w < 0 for w in weights):
        raise PreconditionError(f"Minkowski weights must be nonnegative, got {[str(w) for w in weights]}")
    if convex and sum(weights) != 1:
        raise PreconditionError(f"Convex weights must sum to 1, got {sum(weights)}")
    model = parts[0][1].model
    for _, P in parts[1:]:
        _same_space(model, P.model)
    return weights, model


def minkowski_combo(parts, convex: bool = True, cap: int = MAX_CANDIDATE_SUMS) -> VPolytope:
    """
    Canonical V-representation of sum w_i * P_i.

    Parts are accumulated one at a time and pruned in between; the extreme
    points of A + B are sums of extreme points of A and B, so the hull is the
    same as for the full vertex-choice product.

    Raises:
        CapExceededError: some accumulation step would enumerate more than cap sums
    """
    weights, model = _check_parts(parts, convex)
    acc = [SeqVector(tuple([Fraction(0)] * model.dim), Fraction(0))]
    for w, (_, P) in zip(weights, parts):
        if w == 0:
            continue
        scaled = [v.scale(w) for v in prune(P).vertices]
        if len(acc) * len(scaled) > cap:
            raise CapExceededError(
                "cap_sums", f"{len(acc)} x {len(scaled)} candidate sums exceed the cap of {cap}"
            )
        candidates = {a + s for a in acc for s in scaled}
        acc = _prune_points(model, list(candidates))
    return VPolytope(model, tuple(acc), canonical=True)


# -------------------------
# Gauge, support, diameter
# -------------------------
def _rank(points: Sequence[tuple]) -> int:
    rows = [list(p) for p in points]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        prow = rows[rank]
        for r in range(rank + 1, len(rows)):
            f = rows[r][col]
            if f:
                f = f / prow[col]
                rows[r] = [a - f * b for a, b in zip(rows[r], prow)]
        rank += 1
    return rank


@functools.lru_cache(maxsize=64)
def check_gauge_ball(P: VPolytope) -> bool:
    """
    Raise unless P is symmetric with 0 in the interior of the full coordinate space.
    """
    points = P.points()
    point_set = set(points)
    for v, p in zip(P.vertices, points):
        neg = tuple(-a for a in p)
        if neg not in point_set and not in_hull(points, neg):
            raise PreconditionError(f"Gauge ball is not symmetric: -v missing for v = {p}")
    if _rank(points) < P.model.coordinate_count:
        raise PreconditionError("0 is not an interior point of the gauge ball (vertices do not span)")
    return True


def gauge(P: VPolytope, x: SeqVector) -> Fraction:
    """
    Minkowski functional of a symmetric ball: min sum(nu) with x = sum nu_j v_j, nu >= 0.

    Raises:
        PreconditionError: P not canonical, not symmetric, or 0 not interior
        DomainError: x outside the span of the vertices (infinite gauge)
    """
    _require_canonical(P, "gauge")
    check_gauge_ball(P)
    check_vector(P.model, x)
    target = x.point(P.model)
    if not any(target):
        return Fraction(0)
    points = P.points()
    result = _weights_lp(points, target, objective=[Fraction(1)] * len(points), affine=False, maximize=False)
    if result is None or not result.is_optimal:
        raise DomainError(f"gauge is infinite: {target} is outside the span of the ball")
    return result.optimum


def support(P: VPolytope, f: Functional) -> Fraction:
    """max over vertices of f(v)."""
    return max(pair(f, v) for v in P.vertices)


def argmax_vertex(P: VPolytope, f: Functional) -> SeqVector:
    """First vertex (in listed order) attaining support(P, f)."""
    best = support(P, f)
    return next(v for v in P.vertices if pair(f, v) == best)


def _norm_key(value):
    return value.power_sum if isinstance(value, PNormHandle) else value


def _coordinate_gauges(ball: VPolytope) -> list:
    """gauge(ball, e_c) for every coordinate of the full space, the limit included."""
    model = ball.model
    values = []
    for c in range(model.coordinate_count):
        coords = [Fraction(0)] * model.dim
        limit = Fraction(0)
        if c < model.dim:
            coords[c] = Fraction(1)
        else:
            limit = Fraction(1)
        values.append(gauge(ball, SeqVector(tuple(coords), limit)))
    return values


def diameter(P: VPolytope, norm_model: SpaceModel) -> DiameterResult:
    """
    max over vertex pairs of ||v - w||, with the attaining pair.

    Gauge norms are scanned in decreasing order of the bound
    ||d|| <= sum_c |d_c| * ||e_c||; the scan stops once no remaining pair can
    beat the best exact value.
    """
    _require_canonical(P, "diameter")
    _same_space(P.model, norm_model)
    vertices = P.vertices
    if len(vertices) == 1:
        zero = vertices[0] - vertices[0]
        return DiameterResult(vector_norm(norm_model, zero), (vertices[0], vertices[0]))

    pairs = [(vertices[i], vertices[j]) for i in range(len(vertices)) for j in range(i + 1, len(vertices))]
    best, witness = None, None

    if norm_model.norm == GAUGE:
        unit = _coordinate_gauges(norm_model.ball)
        bounded = []
        for v, w in pairs:
            d = (v - w).point(norm_model)
            bounded.append((sum((abs(a) * g for a, g in zip(d, unit) if a), Fraction(0)), v, w))
        bounded.sort(key=lambda item: item[0], reverse=True)
        for ub, v, w in bounded:
            if best is not None and ub <= best:
                break
            value = vector_norm(norm_model, v - w)
            if best is None or value > best:
                best, witness = value, (v, w)
        return DiameterResult(best, witness)

    for v, w in pairs:
        value = vector_norm(norm_model, v - w)
        if best is None or _norm_key(value) > _norm_key(best):
            best, witness = value, (v, w)
    return DiameterResult(best, witness)


def dual_vertices(norm_model: SpaceModel) -> Optional[list]:
    """
    Extreme points of the dual unit ball when they are finitely enumerable
    without facet enumeration; None otherwise.
    """
    dim = norm_model.dim
    if norm_model.norm == SUP:
        out = []
        for c in range(norm_model.coordinate_count):
            for s in (1, -1):
                coeffs = [Fraction(0)] * dim
                limit = Fraction(0)
                if c < dim:
                    coeffs[c] = Fraction(s)
                else:
                    limit = Fraction(s)
                out.append(Functional(tuple(coeffs), limit))
        return out
    if norm_model.norm == L1SUM or (norm_model.norm == PRODUCT_P and norm_model.p == 1):
        s = norm_model.split
        out = []
        for j in range(s):
            for k in range(s, dim):
                for a in (1, -1):
                    for b in (1, -1):
                        coeffs = [Fraction(0)] * dim
                        coeffs[j] = Fraction(a)
                        coeffs[k] = Fraction(b)
                        out.append(Functional(tuple(coeffs)))
        return out
    return None


def _sum_of_diameters(weights, polys, norm_model: SpaceModel) -> DiameterResult:
    total = Fraction(0)
    x = y = None
    for w, P in zip(weights, polys):
        if w == 0:
            continue
        part = diameter(P, norm_model)
        total += w * part.value
        a, b = part.witness[0].scale(w), part.witness[1].scale(w)
        x = a if x is None else x + a
        y = b if y is None else y + b
    return DiameterResult(total, (x, y), exact=False)


def combo_diameter(
    parts,
    norm_model: SpaceModel,
    exact_cap: int = EXACT_COMBO_CAP,
    sum_cap: int = MAX_CANDIDATE_SUMS,
) -> DiameterResult:
    """
    Diameter of sum w_i * P_i in norm_model.

    Polyhedral norms with an enumerable dual ball use
    diam = max_g sum w_i (h_i(g) + h_i(-g)); the maximising g yields the
    witness pair directly. Other norms materialise the Minkowski combination
    when the product of part vertex counts is at most exact_cap; beyond that
    the upper bound sum w_i diam(P_i) is returned with exact=False.

    Raises:
        CapExceededError: materialising the combination needs more than sum_cap candidate sums
    """
    weights, model = _check_parts(parts, convex=False)
    _same_space(model, norm_model)
    polys = [prune(P) for _, P in parts]

    duals = dual_vertices(norm_model)
    if duals is not None:
        best, witness = None, None
        for g in duals:
            width = Fraction(0)
            hi_pts, lo_pts = [], []
            for w, P in zip(weights, polys):
                values = [pair(g, v) for v in P.vertices]
                hi, lo = max(values), min(values)
                width += w * (hi - lo)
                hi_pts.append(P.vertices[values.index(hi)].scale(w))
                lo_pts.append(P.vertices[values.index(lo)].scale(w))
            if best is None or width > best:
                best = width
                x, y = hi_pts[0], lo_pts[0]
                for a, b in zip(hi_pts[1:], lo_pts[1:]):
                    x, y = x + a, y + b
                witness = (x, y)
        return DiameterResult(best, witness)

    if norm_model.norm == PRODUCT_P:
        raise UnsupportedError("Combination diameters in product_p norms with p >= 2 are handled by certificates")

    product = 1
    for w, P in zip(weights, polys):
        if w:
            product *= len(P.vertices)
    if product > exact_cap:
        logger.info("combo_diameter: %d vertex choices exceed %d, reporting the sum of diameters", product, exact_cap)
        return _sum_of_diameters(weights, polys, norm_model)
    combo = minkowski_combo(list(zip(weights, polys)), convex=False, cap=sum_cap)
    return diameter(combo, norm_model)
