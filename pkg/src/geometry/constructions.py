"""
Builders for the convex bodies of the construction.

Stages (c0 truncation of dimension m_N):
  K_1 = {e_1},  g_1 = e_1
  K_2 = co(e_1, e_1 + e_2), net g_1..g_{l_2} of K_2
  K_{n+1} = co(K_n U {g_i + e_{m_n + i} : i <= l_n}),  m_{n+1} = l_{n+1} = m_n + l_n

Renormed ball (c truncation, coords plus limit L):
  A      = 2(K_N - 1/2), every vertex with L = -1
  box    = [-1, 1]^m_N x [-(1 - eps), 1 - eps]
  B_eps  = co(A U -A U box)
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from config import (
    DEFAULT_L2,
    DEFAULT_MESH_DENOMINATOR,
    MAX_GRID_POINTS,
    MAX_STAGES,
    MAX_VERTICES,
    RENORM_SLACK,
)
from src.common.errors import CapExceededError, DomainError, PreconditionError, StructuralError
from src.common.exact_lp import to_scalar
from src.common.seqspace import (
    Functional,
    SeqVector,
    SpaceModel,
    basis_vector,
    c0_model,
    c_model,
    l1sum_model,
    product_model,
    sup_norm,
)
from src.geometry.polytope import VPolytope, check_gauge_ball, contains, diameter, hull_of, prune

logger = logging.getLogger(__name__)


# -------------------------
# Nets
# -------------------------
@dataclass(frozen=True)
class NetResult:
    """
    points: the net, seeds first
    grid_radius: exact max over the barycentric grid of the distance to the net
    mesh_bound: every point of P is this close (sup norm) to some grid point
    """

    points: tuple
    grid_radius: Fraction
    mesh_bound: Fraction

    @property
    def radius(self) -> Fraction:
        """Certified covering radius of the whole polytope."""
        return self.grid_radius + self.mesh_bound


def _sup_distance(model: SpaceModel, x: SeqVector, y: SeqVector) -> Fraction:
    return sup_norm((x - y).point(model))


def barycentric_grid(P: VPolytope, q: int, cap: int = MAX_GRID_POINTS) -> list:
    """Distinct points sum (n_j / q) v_j with n_j >= 0, sum n_j = q, sorted."""
    k = len(P.vertices)
    count = math.comb(q + k - 1, k - 1)
    if count > cap:
        raise CapExceededError("cap_grid", f"{count} grid points for {k} vertices at q={q} exceed {cap}")
    points = set()
    # stars and bars: bar positions split q stars into k parts
    for bars in itertools.combinations(range(q + k - 1), k - 1):
        parts, prev = [], -1
        for b in bars + (q + k - 1,):
            parts.append(b - prev - 1)
            prev = b
        point = None
        for n_j, v in zip(parts, P.vertices):
            if n_j:
                term = v.scale(Fraction(n_j, q))
                point = term if point is None else point + term
        points.add(point)
    return sorted(points)


def greedy_net(P: VPolytope, size: int, mesh_denominator: int, seeds: Sequence[SeqVector] = ()) -> NetResult:
    """
    Farthest-point net of `size` points of P, certified on the barycentric grid.

    The grid with denominator q is within (k / 4q) * diam(vertices) of every
    point of P (largest-remainder rounding moves at most k/2q of barycentric
    mass), which is the mesh bound added to the grid radius.

    Args:
        seeds: points forced into the net first (default: the first vertex)
    """
    if size < 1:
        raise PreconditionError(f"Net size must be >= 1, got {size}")
    if mesh_denominator < 1:
        raise DomainError(f"mesh_denominator must be >= 1, got {mesh_denominator}")
    P = prune(P)
    model = P.model
    selected = list(seeds) if seeds else [P.vertices[0]]
    if len(selected) > size:
        raise PreconditionError(f"{len(selected)} seeds do not fit in a net of size {size}")
    for s in selected:
        if not contains(P, s):
            raise PreconditionError("Net seed lies outside the polytope")

    grid = barycentric_grid(P, mesh_denominator)
    dist = [min(_sup_distance(model, g, s) for s in selected) for g in grid]
    while len(selected) < size:
        far = max(dist)
        if far == 0:
            raise PreconditionError(
                f"Only {len(selected)} distinct net points available at q={mesh_denominator}; "
                "raise the mesh denominator"
            )
        idx = dist.index(far)
        chosen = grid[idx]
        selected.append(chosen)
        dist = [min(d, _sup_distance(model, g, chosen)) for d, g in zip(dist, grid)]

    k = len(P.vertices)
    vertex_diam = max(
        (_sup_distance(model, v, w) for v, w in itertools.combinations(P.vertices, 2)), default=Fraction(0)
    )
    mesh = Fraction(k, 4 * mesh_denominator) * vertex_diam if k > 1 else Fraction(0)
    return NetResult(tuple(selected), max(dist), mesh)


# -------------------------
# Stages
# -------------------------
@dataclass(frozen=True)
class StageRecord:
    """One stage: K_n (embedded in the top model), m_n, l_n, certified radius and its running minimum."""

    n: int
    K: VPolytope
    m: int
    l: int
    radius: Fraction
    eps: Fraction


@dataclass(frozen=True)
class StageLedger:
    """
    All stages up to N in the c0 model of dimension m_N.

    nets holds g_1..g_{l_N}; stage n uses the prefix of length l_n.
    """

    N: int
    l2: int
    mesh_denominator: int
    model: SpaceModel
    stages: tuple
    nets: tuple

    def stage(self, n: int) -> StageRecord:
        if not 1 <= n <= self.N:
            raise StructuralError(f"Stage {n} outside 1..{self.N}")
        return self.stages[n - 1]

    @property
    def K_N(self) -> VPolytope:
        return self.stages[-1].K

    def net(self, n: int) -> tuple:
        return self.nets[: self.stage(n).l]

    def bump(self, n: int, i: int) -> SeqVector:
        """g_i + e_{m_n + i}, the stage-(n+1) vertex exposed above g_i."""
        record = self.stage(n)
        if not 1 <= i <= record.l:
            raise StructuralError(f"Net index {i} outside 1..{record.l} at stage {n}")
        return self.nets[i - 1] + basis_vector(self.model, record.m + i)


def stage_sizes(N: int, l2: int) -> list:
    """[(m_n, l_n)] for n = 1..N."""
    sizes = [(1, 1), (2, l2)]
    while len(sizes) < N:
        m, l = sizes[-1]
        sizes.append((m + l, m + l))
    return sizes[:N]


def build_stages(
    N: int,
    l2: int = DEFAULT_L2,
    mesh_denominator: int = DEFAULT_MESH_DENOMINATOR,
    max_stages: int = MAX_STAGES,
) -> StageLedger:
    """
    Build K_1..K_N with their nets and verify the ledger invariants.

    Raises:
        DomainError: N < 2, l2 < 2 or q < 1
        CapExceededError: N above max_stages, or a net grid above its cap
        StructuralError: a ledger invariant fails
    """
    if N < 2:
        raise DomainError(f"build_stages needs N >= 2, got {N}")
    if l2 < 2:
        raise DomainError(f"l2 must be > 1, got {l2}")
    if mesh_denominator < 1:
        raise DomainError(f"mesh_denominator must be >= 1, got {mesh_denominator}")
    if N > max_stages:
        raise CapExceededError("cap_stages", f"N={N} exceeds the stage cap {max_stages}")

    sizes = stage_sizes(N, l2)
    model = c0_model(sizes[-1][0])

    def e(k: int) -> SeqVector:
        return basis_vector(model, k)

    K1 = VPolytope(model, (e(1),), canonical=True)
    stages = [StageRecord(1, K1, 1, 1, Fraction(0), Fraction(0))]
    nets = (e(1),)

    K = hull_of(model, [e(1), e(1) + e(2)])
    best = None
    for n in range(2, N + 1):
        m, l = sizes[n - 1]
        if n > 2:
            m_prev, l_prev = sizes[n - 2]
            bumps = [nets[i - 1] + e(m_prev + i) for i in range(1, l_prev + 1)]
            K = hull_of(model, list(K.vertices) + bumps)
        try:
            net = greedy_net(K, l, mesh_denominator, seeds=nets)
        except CapExceededError as exc:
            raise CapExceededError(exc.cap_name, f"stage {n}: {exc}")
        nets = net.points
        best = net.radius if best is None else min(best, net.radius)
        stages.append(StageRecord(n, K, m, l, net.radius, best))
        logger.info("stage %d: %d vertices, m=%d, l=%d, radius=%s", n, len(K.vertices), m, l, net.radius)

    ledger = StageLedger(N, l2, mesh_denominator, model, tuple(stages), tuple(nets))
    verify_ledger(ledger)
    return ledger


def verify_ledger(ledger: StageLedger):
    """Assert every ledger invariant; raises StructuralError naming the first violation."""
    model = ledger.model
    sizes = stage_sizes(ledger.N, ledger.l2)
    for record, (m, l) in zip(ledger.stages, sizes):
        n = record.n
        if (record.m, record.l) != (m, l):
            raise StructuralError(f"stage {n}: (m, l) = ({record.m}, {record.l}), recurrence gives ({m}, {l})")
        for v in record.K.vertices:
            if v.coords[0] != 1:
                raise StructuralError(f"stage {n}: vertex {v.coords} has x(1) != 1")
            if any(c < 0 or c > 1 for c in v.coords):
                raise StructuralError(f"stage {n}: vertex {v.coords} leaves [0, 1]")
            if any(v.coords[m:]):
                raise StructuralError(f"stage {n}: vertex {v.coords} uses coordinates above m_n = {m}")
        for g in ledger.nets[:l]:
            if not contains(record.K, g):
                raise StructuralError(f"stage {n}: net point {g.coords} is not in K_{n}")
        if n < ledger.N:
            nxt = ledger.stages[n]
            for v in record.K.vertices:
                if not contains(nxt.K, v):
                    raise StructuralError(f"K_{n} is not contained in K_{n + 1}")
            vertex_set = set(nxt.K.vertices)
            for i in range(1, l + 1):
                if ledger.nets[i - 1] + basis_vector(model, m + i) not in vertex_set:
                    raise StructuralError(f"stage {n + 1}: bump above g_{i} is not extreme")
    value = diameter(ledger.K_N, model).value
    if value != 1:
        raise StructuralError(f"diam(K_{ledger.N}) = {value}, expected 1")


# -------------------------
# Renormed ball
# -------------------------
def _lift_A(ledger: StageLedger) -> list:
    """2(v - 1/2) in the c-model; K vectors have limit 0 so L = -1."""
    return [SeqVector(tuple(2 * c - 1 for c in v.coords), Fraction(-1)) for v in ledger.K_N.vertices]


def box_corners(d: int, eps: Fraction) -> list:
    top = 1 - eps
    corners = []
    for signs in itertools.product((1, -1), repeat=d):
        for L in (top, -top):
            corners.append(SeqVector(tuple(Fraction(s) for s in signs), L))
    return corners


@dataclass(frozen=True)
class BallGenerators:
    """The three generator families of B_eps before pruning."""

    A: tuple
    minus_A: tuple
    box: tuple

    def all(self) -> list:
        return list(self.A) + list(self.minus_A) + list(self.box)


def b_eps_generators(ledger: StageLedger, eps, cap_vertices: int = MAX_VERTICES) -> BallGenerators:
    eps = to_scalar(eps)
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    d = ledger.model.dim
    count = 2 * len(ledger.K_N.vertices) + 2 ** (d + 1)
    if count > cap_vertices:
        raise CapExceededError("cap_vertices", f"B_eps needs {count} generators at m_N={d}, cap is {cap_vertices}")
    A = _lift_A(ledger)
    return BallGenerators(tuple(A), tuple(-a for a in A), tuple(box_corners(d, eps)))


def build_B_eps(ledger: StageLedger, eps, cap_vertices: int = MAX_VERTICES) -> VPolytope:
    """prune(co(A U -A U box)) in the c-model of dimension m_N."""
    gens = b_eps_generators(ledger, eps, cap_vertices)
    ball = hull_of(c_model(ledger.model.dim), gens.all())
    logger.info("B_eps at N=%d, eps=%s: %d vertices", ledger.N, eps, len(ball.vertices))
    return ball


def build_symmetric_K(ledger: StageLedger) -> VPolytope:
    """prune(co(A U -A)); symmetric, sup-diameter 2."""
    A = _lift_A(ledger)
    return hull_of(c_model(ledger.model.dim), A + [-a for a in A])


# -------------------------
# Product and l1-sum balls
# -------------------------
def build_product_ball_p1(d_each: int) -> VPolytope:
    """Unit ball of c0 (+)_1 c0 truncated to d_each coordinates per factor."""
    if d_each < 1:
        raise DomainError(f"d_each must be >= 1, got {d_each}")
    model = product_model(d_each, 1)
    zero = (Fraction(0),) * d_each
    vertices = []
    for signs in itertools.product((1, -1), repeat=d_each):
        corner = tuple(Fraction(s) for s in signs)
        vertices.append(SeqVector(corner + zero))
        vertices.append(SeqVector(zero + corner))
    return hull_of(model, vertices)


def build_l1_sum_ball(B1: VPolytope, B2: VPolytope) -> VPolytope:
    """co(B1 x {0} U {0} x B2) with an l1sum model splitting at dim(B1)."""
    for name, B in (("B1", B1), ("B2", B2)):
        if B.model.has_limit:
            raise StructuralError(f"{name} must live in a c0 model")
        check_gauge_ball(prune(B))
    d1, d2 = B1.model.dim, B2.model.dim
    z1, z2 = (Fraction(0),) * d1, (Fraction(0),) * d2
    vertices = [SeqVector(v.coords + z2) for v in B1.vertices]
    vertices += [SeqVector(z1 + w.coords) for w in B2.vertices]
    return hull_of(l1sum_model(d1, d2), vertices)


def split_vector(Z: VPolytope, z: SeqVector) -> tuple:
    """(x, y) factors of an l1-sum vector."""
    s = Z.model.split
    return SeqVector(z.coords[:s]), SeqVector(z.coords[s:])


# -------------------------
# Renorming parameters
# -------------------------
def functional_norm(f: Functional) -> Fraction:
    """Dual sup norm: sum |a_k| + |a_inf|."""
    return sum((abs(a) for a in f.coeffs), Fraction(0)) + abs(f.limit_coeff)


@dataclass(frozen=True)
class RenormParams:
    """
    Parameters of the small-combination construction in B_eps.

    Construction enforces, with M = max ||x_i*||:
      (1/2) rho M + delta < delta_tilde
      2 rho < eps
      rho M < 4 delta
      (7 - 2 eps) rho / (1 - eps) < gamma
    """

    eps: Fraction
    gamma: Fraction
    rho: Fraction
    delta: Fraction
    delta_tilde: Fraction
    functionals: tuple
    weights: tuple

    def __post_init__(self):
        for name in ("eps", "gamma", "rho", "delta", "delta_tilde"):
            object.__setattr__(self, name, to_scalar(getattr(self, name)))
        object.__setattr__(self, "functionals", tuple(self.functionals))
        object.__setattr__(self, "weights", tuple(to_scalar(w) for w in self.weights))
        self.check()

    @property
    def max_norm(self) -> Fraction:
        return max(functional_norm(f) for f in self.functionals)

    def check(self):
        if not 0 < self.eps < 1:
            raise PreconditionError(f"eps must lie in (0, 1), got {self.eps}")
        for name in ("gamma", "rho", "delta", "delta_tilde"):
            if getattr(self, name) <= 0:
                raise PreconditionError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.functionals:
            raise PreconditionError("RenormParams needs at least one functional")
        if len(self.weights) != len(self.functionals):
            raise PreconditionError(f"{len(self.weights)} weights for {len(self.functionals)} functionals")
        if any(w < 0 for w in self.weights) or sum(self.weights) != 1:
            raise PreconditionError(f"Weights must be a convex combination, got {[str(w) for w in self.weights]}")
        M = self.max_norm
        eps, rho = self.eps, self.rho
        if not self.rho * M / 2 + self.delta < self.delta_tilde:
            raise PreconditionError("violated: (1/2) rho ||x*|| + delta < delta_tilde")
        if not 2 * rho < eps:
            raise PreconditionError("violated: 2 rho < eps")
        if not rho * M < 4 * self.delta:
            raise PreconditionError("violated: rho ||x*|| < 4 delta")
        if not (7 - 2 * eps) * rho / (1 - eps) < self.gamma:
            raise PreconditionError("violated: (7 - 2 eps) rho / (1 - eps) < gamma")


def solve_renorm_params(
    eps,
    gamma,
    functionals: Sequence[Functional],
    delta_tilde=None,
    weights: Optional[Sequence] = None,
) -> RenormParams:
    """
    Deterministic schedule: rho first (half of the tightest upper limit), then
    delta = rho M / 2, then delta_tilde = 3 rho M / 2 unless supplied.
    """
    eps, gamma = to_scalar(eps), to_scalar(gamma)
    if not 0 < eps < 1:
        raise PreconditionError(f"eps must lie in (0, 1), got {eps}")
    if not functionals:
        raise PreconditionError("solve_renorm_params needs at least one functional")
    M = max(functional_norm(f) for f in functionals)
    if M == 0:
        raise PreconditionError("Slice functionals must be nonzero")
    limits = [eps / 2, gamma * (1 - eps) / (7 - 2 * eps)]
    if delta_tilde is not None:
        delta_tilde = to_scalar(delta_tilde)
        limits.append(delta_tilde / M)
    rho = RENORM_SLACK * min(limits)
    delta = rho * M / 2
    if delta_tilde is None:
        delta_tilde = 3 * rho * M / 2
    if weights is None:
        weights = [Fraction(1, len(functionals))] * len(functionals)
    return RenormParams(eps, gamma, rho, delta, delta_tilde, tuple(functionals), tuple(weights))
