"""
Seeded random instances for the randomized suites.

Every generator takes a random.Random so a suite is reproducible from one
seed; nothing here touches the global random state.
"""

import itertools
import random
from fractions import Fraction

from config import COEFF_RANGE, DEFAULT_EPS, MAX_RANDOM_DIM, MAX_RANDOM_SLICES, WITNESS_LAMBDAS
from src.common.exact_lp import to_scalar
from src.common.seqspace import Functional, SeqVector, c0_model
from src.experiments.certificates import SliceSpec
from src.experiments.slices import factor_l1
from src.geometry.constructions import StageLedger
from src.geometry.polytope import VPolytope, hull_of


def random_coefficients(rng: random.Random, count: int, coeff_range: int = COEFF_RANGE) -> list:
    """Integer coefficients in [-range, range], not all zero."""
    coeffs = [rng.randint(-coeff_range, coeff_range) for _ in range(count)]
    if not any(coeffs):
        coeffs[rng.randrange(count)] = rng.choice((-1, 1)) * rng.randint(1, coeff_range)
    return coeffs


def random_functional(rng: random.Random, dim: int, top: int, limit: bool = False) -> Functional:
    """Functional on coordinates 1..top of a dim-coordinate model (optionally with a limit coefficient)."""
    coeffs = random_coefficients(rng, top) + [0] * (dim - top)
    limit_coeff = rng.randint(-COEFF_RANGE, COEFF_RANGE) if limit else 0
    return Functional(tuple(Fraction(c) for c in coeffs), Fraction(limit_coeff))


def random_weights(rng: random.Random, n: int) -> list:
    raw = [rng.randint(1, 4) for _ in range(n)]
    total = sum(raw)
    return [Fraction(r, total) for r in raw]


def random_prop21_specs(
    rng: random.Random,
    max_slices: int = MAX_RANDOM_SLICES,
    max_dim: int = MAX_RANDOM_DIM,
) -> tuple:
    """
    (d_each, specs) with functionals supported below the last coordinate of
    each factor, so a bump coordinate always exists.
    """
    d_each = rng.randint(2, max_dim)
    n = rng.randint(1, max_slices)
    specs = []
    for w in random_weights(rng, n):
        x = random_coefficients(rng, d_each - 1) + [0]
        y = [rng.randint(-COEFF_RANGE, COEFF_RANGE) for _ in range(d_each - 1)] + [0]
        f = Functional(tuple(Fraction(c) for c in x + y))
        a, b = factor_l1(f, d_each)
        alpha = max(a, b) * Fraction(rng.randint(1, 7), 8)
        specs.append(SliceSpec(f, alpha, w))
    return d_each, specs


def random_k0_neighbourhood(rng: random.Random, ledger: StageLedger) -> tuple:
    """(center_index, functionals, radius) around a stage-(N-1) net point."""
    prev = ledger.stage(ledger.N - 1)
    center_index = rng.randint(1, prev.l)
    functionals = [random_functional(rng, ledger.model.dim, prev.m) for _ in range(rng.randint(0, 2))]
    radius = Fraction(rng.randint(1, 8), 8)
    return center_index, functionals, radius


def random_thm_open_neighbourhood(rng: random.Random, ledger: StageLedger, eps=DEFAULT_EPS) -> tuple:
    """
    (functionals, center, radius) with center lam (2 g_i - 1) + (1 - lam) b in the c-model.

    Half the time b is a random box point vanishing at k = m_(N-1) + i, so
    lam = 0 centres sit on the box itself; otherwise b = 0.
    """
    eps = to_scalar(eps)
    prev = ledger.stage(ledger.N - 1)
    dim = ledger.model.dim
    i = rng.randint(1, prev.l)
    k = prev.m + i
    lam = rng.choice(WITNESS_LAMBDAS + (Fraction(0),))
    g = ledger.nets[i - 1]
    a = SeqVector(tuple(2 * c - 1 for c in g.coords), Fraction(-1))
    if rng.randint(0, 1):
        coords = tuple(Fraction(0) if c == k else Fraction(rng.randint(-4, 4), 4) for c in range(1, dim + 1))
        b = SeqVector(coords, (1 - eps) * Fraction(rng.randint(-4, 4), 4))
    else:
        b = SeqVector((Fraction(0),) * dim)
    center = a.scale(lam) + b.scale(1 - lam)
    functionals = [
        random_functional(rng, ledger.model.dim, prev.m, limit=True) for _ in range(rng.randint(1, 2))
    ]
    radius = Fraction(rng.randint(1, 8), 16)
    return functionals, center, radius


def _random_points(rng: random.Random, dim: int, count: int) -> list:
    return [SeqVector(tuple(Fraction(rng.randint(-2, 2), 2) for _ in range(dim))) for _ in range(count)]


def random_lemma24_instance(
    rng: random.Random,
    max_dim: int = MAX_RANDOM_DIM,
    max_vertices: int = 4,
) -> tuple:
    """(A, B) with B = co(B0 U (A - A)/2), so the hypothesis holds."""
    dim = rng.randint(1, max_dim)
    model = c0_model(dim)
    A = hull_of(model, _random_points(rng, dim, rng.randint(1, max_vertices)))
    halves = [(a - b).scale(Fraction(1, 2)) for a, b in itertools.product(A.vertices, repeat=2)]
    B = hull_of(model, _random_points(rng, dim, rng.randint(1, 2)) + halves)
    return A, B


def random_symmetric_ball(rng: random.Random, dim: int) -> VPolytope:
    """co(+-c_j e_j U +-v) with c_j in {1, 2} and one random extra direction."""
    model = c0_model(dim)
    points = []
    for j in range(dim):
        c = Fraction(rng.randint(1, 2))
        coords = [Fraction(0)] * dim
        coords[j] = c
        points.append(SeqVector(tuple(coords)))
    extra = SeqVector(tuple(Fraction(rng.randint(-2, 2)) for _ in range(dim)))
    points.append(extra)
    return hull_of(model, points + [-p for p in points])


def random_l1sum_instance(rng: random.Random, max_dim: int = 2) -> tuple:
    """(B1, B2, f, alpha, mu) with 0 < mu < alpha."""
    B1 = random_symmetric_ball(rng, rng.randint(1, max_dim))
    B2 = random_symmetric_ball(rng, rng.randint(1, max_dim))
    f = random_functional(rng, B1.model.dim, B1.model.dim)
    alpha = Fraction(rng.randint(1, 6), 8)
    mu = alpha * Fraction(rng.randint(1, 3), 4)
    return B1, B2, f, alpha, mu
