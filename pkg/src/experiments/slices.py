"""
Slices and the p-product lower bound.

For X = c0 (+)_p c0 every convex combination of slices of the unit ball has
diameter at least 1. The certificate follows the argument step by step:

  1. for each slice pick z_i = (s sgn x*, t sgn y*) on the p-sphere with
     f_i(z_i) above the slice threshold and s^p + t^p > 1 - eps'
  2. pick one k beyond every support such that z_i +/- (s_i e_k, t_i e_k)
     stay in their slices
  3. the two combinations differ by 2 sum lam_i (s_i e_k, t_i e_k), whose
     p-th power norm is (2S)^p + (2T)^p >= 2^(p-1)(1 - eps')(t^p + (1-t)^p)
     >= 1 - eps', where t is the weight of {i : s_i^p >= (1 - eps')/2}
"""

import logging
from fractions import Fraction
from typing import Sequence

from config import DEFAULT_EPS_PRIME, MAX_CANDIDATE_SUMS, MAX_SPHERE_GRID, SPHERE_GRID
from src.common.errors import PreconditionError, SearchFailure, StructuralError, TruncationTooSmallError
from src.common.exact_lp import GE, check_power, root_bracket, to_scalar
from src.common.protocol import (
    encode_functional,
    encode_polytope,
    encode_scalar,
    encode_vector,
)
from src.common.seqspace import Functional, PNormHandle, SeqVector, pair, product_model, vector_norm
from src.experiments.certificates import Certificate, CertificateKind, SliceSpec, check_combination
from src.geometry.constructions import build_product_ball_p1
from src.geometry.polytope import DiameterResult, HalfSpace, VPolytope, clip, combo_diameter, prune, support

logger = logging.getLogger(__name__)


def slice_of(B: VPolytope, f: Functional, alpha) -> VPolytope:
    """
    Closed slice {x in B : f(x) >= sup_B f - alpha}.

    The vertex attaining the support always survives, so the result is never
    empty. Depths beyond the width of B simply return B.
    """
    alpha = to_scalar(alpha)
    if alpha <= 0:
        raise PreconditionError(f"Slice depth must be positive, got {alpha}")
    if f.is_zero():
        raise PreconditionError("Slice functional must be nonzero")
    B = prune(B)
    return clip(B, HalfSpace(f, support(B, f) - alpha, GE))


# -------------------------
# p-product sphere helpers
# -------------------------
def _sign(v: Fraction) -> int:
    return (v > 0) - (v < 0)


def factor_l1(f: Functional, d_each: int) -> tuple:
    """(||x*||_1, ||y*||_1) for f = (x*, y*)."""
    a = sum((abs(c) for c in f.coeffs[:d_each]), Fraction(0))
    b = sum((abs(c) for c in f.coeffs[d_each:]), Fraction(0))
    return a, b


def product_sup_upper(a: Fraction, b: Fraction, p: int) -> tuple:
    """
    Rational U >= ||(a, b)||_q with 1/p + 1/q = 1 (the sup of f over the p-ball).

    Returns:
        (U, a_hat, b_hat) with a_hat >= a^(p/(p-1)), b_hat >= b^(p/(p-1)),
        U >= (a_hat + b_hat)^((p-1)/p); for p = 1, (max(a, b), a, b)
    """
    if p == 1:
        return max(a, b), a, b
    a_hat = root_bracket(a, p, p - 1)[1]
    b_hat = root_bracket(b, p, p - 1)[1]
    U = root_bracket(a_hat + b_hat, p - 1, p)[1]
    return U, a_hat, b_hat


def _sphere_point(a: Fraction, b: Fraction, p: int, grid: int) -> tuple:
    """Grid point (s, t) with s^p + t^p <= 1 maximising s a + t b."""
    best = None
    for k in range(grid + 1):
        s = Fraction(k, grid)
        rest = 1 - s ** p
        t = rest if p == 1 else root_bracket(rest, 1, p)[0]
        value = s * a + t * b
        if best is None or value > best[2]:
            best = (s, t, value)
    return best


def _signed_point(f: Functional, d_each: int, s: Fraction, t: Fraction) -> SeqVector:
    x = tuple(s * _sign(c) for c in f.coeffs[:d_each])
    y = tuple(t * _sign(c) for c in f.coeffs[d_each:])
    return SeqVector(x + y)


def _bump(d_each: int, k: int, s: Fraction, t: Fraction) -> SeqVector:
    coords = [Fraction(0)] * (2 * d_each)
    coords[k - 1] = s
    coords[d_each + k - 1] = t
    return SeqVector(tuple(coords))


def _factor_support(z: SeqVector, d_each: int) -> int:
    """Largest factor-local index where either factor of z is nonzero (0 if none)."""
    top = 0
    for j in range(d_each):
        if z.coords[j] or z.coords[d_each + j]:
            top = j + 1
    return top


def prop21_certificate(p: int, specs: Sequence[SliceSpec], eps_prime=DEFAULT_EPS_PRIME, d_each: int = None) -> Certificate:
    """
    Certify diam(sum lam_i S_i) >= (1 - eps')^(1/p) in the unit ball of c0 (+)_p c0.

    Raises:
        UnsupportedError: non-integer p
        TruncationTooSmallError: no bump coordinate left below d_each
        SearchFailure: the sphere grid never entered some slice
    """
    p = check_power(p)
    eps_prime = to_scalar(eps_prime)
    if not 0 < eps_prime < 1:
        raise PreconditionError(f"eps' must lie in (0, 1), got {eps_prime}")
    check_combination(specs)
    dims = {s.functional.dim for s in specs}
    if len(dims) != 1:
        raise StructuralError(f"Slice functionals have mixed dimensions {sorted(dims)}")
    dim = dims.pop()
    if d_each is None:
        d_each = dim // 2
    if dim != 2 * d_each:
        raise StructuralError(f"Functionals have {dim} coefficients, expected 2 * {d_each}")
    model = product_model(d_each, p)

    chosen = []
    for spec in specs:
        f = spec.functional
        a, b = factor_l1(f, d_each)
        U, a_hat, b_hat = product_sup_upper(a, b, p)
        grid = SPHERE_GRID
        while True:
            s, t, value = _sphere_point(a, b, p, grid)
            if value > U - spec.alpha and s ** p + t ** p > 1 - eps_prime:
                break
            if grid >= MAX_SPHERE_GRID:
                raise SearchFailure(f"No sphere point enters the slice of depth {spec.alpha} at grid {grid}")
            grid *= 2
        chosen.append((spec, _signed_point(f, d_each, s, t), s, t, U, a_hat, b_hat))

    k0 = max(_factor_support(z, d_each) for _, z, *_ in chosen)
    k = None
    for cand in range(k0 + 1, d_each + 1):
        ok = True
        for spec, z, s, t, U, _, _ in chosen:
            f = spec.functional
            drift = abs(s * f.coeffs[cand - 1] + t * f.coeffs[d_each + cand - 1])
            if not pair(f, z) - drift > U - spec.alpha:
                ok = False
                break
        if ok:
            k = cand
            break
    if k is None:
        raise TruncationTooSmallError(
            f"No bump coordinate in {k0 + 1}..{d_each}; enlarge d_each (supports reach {k0})"
        )

    S = sum((spec.weight * s for spec, _, s, *_ in chosen), Fraction(0))
    T = sum((spec.weight * t for spec, _, _, t, *_ in chosen), Fraction(0))
    difference = _bump(d_each, k, 2 * S, 2 * T)
    power_sum = (2 * S) ** p + (2 * T) ** p
    half = (1 - eps_prime) / 2
    heavy = [i for i, (_, _, s, *_) in enumerate(chosen) if s ** p >= half]
    t_w = sum((chosen[i][0].weight for i in heavy), Fraction(0))
    split_bound = 2 ** (p - 1) * (1 - eps_prime) * (t_w ** p + (1 - t_w) ** p)
    handle = vector_norm(model, difference)
    power = handle.power_sum if isinstance(handle, PNormHandle) else handle
    passed = power == power_sum and power_sum >= split_bound >= 1 - eps_prime
    logger.info("prop21 p=%d: power sum %s, split bound %s, k=%d", p, power_sum, split_bound, k)

    witnesses = {
        "k": k,
        "slices": [
            {
                "functional": encode_functional(spec.functional),
                "alpha": encode_scalar(spec.alpha),
                "weight": encode_scalar(spec.weight),
                "s": encode_scalar(s),
                "t": encode_scalar(t),
                "z": encode_vector(z),
                "U": encode_scalar(U),
                "a_hat": encode_scalar(a_hat),
                "b_hat": encode_scalar(b_hat),
            }
            for spec, z, s, t, U, a_hat, b_hat in chosen
        ],
        "difference": encode_vector(difference),
        "power_sum": encode_scalar(power_sum),
        "heavy": heavy,
        "heavy_weight": encode_scalar(t_w),
        "split_bound": encode_scalar(split_bound),
    }
    return Certificate(
        kind=CertificateKind.PROP21_LOWER_BOUND,
        bound=PNormHandle(1 - eps_prime, p),
        passed=passed,
        parameters={"p": p, "eps_prime": encode_scalar(eps_prime), "d_each": d_each, "slices": len(specs)},
        witnesses=witnesses,
    )


# -------------------------
# Exact p = 1
# -------------------------
def prop21_exact_p1(specs: Sequence[SliceSpec], d_each: int, sum_cap: int = MAX_CANDIDATE_SUMS) -> DiameterResult:
    """Exact diameter of sum lam_i S_i inside the polytope ball of c0 (+)_1 c0."""
    check_combination(specs)
    ball = build_product_ball_p1(d_each)
    parts = [(spec.weight, slice_of(ball, spec.functional, spec.alpha)) for spec in specs]
    return combo_diameter(parts, ball.model, sum_cap=sum_cap)


def prop21_exact_p1_certificate(
    specs: Sequence[SliceSpec], d_each: int, sum_cap: int = MAX_CANDIDATE_SUMS
) -> Certificate:
    """Wraps prop21_exact_p1; passes iff the exact diameter is at least 1."""
    check_combination(specs)
    ball = build_product_ball_p1(d_each)
    slices = [slice_of(ball, spec.functional, spec.alpha) for spec in specs]
    result = combo_diameter([(spec.weight, S) for spec, S in zip(specs, slices)], ball.model, sum_cap=sum_cap)
    return Certificate(
        kind=CertificateKind.PROP21_EXACT_P1,
        bound=result.value,
        passed=result.value >= 1,
        parameters={"p": 1, "d_each": d_each, "slices": len(specs)},
        witnesses={
            "functionals": [encode_functional(spec.functional) for spec in specs],
            "alphas": [encode_scalar(spec.alpha) for spec in specs],
            "weights": [encode_scalar(spec.weight) for spec in specs],
            "slices": [encode_polytope(S) for S in slices],
            "pair": [encode_vector(result.witness[0]), encode_vector(result.witness[1])],
        },
    )
