"""
Re-verify a certificate from its JSON payload alone.

Nothing here rebuilds a ledger or searches for witnesses. Slices, U-sets and
balls carried in the payload are rebuilt from the functionals, depths and
parameters beside them and compared as hulls; every claimed diameter is
recomputed from the rebuilt parts. The recomputed verdict must match the
recorded one.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from src.common.errors import PreconditionError, StructuralError
from src.common.exact_lp import to_scalar
from src.common.protocol import decode_functional, decode_polytope, decode_scalar, decode_vector
from src.common.seqspace import (
    PNormHandle,
    SeqVector,
    basis_vector,
    c_model,
    gauge_model,
    pair,
    product_model,
    sup_norm,
    vector_norm,
)
from src.experiments.certificates import Certificate, CertificateKind
from src.experiments.lemmas import _lift_first
from src.experiments.poulsen import in_neighbourhood
from src.experiments.renorming import closed_u_sets, lift_to_ball, min_A_weight, u_threshold
from src.experiments.slices import factor_l1, slice_of
from src.geometry.constructions import (
    BallGenerators,
    RenormParams,
    box_corners,
    build_l1_sum_ball,
    build_product_ball_p1,
)
from src.geometry.polytope import VPolytope, combo_diameter, contains, gauge, hull_equal, hull_of, in_hull, support

logger = logging.getLogger(__name__)


@dataclass
class RecheckReport:
    kind: CertificateKind
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def agrees(self, cert: Certificate) -> bool:
        return self.passed == cert.passed


def _power(model, x: SeqVector) -> Fraction:
    """p-th power of the product norm (the norm itself for p = 1)."""
    value = vector_norm(model, x)
    return value.power_sum if isinstance(value, PNormHandle) else value


def _pair_matches(distance: Fraction, bound: Fraction, exact: bool) -> bool:
    return distance == bound if exact else distance <= bound


# -------------------------
# Per-kind rechecks
# -------------------------
def _prop21(cert: Certificate) -> dict:
    params, wit = cert.parameters, cert.witnesses
    p, d_each = int(params["p"]), int(params["d_each"])
    eps_prime = decode_scalar(params["eps_prime"])
    model = product_model(d_each, p)
    k = int(wit["k"])

    dual_ok, sphere_ok, bumps_ok = True, True, True
    S = T = Fraction(0)
    rows = []
    for row in wit["slices"]:
        f = decode_functional(row["functional"])
        alpha, w = decode_scalar(row["alpha"]), decode_scalar(row["weight"])
        s, t, z = decode_scalar(row["s"]), decode_scalar(row["t"]), decode_vector(row["z"])
        U, a_hat, b_hat = decode_scalar(row["U"]), decode_scalar(row["a_hat"]), decode_scalar(row["b_hat"])
        a, b = factor_l1(f, d_each)
        if p == 1:
            dual_ok &= U >= max(a, b)
        else:
            dual_ok &= a_hat ** (p - 1) >= a ** p and b_hat ** (p - 1) >= b ** p
            dual_ok &= U ** p >= (a_hat + b_hat) ** (p - 1)
        sphere_ok &= 1 - eps_prime < s ** p + t ** p <= 1
        coords = [Fraction(0)] * (2 * d_each)
        coords[k - 1], coords[d_each + k - 1] = s, t
        bump = SeqVector(tuple(coords))
        for point in (z + bump, z - bump):
            bumps_ok &= _power(model, point) <= 1 and pair(f, point) > U - alpha
        S += w * s
        T += w * t
        rows.append((w, s))

    coords = [Fraction(0)] * (2 * d_each)
    coords[k - 1], coords[d_each + k - 1] = 2 * S, 2 * T
    difference = decode_vector(wit["difference"])
    power_sum = decode_scalar(wit["power_sum"])
    half = (1 - eps_prime) / 2
    t_w = sum((w for w, s in rows if s ** p >= half), Fraction(0))
    split_bound = 2 ** (p - 1) * (1 - eps_prime) * (t_w ** p + (1 - t_w) ** p)
    return {
        "dual_upper_bounds": dual_ok,
        "sphere_points": sphere_ok,
        "bumped_points_in_slices": bumps_ok,
        "difference_matches": difference == SeqVector(tuple(coords)),
        "power_sum_matches": _power(model, difference) == power_sum,
        "split_bound": power_sum >= split_bound >= 1 - eps_prime,
        "bound_is_one_minus_eps": isinstance(cert.bound, PNormHandle) and cert.bound.power_sum == 1 - eps_prime,
    }


def _weights_convex(weights: list) -> bool:
    return bool(weights) and all(w >= 0 for w in weights) and sum(weights) == 1


def _same_slices(claimed: list, rebuilt: list) -> bool:
    return len(claimed) == len(rebuilt) and all(hull_equal(S, R) for S, R in zip(claimed, rebuilt))


def _prop21_exact(cert: Certificate) -> dict:
    wit = cert.witnesses
    ball = build_product_ball_p1(int(cert.parameters["d_each"]))
    functionals = [decode_functional(f) for f in wit["functionals"]]
    alphas = [decode_scalar(a) for a in wit["alphas"]]
    weights = [decode_scalar(w) for w in wit["weights"]]
    slices = [decode_polytope(S) for S in wit["slices"]]
    x, y = (decode_vector(v) for v in wit["pair"])
    bound = to_scalar(cert.bound)
    rebuilt = [slice_of(ball, f, a) for f, a in zip(functionals, alphas)]
    recomputed = combo_diameter(list(zip(weights, rebuilt)), ball.model)
    return {
        "weights_convex": _weights_convex(weights) and len(weights) == len(rebuilt),
        "slices_match": _same_slices(slices, rebuilt),
        "diameter_recomputed": recomputed.value == bound,
        "pair_attains_bound": vector_norm(ball.model, x - y) == bound,
        "at_least_one": bound >= 1,
    }


def _k0_open(cert: Certificate) -> dict:
    wit = cert.witnesses
    K = decode_polytope(wit["K"])
    center = decode_vector(wit["center"])
    functionals = [decode_functional(f) for f in wit["functionals"]]
    radius = decode_scalar(cert.parameters["radius"])
    g, bump = (decode_vector(v) for v in wit["pair"])
    diam = max((vector_norm(K.model, v - w) for v, w in itertools.combinations(K.vertices, 2)), default=Fraction(0))
    return {
        "g_in_U": in_neighbourhood(functionals, center, radius, g),
        "bump_in_U": in_neighbourhood(functionals, center, radius, bump),
        "g_in_K": contains(K, g),
        "bump_in_K": contains(K, bump),
        "distance_is_one": vector_norm(K.model, bump - g) == 1 == to_scalar(cert.bound),
        "diam_K_is_one": diam == 1,
    }


def _k0_combo(cert: Certificate) -> dict:
    wit = cert.witnesses
    K = decode_polytope(wit["K"])
    alpha = decode_scalar(cert.parameters["alpha"])
    functionals = [decode_functional(f) for f in wit["functionals"]]
    weights = [decode_scalar(w) for w in wit["weights"]]
    slices = [decode_polytope(S) for S in wit["slices"]]
    exposed = [decode_vector(v) for v in wit["exposed"]]
    x, y = (decode_vector(v) for v in wit["pair"])
    bound = to_scalar(cert.bound)
    rebuilt = [slice_of(K, f, alpha) for f in functionals]
    recomputed = combo_diameter(list(zip(weights, rebuilt)), K.model)
    return {
        "functionals_normalised": all(support(K, f) == 1 for f in functionals),
        "weights_convex": _weights_convex(weights) and len(weights) == len(rebuilt),
        "slices_match": _same_slices(slices, rebuilt),
        "exposed_in_slices": len(exposed) == len(rebuilt) and all(contains(S, v) for S, v in zip(rebuilt, exposed)),
        "diameter_recomputed": recomputed.value == bound,
        "pair_attains_bound": vector_norm(K.model, x - y) == bound,
        "below_one": bound < 1,
    }


def _thm_combo_params(params: dict, functionals: list, weights: list) -> Optional[RenormParams]:
    values = [decode_scalar(params[key]) for key in ("eps", "gamma", "rho", "delta", "delta_tilde")]
    try:
        return RenormParams(*values, functionals, weights)
    except PreconditionError as e:
        logger.debug("thm combo parameters rejected: %s", e)
        return None


def _thm_combo_rebuilt(cert: Certificate, ball: VPolytope, K: VPolytope, U_sets: list) -> dict:
    """Checks that re-derive B_eps, the U_i and both diameters from K and the parameters."""
    wit = cert.witnesses
    eps = decode_scalar(cert.parameters["eps"])
    A = [decode_vector(a) for a in wit["A"]]
    functionals = [decode_functional(f) for f in wit["functionals"]]
    weights = [decode_scalar(w) for w in wit["weights"]]
    lifted = sorted(lift_to_ball(v) for v in K.vertices)
    generators = lifted + [-a for a in lifted] + box_corners(K.model.dim, eps)
    checks = {
        "A_lifts_K": sorted(A) == lifted,
        "ball_is_B_eps": hull_equal(ball, hull_of(ball.model, generators)),
        "functionals_normalised": all(support(K, f) == 1 for f in functionals),
    }
    params = _thm_combo_params(cert.parameters, functionals, weights)
    checks["parameters_valid"] = params is not None
    if params is None:
        return checks

    thresholds = [decode_scalar(v) for v in wit["thresholds"]]
    checks["thresholds_match"] = thresholds == [u_threshold(f, params) for f in functionals]
    checks["limit_cap_matches"] = decode_scalar(wit["limit_cap"]) == -1 + params.rho ** 2
    rebuilt = closed_u_sets(ball, params)
    checks["U_sets_match"] = _same_slices(U_sets, rebuilt)

    base = combo_diameter([(w, slice_of(K, f, params.delta_tilde)) for w, f in zip(weights, functionals)], K.model)
    checks["base_recomputed"] = base.value == decode_scalar(wit["base_diameter"])
    checks["base_below_limit"] = base.value < (1 - eps) * params.gamma / 4

    result = combo_diameter(list(zip(weights, rebuilt)), gauge_model(ball))
    checks["diameter_recomputed"] = result.value == to_scalar(cert.bound) and result.exact == cert.exact
    method = "exact" if result.exact else "sum_of_diameters"
    checks["method_recorded"] = cert.parameters.get("diameter_method") == method
    return checks


def _thm_combo(cert: Certificate) -> dict:
    params, wit = cert.parameters, cert.witnesses
    eps, gamma, rho = (decode_scalar(params[key]) for key in ("eps", "gamma", "rho"))
    ball = decode_polytope(wit["ball"])
    K = decode_polytope(wit["K"])
    A = [decode_vector(a) for a in wit["A"]]
    gens = BallGenerators(tuple(A), tuple(-a for a in A), tuple(box_corners(ball.model.dim, eps)))
    functionals = [decode_functional(f) for f in wit["functionals"]]
    thresholds = [decode_scalar(v) for v in wit["thresholds"]]
    limit_cap = decode_scalar(wit["limit_cap"])
    U_sets = [decode_polytope(U) for U in wit["U"]]
    points = [decode_vector(v) for v in wit["nonempty"]]
    x, y = (decode_vector(v) for v in wit["pair"])

    def in_U(j: int, v: SeqVector, strict: bool) -> bool:
        value = pair(functionals[j], v)
        above = value > thresholds[j] if strict else value >= thresholds[j]
        return above and v.limit <= limit_cap and contains(ball, v)

    floor = 1 - rho / 2
    lambda_ok = True
    for j, (U, v) in enumerate(zip(U_sets, points)):
        for w in (v,) + U.vertices:
            m = min_A_weight(gens, w)
            lambda_ok &= m is not None and m > floor
    bound = to_scalar(cert.bound)
    return {
        "witnesses_in_ball": all(in_U(j, v, strict=True) for j, v in enumerate(points)),
        "U_vertices_in_ball": all(in_U(j, v, strict=False) for j, U in enumerate(U_sets) for v in U.vertices),
        "lambda_above_floor": lambda_ok,
        "pair_within_bound": _pair_matches(gauge(ball, x - y), bound, cert.exact),
        "diameter_within_gamma": bound <= gamma,
        **_thm_combo_rebuilt(cert, ball, K, U_sets),
    }


def _thm_open(cert: Certificate) -> dict:
    wit = cert.witnesses
    ball = decode_polytope(wit["ball"])
    center = decode_vector(wit["center"])
    functionals = [decode_functional(f) for f in wit["functionals"]]
    radius = decode_scalar(cert.parameters["radius"])
    x, y = (decode_vector(v) for v in wit["pair"])
    k = int(wit["k"])
    e_k = basis_vector(c_model(ball.model.dim), k)
    z, x0 = decode_vector(wit["base"]), decode_vector(wit["x0"])
    lam = decode_scalar(wit["lambda"])
    return {
        "base_in_U": in_neighbourhood(functionals, center, radius, z),
        "pair_straddles_base": x == z + e_k.scale(1 + lam) and y == z - e_k.scale(1 - lam),
        "bump_start_in_unit_ball": sup_norm(x0.coords + (x0.limit,)) <= 1 and x0[k] == 0,
        "difference_is_2e_k": x - y == e_k.scale(2),
        "x_in_U": in_neighbourhood(functionals, center, radius, x),
        "y_in_U": in_neighbourhood(functionals, center, radius, y),
        "x_in_ball": contains(ball, x),
        "y_in_ball": contains(ball, y),
        "gauge_is_two": gauge(ball, x - y) == 2 == to_scalar(cert.bound),
    }


def _lemma24(cert: Certificate) -> dict:
    wit = cert.witnesses
    A, B, left = (decode_polytope(wit[key]) for key in ("A", "B", "left"))
    model = A.model
    minus_A = [-a for a in A.vertices]
    R1 = [v.point(model) for v in list(A.vertices) + list(B.vertices)]
    R2 = [v.point(model) for v in minus_A + list(B.vertices)]
    samples = [decode_vector(v) for v in wit["samples"]]

    dec = wit["decomposition"]
    l1, l2, l3 = (decode_scalar(v) for v in dec["lambdas"])
    a1 = decode_vector(dec["a1"]) if dec["a1"] is not None else None
    a2 = decode_vector(dec["a2"]) if dec["a2"] is not None else None
    b = decode_vector(dec["b"]) if dec["b"] is not None else None
    point = decode_vector(dec["point"])
    rebuilt = point - point
    if l1 > l2:
        rebuilt = rebuilt + a1.scale(l1 - l2)
    elif l2 > l1:
        rebuilt = rebuilt - a2.scale(l2 - l1)
    half_ok = True
    if l1 and l2:
        half = (a1 - a2).scale(Fraction(1, 2))
        half_ok = contains(B, half)
        rebuilt = rebuilt + half.scale(2 * min(l1, l2))
    if b is not None:
        rebuilt = rebuilt + b.scale(l3)

    return {
        "samples_in_left": all(contains(left, x) for x in samples),
        "left_in_union": all(in_hull(R1, x.point(model)) or in_hull(R2, x.point(model)) for x in samples),
        "right_in_left": all(contains(left, v) for v in list(A.vertices) + minus_A + list(B.vertices)),
        "decomposition_reproduces": l1 + l2 + l3 == 1 and rebuilt == point,
        "half_difference_in_B": half_ok,
    }


def _l1sum_inclusion(cert: Certificate) -> dict:
    params, wit = cert.parameters, cert.witnesses
    alpha, mu = decode_scalar(params["alpha"]), decode_scalar(params["mu"])
    B1, B2 = decode_polytope(wit["B1"]), decode_polytope(wit["B2"])
    Z = build_l1_sum_ball(B1, B2)
    f = decode_functional(wit["functional"])
    d1 = B1.model.dim
    rows_ok = True
    for row in wit["vertices"]:
        v = decode_vector(row["vertex"])
        x, y = SeqVector(v.coords[:d1]), SeqVector(v.coords[d1:])
        rows_ok &= contains(Z, v) and pair(f, x) > 1 - alpha and gauge(B1, x) <= 1 and gauge(B2, y) <= mu
    return {
        "functional_normalised": support(B1, f) == 1,
        "depths_ordered": 0 < mu < alpha,
        "vertices_comply": rows_ok,
    }


def _l1sum_transfer(cert: Certificate) -> dict:
    params, wit = cert.parameters, cert.witnesses
    mu = decode_scalar(params["mu"])
    B1, B2 = decode_polytope(wit["B1"]), decode_polytope(wit["B2"])
    Z = build_l1_sum_ball(B1, B2)
    functionals = [decode_functional(f) for f in wit["functionals"]]
    depths = [decode_scalar(d) for d in wit["depths"]]
    weights = [decode_scalar(w) for w in wit["weights"]]
    factor = decode_scalar(wit["factor_diameter"])
    lifted = decode_scalar(wit["lifted_diameter"])
    lifted_exact = wit["lifted_exact"] is True
    fx, fy = (decode_vector(v) for v in wit["factor_pair"])
    lx, ly = (decode_vector(v) for v in wit["lifted_pair"])
    bound = to_scalar(cert.bound)
    d2 = B2.model.dim
    factor_again = combo_diameter(
        [(w, slice_of(B1, f, d)) for w, f, d in zip(weights, functionals, depths)], gauge_model(B1)
    )
    lifted_again = combo_diameter(
        [(w, slice_of(Z, _lift_first(f, d2), mu)) for w, f in zip(weights, functionals)], gauge_model(Z)
    )
    return {
        "functionals_normalised": all(support(B1, f) == 1 for f in functionals),
        "weights_convex": _weights_convex(weights) and len(weights) == len(functionals) == len(depths),
        "mu_below_depths": 0 < mu < min(depths, default=mu),
        "factor_recomputed": factor_again.exact and factor_again.value == factor,
        "lifted_recomputed": lifted_again.value == lifted and lifted_again.exact == lifted_exact == cert.exact,
        "factor_pair_attains": gauge(B1, fx - fy) == factor,
        "lifted_pair_attains": _pair_matches(gauge(Z, lx - ly), lifted, lifted_exact),
        "bound_is_factor_plus_2mu": bound == factor + 2 * mu,
        "lifted_within_bound": lifted <= bound,
    }


_HANDLERS = {
    CertificateKind.PROP21_LOWER_BOUND: _prop21,
    CertificateKind.PROP21_EXACT_P1: _prop21_exact,
    CertificateKind.K0_OPEN_DIAMETER: _k0_open,
    CertificateKind.K0_SMALL_COMBO: _k0_combo,
    CertificateKind.THM_COMBO_UPPER: _thm_combo,
    CertificateKind.THM_OPEN_DIAMETER: _thm_open,
    CertificateKind.LEMMA24_EQUALITY: _lemma24,
    CertificateKind.L1SUM_INCLUSION: _l1sum_inclusion,
    CertificateKind.L1SUM_COMBO_TRANSFER: _l1sum_transfer,
}


def recheck(cert: Certificate) -> RecheckReport:
    """
    Re-evaluate every claim of cert from its payload.

    Raises:
        StructuralError: the payload is missing a field the kind needs
    """
    try:
        checks = _HANDLERS[cert.kind](cert)
    except KeyError as e:
        raise StructuralError(f"{cert.kind.value} certificate payload is missing {e}")
    report = RecheckReport(cert.kind, checks)
    logger.debug("recheck %s: %s", cert.kind.value, checks)
    if not report.agrees(cert):
        logger.warning("recheck of %s gives %s, certificate says %s", cert.kind.value, report.passed, cert.verdict)
    return report
