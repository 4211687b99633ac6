"""
Truncated models of the sequence spaces c0 and c, their duals and norms.

A SeqVector is (coords, limit). In a c-model the semantics are "every
coordinate beyond dim equals limit", so the truncated unit ball of c is the
box [-1, 1]^(dim+1) and the limit functional is an ordinary coordinate. In a
c0-model the limit is identically 0.

Norm kinds carried by a SpaceModel:
  sup        max(|coords|, |limit|)
  product_p  (||x||_inf^p + ||y||_inf^p)^(1/p) over the split x = coords[:s], y = coords[s:];
             returned as a PNormHandle, never as a rational
  l1sum      ||x||_inf + ||y||_inf over the split
  gauge      Minkowski functional of a symmetric VPolytope (delegated to the polytope engine)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Sequence

from src.common.errors import DomainError, PreconditionError, StructuralError, UnsupportedError
from src.common.exact_lp import Ordering, compare_pth_power, to_scalar

SUP = "sup"
PRODUCT_P = "product_p"
L1SUM = "l1sum"
GAUGE = "gauge"
NORM_KINDS = (SUP, PRODUCT_P, L1SUM, GAUGE)


@dataclass(frozen=True)
class SpaceModel:
    """
    A finite truncation of c0 (has_limit False) or c (has_limit True).

    Args:
        dim: number of explicit coordinates
        has_limit: model c instead of c0
        norm: one of NORM_KINDS
        p: exponent for product_p
        split: first index of the second factor for product_p / l1sum
        ball: unit ball for gauge models
    """

    dim: int
    has_limit: bool = False
    norm: str = SUP
    p: Optional[int] = None
    split: Optional[int] = None
    ball: Any = None

    def __post_init__(self):
        if isinstance(self.dim, bool) or not isinstance(self.dim, int) or self.dim < 1:
            raise StructuralError(f"Model dimension must be a positive integer, got {self.dim!r}")
        if self.norm not in NORM_KINDS:
            raise StructuralError(f"Unknown norm kind {self.norm!r}")
        if self.norm in (PRODUCT_P, L1SUM):
            if self.split is None or not 1 <= self.split < self.dim:
                raise StructuralError(f"{self.norm} needs a split 1 <= s < {self.dim}, got {self.split}")
            if self.has_limit:
                raise StructuralError(f"{self.norm} models are products of c0 truncations")
        if self.norm == PRODUCT_P:
            if isinstance(self.p, bool) or not isinstance(self.p, int):
                raise UnsupportedError(f"product_p needs an integer p, got {self.p!r}")
            if self.p < 1:
                raise DomainError(f"p must be >= 1, got {self.p}")
        if self.norm == GAUGE and self.ball is None:
            raise StructuralError("gauge model needs a ball")

    @property
    def coordinate_count(self) -> int:
        """Coordinates of the full space, the limit included for c-models."""
        return self.dim + (1 if self.has_limit else 0)

    def underlying(self) -> "SpaceModel":
        """Same space with the sup norm (the coordinates the vertices live in)."""
        return SpaceModel(self.dim, self.has_limit)


def c0_model(dim: int) -> SpaceModel:
    return SpaceModel(dim, has_limit=False)


def c_model(dim: int) -> SpaceModel:
    return SpaceModel(dim, has_limit=True)


def product_model(d_each: int, p: int) -> SpaceModel:
    return SpaceModel(2 * d_each, has_limit=False, norm=PRODUCT_P, p=p, split=d_each)


def l1sum_model(d1: int, d2: int) -> SpaceModel:
    return SpaceModel(d1 + d2, has_limit=False, norm=L1SUM, split=d1)


def gauge_model(ball) -> SpaceModel:
    base = ball.model
    return SpaceModel(base.dim, base.has_limit, norm=GAUGE, ball=ball)


# -------------------------
# Vectors and functionals
# -------------------------
@dataclass(frozen=True, order=True)
class SeqVector:
    """Coordinates plus the limit coordinate (0 for c0 vectors)."""

    coords: tuple
    limit: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(to_scalar(v) for v in self.coords))
        object.__setattr__(self, "limit", to_scalar(self.limit))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def point(self, model: SpaceModel) -> tuple:
        """Full coordinate tuple in the model: coords, then limit for c-models."""
        check_vector(model, self)
        return self.coords + ((self.limit,) if model.has_limit else ())

    def _same_shape(self, other: "SeqVector"):
        if self.dim != other.dim:
            raise StructuralError(f"Vector dimensions differ: {self.dim} vs {other.dim}")

    def __add__(self, other: "SeqVector") -> "SeqVector":
        self._same_shape(other)
        return SeqVector(tuple(a + b for a, b in zip(self.coords, other.coords)), self.limit + other.limit)

    def __sub__(self, other: "SeqVector") -> "SeqVector":
        self._same_shape(other)
        return SeqVector(tuple(a - b for a, b in zip(self.coords, other.coords)), self.limit - other.limit)

    def __neg__(self) -> "SeqVector":
        return SeqVector(tuple(-a for a in self.coords), -self.limit)

    def scale(self, t) -> "SeqVector":
        t = to_scalar(t)
        return SeqVector(tuple(t * a for a in self.coords), t * self.limit)

    def __getitem__(self, k: int) -> Fraction:
        """1-based coordinate access, matching e_1, e_2, ..."""
        if not 1 <= k <= self.dim:
            raise StructuralError(f"Coordinate {k} outside 1..{self.dim}")
        return self.coords[k - 1]

    def support(self) -> set:
        """1-based indices of nonzero coordinates."""
        return {k + 1 for k, v in enumerate(self.coords) if v}


@dataclass(frozen=True)
class Functional:
    """l1-type coefficients plus the coefficient a_inf of the limit functional."""

    coeffs: tuple
    limit_coeff: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(to_scalar(v) for v in self.coeffs))
        object.__setattr__(self, "limit_coeff", to_scalar(self.limit_coeff))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def scale(self, t) -> "Functional":
        t = to_scalar(t)
        return Functional(tuple(t * a for a in self.coeffs), t * self.limit_coeff)

    def __neg__(self) -> "Functional":
        return self.scale(-1)

    def __add__(self, other: "Functional") -> "Functional":
        if self.dim != other.dim:
            raise StructuralError(f"Functional dimensions differ: {self.dim} vs {other.dim}")
        return Functional(
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.limit_coeff + other.limit_coeff
        )

    def support(self) -> set:
        return {k + 1 for k, v in enumerate(self.coeffs) if v}

    def is_zero(self) -> bool:
        return not any(self.coeffs) and not self.limit_coeff


def check_vector(model: SpaceModel, x: SeqVector):
    if x.dim != model.dim:
        raise StructuralError(f"Vector has {x.dim} coordinates, model has {model.dim}")
    if not model.has_limit and x.limit != 0:
        raise StructuralError(f"c0-model vectors have limit 0, got {x.limit}")


def basis_vector(model: SpaceModel, k: int) -> SeqVector:
    """e_k, 1-based."""
    if not 1 <= k <= model.dim:
        raise StructuralError(f"e_{k} outside 1..{model.dim}")
    coords = [Fraction(0)] * model.dim
    coords[k - 1] = Fraction(1)
    return SeqVector(tuple(coords))


def zero_vector(model: SpaceModel) -> SeqVector:
    return SeqVector(tuple([Fraction(0)] * model.dim))


def ones_vector(model: SpaceModel) -> SeqVector:
    """The all-ones sequence; limit 1, so only meaningful in c-models."""
    if not model.has_limit:
        raise StructuralError("The all-ones sequence lives in c, not c0")
    return SeqVector(tuple([Fraction(1)] * model.dim), Fraction(1))


def basis_functional(model: SpaceModel, k: int) -> Functional:
    """e_k^*, 1-based."""
    if not 1 <= k <= model.dim:
        raise StructuralError(f"e_{k}^* outside 1..{model.dim}")
    coeffs = [Fraction(0)] * model.dim
    coeffs[k - 1] = Fraction(1)
    return Functional(tuple(coeffs))


def limit_functional(model: SpaceModel) -> Functional:
    return Functional(tuple([Fraction(0)] * model.dim), Fraction(1))


def embed(x: SeqVector, new_dim: int) -> SeqVector:
    """Extend to new_dim coordinates; the new coordinates take the limit value (0 in c0)."""
    if new_dim < x.dim:
        raise StructuralError(f"Cannot embed a {x.dim}-vector into {new_dim} coordinates")
    return SeqVector(x.coords + (x.limit,) * (new_dim - x.dim), x.limit)


def embed_functional(f: Functional, new_dim: int) -> Functional:
    if new_dim < f.dim:
        raise StructuralError(f"Cannot embed a {f.dim}-functional into {new_dim} coordinates")
    return Functional(f.coeffs + (Fraction(0),) * (new_dim - f.dim), f.limit_coeff)


# -------------------------
# Norms and pairing
# -------------------------
def pair(f: Functional, x: SeqVector) -> Fraction:
    """sum a_k x(k) + a_inf * L."""
    if f.dim != x.dim:
        raise StructuralError(f"Functional has {f.dim} coefficients, vector has {x.dim} coordinates")
    total = f.limit_coeff * x.limit
    for a, v in zip(f.coeffs, x.coords):
        if a and v:
            total += a * v
    return total


def sup_norm(values: Sequence[Fraction]) -> Fraction:
    return max((abs(v) for v in values), default=Fraction(0))


@dataclass(frozen=True)
class PNormHandle:
    """
    Exact stand-in for (power_sum)^(1/p).

    Comparisons against rationals go through compare_pth_power; two handles
    with the same p compare by their power sums.
    """

    power_sum: Fraction
    p: int

    def compare(self, bound: Fraction) -> Ordering:
        """Order the p-th root against a rational bound."""
        return compare_pth_power(self.power_sum, bound, self.p)

    def compare_root(self, c: Fraction) -> Ordering:
        """Order the p-th root against c^(1/p)."""
        c = to_scalar(c)
        if self.power_sum < c:
            return Ordering.LESS
        if self.power_sum > c:
            return Ordering.GREATER
        return Ordering.EQUAL

    def _key(self, other: "PNormHandle") -> tuple:
        if self.p != other.p:
            raise StructuralError(f"Cannot compare p-norm handles with p={self.p} and p={other.p}")
        return self.power_sum, other.power_sum

    def __lt__(self, other: "PNormHandle") -> bool:
        a, b = self._key(other)
        return a < b

    def __le__(self, other: "PNormHandle") -> bool:
        a, b = self._key(other)
        return a <= b

    def __gt__(self, other: "PNormHandle") -> bool:
        a, b = self._key(other)
        return a > b

    def __ge__(self, other: "PNormHandle") -> bool:
        a, b = self._key(other)
        return a >= b

    def __str__(self) -> str:
        if self.p == 1:
            return str(self.power_sum)
        return f"({self.power_sum})^(1/{self.p})"


def factor_norms(model: SpaceModel, x: SeqVector) -> tuple[Fraction, Fraction]:
    """Sup norms of the two factors of a product/l1sum model."""
    s = model.split
    return sup_norm(x.coords[:s]), sup_norm(x.coords[s:])


def vector_norm(model: SpaceModel, x: SeqVector):
    """
    Norm of x in the model.

    Returns:
        Fraction for sup / l1sum / gauge models and for product_p with p = 1,
        PNormHandle for product_p with p >= 2
    """
    check_vector(model, x)
    if model.norm == SUP:
        return sup_norm(x.point(model))
    if model.norm == L1SUM:
        a, b = factor_norms(model, x)
        return a + b
    if model.norm == PRODUCT_P:
        a, b = factor_norms(model, x)
        if model.p == 1:
            return a + b
        return PNormHandle(a ** model.p + b ** model.p, model.p)
    from src.geometry.polytope import gauge

    return gauge(model.ball, x)


def dual_norm(model: SpaceModel, f: Functional) -> Fraction:
    """
    Dual norm of f.

    sup models: sum |a_k| + |a_inf|. l1sum models: max over the factors of
    their l1 norms. gauge models: support function of the ball.
    """
    if f.dim != model.dim:
        raise StructuralError(f"Functional has {f.dim} coefficients, model has {model.dim}")
    if model.norm == SUP:
        return sum((abs(a) for a in f.coeffs), Fraction(0)) + abs(f.limit_coeff)
    if model.norm == L1SUM or (model.norm == PRODUCT_P and model.p == 1):
        s = model.split
        return max(sum((abs(a) for a in f.coeffs[:s]), Fraction(0)), sum((abs(a) for a in f.coeffs[s:]), Fraction(0)))
    if model.norm == GAUGE:
        from src.geometry.polytope import support

        return support(model.ball, f)
    raise UnsupportedError(f"Dual norm of a {model.norm} model with p={model.p} is not rational in general")


# -------------------------
# Bumps and the c -> c0 isomorphism
# -------------------------
def bump_sequences(x: SeqVector, k: int) -> tuple[SeqVector, SeqVector]:
    """
    The pair x + (1 - x(k)) e_k and x - (1 + x(k)) e_k for x in the unit ball of c.

    Both stay in the ball and differ by exactly 2 e_k.

    Raises:
        PreconditionError: ||x||_inf > 1 (limit included)
    """
    if not 1 <= k <= x.dim:
        raise StructuralError(f"Bump coordinate {k} outside 1..{x.dim}")
    if sup_norm(x.coords + (x.limit,)) > 1:
        raise PreconditionError(f"bump_sequences needs ||x|| <= 1, got {sup_norm(x.coords + (x.limit,))}")
    ek = SeqVector(tuple(Fraction(int(j == k)) for j in range(1, x.dim + 1)))
    xk = x[k]
    return x + ek.scale(1 - xk), x - ek.scale(1 + xk)


def c_to_c0(x: SeqVector) -> SeqVector:
    """
    T(x)(1) = lim/2 and T(x)(n+1) = (x(n) - lim)/2.

    Maps a c-vector with d coordinates to a c0-vector with d + 1 coordinates;
    ||Tx|| <= ||x|| <= 4 ||Tx||.
    """
    lim = x.limit
    return SeqVector((lim / 2,) + tuple((v - lim) / 2 for v in x.coords))


def c0_to_c(z: SeqVector) -> SeqVector:
    """Inverse of c_to_c0."""
    if z.limit != 0:
        raise StructuralError(f"c0_to_c expects a c0-vector, got limit {z.limit}")
    if z.dim < 2:
        raise StructuralError("c0_to_c needs at least two coordinates")
    lim = 2 * z.coords[0]
    return SeqVector(tuple(2 * v + lim for v in z.coords[1:]), lim)
