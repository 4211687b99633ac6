"""
Certificate and slice-spec types shared by every experiment.

A certificate carries its witnesses already JSON-encoded (see
src.common.protocol), so it can be saved and rechecked without rerunning
any construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from src.common.errors import PreconditionError
from src.common.exact_lp import to_scalar
from src.common.seqspace import Functional


class CertificateKind(str, enum.Enum):
    PROP21_LOWER_BOUND = "prop21_lower_bound"
    PROP21_EXACT_P1 = "prop21_exact_p1"
    K0_OPEN_DIAMETER = "k0_open_diameter"
    K0_SMALL_COMBO = "k0_small_combo"
    THM_COMBO_UPPER = "thm_combo_upper"
    THM_OPEN_DIAMETER = "thm_open_diameter"
    LEMMA24_EQUALITY = "lemma24_equality"
    L1SUM_INCLUSION = "l1sum_inclusion"
    L1SUM_COMBO_TRANSFER = "l1sum_combo_transfer"


@dataclass(frozen=True)
class SliceSpec:
    """Slice {x : f(x) > sup f - alpha} entering a combination with weight lam."""

    functional: Functional
    alpha: Fraction
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "alpha", to_scalar(self.alpha))
        object.__setattr__(self, "weight", to_scalar(self.weight))
        if self.alpha <= 0:
            raise PreconditionError(f"Slice depth must be positive, got {self.alpha}")
        if self.weight < 0:
            raise PreconditionError(f"Slice weight must be nonnegative, got {self.weight}")
        if self.functional.is_zero():
            raise PreconditionError("Slice functional must be nonzero")


def check_combination(specs: Sequence[SliceSpec]):
    if not specs:
        raise PreconditionError("A combination needs at least one slice")
    total = sum((s.weight for s in specs), Fraction(0))
    if total != 1:
        raise PreconditionError(f"Slice weights must sum to 1, got {total}")


@dataclass
class Certificate:
    """
    Outcome of one verification.

    bound is the claimed value (Fraction, or PNormHandle for p-norm lower
    bounds). exact is False only when an upper bound replaced an exact
    diameter.
    """

    kind: CertificateKind
    bound: object
    passed: bool
    parameters: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    N: Optional[int] = None
    ledger_hash: Optional[str] = None
    exact: bool = True

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"
