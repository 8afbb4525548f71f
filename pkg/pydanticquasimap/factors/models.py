import logging
import math
from enum import Enum
from fractions import Fraction
from typing import List, Sequence, Tuple

from pydantic import BaseModel
from sympy.polys.rings import PolyElement

from pydanticquasimap.base_models import DeltaClearingRequired
from pydanticquasimap.chowring.models import RingElement, SectorRing, to_coefficient
from pydanticquasimap.gitdata.models import CurveClass, GitPresentation

logger = logging.getLogger(__name__)


class FactorVariant(Enum):
    C_CIRCLE = "C-circle"
    C = "C"


class FactorSpec(BaseModel):
    beta: CurveClass
    xi: Tuple[int, ...]
    variant: FactorVariant = FactorVariant.C
    inverted: bool = False
    ring: SectorRing

    class Config:
        arbitrary_types_allowed = True

    @property
    def pairing(self) -> Fraction:
        return self.beta.pairing(self.xi)


def is_negative_integer(value: Fraction) -> bool:
    return value.denominator == 1 and value < 0


def k_range(pairing: Fraction) -> List[Fraction]:
    """
    The shifts k of the linear factors, in the order they are multiplied
    """
    if pairing <= 0:
        count = math.ceil(-pairing) - 1
        return [pairing + 1 + i for i in range(max(count, 0))]
    return [pairing - i for i in range(math.ceil(pairing))]


def _split(ring: SectorRing, xi: Sequence[int]) -> Tuple[object, RingElement]:
    """
    The Chern class of xi as scalar part plus the part of positive t-degree
    """
    polynomial = ring.chern_polynomial(xi)
    scalar = polynomial.get(ring.poly_ring.zero_monom, ring.K.zero)
    return scalar, ring.normal_form(polynomial - ring.poly_ring.ground_new(scalar))


def linear_factor(ring: SectorRing, xi: Sequence[int], k: Fraction) -> RingElement:
    return ring.chern(xi) + ring.constant_element(to_coefficient(ring.K, k) * ring.z)


def inverse_linear_factor(ring: SectorRing, xi: Sequence[int], k: Fraction) -> RingElement:
    scalar, alpha = _split(ring, xi)
    return ring.invert_unit_plus_nilpotent(scalar + to_coefficient(ring.K, k) * ring.z, alpha)


def c_factor(spec: FactorSpec) -> RingElement:
    """
    With p = beta(xi) and k running over p + Z, C-circle is

        prod_{p < k < 0} (xi(t) + k z)        when p <= 0
        prod_{0 < k <= p} (xi(t) + k z)^-1    when p > 0

    and C carries an extra xi(t) when p is a negative integer.
    """
    ring = spec.ring
    pairing = spec.pairing
    extra = spec.variant == FactorVariant.C and is_negative_integer(pairing)
    if spec.inverted and extra:
        raise DeltaClearingRequired(f"C({spec.beta}, {spec.xi}) is not a unit: route root factors through weyl_numerator_factor")

    multiply = (pairing <= 0) != spec.inverted
    result = ring.one
    for k in k_range(pairing):
        if multiply:
            result = result * linear_factor(ring, spec.xi, k)
        else:
            result = result * inverse_linear_factor(ring, spec.xi, k)
    if extra:
        result = result * ring.chern(spec.xi)
    return result


def is_i_nonnegative(beta: CurveClass, presentation: GitPresentation) -> bool:
    return not negative_e_weights(beta, presentation)


def negative_e_weights(beta: CurveClass, presentation: GitPresentation) -> List[int]:
    """
    Indices j with beta(epsilon_j) a negative integer
    """
    return [j for j, epsilon in enumerate(presentation.e_weights) if is_negative_integer(beta.pairing(epsilon))]


def weyl_numerator_factor(beta: CurveClass, presentation: GitPresentation, ring: SectorRing) -> Tuple[RingElement, PolyElement]:
    """
    Delta_g times the product of C(beta, rho)^-1 over all roots, with the
    non-unit factors cancelled pairwise. Returns the numerator and Delta_g,
    the product of the positive roots pairing integrally with beta.
    """
    numerator = ring.one
    delta = ring.poly_ring.one
    for index in presentation.positive_roots:
        rho = presentation.roots[index]
        d = beta.pairing(rho)
        if d.denominator == 1:
            c = ring.chern_polynomial(rho)
            numerator = numerator * ring.normal_form(c + ring.poly_ring.ground_new(to_coefficient(ring.K, d) * ring.z)) * (-1) ** int(d % 2)
            delta = delta * c
        else:
            negative = tuple(-x for x in rho)
            numerator = numerator * c_factor(FactorSpec(beta=beta, xi=rho, inverted=True, ring=ring))
            numerator = numerator * c_factor(FactorSpec(beta=beta, xi=negative, inverted=True, ring=ring))
    return numerator, delta


def euler_class(weights: Sequence[Sequence[int]], ring: SectorRing) -> RingElement:
    result = ring.one
    for xi in weights:
        result = result * ring.chern(xi)
    return result
