from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pydanticquasimap.base_models import DeltaClearingRequired
from pydanticquasimap.chowring.models import Z, build_ring, t_symbols
from pydanticquasimap.cli.presets import complete_intersection, grassmannian, projective_space, quintic, weighted_projective
from pydanticquasimap.factors.models import FactorSpec, FactorVariant, c_factor, euler_class, is_i_nonnegative, k_range, weyl_numerator_factor
from pydanticquasimap.gitdata.models import CurveClass, involute, sector_of


def beta(*values):
    return CurveClass(values=tuple(Fraction(v) for v in values))


def untwisted_ring(presentation):
    return build_ring(sector_of(CurveClass(values=(0,) * presentation.r), presentation), presentation)


@pytest.fixture
def plane_ring():
    return untwisted_ring(projective_space(2))


@pytest.fixture
def gr24():
    return grassmannian(2, 4)


def straight_line(pairing: Fraction, chern: sympy.Expr, variant: FactorVariant) -> sympy.Expr:
    """
    The factor written out term by term
    """
    p = sympy.Rational(pairing.numerator, pairing.denominator)
    result = sympy.Integer(1)
    if p <= 0:
        k = p + 1
        while k < 0:
            result *= chern + k * Z
            k += 1
        if variant == FactorVariant.C and p.is_integer and p < 0:
            result *= chern
    else:
        k = p
        while k > 0:
            result /= chern + k * Z
            k -= 1
    return result


def test_k_range():
    assert k_range(Fraction(0)) == []
    assert k_range(Fraction(-1)) == []
    assert k_range(Fraction(-3, 2)) == [Fraction(-1, 2)]
    assert k_range(Fraction(-3)) == [-2, -1]
    assert k_range(Fraction(5, 2)) == [Fraction(5, 2), Fraction(3, 2), Fraction(1, 2)]
    assert k_range(Fraction(1, 3)) == [Fraction(1, 3)]


def test_c_factor_examples(plane_ring):
    def factor(value, variant=FactorVariant.C_CIRCLE, inverted=False):
        return c_factor(FactorSpec(beta=beta(value), xi=(1,), variant=variant, inverted=inverted, ring=plane_ring))

    assert factor(0) == plane_ring.one
    assert factor(Fraction(-3, 2)) == plane_ring.evaluate("t1 - z/2")
    assert factor(-2, FactorVariant.C) == plane_ring.evaluate("t1*(t1 - z)")
    assert factor(-2) == plane_ring.evaluate("t1 - z")
    assert factor(2) == plane_ring.evaluate("(1 - 3*t1/(2*z) + 7*t1**2/(4*z**2))/(2*z**2)")
    assert factor(2, inverted=True) == plane_ring.evaluate("(t1 + z)*(t1 + 2*z)")


def oracle_ring(name: str):
    if name == "twisted P(1,1,2)":
        P = weighted_projective(1, 1, 2)
        return build_ring(involute(sector_of(beta(Fraction(1, 2)), P)), P)
    return untwisted_ring({"P2": projective_space(2), "P4": projective_space(4), "G(2,4)": grassmannian(2, 4)}[name])


ORACLE_RINGS = ["P2", "P4", "G(2,4)", "twisted P(1,1,2)"]


def draw_case(data):
    ring = oracle_ring(data.draw(st.sampled_from(ORACLE_RINGS)))
    denominator = data.draw(st.integers(1, 4))
    values = data.draw(st.lists(st.integers(-3 * denominator, 3 * denominator), min_size=ring.r, max_size=ring.r))
    xi = tuple(data.draw(st.lists(st.integers(-2, 2), min_size=ring.r, max_size=ring.r)))
    return ring, CurveClass(values=tuple(Fraction(v, denominator) for v in values)), xi


@given(st.data(), st.sampled_from(list(FactorVariant)))
@settings(max_examples=200, deadline=None)
def test_c_factor_brute_force(data, variant):
    ring, b, xi = draw_case(data)
    pairing = b.pairing(xi)
    assume(abs(pairing) <= 6)
    chern = sum((a * t for a, t in zip(xi, t_symbols(ring.r))), sympy.Integer(0))
    expected = ring.evaluate(straight_line(pairing, chern, variant))
    assert c_factor(FactorSpec(beta=b, xi=xi, variant=variant, ring=ring)) == expected


@given(st.data())
@settings(max_examples=200, deadline=None)
def test_c_factor_inverse(data):
    ring, b, xi = draw_case(data)
    assume(abs(b.pairing(xi)) <= 6)
    direct = c_factor(FactorSpec(beta=b, xi=xi, variant=FactorVariant.C_CIRCLE, ring=ring))
    inverse = c_factor(FactorSpec(beta=b, xi=xi, variant=FactorVariant.C_CIRCLE, inverted=True, ring=ring))
    assert direct * inverse == ring.one


def test_oracle_ring_dimensions():
    assert [oracle_ring(name).dimension for name in ORACLE_RINGS] == [2, 4, 6, 0]


@pytest.mark.parametrize("value", [Fraction(n, d) for n in range(-8, 9) for d in (1, 2, 3)])
def test_c_equals_c_circle_off_negative_integers(plane_ring, value):
    def factor(variant):
        return c_factor(FactorSpec(beta=beta(value), xi=(1,), variant=variant, ring=plane_ring))

    same = factor(FactorVariant.C) == factor(FactorVariant.C_CIRCLE)
    assert same == (not (value.denominator == 1 and value < 0))


def test_delta_clearing_required(plane_ring):
    with pytest.raises(DeltaClearingRequired):
        c_factor(FactorSpec(beta=beta(-1), xi=(1,), variant=FactorVariant.C, inverted=True, ring=plane_ring))
    # C-circle never carries the non-unit prefactor
    c_factor(FactorSpec(beta=beta(-1), xi=(1,), variant=FactorVariant.C_CIRCLE, inverted=True, ring=plane_ring))


def test_is_i_nonnegative():
    P = quintic()
    assert all(is_i_nonnegative(beta(d), P) for d in range(5))
    assert is_i_nonnegative(beta(3), projective_space(2))
    negative = complete_intersection(projective_space(2), (-1,))
    assert not is_i_nonnegative(beta(1), negative)
    assert is_i_nonnegative(beta(Fraction(1, 2)), negative)


def pair_brute_force(d: int) -> sympy.Expr:
    c = sympy.Symbol("c")
    value = c / (straight_line(Fraction(d), c, FactorVariant.C) * straight_line(Fraction(-d), -c, FactorVariant.C))
    return sympy.cancel(value - (-1) ** abs(d) * (c + d * Z))


@pytest.mark.parametrize("d", range(-6, 7))
def test_pair_identity(gr24, d):
    assert pair_brute_force(d) == 0
    ring = untwisted_ring(gr24)
    numerator, delta = weyl_numerator_factor(beta(d, 0), gr24, ring)
    t1, t2 = ring.gens
    assert delta == t1 - t2
    assert numerator == ring.evaluate((-1) ** abs(d) * (sympy.Symbol("t1") - sympy.Symbol("t2") + d * Z))


def test_weyl_numerator_non_integral(gr24):
    ring = untwisted_ring(gr24)
    numerator, delta = weyl_numerator_factor(beta(Fraction(1, 2), 0), gr24, ring)
    assert delta == ring.poly_ring.one
    assert numerator == ring.evaluate("t1 - t2 + z/2")


def test_weyl_numerator_covariance(gr24):
    ring = untwisted_ring(gr24)
    swap = ((0, 1), (1, 0))
    for values in [(1, 0), (2, 1), (3, 0)]:
        numerator, delta = weyl_numerator_factor(beta(*values), gr24, ring)
        moved, _ = weyl_numerator_factor(beta(*reversed(values)), gr24, ring)
        # swapping t1, t2 maps the numerator of beta to minus the numerator of the swapped class
        assert ring.normal_form(ring.act(swap, numerator.poly)) == -moved
        assert ring.act(swap, delta) == -delta


def test_euler_class(plane_ring):
    assert euler_class([], plane_ring) == plane_ring.one
    ring = untwisted_ring(quintic())
    assert euler_class(quintic().e_weights, ring) == ring.gen(0) * 5
    P = weighted_projective(1, 1, 2)
    twisted = build_ring(involute(sector_of(beta(Fraction(1, 2)), P)), P)
    assert euler_class([(1,)], twisted).is_zero
