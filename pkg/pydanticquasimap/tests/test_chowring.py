from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from pydanticquasimap.base_models import PipelineIntegrityError
from pydanticquasimap.chowring.models import (
    Z,
    CoeffFunction,
    antisymmetrize,
    assert_z_laurent,
    build_ring,
    coefficient_field,
    divide_by_delta,
    is_anti_invariant,
    is_invariant,
)
from pydanticquasimap.cli.presets import grassmannian, projective_space, weighted_projective
from pydanticquasimap.gitdata.models import CurveClass, involute, sector_of

IDENTITY = ((1, 0), (0, 1))
SWAP = ((0, 1), (1, 0))


def untwisted_ring(presentation):
    return build_ring(sector_of(CurveClass(values=(0,) * presentation.r), presentation), presentation)


@pytest.fixture
def plane_ring():
    return untwisted_ring(projective_space(2))


@pytest.fixture
def gr_ring():
    return untwisted_ring(grassmannian(2, 4))


@pytest.fixture
def twisted_ring():
    P = weighted_projective(1, 1, 2)
    return build_ring(involute(sector_of(CurveClass(values=(Fraction(1, 2),)), P)), P)


@pytest.fixture
def antisymmetric():
    return [(IDENTITY, 1), (SWAP, -1)]


def test_plane_ring(plane_ring):
    assert plane_ring.dimension == 2
    assert not plane_ring.is_zero_ring
    assert plane_ring.standard_monomials == ((0,), (1,), (2,))
    t = plane_ring.gens[0]
    assert plane_ring.normal_form(t**3 + 2 * t) == plane_ring.gen(0) * 2
    assert plane_ring.normal_form(t**3).is_zero


def test_grassmannian_ring(gr_ring):
    t1, t2 = gr_ring.gens
    assert gr_ring.dimension == 6
    assert gr_ring.normal_form(t1**4 * t2).is_zero
    assert not gr_ring.normal_form(t1**3 * t2**3).is_zero
    assert gr_ring.normal_form(t1**3 * t2**4).is_zero
    assert len(gr_ring.standard_monomials) == 16


def test_twisted_ring(twisted_ring):
    assert twisted_ring.dimension == 0
    assert twisted_ring.sector.order == 2
    assert twisted_ring.standard_monomials == ((0,),)
    assert twisted_ring.gen(0).is_zero
    assert not twisted_ring.one.is_zero


def test_zero_ring():
    P = grassmannian(2, 4)
    ring = build_ring(sector_of(CurveClass(values=(Fraction(1, 2), 0)), P), P)
    assert ring.is_zero_ring
    assert ring.one.is_zero
    assert ring.evaluate("(t1 + z)**-1").is_zero


def test_rings_are_memoized(plane_ring):
    assert untwisted_ring(projective_space(2)) is plane_ring


def test_chern(plane_ring):
    assert plane_ring.chern((1,)) == plane_ring.gen(0)
    assert plane_ring.chern((5,)) == plane_ring.gen(0) * 5
    P = projective_space(2, equivariant=True)
    ring = untwisted_ring(P)
    assert sympy.expand(ring.chern((1, 1)).to_sympy() - sympy.Symbol("t1") - sympy.Symbol("s1")) == 0
    # t (t + s) (t + 2 s) vanishes
    assert ring.evaluate("t1*(t1 + s1)*(t1 + 2*s1)").is_zero


def test_normal_form_idempotent(gr_ring):
    t1, t2 = gr_ring.gens
    x = gr_ring.normal_form((t1 + t2 + 1) ** 5)
    assert gr_ring.normal_form(x.poly) == x


def test_truncation(plane_ring):
    t = plane_ring.gen(0)
    assert (t * t * t).is_zero
    assert not (t * t).is_zero


def test_invert_unit_plus_nilpotent(plane_ring):
    alpha = plane_ring.evaluate("3*t1*z + t1**2")
    inverse = plane_ring.invert_unit_plus_nilpotent(2 * Z**2, alpha)
    expected = plane_ring.evaluate("(1 - 3*t1/(2*z) + 7*t1**2/(4*z**2))/(2*z**2)")
    assert inverse == expected
    assert inverse * (alpha + plane_ring.evaluate("2*z**2")) == plane_ring.one
    assert plane_ring.invert_unit_plus_nilpotent(3, plane_ring.zero) == plane_ring.constant(Fraction(1, 3))


def test_invert_zero_unit(plane_ring, twisted_ring):
    with pytest.raises(PipelineIntegrityError):
        plane_ring.invert_unit_plus_nilpotent(0, plane_ring.gen(0))
    assert twisted_ring.invert_unit_plus_nilpotent(Z, twisted_ring.zero) == twisted_ring.evaluate("1/z")


@given(
    st.integers(1, 5).map(Fraction) | st.integers(-5, -1).map(Fraction),
    st.integers(0, 3),
    st.integers(-4, 4),
    st.integers(-4, 4),
)
@settings(max_examples=30, deadline=None)
def test_inverse_property(u, power, a, b):
    ring = untwisted_ring(projective_space(2))
    unit = sympy.Rational(u.numerator, u.denominator) * Z**power
    alpha = ring.evaluate(sympy.Symbol("t1") * a * Z + sympy.Symbol("t1") ** 2 * b)
    inverse = ring.invert_unit_plus_nilpotent(unit, alpha)
    assert inverse * (alpha + ring.evaluate(unit)) == ring.one


def test_equivariant_inverse():
    ring = untwisted_ring(projective_space(2, equivariant=True))
    x = ring.evaluate("t1 + s1 + z")
    assert x * x.inverse() == ring.one


def test_inverse_from_worker_threads():
    ring = untwisted_ring(projective_space(2, equivariant=True))
    x = ring.evaluate("t1 + 3*s1 + 5*z")
    with ThreadPoolExecutor(max_workers=4) as pool:
        inverses = list(pool.map(lambda _: ring.inverse(x), range(8)))
    assert all(inverse == inverses[0] for inverse in inverses)
    assert x * inverses[0] == ring.one
    assert ring._inverses[x.poly] == inverses[0].poly


def test_antisymmetrize(gr_ring, antisymmetric):
    t1, t2 = gr_ring.gens
    assert antisymmetrize(t1, antisymmetric, gr_ring) * 2 == t1 - t2
    assert antisymmetrize(t1 * t2 + t1 + t2, antisymmetric, gr_ring) == gr_ring.poly_ring.zero
    assert antisymmetrize(t1**2 - t2**2, antisymmetric, gr_ring) == t1**2 - t2**2
    result = gr_ring.normal_form(antisymmetrize(t1**3 * t2 + t1 * gr_ring.z, antisymmetric, gr_ring))
    assert is_anti_invariant(result, antisymmetric)


def test_divide_by_delta(gr_ring, antisymmetric):
    t1, t2 = gr_ring.gens
    assert divide_by_delta(t1 - t2, t1 - t2, gr_ring) == gr_ring.one
    assert divide_by_delta(t1**2 - t2**2, t1 - t2, gr_ring) == gr_ring.normal_form(t1 + t2)
    quotient = divide_by_delta(t1**3 - t2**3, t1 - t2, gr_ring)
    assert is_invariant(quotient, antisymmetric)
    with pytest.raises(PipelineIntegrityError, match="not exact"):
        divide_by_delta(t1, t1 - t2, gr_ring)


def test_divide_after_multiply(gr_ring):
    t1, t2 = gr_ring.gens
    symmetric = t1**2 + t2**2 + t1 * t2 * gr_ring.z
    assert divide_by_delta(symmetric * (t1 - t2), t1 - t2, gr_ring) == gr_ring.normal_form(symmetric)


def polynomials(ring):
    monomial = st.tuples(st.integers(0, 3), st.integers(0, 3))
    coefficient = st.integers(-3, 3)
    return st.dictionaries(monomial, coefficient, max_size=4).map(lambda terms: ring.normal_form(ring.poly_ring({m: ring.K.convert(c) for m, c in terms.items() if c})))


@given(st.data())
@settings(max_examples=25, deadline=None)
def test_ring_axioms(data):
    ring = untwisted_ring(grassmannian(2, 4))
    a, b, c = (data.draw(polynomials(ring)) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + ring.zero == a
    assert a * ring.one == a


def test_evaluate(plane_ring):
    assert plane_ring.evaluate("t1**2 + z") == plane_ring.gen(0) ** 2 + plane_ring.evaluate("z")
    with pytest.raises(ValueError):
        plane_ring.evaluate("sin(t1)")


def test_coeff_function_normalization():
    K = coefficient_field(0)
    value = CoeffFunction(K.from_sympy((2 * Z + 2) / (4 * Z**2)), K)
    assert value.denominator_terms() == [((2,), Fraction(1))]
    assert value.numerator_terms() == [((1,), Fraction(1, 2)), ((0,), Fraction(1, 2))]
    assert value.is_z_laurent()
    rebuilt = CoeffFunction.from_terms(value.numerator_terms(), value.denominator_terms(), K)
    assert rebuilt == value
    assert not CoeffFunction(K.from_sympy(1 / (Z + 1)), K).is_z_laurent()


def test_assert_z_laurent(plane_ring):
    assert_z_laurent(plane_ring.evaluate("(t1 + z)**-3"))
    with pytest.raises(PipelineIntegrityError, match="Laurent"):
        assert_z_laurent(plane_ring.evaluate("(z + 1)**-1"))
