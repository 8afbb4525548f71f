import logging
import threading
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import sympy
from sympy.polys.domains import QQ
from sympy.polys.groebnertools import groebner
from sympy.polys.matrices import DomainMatrix
from sympy.polys.orderings import grevlex
from sympy.polys.rings import PolyElement, ring

from pydanticquasimap.base_models import PipelineIntegrityError
from pydanticquasimap.gitdata.models import GitPresentation, Sector, WeylElement, unstable_supports

logger = logging.getLogger(__name__)

Z = sympy.Symbol("z")

# Standard monomial search stops here; larger rings are out of reach anyway
MAX_RING_DIMENSION = 5000

Monomial = Tuple[int, ...]


def s_symbols(q: int) -> Tuple[sympy.Symbol, ...]:
    return tuple(sympy.Symbol(f"s{p + 1}") for p in range(q))


def t_symbols(r: int) -> Tuple[sympy.Symbol, ...]:
    return tuple(sympy.Symbol(f"t{i + 1}") for i in range(r))


@lru_cache(maxsize=None)
def coefficient_field(q: int):
    """
    QQ(z, s1..sq)
    """
    return QQ.frac_field(Z, *s_symbols(q))


def to_coefficient(K, value) -> object:
    if isinstance(value, Fraction):
        return K.from_sympy(sympy.Rational(value.numerator, value.denominator))
    if isinstance(value, int):
        return K.convert(value)
    if isinstance(value, sympy.Basic):
        return K.from_sympy(value)
    return K.convert(value)


class CoeffFunction:
    """
    A rational function in z and the equivariant parameters,
    normalized with a monic denominator
    """

    def __init__(self, value, field):
        self.field = field
        self.value = field.convert(value)
        numer, denom = self.value.numer, self.value.denom
        lc = denom.LC
        self.numerator = numer.quo_ground(lc)
        self.denominator = denom.quo_ground(lc)

    @classmethod
    def from_terms(cls, numerator: Iterable[Tuple[Monomial, Fraction]], denominator: Iterable[Tuple[Monomial, Fraction]], field) -> "CoeffFunction":
        base = field.field.ring

        def build(terms):
            return base.from_dict({tuple(m): base.domain.convert(sympy.Rational(c.numerator, c.denominator)) for m, c in terms})

        value = field.field.field_new(build(numerator)) / field.field.field_new(build(denominator))
        return cls(value, field)

    def numerator_terms(self) -> List[Tuple[Monomial, Fraction]]:
        return [(tuple(m), Fraction(int(c.numerator), int(c.denominator))) for m, c in self.numerator.terms()]

    def denominator_terms(self) -> List[Tuple[Monomial, Fraction]]:
        return [(tuple(m), Fraction(int(c.numerator), int(c.denominator))) for m, c in self.denominator.terms()]

    def is_z_laurent(self) -> bool:
        """
        True when the denominator is a power of z
        """
        terms = self.denominator.terms()
        return len(terms) == 1 and not any(terms[0][0][1:])

    def to_sympy(self) -> sympy.Expr:
        return self.field.to_sympy(self.value)

    def __eq__(self, other):
        if not isinstance(other, CoeffFunction):
            return NotImplemented
        return self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"CoeffFunction({self.to_sympy()})"


class SectorRing:
    """
    Q(z, s)[t_1..t_r] modulo the Chern class products over the minimal
    unstable supports inside the fixed support of a sector, truncated above
    D = |fixed support| - r when there are no equivariant parameters.
    The reduction basis and standard monomials are computed once; inverses
    are memoized under `_lock`.
    """

    def __init__(self, sector: Sector, presentation: GitPresentation):
        self.sector = sector
        self.presentation = presentation
        self.r = presentation.r
        self.q = presentation.q
        self.equivariant = presentation.q > 0
        self.K = coefficient_field(presentation.q)
        self.symbols = t_symbols(self.r)
        self.poly_ring, *gens = ring(list(self.symbols), self.K, grevlex)
        self.gens = tuple(gens)
        self.dimension = len(sector.fixed_support) - self.r
        self._inverses = {}  # type: Dict[PolyElement, PolyElement]
        self._lock = threading.Lock()

        self.unstable = unstable_supports(presentation, sector.fixed_support)
        self.is_zero_ring = (not self.equivariant and self.dimension < 0) or frozenset() in self.unstable
        generators = [] if self.is_zero_ring else [self._product(S) for S in self.unstable]
        if not self.equivariant and not self.is_zero_ring:
            generators.extend(self._monomials_of_degree(self.dimension + 1))
        self.basis = [] if self.is_zero_ring else groebner(generators, self.poly_ring)
        if any(g.is_ground and g for g in self.basis):
            self.is_zero_ring = True
            self.basis = []
        self.leading = [g.LM for g in self.basis]
        logger.debug(
            "ring for sector %s: D=%d, %d unstable supports, %d basis elements",
            sector.age_label,
            self.dimension,
            len(self.unstable),
            len(self.basis),
        )

    def _product(self, support: Iterable[int]) -> PolyElement:
        result = self.poly_ring.one
        for index in support:
            result = result * self.chern_polynomial(self.presentation.weights[index])
        return result

    def _monomials_of_degree(self, degree: int) -> List[PolyElement]:
        def exponents(remaining: int, slots: int):
            if slots == 1:
                yield (remaining,)
                return
            for head in range(remaining, -1, -1):
                for tail in exponents(remaining - head, slots - 1):
                    yield (head,) + tail

        return [self.poly_ring({e: self.K.one}) for e in exponents(degree, self.r)]

    @cached_property
    def z(self):
        return self.K.from_sympy(Z)

    @property
    def truncated(self) -> bool:
        return not self.equivariant

    @property
    def zero(self) -> "RingElement":
        return RingElement(self, self.poly_ring.zero)

    @property
    def one(self) -> "RingElement":
        return self.constant(1)

    def constant(self, value) -> "RingElement":
        return self.normal_form(self.poly_ring.ground_new(to_coefficient(self.K, value)))

    def gen(self, i: int) -> "RingElement":
        return self.normal_form(self.gens[i])

    def chern_polynomial(self, xi: Sequence[int]) -> PolyElement:
        """
        xi(t) plus the equivariant part sum xi[r+p] s_p
        """
        result = self.poly_ring.zero
        for i in range(self.r):
            if xi[i]:
                result += self.gens[i] * xi[i]
        s_part = sum((xi[self.r + p] * sympy.Symbol(f"s{p + 1}") for p in range(min(self.q, len(xi) - self.r))), sympy.Integer(0))
        if s_part != 0:
            result += self.poly_ring.ground_new(self.K.from_sympy(s_part))
        return result

    def chern(self, xi: Sequence[int]) -> "RingElement":
        return self.normal_form(self.chern_polynomial(xi))

    def normal_form(self, p: PolyElement) -> "RingElement":
        if self.is_zero_ring:
            return self.zero
        if self.basis:
            p = p.rem(self.basis)
        return RingElement(self, p)

    @cached_property
    def standard_monomials(self) -> Tuple[Monomial, ...]:
        """
        Monomials divisible by no leading monomial of the reduction basis,
        ordered by degree
        """
        return self._find_standard_monomials()

    def _find_standard_monomials(self) -> Tuple[Monomial, ...]:
        if self.is_zero_ring:
            return ()

        def reducible(m: Monomial) -> bool:
            return any(all(a >= b for a, b in zip(m, lead)) for lead in self.leading)

        start = (0,) * self.r
        found = [start]
        seen = {start}
        frontier = [start]
        while frontier:
            following = []
            for m in frontier:
                for i in range(self.r):
                    bigger = m[:i] + (m[i] + 1,) + m[i + 1 :]
                    if bigger in seen or reducible(bigger):
                        continue
                    seen.add(bigger)
                    found.append(bigger)
                    following.append(bigger)
            if len(found) > MAX_RING_DIMENSION:
                raise PipelineIntegrityError(f"sector ring {self.sector.age_label} is not finite dimensional")
            frontier = following
        return tuple(sorted(found, key=lambda m: (sum(m), tuple(-e for e in m))))

    def invert_unit_plus_nilpotent(self, u, alpha: "RingElement") -> "RingElement":
        """
        (u + alpha)^-1 for a nonzero scalar u and alpha without constant term
        """
        u = to_coefficient(self.K, u)
        if not u:
            raise PipelineIntegrityError(f"cannot invert: the unit part vanishes in sector {self.sector.age_label}")
        if self.is_zero_ring:
            return self.zero
        if self.truncated:
            inverse_u = self.K.one / u
            step = alpha * (-inverse_u)
            term = self.one
            total = self.one
            for _ in range(self.dimension):
                term = term * step
                if term.is_zero:
                    break
                total = total + term
            return total * inverse_u
        return self.inverse(alpha + self.constant_element(u))

    def constant_element(self, value) -> "RingElement":
        if self.is_zero_ring:
            return self.zero
        return RingElement(self, self.poly_ring.ground_new(value))

    def inverse(self, element: "RingElement") -> "RingElement":
        """
        Exact inverse by solving x * y = 1 on the standard monomial basis
        """
        if self.is_zero_ring:
            return self.zero
        with self._lock:
            cached = self._inverses.get(element.poly)
        if cached is not None:
            return RingElement(self, cached)
        constant = element.constant_term
        if self.truncated and constant:
            result = self.invert_unit_plus_nilpotent(constant, element - self.constant_element(constant))
        else:
            result = self._solve_inverse(element)
        with self._lock:
            self._inverses[element.poly] = result.poly
        return result

    def _solve_inverse(self, element: "RingElement") -> "RingElement":
        basis = self.standard_monomials
        index = {m: i for i, m in enumerate(basis)}
        size = len(basis)
        columns = []
        for m in basis:
            product = self.normal_form(element.poly * self.poly_ring({m: self.K.one})).poly
            column = [self.K.zero] * size
            for monomial, coeff in product.items():
                column[index[monomial]] = coeff
            columns.append(column)
        rows = [[columns[j][i] for j in range(size)] for i in range(size)]
        matrix = DomainMatrix(rows, (size, size), self.K)
        if not matrix.det():
            logger.error("element %s is not a unit in sector %s", element, self.sector.age_label)
            raise PipelineIntegrityError(f"{element} is not a unit in sector {self.sector.age_label}")
        target = DomainMatrix([[self.K.one if i == 0 else self.K.zero] for i in range(size)], (size, 1), self.K)
        solution = matrix.lu_solve(target).to_Matrix()
        result = self.poly_ring.zero
        for i, m in enumerate(basis):
            coeff = self.K.from_sympy(solution[i, 0])
            if coeff:
                result += self.poly_ring({m: coeff})
        return RingElement(self, result)

    def evaluate(self, expr: Union[sympy.Expr, str]) -> "RingElement":
        """
        Read a sympy expression in t1..tr, z and s1..sq into the ring.
        Negative powers are inverses.
        """
        if isinstance(expr, str):
            expr = sympy.sympify(expr)
        if not expr.free_symbols & set(self.symbols):
            return self.constant_element(self.K.from_sympy(expr)) if not self.is_zero_ring else self.zero
        if expr.is_Symbol:
            return self.gen(self.symbols.index(expr))
        if expr.is_Add:
            return sum((self.evaluate(arg) for arg in expr.args), self.zero)
        if expr.is_Mul:
            result = self.one
            for arg in expr.args:
                result = result * self.evaluate(arg)
            return result
        if expr.is_Pow and expr.exp.is_Integer:
            base = self.evaluate(expr.base)
            exponent = int(expr.exp)
            if exponent < 0:
                return self.inverse(base) ** (-exponent)
            return base**exponent
        raise ValueError(f"cannot evaluate {expr} in a sector ring")

    def act(self, w: WeylElement, p: PolyElement) -> PolyElement:
        return act_on_polynomial(w, p, self)

    def __repr__(self):
        return f"SectorRing(sector={self.sector.age_label}, D={self.dimension}, basis={self.basis})"


class RingElement:
    """
    An element of a SectorRing kept in normal form
    """

    def __init__(self, ring_: SectorRing, poly: PolyElement):
        self.ring = ring_
        self.poly = poly

    def _coerce(self, other) -> Optional["RingElement"]:
        if isinstance(other, RingElement):
            if other.ring is not self.ring:
                raise ValueError("elements of different sector rings")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.constant(other)
        try:
            return self.ring.constant_element(self.ring.K.convert(other))
        except Exception:
            return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RingElement(self.ring, self.poly + other.poly)

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.ring, -self.poly)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RingElement(self.ring, self.poly - other.poly)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.poly.is_ground:
            return RingElement(self.ring, self.poly * other.poly)
        return self.ring.normal_form(self.poly * other.poly)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.ring.inverse(self) ** (-exponent)
        result = self.ring.one
        for _ in range(exponent):
            result = result * self
        return result

    def inverse(self) -> "RingElement":
        return self.ring.inverse(self)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.constant(other)
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.ring is other.ring and self.poly == other.poly

    def __hash__(self):
        return hash((id(self.ring), self.poly))

    @property
    def is_zero(self) -> bool:
        return not self.poly

    @property
    def constant_term(self):
        return self.poly.get(self.ring.poly_ring.zero_monom, self.ring.K.zero)

    def terms(self) -> List[Tuple[Monomial, CoeffFunction]]:
        """
        Monomial to coefficient pairs, by degree then exponents
        """
        items = sorted(self.poly.items(), key=lambda item: (sum(item[0]), tuple(-e for e in item[0])))
        return [(tuple(m), CoeffFunction(c, self.ring.K)) for m, c in items]

    def to_sympy(self) -> sympy.Expr:
        return self.poly.as_expr()

    def specialize(self, target: SectorRing, substitutions: Dict[sympy.Symbol, object]) -> "RingElement":
        """
        Substitute values for z or s in every coefficient and reduce in `target`
        """
        result = target.poly_ring.zero
        for monomial, coeff in self.poly.items():
            expr = self.ring.K.to_sympy(coeff)
            numer, denom = sympy.fraction(sympy.together(expr))
            if denom.subs(substitutions) == 0:
                raise PipelineIntegrityError(f"denominator {denom} vanishes under {substitutions}")
            value = sympy.cancel(numer.subs(substitutions) / denom.subs(substitutions))
            result += target.poly_ring({tuple(monomial): target.K.from_sympy(value)})
        return target.normal_form(result)

    def __repr__(self):
        return f"RingElement({self.to_sympy()})"

    def __str__(self):
        return str(self.to_sympy())


_ring_lock = threading.Lock()


@lru_cache(maxsize=None)
def _cached_ring(sector: Sector, presentation: GitPresentation) -> SectorRing:
    return SectorRing(sector, presentation)


def build_ring(sector: Sector, presentation: GitPresentation) -> SectorRing:
    """
    The memoized ring of a sector; one writer at a time builds rings
    """
    with _ring_lock:
        return _cached_ring(sector, presentation)


def act_on_polynomial(w: WeylElement, p: PolyElement, ring_: SectorRing) -> PolyElement:
    """
    w . p for the action dual to w on characters: t_i -> sum_j w[j][i] t_j
    """
    R = ring_.poly_ring
    images = []
    for i in range(ring_.r):
        image = R.zero
        for j in range(ring_.r):
            if w[j][i]:
                image += ring_.gens[j] * w[j][i]
        images.append(image)
    result = R.zero
    for monomial, coeff in p.items():
        term = R.ground_new(coeff)
        for image, exponent in zip(images, monomial):
            if exponent:
                term = term * image**exponent
        result += term
    return result


def sign_on_delta(w: WeylElement, delta: PolyElement, ring_: SectorRing) -> int:
    moved = act_on_polynomial(w, delta, ring_)
    if moved == delta:
        return 1
    if moved == -delta:
        return -1
    raise PipelineIntegrityError(f"{delta.as_expr()} is not anti-invariant under {w}")


def antisymmetrize(x: PolyElement, group: Sequence[Tuple[WeylElement, int]], ring_: SectorRing) -> PolyElement:
    """
    (1/|W|) sum_w sgn(w) w.x
    """
    total = ring_.poly_ring.zero
    for w, sign in group:
        total += act_on_polynomial(w, x, ring_) * sign
    return total.quo_ground(ring_.K.convert(len(group)))


def is_anti_invariant(x: RingElement, group: Sequence[Tuple[WeylElement, int]]) -> bool:
    ring_ = x.ring
    return all(ring_.normal_form(act_on_polynomial(w, x.poly, ring_)) == x * sign for w, sign in group)


def is_invariant(x: RingElement, group: Sequence[Tuple[WeylElement, int]]) -> bool:
    ring_ = x.ring
    return all(ring_.normal_form(act_on_polynomial(w, x.poly, ring_)) == x for w, _ in group)


def divide_by_delta(numerator: PolyElement, delta: PolyElement, ring_: SectorRing) -> RingElement:
    """
    Exact quotient numerator / delta, reduced in the ring
    """
    quotient, remainder = numerator.div(delta)
    if remainder:
        logger.error("delta division of %s by %s left %s", numerator.as_expr(), delta.as_expr(), remainder.as_expr())
        raise PipelineIntegrityError(f"division by {delta.as_expr()} is not exact: remainder {remainder.as_expr()}")
    logger.debug("divided by %s in sector %s", delta.as_expr(), ring_.sector.age_label)
    return ring_.normal_form(quotient)


def assert_z_laurent(element: RingElement, label: str = "") -> None:
    for monomial, coeff in element.terms():
        if not coeff.is_z_laurent():
            logger.error("coefficient of %s in %s: %s", monomial, label, coeff)
            raise PipelineIntegrityError(f"coefficient {coeff.to_sympy()} of {label} is not a Laurent polynomial in z")
