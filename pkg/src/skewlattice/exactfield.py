"""Number fields, orders and ideals with exact rational arithmetic."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import mpmath
import sympy
from flint import fmpq, fmpq_mat, fmpq_poly

from ._linalg import (
    LatticeError,
    contains,
    dual_of_span,
    index_of,
    is_integral,
    lattice_basis,
    q,
    qmat,
    rows_of,
    solve_coords,
    vstack,
)


class FieldError(ValueError):
    pass


class NumberField:
    """Q(theta) with theta a root of a monic irreducible polynomial (coefficients low to high)."""

    def __init__(self, min_poly):
        coeffs = [q(c) for c in min_poly]
        if len(coeffs) < 2 or coeffs[-1] == 0:
            raise FieldError("polynomial has degree 0")
        if coeffs[-1] != 1:
            raise FieldError("polynomial is not monic")
        x = sympy.Symbol("x")
        sp = sympy.Poly([sympy.Rational(int(c.p), int(c.q)) for c in reversed(coeffs)], x)
        if len(coeffs) > 2 and not sp.is_irreducible:
            raise FieldError("polynomial is reducible")
        self.poly = fmpq_poly(coeffs)
        self.degree = len(coeffs) - 1
        self._sympy = sp

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.poly == other.poly

    def __hash__(self):
        return hash(str(self.poly))

    def __repr__(self):
        return f"NumberField({self.poly})"

    def to_json(self) -> dict:
        return {"min_poly": [str(c) for c in self.poly.coeffs()]}

    @classmethod
    def from_json(cls, data) -> NumberField:
        return cls(data["min_poly"])

    def __call__(self, coeffs) -> NFElement:
        if isinstance(coeffs, NFElement):
            return coeffs
        if not isinstance(coeffs, (list, tuple)):
            coeffs = [coeffs]
        return NFElement(self, fmpq_poly([q(c) for c in coeffs]))

    def one(self) -> NFElement:
        return self([1])

    def gen(self) -> NFElement:
        return self([0, 1]) if self.degree > 1 else self([-self.poly.coeffs()[0]])

    def basis(self) -> list[NFElement]:
        return [NFElement(self, fmpq_poly([0] * k + [1])) for k in range(self.degree)]

    @cached_property
    def real_root_count(self) -> int:
        return self._sympy.count_roots()

    @property
    def totally_real(self) -> bool:
        return self.real_root_count == self.degree

    @property
    def totally_imaginary(self) -> bool:
        return self.real_root_count == 0

    @cached_property
    def roots(self) -> list[complex]:
        """All complex roots: real ones ascending, then upper half plane, then their conjugates."""
        with mpmath.workdps(40):
            rs = mpmath.polyroots([mpmath.mpf(int(c.p)) / int(c.q) for c in reversed(self.poly.coeffs())],
                                  maxsteps=200, extraprec=200)
        rs = [complex(r) for r in rs]
        real = sorted(r.real for r in rs if abs(r.imag) < 1e-12)
        upper = sorted((r for r in rs if r.imag >= 1e-12), key=lambda z: (z.real, z.imag))
        if len(real) != self.real_root_count:
            raise FieldError("numerical root isolation disagrees with the exact real root count")
        return [complex(r) for r in real] + upper + [z.conjugate() for z in upper]

    def real_embeddings(self) -> list[float]:
        return [r.real for r in self.roots[: self.real_root_count]]

    def complex_places(self) -> list[complex]:
        """One root from each conjugate pair of non-real roots (positive imaginary part)."""
        r = self.real_root_count
        return self.roots[r: r + (self.degree - r) // 2]

    @cached_property
    def cm_conjugation(self) -> fmpq_mat | None:
        """Matrix (on power-basis coordinates, acting on rows) of complex conjugation if the field is CM."""
        if not self.totally_imaginary:
            return None
        n = self.degree
        roots = self.roots
        V = mpmath.matrix([[mpmath.mpc(r) ** k for k in range(n)] for r in roots])
        rhs = mpmath.matrix([mpmath.mpc(r).conjugate() for r in roots])
        c = mpmath.lu_solve(V, rhs)
        coeffs = [Fraction(float(mpmath.re(v))).limit_denominator(10 ** 6) for v in c]
        g = self(coeffs)
        if g.minpoly_value_at(self) != 0:
            return None
        for r in roots:
            if abs(g.evaluate(r) - r.conjugate()) > 1e-8 * (1 + abs(r)):
                return None
        rows = [list((g ** k).coeffs) for k in range(n)]
        M = qmat(rows)
        if M * M != fmpq_mat([[int(i == j) for j in range(n)] for i in range(n)]):
            return None
        return M

    @property
    def is_cm(self) -> bool:
        return self.cm_conjugation is not None

    def conj(self, x: NFElement) -> NFElement:
        M = self.cm_conjugation
        if M is None:
            raise FieldError("field is not CM")
        v = qmat([x.coeffs]) * M
        return self(rows_of(v)[0])

    def real_subfield(self) -> tuple[NumberField, list[NFElement]]:
        """Maximal totally real subfield of a CM field: (F0, images of F0's power basis in F)."""
        M = self.cm_conjugation
        if M is None:
            raise FieldError("field is not CM")
        e = self.degree // 2
        theta = self.gen()
        candidates = [theta + self.conj(theta), theta * self.conj(theta)]
        candidates += [theta + theta * theta + self.conj(theta + theta * theta)]
        for a in candidates:
            mp = a.minpoly()
            if len(mp) - 1 == e:
                F0 = NumberField(mp)
                return F0, [a ** k for k in range(e)]
        raise FieldError("could not find a generator of the real subfield")


class NFElement:
    __slots__ = ("field", "poly")

    def __init__(self, field: NumberField, poly: fmpq_poly):
        self.field = field
        self.poly = poly % field.poly if poly.degree() >= field.degree else poly

    @property
    def coeffs(self) -> tuple[fmpq, ...]:
        c = list(self.poly.coeffs())
        return tuple(c + [fmpq(0)] * (self.field.degree - len(c)))

    def _wrap(self, other) -> NFElement:
        if isinstance(other, NFElement):
            return other
        return self.field([other])

    def __add__(self, other):
        return NFElement(self.field, self.poly + self._wrap(other).poly)

    __radd__ = __add__

    def __sub__(self, other):
        return NFElement(self.field, self.poly - self._wrap(other).poly)

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __neg__(self):
        return NFElement(self.field, -self.poly)

    def __mul__(self, other):
        return NFElement(self.field, self.poly * self._wrap(other).poly)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        r = self.field.one()
        for _ in range(k):
            r = r * self
        return r

    def __truediv__(self, other):
        return self * self._wrap(other).inverse()

    def __eq__(self, other):
        if not isinstance(other, NFElement):
            other = self._wrap(other)
        return self.field == other.field and self.poly == other.poly

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return self.poly != 0

    def __repr__(self):
        return f"NFElement({[str(c) for c in self.coeffs]})"

    def mul_matrix(self) -> fmpq_mat:
        """Matrix of y -> self*y acting on row coordinate vectors (rows are images of basis)."""
        return qmat([list((b * self).coeffs) for b in self.field.basis()])

    def norm(self) -> fmpq:
        return self.mul_matrix().det()

    def trace(self) -> fmpq:
        M = self.mul_matrix()
        return sum((M[i, i] for i in range(M.nrows())), fmpq(0))

    def inverse(self) -> NFElement:
        if not self:
            raise ZeroDivisionError("zero has no inverse")
        g, s, _ = _xgcd(self.poly, self.field.poly)
        return NFElement(self.field, s / g.coeffs()[0])

    def charpoly(self) -> list[fmpq]:
        x = sympy.Symbol("x")
        M = sympy.Matrix([[sympy.Rational(int(v.p), int(v.q)) for v in r] for r in rows_of(self.mul_matrix())])
        cp = M.charpoly(x)
        return [q(str(c)) for c in reversed(cp.all_coeffs())]

    def minpoly(self) -> list[fmpq]:
        x = sympy.Symbol("x")
        cp = sympy.Poly(list(reversed([sympy.Rational(int(c.p), int(c.q)) for c in self.charpoly()])), x)
        _, factors = sympy.factor_list(cp)
        f = factors[0][0]
        return [q(str(c)) for c in reversed(sympy.Poly(f, x).monic().all_coeffs())]

    def minpoly_value_at(self, field: NumberField):
        """Evaluate the defining polynomial of `field` at self (zero iff self is a root)."""
        r = field([0])
        for c in reversed(field.poly.coeffs()):
            r = r * self + c
        return r

    def evaluate(self, z: complex) -> complex:
        return sum(complex(float(c)) * z ** k for k, c in enumerate(self.coeffs))

    def embeddings(self) -> list[complex]:
        return [self.evaluate(r) for r in self.field.roots]


def _xgcd(a: fmpq_poly, b: fmpq_poly):
    r0, r1 = a, b
    s0, s1 = fmpq_poly([1]), fmpq_poly([0])
    t0, t1 = fmpq_poly([0]), fmpq_poly([1])
    while r1 != 0:
        quo = r0 // r1
        r0, r1 = r1, r0 - quo * r1
        s0, s1 = s1, s0 - quo * s1
        t0, t1 = t1, t0 - quo * t1
    return r0, s0, t0


def nf_norm_trace(field: NumberField, x) -> tuple[Fraction, Fraction]:
    x = field(x) if not isinstance(x, NFElement) else x
    return Fraction(str(x.norm())), Fraction(str(x.trace()))


@dataclass
class NFOrder:
    field: NumberField
    basis: fmpq_mat  # rows: power-basis coordinates

    def __post_init__(self):
        n = self.field.degree
        if self.basis.nrows() != n or self.basis.ncols() != n:
            raise FieldError("order basis must have full rank")
        if not contains(self.basis, qmat([[1] + [0] * (n - 1)])):
            raise FieldError("order does not contain 1")
        els = self.elements()
        prods = qmat([list((a * b).coeffs) for a in els for b in els])
        if not contains(self.basis, prods):
            raise FieldError("basis is not closed under multiplication")

    def elements(self) -> list[NFElement]:
        return [self.field(r) for r in rows_of(self.basis)]

    @classmethod
    def equation_order(cls, field: NumberField) -> NFOrder:
        n = field.degree
        return cls(field, qmat([[int(i == j) for j in range(n)] for i in range(n)]))

    def discriminant(self) -> Fraction:
        els = self.elements()
        G = qmat([[(a * b).trace() for b in els] for a in els])
        return Fraction(str(G.det()))

    def contains(self, x: NFElement) -> bool:
        return contains(self.basis, qmat([list(x.coeffs)]))


def maximal_order(field: NumberField) -> NFOrder:
    n = field.degree
    if n == 1:
        return NFOrder.equation_order(field)
    c = field.poly.coeffs()
    if any(v.q != 1 for v in c):
        raise FieldError("maximal order needs an integral defining polynomial")
    if n == 2:
        b, cc = int(c[1].p), int(c[0].p)
        D = b * b - 4 * cc
        s, core = 1, 1
        for p, k in sympy.factorint(abs(D)).items():
            s *= p ** (k // 2)
            core *= p ** (k % 2)
        core *= 1 if D > 0 else -1
        theta = field.gen()
        sqrt_core = (2 * theta + b) * fmpq(1, s)
        w = (1 + sqrt_core) * fmpq(1, 2) if core % 4 == 1 else sqrt_core
        return NFOrder(field, lattice_basis(qmat([[1] + [0] * (n - 1), list(w.coeffs)]), reduce=False))
    x = sympy.Symbol("x")
    disc = sympy.discriminant(field._sympy.as_expr(), x)
    squarefree = all(k == 1 for k in sympy.factorint(abs(int(disc))).values())
    cyclotomic = any(sympy.Poly(sympy.cyclotomic_poly(k, x), x) == field._sympy for k in range(1, 64))
    if squarefree or cyclotomic:
        return NFOrder.equation_order(field)
    raise FieldError("maximal order computation unavailable for this field")


@dataclass
class NFIdeal:
    order: NFOrder
    basis: fmpq_mat

    @classmethod
    def generated(cls, order: NFOrder, gens) -> NFIdeal:
        F = order.field
        rows = [list((F(g) * o).coeffs) for g in gens for o in order.elements()]
        return cls(order, lattice_basis(qmat(rows)))

    def elements(self) -> list[NFElement]:
        return [self.order.field(r) for r in rows_of(self.basis)]

    def __mul__(self, other: NFIdeal) -> NFIdeal:
        rows = [list((a * b).coeffs) for a in self.elements() for b in other.elements()]
        return NFIdeal(self.order, lattice_basis(qmat(rows)))

    def contains(self, x: NFElement) -> bool:
        return contains(self.basis, qmat([list(x.coeffs)]))


def ideal_norm(order: NFOrder, ideal: NFIdeal) -> int:
    return index_of(ideal.basis, order.basis)


def colon(field: NumberField, num: fmpq_mat, den: fmpq_mat) -> fmpq_mat:
    """{x in F : x*den ⊆ num}, both given by Z-bases of full lattices in F."""
    n = field.degree
    num_inv = num.inv()
    # coordinates in num of e_k * d must be integral; linear in the coordinates of x
    cols = []
    for d in rows_of(den):
        dm = field(d).mul_matrix()  # rows: basis_k * d
        cols.append(dm * num_inv)
    gens = []
    for C in cols:
        for t in range(n):
            gens.append([C[k, t] for k in range(n)])
    return dual_of_span(qmat(gens))


def conductor(sub: NFOrder, big: NFOrder) -> NFIdeal:
    """Largest ideal of `big` contained in `sub`."""
    if not contains(big.basis, sub.basis):
        raise FieldError("suborder is not contained in the order")
    return NFIdeal(big, colon(sub.field, sub.basis, big.basis))


def is_invertible(ideal: NFIdeal) -> bool:
    inv = colon(ideal.order.field, ideal.order.basis, ideal.basis)
    F = ideal.order.field
    rows = [list((F(a) * b).coeffs) for a in rows_of(inv) for b in ideal.elements()]
    prod = lattice_basis(qmat(rows), reduce=False)
    return index_of(prod, ideal.order.basis) == 1 if prod.nrows() == F.degree else False


def scaled_covolume(ideal: NFIdeal, module: fmpq_mat, rank: int) -> Fraction:
    """covol(I*M)/covol(M) for an O-module M ⊂ F^rank given by a Z-basis of vectors (flattened)."""
    F = ideal.order.field
    n = F.degree
    if module.ncols() != n * rank or module.nrows() != n * rank:
        raise FieldError("module must be a full lattice in F^rank")
    if not is_invertible(ideal):
        raise FieldError("GCI hypothesis violated: ideal is not invertible in its order")
    rows = []
    for a in ideal.elements():
        for m in rows_of(module):
            v = []
            for j in range(rank):
                v.extend((a * F(m[j * n:(j + 1) * n])).coeffs)
            rows.append(v)
    IM = lattice_basis(qmat(rows), reduce=False)
    if IM.nrows() != module.nrows():
        raise FieldError("product module has the wrong rank")
    X = solve_coords(module, IM)
    ratio = abs(Fraction(str(X.det())))
    expected = Fraction(ideal_norm(ideal.order, ideal)) ** rank
    if ratio != expected:
        raise FieldError("covolume ratio does not match the ideal norm")
    return ratio
