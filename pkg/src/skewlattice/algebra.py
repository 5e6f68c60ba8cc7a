"""Division algebras with positive involution, given by structure constants over Q."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import sympy
from flint import fmpq, fmpq_mat

from ._linalg import (
    contains,
    dual_of_span,
    index_of,
    is_integral,
    lattice_basis,
    log_rational,
    q,
    qmat,
    rows_of,
    solve_coords,
)
from .exactfield import NFElement, NumberField, NFOrder, maximal_order


class AlgebraError(ValueError):
    pass


def _frac(x) -> Fraction:
    x = q(x)
    return Fraction(int(x.p), int(x.q))


def _integer_root(x: Fraction, k: int) -> Fraction | None:
    if k == 1:
        return x
    if x < 0:
        return None
    num = sympy.integer_nthroot(x.numerator, k)
    den = sympy.integer_nthroot(x.denominator, k)
    if num[1] and den[1]:
        return Fraction(int(num[0]), int(den[0]))
    return None


class Algebra:
    """Finite-dimensional Q-algebra with a positive involution.

    `table[i]` lists `(j, k, c)` with e_i * e_j contributing c * e_k.
    `inv` acts on row coordinates: coords(x†) = coords(x) * inv.
    """

    def __init__(self, dim: int, table, inv: fmpq_mat, albert_type: str, d: int, e: int,
                 descriptor: dict | None = None, check: bool = True):
        if albert_type not in ("III", "IV"):
            raise AlgebraError("albert_type must be 'III' or 'IV'")
        self.dim = dim
        self.table = [[(j, k, q(c)) for (j, k, c) in row] for row in table]
        self.inv = inv
        self.albert_type = albert_type
        self.d = d
        self.e = e
        self.descriptor = descriptor or {"type": "generic"}
        self.kind = self.descriptor.get("type", "generic")
        expected = 4 * e if albert_type == "III" else 2 * d * d * e
        if albert_type == "III" and d != 2:
            raise AlgebraError("type III algebras have degree 2")
        if dim != expected:
            raise AlgebraError(f"dimension {dim} does not match type {albert_type} with d={d}, e={e}")
        # None when unknown (generic structure constants)
        self.is_division: bool | None = None
        self._one = None
        if check:
            self.validate()

    # basic arithmetic on coordinate lists
    def mul_coords(self, x, y) -> list:
        out = [fmpq(0)] * self.dim
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            for j, k, c in self.table[i]:
                yj = y[j]
                if yj != 0:
                    out[k] += c * xi * yj
        return out

    def mul_float(self, x, y) -> list[float]:
        out = [0.0] * self.dim
        tab = self.float_table
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            for j, k, c in tab[i]:
                out[k] += c * xi * y[j]
        return out

    @cached_property
    def float_table(self):
        return [[(j, k, float(c)) for (j, k, c) in row] for row in self.table]

    def __call__(self, coords) -> AlgElement:
        if isinstance(coords, AlgElement):
            return coords
        if not isinstance(coords, (list, tuple)):
            return self.scalar(coords)
        coords = [q(c) for c in coords]
        if len(coords) != self.dim:
            raise AlgebraError("wrong number of coordinates")
        return AlgElement(self, tuple(coords))

    def basis(self) -> list[AlgElement]:
        return [self([int(i == j) for j in range(self.dim)]) for i in range(self.dim)]

    def zero(self) -> AlgElement:
        return self([0] * self.dim)

    @cached_property
    def one(self) -> AlgElement:
        # the identity solves x * e_k = e_k for all k
        rows = []
        rhs = []
        for k in range(self.dim):
            ek = [int(t == k) for t in range(self.dim)]
            M = [self.mul_coords([int(t == i) for t in range(self.dim)], ek) for i in range(self.dim)]
            rows.append(M)
            rhs.append(ek)
        A = qmat([[rows[k][i][t] for k in range(self.dim) for t in range(self.dim)] for i in range(self.dim)])
        b = qmat([[rhs[k][t] for k in range(self.dim) for t in range(self.dim)]])
        X = solve_coords(A, b)
        if X is None:
            raise AlgebraError("algebra has no identity")
        return self(rows_of(X)[0])

    def scalar(self, c) -> AlgElement:
        return self.one * q(c)

    def lmat(self, a) -> fmpq_mat:
        """Rows: coords(a * e_l); so coords(a*v) = coords(v) * lmat(a)."""
        a = list(self(a).c)
        return qmat([self.mul_coords(a, [int(t == l) for t in range(self.dim)]) for l in range(self.dim)])

    def rmat(self, a) -> fmpq_mat:
        """Rows: coords(e_l * a); so coords(v*a) = coords(v) * rmat(a)."""
        a = list(self(a).c)
        return qmat([self.mul_coords([int(t == l) for t in range(self.dim)], a) for l in range(self.dim)])

    @cached_property
    def tr_vec(self) -> list[fmpq]:
        """Tr_{D/Q}(e_k) (trace of left multiplication)."""
        out = []
        for k in range(self.dim):
            s = fmpq(0)
            for j, t, c in self.table[k]:
                if j == t:
                    s += c
            out.append(s)
        return out

    def tr(self, x) -> fmpq:
        return sum((xi * t for xi, t in zip(x, self.tr_vec) if xi != 0), fmpq(0))

    def trd(self, x) -> fmpq:
        return self.tr(x) / self.d

    @cached_property
    def trd_pair(self) -> fmpq_mat:
        """Matrix of (x, y) -> Trd(x y)."""
        B = self.basis()
        return qmat([[self.trd((a * b).c) for b in B] for a in B])

    @cached_property
    def dnorm_gram(self) -> fmpq_mat:
        """Matrix of (x, y) -> Trd(x y†)."""
        B = self.basis()
        return qmat([[self.trd((a * b.dag()).c) for b in B] for a in B])

    @cached_property
    def float_trd_vec(self):
        return [float(t) / self.d for t in self.tr_vec]

    @cached_property
    def float_inv(self):
        import numpy as np
        return np.array([[float(self.inv[i, j]) for j in range(self.dim)] for i in range(self.dim)])

    @cached_property
    def minus_part_matrix(self) -> fmpq_mat:
        """Rows spanning D^- = {x : x† = -x}."""
        n = self.dim
        P = qmat([[(int(i == j) - self.inv[i, j]) / 2 for j in range(n)] for i in range(n)])
        return lattice_basis(P, reduce=False) if P.rank() else fmpq_mat(0, n)

    def validate(self) -> None:
        n = self.dim
        B = self.basis()
        one = self.one
        for a in B:
            if a * one != a or one * a != a:
                raise AlgebraError("identity check failed")
        # associativity on basis triples
        for a in B:
            for b in B:
                ab = a * b
                for c in B:
                    if ab * c != a * (b * c):
                        raise AlgebraError("structure constants are not associative")
        I = qmat([[int(i == j) for j in range(n)] for i in range(n)])
        if self.inv * self.inv != I:
            raise AlgebraError("involution does not square to the identity")
        for a in B:
            for b in B:
                if (a * b).dag() != b.dag() * a.dag():
                    raise AlgebraError("involution is not an anti-automorphism")
        G = self.dnorm_gram
        if G != G.transpose():
            raise AlgebraError("Trd(x y†) is not symmetric")
        for k in range(1, n + 1):
            minor = qmat([[G[i, j] for j in range(k)] for i in range(k)])
            if minor.det() <= 0:
                raise AlgebraError("involution is not positive")

    # centre and real subfield data, filled in by constructors
    f0: NumberField | None = None
    f0_images: list | None = None

    def f0_embed(self, x: NFElement) -> AlgElement:
        if self.f0 is None:
            raise AlgebraError("real subfield unavailable for a generic algebra")
        out = self.zero()
        for c, img in zip(x.coeffs, self.f0_images):
            out = out + img * c
        return out

    @cached_property
    def f0_matrix(self) -> fmpq_mat:
        """Rows: images of the power basis of F0 in D."""
        return qmat([list(x.c) for x in self.f0_images])

    def to_json(self) -> dict:
        return self.descriptor

    def __repr__(self):
        return f"Algebra({self.kind}, type {self.albert_type}, d={self.d}, e={self.e})"


class AlgElement:
    __slots__ = ("alg", "c")

    def __init__(self, alg: Algebra, c: tuple):
        self.alg = alg
        self.c = c

    def _wrap(self, other):
        if isinstance(other, AlgElement):
            return other
        return self.alg.scalar(other)

    def __add__(self, other):
        o = self._wrap(other)
        return AlgElement(self.alg, tuple(a + b for a, b in zip(self.c, o.c)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._wrap(other)
        return AlgElement(self.alg, tuple(a - b for a, b in zip(self.c, o.c)))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __neg__(self):
        return AlgElement(self.alg, tuple(-a for a in self.c))

    def __mul__(self, other):
        if isinstance(other, AlgElement):
            return AlgElement(self.alg, tuple(self.alg.mul_coords(self.c, other.c)))
        s = q(other)
        return AlgElement(self.alg, tuple(a * s for a in self.c))

    def __rmul__(self, other):
        s = q(other)
        return AlgElement(self.alg, tuple(a * s for a in self.c))

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        r = self.alg.one
        for _ in range(k):
            r = r * self
        return r

    def __eq__(self, other):
        if not isinstance(other, AlgElement):
            other = self._wrap(other)
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __bool__(self):
        return any(v != 0 for v in self.c)

    def __repr__(self):
        return f"AlgElement({[str(v) for v in self.c]})"

    def dag(self) -> AlgElement:
        row = qmat([list(self.c)]) * self.alg.inv
        return AlgElement(self.alg, tuple(rows_of(row)[0]))

    def inverse(self) -> AlgElement:
        L = self.alg.lmat(self)
        if L.det() == 0:
            raise ZeroDivisionError("element is not invertible")
        # coords(x * y) = coords(y) * lmat(x); solve for y with x*y = 1
        y = qmat([list(self.alg.one.c)]) * L.inv()
        return AlgElement(self.alg, tuple(rows_of(y)[0]))

    def is_invertible(self) -> bool:
        return self.alg.lmat(self).det() != 0

    def trd(self) -> fmpq:
        return self.alg.trd(self.c)

    def nm(self) -> fmpq:
        return self.alg.lmat(self).det()

    def to_json(self) -> list[str]:
        return [str(v) for v in self.c]


def _build(dim, products, inv_rows, albert_type, d, e, descriptor, check=True) -> Algebra:
    table = [[] for _ in range(dim)]
    for (i, j), terms in products.items():
        for k, c in terms:
            if c != 0:
                table[i].append((j, k, c))
    return Algebra(dim, table, qmat(inv_rows), albert_type, d, e, descriptor=descriptor, check=check)


_QUAT = {
    (0, 0): (0, "1"), (0, 1): (1, "1"), (0, 2): (2, "1"), (0, 3): (3, "1"),
    (1, 0): (1, "1"), (1, 1): (0, "a"), (1, 2): (3, "1"), (1, 3): (2, "a"),
    (2, 0): (2, "1"), (2, 1): (3, "-1"), (2, 2): (0, "b"), (2, 3): (1, "-b"),
    (3, 0): (3, "1"), (3, 1): (2, "-a"), (3, 2): (1, "b"), (3, 3): (0, "-ab"),
}


def _totally_negative(x: NFElement) -> bool:
    t = sympy.Symbol("t")
    cp = sympy.Poly([sympy.Rational(int(c.p), int(c.q)) for c in reversed(x.minpoly())], t)
    n = cp.degree()
    return cp.count_roots() == n and cp.count_roots(0, None) == 0


def make_quaternion(f0: NumberField | None, a, b, check: bool = True) -> Algebra:
    """(a, b / F0) with basis theta^p * {1, i, j, k}, index q*e + p."""
    f0 = f0 or NumberField([0, 1])
    if not f0.totally_real:
        raise AlgebraError("F0 is not totally real")
    a, b = f0(a), f0(b)
    if not (_totally_negative(a) and _totally_negative(b)):
        raise AlgebraError("not totally definite: a and b must be totally negative")
    e = f0.degree
    scal = {"1": f0.one(), "-1": -f0.one(), "a": a, "b": b, "-b": -b, "-a": -a, "-ab": -(a * b)}
    dim = 4 * e
    products = {}
    for (qi, qj), (qk, s) in _QUAT.items():
        for p in range(e):
            for pp in range(e):
                coef = scal[s] * f0([0] * (p + pp) + [1])
                products[(qi * e + p, qj * e + pp)] = [(qk * e + t, c) for t, c in enumerate(coef.coeffs)]
    inv_rows = [[(1 if qq == 0 else -1) if r == cidx else 0 for cidx in range(dim)]
                for r in range(dim) for qq in [r // e]]
    descriptor = {"type": "quaternion", "f0": f0.to_json(), "a": [str(c) for c in a.coeffs],
            "b": [str(c) for c in b.coeffs]}
    alg = _build(dim, products, inv_rows, "III", 2, e, descriptor, check=check)
    alg.f0 = f0
    alg.f0_images = [alg([int(k == p) for k in range(dim)]) for p in range(e)]
    alg.quat_ab = (a, b)
    # totally definite, so ramified at every real place
    alg.is_division = True
    return alg


def make_matrix_cm(f: NumberField, d: int, check: bool = True) -> Algebra:
    """M_d(F) with conjugate-transpose involution; basis E_pq * theta^t, index (p*d+q)*2e + t."""
    conj = f.cm_conjugation
    if conj is None:
        raise AlgebraError("field is not CM")
    n2 = f.degree
    e = n2 // 2
    dim = d * d * n2

    def idx(p, qq, t):
        return (p * d + qq) * n2 + t

    powers = [f([0] * s + [1]) for s in range(2 * n2)]
    products = {}
    for p in range(d):
        for qq in range(d):
            for r in range(d):
                for s in range(d):
                    for t in range(n2):
                        for u in range(n2):
                            key = (idx(p, qq, t), idx(r, s, u))
                            if qq != r:
                                continue
                            products[key] = [(idx(p, s, w), c) for w, c in enumerate(powers[t + u].coeffs)]
    inv_rows = []
    for p in range(d):
        for qq in range(d):
            for t in range(n2):
                row = [fmpq(0)] * dim
                for w in range(n2):
                    row[idx(qq, p, w)] = conj[t, w]
                inv_rows.append(row)
    descriptor = {"type": "matrix_cm", "f": f.to_json(), "d": d}
    alg = _build(dim, products, inv_rows, "IV", d, e, descriptor, check=check and dim <= 16)
    if not check or dim > 16:
        pass
    alg.cm_field = f
    alg.is_division = d == 1
    f0, imgs = f.real_subfield()
    alg.f0 = f0
    alg.f0_images = [sum((alg([int(k == idx(p, p, w)) for k in range(dim)]) * c
                          for p in range(d) for w, c in enumerate(x.coeffs)), alg.zero()) for x in imgs]
    return alg


def generic_algebra(sc, inv, albert_type: str, d: int, e: int) -> Algebra:
    """From dense structure constants sc[i][j][k] and an involution matrix."""
    dim = len(sc)
    products = {(i, j): [(k, q(sc[i][j][k])) for k in range(dim)] for i in range(dim) for j in range(dim)}
    descriptor = {"type": "generic", "sc": [[[str(q(v)) for v in r] for r in m] for m in sc],
            "inv": [[str(q(v)) for v in r] for r in inv], "albert_type": albert_type, "d": d, "e": e}
    return _build(dim, products, inv, albert_type, d, e, descriptor)


def algebra_from_json(data: dict) -> Algebra:
    kind = data.get("type")
    if kind == "quaternion":
        f0 = NumberField.from_json(data["f0"]) if "f0" in data else None
        return make_quaternion(f0, data["a"], data["b"])
    if kind == "matrix_cm":
        return make_matrix_cm(NumberField.from_json(data["f"]), int(data["d"]))
    if kind == "generic":
        return generic_algebra(data["sc"], data["inv"], data["albert_type"], int(data["d"]), int(data["e"]))
    raise AlgebraError(f"unknown algebra type {kind!r}")


def hamilton() -> Algebra:
    return make_quaternion(None, -1, -1)


def gaussian() -> Algebra:
    return make_matrix_cm(NumberField([1, 0, 1]), 1)


# ---------------------------------------------------------------- element invariants

def _nf_det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _nf_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def reduced_trace_norm(alg: Algebra, x) -> tuple[Fraction, Fraction]:
    """(Trd_{D/Q}(x), Nrd_{D/Q}(x)) exactly."""
    x = alg(x)
    trd = _frac(x.trd())
    if alg.kind == "quaternion":
        n = x * x.dag()
        val = alg.f0([n.c[p] for p in range(alg.e)])
        return trd, _frac(val.norm())
    if alg.kind == "matrix_cm":
        F = alg.cm_field
        n2 = F.degree
        d = alg.d
        M = [[F(list(x.c[(p * d + qq) * n2:(p * d + qq + 1) * n2])) for qq in range(d)] for p in range(d)]
        return trd, _frac(_nf_det(M).norm())
    nm = _frac(x.nm())
    root = _integer_root(abs(nm), alg.d)
    if root is None:
        raise AlgebraError("reduced norm not rational for this generic algebra")
    return trd, root if nm >= 0 or alg.d % 2 == 0 else -root


class DNorm(NamedTuple):
    square: Fraction
    value: float


def dnorm(alg: Algebra, x) -> DNorm:
    x = alg(x)
    sq = _frac(alg.trd((x * x.dag()).c))
    value = math.exp(0.5 * log_rational(sq)) if sq and log_rational(sq) < 1400 else (0.0 if not sq else math.inf)
    return DNorm(sq, value)


def dnorm_float(alg: Algebra, x) -> float:
    """|x|_D for a real coordinate vector."""
    xd = [sum(x[i] * alg.float_inv[i, j] for i in range(alg.dim)) for j in range(alg.dim)]
    prod = alg.mul_float(list(x), xd)
    return math.sqrt(max(0.0, sum(p * t for p, t in zip(prod, alg.float_trd_vec))))


def antisym_split(alg: Algebra, x) -> tuple[AlgElement, AlgElement]:
    x = alg(x)
    xd = x.dag()
    return (x + xd) * fmpq(1, 2), (x - xd) * fmpq(1, 2)


# ---------------------------------------------------------------- orders

@dataclass
class AlgOrder:
    alg: Algebra
    basis: fmpq_mat
    check: bool = True

    def __post_init__(self):
        n = self.alg.dim
        if self.basis.nrows() != n or self.basis.ncols() != n or self.basis.det() == 0:
            raise AlgebraError("order basis must be a full lattice")
        if self.check:
            if not self.contains(self.alg.one):
                raise AlgebraError("lattice does not contain 1")
            els = self.elements()
            prods = qmat([list((a * b).c) for a in els for b in els])
            if not contains(self.basis, prods):
                raise AlgebraError("lattice is not closed under multiplication")

    def elements(self) -> list[AlgElement]:
        return [self.alg(r) for r in rows_of(self.basis)]

    def contains(self, x) -> bool:
        return contains(self.basis, qmat([list(self.alg(x).c)]))

    def contains_all(self, xs) -> bool:
        xs = list(xs)
        return not xs or contains(self.basis, qmat([list(self.alg(x).c) for x in xs]))

    @cached_property
    def disc(self) -> int:
        return order_disc(self)

    @cached_property
    def dual(self) -> fmpq_mat:
        return dual_lattice(self)

    def to_json(self) -> list[list[str]]:
        return [[str(v) for v in r] for r in rows_of(self.basis)]


def standard_order(alg: Algebra) -> AlgOrder:
    """Z-span of the structure basis (Lipschitz order, Z[i], M_d(Z[theta]), ...)."""
    n = alg.dim
    return AlgOrder(alg, qmat([[int(i == j) for j in range(n)] for i in range(n)]))


def order_disc(R: AlgOrder) -> int:
    alg = R.alg
    els = R.elements()
    G_tr = qmat([[alg.tr((a * b.dag()).c) for b in els] for a in els])
    disc = abs(G_tr.det())
    if disc.q != 1:
        raise AlgebraError("discriminant is not an integer; the lattice is not an order")
    disc = int(disc.p)
    # disc = d^dim * covol^2 with covol measured by Trd(ab†)
    G_trd = qmat([[alg.trd((a * b.dag()).c) for b in els] for a in els])
    if abs(G_trd.det()) * fmpq(alg.d) ** alg.dim != disc:
        raise AlgebraError("discriminant / covolume identity failed")
    if disc < alg.d ** alg.dim:
        raise AlgebraError("discriminant below the lower bound")
    return disc


def dual_lattice(R: AlgOrder) -> fmpq_mat:
    """R* = {a : Trd(a b) in Z for all b in R}."""
    T = R.alg.trd_pair
    gens = R.basis * T.transpose()
    return dual_of_span(gens)


def lattice_in_order(R: AlgOrder, lat: fmpq_mat) -> bool:
    return contains(R.basis, lat)


def vec_left_mul(alg: Algebra, a, v) -> list:
    """a * v for v in D^m given as a flat coordinate list."""
    a = list(alg(a).c)
    n = alg.dim
    out = []
    for j in range(len(v) // n):
        out.extend(alg.mul_coords(a, list(v[j * n:(j + 1) * n])))
    return out


def stabilizer_order(alg: Algebra, lattice: fmpq_mat) -> AlgOrder:
    """{a in D : a L ⊆ L} for a full lattice L in D^m."""
    n = alg.dim
    Linv = lattice.inv()
    gens = []
    mats = []
    for k in range(n):
        ek = [int(t == k) for t in range(n)]
        moved = qmat([vec_left_mul(alg, ek, r) for r in rows_of(lattice)])
        mats.append(moved * Linv)
    size = lattice.nrows()
    for t in range(size):
        for s in range(size):
            gens.append([mats[k][t, s] for k in range(n)])
    basis = dual_of_span(qmat(gens))
    return AlgOrder(alg, basis)


def eta_for(R: AlgOrder, disc_l: int) -> int:
    """Least positive divisor eta of disc_l with eta * R† ⊆ R."""
    daggers = [x.dag() for x in R.elements()]
    for eta in sympy.divisors(abs(disc_l)):
        if R.contains_all(x * eta for x in daggers):
            return int(eta)
    raise AlgebraError("no divisor of disc(L) scales R† into R")
