"""Skew-Hermitian forms on D^m and their Q-bilinear trace forms.

Vectors of D^m are flat coordinate lists of length dim(D) * m.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from flint import fmpq, fmpq_mat

from ._linalg import pivots, qmat, rank, rows_of, solve_coords
from .algebra import AlgElement, Algebra, AlgOrder, AlgebraError, reduced_trace_norm, vec_left_mul


class FormError(ValueError):
    pass


def split(alg: Algebra, v) -> list[list]:
    n = alg.dim
    return [list(v[j * n:(j + 1) * n]) for j in range(len(v) // n)]


def flat(parts) -> list:
    out = []
    for p in parts:
        out.extend(p.c if isinstance(p, AlgElement) else p)
    return out


class SkewForm:
    """psi(x, y) = sum_{j,k} x_j G_jk y_k†, with G_kj = -G_jk†."""

    def __init__(self, alg: Algebra, gram):
        self.alg = alg
        self.gram = [[alg(g) for g in row] for row in gram]
        self.m = len(self.gram)
        for j in range(self.m):
            if len(self.gram[j]) != self.m:
                raise FormError("Gram matrix must be square")
            for k in range(self.m):
                if self.gram[k][j] != -self.gram[j][k].dag():
                    raise FormError("Gram matrix is not skew-Hermitian")

    def psi(self, x, y) -> AlgElement:
        alg = self.alg
        xs, ys = split(alg, x), split(alg, y)
        yd = [list(alg(v).dag().c) for v in ys]
        total = [fmpq(0)] * alg.dim
        for j, xj in enumerate(xs):
            if not any(v != 0 for v in xj):
                continue
            inner = [fmpq(0)] * alg.dim
            for k, ydk in enumerate(yd):
                if any(v != 0 for v in ydk):
                    t = alg.mul_coords(self.gram[j][k].c, ydk)
                    inner = [a + b for a, b in zip(inner, t)]
            t = alg.mul_coords(xj, inner)
            total = [a + b for a, b in zip(total, t)]
        return alg(total)

    def trd_psi(self, x, y) -> fmpq:
        return self.alg.trd(self.psi(x, y).c)

    @property
    def float_gram(self):
        return [[[float(v) for v in g.c] for g in row] for row in self.gram]

    def psi_float(self, x, y) -> list[float]:
        alg = self.alg
        n = alg.dim
        G = self.float_gram
        inv = alg.float_inv
        xs = [x[j * n:(j + 1) * n] for j in range(self.m)]
        ys = [np.asarray(y[j * n:(j + 1) * n], dtype=float) @ inv for j in range(self.m)]
        total = np.zeros(n)
        for j in range(self.m):
            inner = np.zeros(n)
            for k in range(self.m):
                inner += alg.mul_float(G[j][k], list(ys[k]))
            total += alg.mul_float(list(xs[j]), list(inner))
        return list(total)

    def standard_basis(self) -> list[list]:
        n = self.alg.dim
        out = []
        for j in range(self.m):
            v = [fmpq(0)] * (n * self.m)
            for t, c in enumerate(self.alg.one.c):
                v[j * n + t] = c
            out.append(v)
        return out

    def restrict(self, dbasis) -> SkewForm:
        """Gram matrix of psi in a D-basis of a subspace."""
        return SkewForm(self.alg, [[self.psi(u, v) for v in dbasis] for u in dbasis])

    def to_json(self) -> dict:
        return {"m": self.m, "gram": [[g.to_json() for g in row] for row in self.gram]}

    @classmethod
    def from_json(cls, alg: Algebra, data: dict) -> SkewForm:
        return cls(alg, data["gram"])


def combine(alg: Algebra, coeffs, vectors) -> list:
    """sum_j c_j v_j with c_j in D acting on the left."""
    out = [fmpq(0)] * len(vectors[0])
    for c, v in zip(coeffs, vectors):
        if alg(c):
            out = [a + b for a, b in zip(out, vec_left_mul(alg, c, v))]
    return out


def d_span_rows(alg: Algebra, vectors) -> fmpq_mat:
    """Rows e_k * v over the algebra basis and the given vectors."""
    rows = []
    for v in vectors:
        for ek in alg.basis():
            rows.append(vec_left_mul(alg, ek, v))
    return qmat(rows)


def d_rank(alg: Algebra, vectors) -> int:
    if not vectors:
        return 0
    return rank(d_span_rows(alg, vectors)) // alg.dim


def d_independent(alg: Algebra, vectors) -> bool:
    return rank(d_span_rows(alg, vectors)) == alg.dim * len(vectors) if vectors else True


def d_coordinates(alg: Algebra, dbasis, x) -> list[AlgElement] | None:
    """c with x = sum c_j u_j, or None if x is outside the D-span."""
    X = solve_coords(d_span_rows(alg, dbasis), qmat([list(x)]))
    if X is None:
        return None
    row = rows_of(X)[0]
    n = alg.dim
    return [alg(row[j * n:(j + 1) * n]) for j in range(len(dbasis))]


def trd_form(form: SkewForm, basis=None) -> fmpq_mat:
    """Gram matrix of Trd∘psi on the Q-basis {e_k v_j} (j outer, k inner)."""
    alg = form.alg
    basis = basis if basis is not None else form.standard_basis()
    rows = rows_of(d_span_rows(alg, basis))
    return trd_gram(form, qmat(rows))


def trd_gram(form: SkewForm, lattice: fmpq_mat) -> fmpq_mat:
    """Trd psi(l_s, l_t) for the rows of `lattice`."""
    alg = form.alg
    rows = rows_of(lattice)
    # Trd psi(x, y) = x * T * y^T with T the Gram of Trd∘psi on the standard Q-basis
    T = _standard_trd_matrix(form)
    L = qmat(rows)
    return L * T * L.transpose()


def _standard_trd_matrix(form: SkewForm) -> fmpq_mat:
    cached = getattr(form, "_trd_std", None)
    if cached is not None:
        return cached
    alg = form.alg
    n = alg.dim
    B = alg.basis()
    T = fmpq_mat(n * form.m, n * form.m)
    for j in range(form.m):
        for k in range(form.m):
            g = form.gram[j][k]
            for a in range(n):
                ag = B[a] * g
                for b in range(n):
                    T[j * n + a, k * n + b] = alg.trd((ag * B[b].dag()).c)
    form._trd_std = T
    return T


def is_nondegenerate(form: SkewForm) -> bool:
    return _standard_trd_matrix(form).det() != 0


def solve_functional(form: SkewForm, x, target) -> list:
    """Some y with psi(x, y) = target."""
    alg = form.alg
    target = alg(target)
    n = alg.dim
    size = n * form.m
    rows = []
    for t in range(size):
        y = [int(s == t) for s in range(size)]
        rows.append(list(form.psi(x, y).c))
    At = qmat(rows).transpose()  # n x size
    piv = pivots(At)
    if not piv:
        if target:
            raise FormError("no solution: psi(x, -) vanishes")
        return [fmpq(0)] * size
    sub = fmpq_mat([[At[i, p] for p in piv] for i in range(n)])
    X = solve_coords(sub.transpose(), qmat([list(target.c)]))
    if X is None:
        raise FormError("target is not in the image of psi(x, -)")
    y = [fmpq(0)] * size
    for c, p in zip(rows_of(X)[0], piv):
        y[p] = c
    if form.psi(x, y) != target:
        raise FormError("internal solve check failed")
    return y


def _candidate_vectors(alg: Algebra, vectors):
    yield from vectors
    B = alg.basis()
    for u, v in itertools.permutations(vectors, 2):
        for c in B:
            yield [a + b for a, b in zip(u, vec_left_mul(alg, c, v))]
    for u, v in itertools.combinations(vectors, 2):
        for c1 in B:
            for c2 in B:
                yield [a + b for a, b in zip(vec_left_mul(alg, c1, u), vec_left_mul(alg, c2, v))]


def weakly_unitary_dbasis(form: SkewForm, start=None) -> list[list]:
    """Exact D-basis v_1..v_m with psi(v_i, v_j) = 0 for i != j and psi(v_i, v_i) invertible."""
    alg = form.alg
    vectors = [list(v) for v in (start if start is not None else form.standard_basis())]
    if not is_nondegenerate(form.restrict(vectors)):
        raise FormError("form is degenerate")
    out = []
    while vectors:
        z = None
        for cand in _candidate_vectors(alg, vectors):
            if form.psi(cand, cand).is_invertible():
                z = cand
                break
        if z is None:
            raise FormError("could not find a vector with invertible self-pairing")
        out.append(z)
        pzz_inv = form.psi(z, z).inverse()
        projected = []
        for v in vectors:
            c = form.psi(v, z) * pzz_inv
            projected.append([a - b for a, b in zip(v, vec_left_mul(alg, c, z))])
        # drop one vector that became dependent
        kept = []
        for v in projected:
            if d_independent(alg, kept + [v]):
                kept.append(v)
        target = len(vectors) - 1
        if len(kept) != target:
            raise FormError("lost rank during orthogonalisation")
        vectors = kept
    return out


def form_from_symplectic(alg: Algebra, phi, module_structure) -> tuple[SkewForm, list[list]]:
    """The unique skew-Hermitian psi with Trd∘psi = phi on a (D,†)-compatible Q-space.

    `module_structure[k]` is the matrix of left multiplication by the k-th basis element of D
    acting on column vectors of Q^n. Returns the form in a chosen D-basis and that basis
    (as column vectors of Q^n).
    """
    Phi = qmat(phi)
    rho = [qmat(r) for r in module_structure]
    n = Phi.nrows()
    if Phi.transpose() != -Phi:
        raise FormError("phi is not alternating")
    if Phi.det() == 0:
        raise FormError("phi is degenerate")
    if n % alg.dim:
        raise FormError("dimension is not a multiple of dim D")
    B = alg.basis()
    one = alg.one
    # rho must be an algebra homomorphism
    for a in range(alg.dim):
        for b in range(alg.dim):
            prod = B[a] * B[b]
            lhs = sum((rho[k] * c for k, c in enumerate(prod.c) if c != 0), fmpq_mat(n, n))
            if rho[a] * rho[b] != lhs:
                raise FormError("module structure is not a representation of D")
    for a in range(alg.dim):
        dag = B[a].dag()
        rd = sum((rho[k] * c for k, c in enumerate(dag.c) if c != 0), fmpq_mat(n, n))
        if rho[a].transpose() * Phi != Phi * rd:
            raise FormError("phi is not (D,†)-compatible")
    # greedy D-basis among the standard vectors
    def act(a: AlgElement, v):
        M = sum((rho[k] * c for k, c in enumerate(a.c) if c != 0), fmpq_mat(n, n))
        return rows_of((M * qmat([[x] for x in v])).transpose())[0]

    def span_rows(vs):
        return qmat([act(b, v) for v in vs for b in B]) if vs else fmpq_mat(0, n)

    chosen = []
    for i in range(n):
        v = [int(t == i) for t in range(n)]
        if rank(span_rows(chosen + [v])) == alg.dim * (len(chosen) + 1):
            chosen.append(v)
    m = n // alg.dim
    if len(chosen) != m:
        raise FormError("Q-space is not free over D")
    Tinv = alg.trd_pair.inv()
    gram = []
    for vj in chosen:
        row = []
        for vk in chosen:
            # Trd(e_a g) = phi(e_a vj, vk)
            vals = qmat([[(qmat([act(b, vj)]) * Phi * qmat([[x] for x in vk]))[0, 0] for b in B]])
            g = vals * Tinv.transpose()
            row.append(alg(rows_of(g)[0]))
        gram.append(row)
    form = SkewForm(alg, gram)
    # check Trd∘psi reproduces phi on the Q-basis {e_a v_j}
    basis_rows = span_rows(chosen)
    T = trd_form(form)
    if basis_rows * Phi * basis_rows.transpose() != T:
        raise FormError("reconstructed form does not reproduce phi")
    return form, chosen


def involution_support(form: SkewForm, basis) -> list[int]:
    m = len(basis)
    sigma = []
    for i in range(m):
        nz = [j for j in range(m) if form.psi(basis[i], basis[j])]
        if len(nz) != 1:
            raise FormError("pairing matrix is not permutation-supported")
        sigma.append(nz[0])
    if sorted(sigma) != list(range(m)):
        raise FormError("pairing matrix is not permutation-supported")
    return sigma


def disc_weak_diag(order: AlgOrder, form: SkewForm, basis, sigma=None) -> tuple[Fraction, Fraction]:
    """(disc(sum R v_i), the closed form) for a permutation-supported basis."""
    alg = form.alg
    found = involution_support(form, basis)
    if sigma is not None and list(sigma) != found:
        raise FormError("sigma does not match the pairing support")
    rows = []
    for v in basis:
        for r in order.elements():
            rows.append(vec_left_mul(alg, r, v))
    lhs = abs(Fraction(str(trd_gram(form, qmat(rows)).det())))
    # one factor d^-dim per block of the Gram matrix
    k = Fraction(1, alg.d ** alg.dim) ** len(basis)
    rhs = k * Fraction(order.disc) ** len(basis)
    for i, j in enumerate(found):
        rhs *= abs(Fraction(str(form.psi(basis[i], basis[j]).nm())))
    return lhs, rhs


def adapted_norm(form: SkewForm, model=None):
    from .realmodels import adapted_norm as _impl
    return _impl(form, model)
