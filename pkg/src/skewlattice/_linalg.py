"""Exact lattice helpers built on python-flint.

Lattices are stored as `fmpq_mat` whose rows form a Z-basis.
"""
from __future__ import annotations

import math
from fractions import Fraction
from math import lcm

from flint import fmpq, fmpq_mat, fmpz, fmpz_mat


class LatticeError(ValueError):
    pass


def q(x) -> fmpq:
    if isinstance(x, fmpq):
        return x
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        f = Fraction(x)
        return fmpq(f.numerator, f.denominator)
    return fmpq(x)


def to_fraction(x) -> Fraction:
    x = q(x)
    return Fraction(int(x.p), int(x.q))


def qmat(rows, ncols: int | None = None) -> fmpq_mat:
    if isinstance(rows, fmpq_mat):
        return fmpq_mat(rows)
    rows =[list(r) for r in rows]
    if not rows:
        return fmpq_mat(0, ncols or 0)
    return fmpq_mat([[q(v) for v in r] for r in rows])


def rows_of(M: fmpq_mat) -> list[list[fmpq]]:
    return [[M[i, j] for j in range(M.ncols())] for i in range(M.nrows())]


def vstack(*mats: fmpq_mat) -> fmpq_mat:
    rows = []
    ncols = None
    for M in mats:
        ncols = M.ncols()
        rows.extend(rows_of(M))
    if not rows:
        return fmpq_mat(0, ncols or 0)
    return fmpq_mat(rows)


def denominator(M: fmpq_mat) -> int:
    den = 1
    for i in range(M.nrows()):
        for j in range(M.ncols()):
            den = lcm(den, int(M[i, j].q))
    return den


def to_integer(M: fmpq_mat) -> tuple[fmpz_mat, int]:
    den = denominator(M)
    rows = [[int((M[i, j] * den).p) for j in range(M.ncols())] for i in range(M.nrows())]
    if not rows:
        return fmpz_mat(0, M.ncols()), den
    return fmpz_mat(rows), den


def is_integral(M: fmpq_mat) -> bool:
    return all(M[i, j].q == 1 for i in range(M.nrows()) for j in range(M.ncols()))


def rank(M: fmpq_mat) -> int:
    if M.nrows() == 0 or M.ncols() == 0:
        return 0
    return M.rref()[1]


def pivots(M: fmpq_mat) -> list[int]:
    R, r = M.rref()
    piv = []
    for i in range(r):
        for j in range(M.ncols()):
            if R[i, j] != 0:
                piv.append(j)
                break
    return piv


def lattice_basis(M: fmpq_mat, reduce: bool = True) -> fmpq_mat:
    """Z-basis (HNF, optionally LLL-reduced) of the Z-span of the rows of M."""
    ncols = M.ncols()
    if M.nrows() == 0:
        return fmpq_mat(0, ncols)
    Z, den = to_integer(M)
    H = Z.hnf()
    rows = [[H[i, j] for j in range(ncols)] for i in range(H.nrows())]
    rows = [r for r in rows if any(v != 0 for v in r)]
    if not rows:
        return fmpq_mat(0, ncols)
    B = fmpz_mat(rows)
    if reduce:
        B = B.lll()
    return fmpq_mat(B) / den


def solve_coords(B: fmpq_mat, V: fmpq_mat) -> fmpq_mat | None:
    """X with X*B == V, for B of full row rank; None if some row of V is outside the span."""
    k = B.nrows()
    if V.nrows() == 0:
        return fmpq_mat(0, k)
    if k == 0:
        return fmpq_mat(V.nrows(), 0) if all(v == 0 for r in rows_of(V) for v in r) else None
    piv = pivots(B)
    if len(piv) != k:
        raise LatticeError("basis is not linearly independent")
    BP = fmpq_mat([[B[i, j] for j in piv] for i in range(k)])
    VP = fmpq_mat([[V[i, j] for j in piv] for i in range(V.nrows())])
    X = VP * BP.inv()
    if X * B != V:
        return None
    return X


def contains(lat: fmpq_mat, vecs: fmpq_mat) -> bool:
    X = solve_coords(lat, vecs)
    return X is not None and is_integral(X)


def index_of(sub: fmpq_mat, lat: fmpq_mat) -> int:
    """[lat : sub] for a full-rank sublattice given by a Z-basis or generating set."""
    sub = lattice_basis(sub, reduce=False)
    if sub.nrows() != lat.nrows():
        raise LatticeError("sublattice does not have full rank")
    X = solve_coords(lat, sub)
    if X is None or not is_integral(X):
        raise LatticeError("not a sublattice")
    return abs(int(X.det().p))


def smith_diagonal(sub: fmpq_mat, lat: fmpq_mat) -> list[int]:
    X = solve_coords(lat, lattice_basis(sub, reduce=False))
    if X is None or not is_integral(X):
        raise LatticeError("not a sublattice")
    Z, _ = to_integer(X)
    S = Z.snf()
    return [abs(int(S[i, i])) for i in range(min(S.nrows(), S.ncols()))]


def left_kernel_int(A: fmpq_mat) -> fmpz_mat:
    """Saturated Z-basis of {c in Z^n : c*A = 0}."""
    n, k = A.nrows(), A.ncols()
    Z, _ = to_integer(A)
    aug = fmpz_mat([[Z[i, j] for j in range(k)] + [1 if t == i else 0 for t in range(n)] for i in range(n)])
    H = aug.hnf()
    rows = []
    for i in range(H.nrows()):
        if all(H[i, j] == 0 for j in range(k)):
            rows.append([H[i, k + t] for t in range(n)])
    if not rows:
        return fmpz_mat(0, n)
    return fmpz_mat(rows).lll()


def left_kernel_rat(A: fmpq_mat) -> fmpq_mat:
    """Q-basis of {c : c*A = 0}."""
    K = left_kernel_int(A)
    return fmpq_mat(K) if K.nrows() else fmpq_mat(0, A.nrows())


def intersect_subspace(lat: fmpq_mat, conditions: fmpq_mat) -> fmpq_mat:
    """lat ∩ {x : x*conditions = 0}."""
    K = left_kernel_int(lat * conditions)
    if K.nrows() == 0:
        return fmpq_mat(0, lat.ncols())
    return lattice_basis(fmpq_mat(K) * lat)


def dual_of_span(gens: fmpq_mat) -> fmpq_mat:
    """{c : c.g in Z for every row g}, when the rows span the whole space."""
    C = lattice_basis(gens, reduce=False)
    if C.nrows() != gens.ncols():
        raise LatticeError("generators do not span")
    return lattice_basis(C.inv().transpose())


def complete_basis(lat: fmpq_mat, sub: fmpq_mat) -> fmpq_mat:
    """Basis of lat whose first rows span the saturated sublattice sub."""
    k = sub.nrows()
    if k == 0:
        return lat
    X = solve_coords(lat, sub)
    if X is None or not is_integral(X):
        raise LatticeError("not a sublattice")
    Z, _ = to_integer(X.transpose())
    H, T = Z.hnf(transform=True)
    Hk = fmpq_mat([[H[i, j] for j in range(k)] for i in range(k)])
    if abs(Hk.det()) != 1:
        raise LatticeError("sublattice is not saturated")
    W = fmpq_mat(T).inv().transpose()
    return W * lat


def gram(B: fmpq_mat, G: fmpq_mat) -> fmpq_mat:
    return B * G * B.transpose()


def unimodular(n: int, rng, steps: int = 6, coeff: int = 1) -> list[list[int]]:
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    if n < 2:
        return U
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.choice([c for c in range(-coeff, coeff + 1) if c])
        U[i] = [a + c * b for a, b in zip(U[i], U[j])]
    if rng.random() < 0.5:
        i, j = rng.sample(range(n), 2)
        U[i], U[j] = U[j], U[i]
    return U


def fmpz_int(x) -> int:
    return int(x)


def log_rational(x) -> float:
    """Natural log of a positive rational of any size."""
    x = to_fraction(x)
    if x <= 0:
        raise ValueError("log of a non-positive number")
    return math.log(x.numerator) - math.log(x.denominator)
