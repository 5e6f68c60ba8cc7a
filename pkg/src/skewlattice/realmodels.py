"""Real models of D ⊗ R as products of H or M_d(C), and what they buy us.

Quaternions are modelled as 2x2 complex matrices, so † is conjugate transpose
in both Albert types.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from flint import fmpq, fmpq_mat

from ._linalg import qmat, rank
from .algebra import Algebra, AlgebraError, dnorm_float
from .hermforms import FormError, SkewForm, weakly_unitary_dbasis

TOL = 1e-9
EIG_TOL = 1e-7

QI = np.array([[1j, 0], [0, -1j]])
QJ = np.array([[0, 1], [-1, 0]], dtype=complex)
QK = QI @ QJ
QUNITS = [np.eye(2, dtype=complex), QI, QJ, QK]


class ModelError(ValueError):
    pass


class RealModel:
    """alpha: D_R -> prod_i M_s(C), s = d (type IV) or 2 (type III)."""

    def __init__(self, alg: Algebra, images: np.ndarray):
        self.alg = alg
        self.images = images  # shape (dim, e, s, s)
        self.e = images.shape[1]
        self.size = images.shape[2]
        self.trd_factor = 1.0 if alg.albert_type == "III" else 2.0
        flat = images.reshape(alg.dim, -1)
        self._A = np.concatenate([flat.real, flat.imag], axis=1).T  # real (2*e*s*s, dim)
        self._pinv = np.linalg.pinv(self._A)
        self.residual = self._check()

    def alpha(self, x) -> np.ndarray:
        x = np.asarray([float(v) for v in x])
        return np.tensordot(x, self.images, axes=1)

    def alpha_inv(self, comps) -> np.ndarray:
        comps = np.asarray(comps, dtype=complex).reshape(-1)
        vec = np.concatenate([comps.real, comps.imag])
        x = self._pinv @ vec
        res = np.linalg.norm(self._A @ x - vec)
        if res > 1e-7 * (1 + np.linalg.norm(vec)):
            raise ModelError("element is not in the image of the real model")
        return x

    def trd(self, comps) -> float:
        return self.trd_factor * float(sum(np.trace(c).real for c in comps))

    def dnorm(self, comps) -> float:
        return math.sqrt(max(0.0, self.trd([c @ c.conj().T for c in comps])))

    def _check(self) -> float:
        alg = self.alg
        B = alg.basis()
        worst = 0.0
        for a in range(alg.dim):
            for b in range(alg.dim):
                prod = self.alpha((B[a] * B[b]).c)
                lhs = np.einsum("iab,ibc->iac", self.images[a], self.images[b])
                worst = max(worst, float(np.abs(prod - lhs).max()))
            dag = self.alpha(B[a].dag().c)
            worst = max(worst, float(np.abs(dag - np.conj(np.transpose(self.images[a], (0, 2, 1)))).max()))
        if worst > TOL * 100:
            raise ModelError(f"real model residual {worst:.3g} too large")
        return worst


def real_model(alg: Algebra) -> RealModel:
    cached = getattr(alg, "_real_model", None)
    if cached is not None:
        return cached
    if alg.kind == "quaternion":
        f0 = alg.f0
        e = alg.e
        a, b = alg.quat_ab
        taus = f0.real_embeddings()
        ims = np.zeros((alg.dim, e, 2, 2), dtype=complex)
        for i, tau in enumerate(taus):
            ta = abs(a.evaluate(tau).real)
            tb = abs(b.evaluate(tau).real)
            scale = [1.0, math.sqrt(ta), math.sqrt(tb), math.sqrt(ta * tb)]
            for qq in range(4):
                for p in range(e):
                    ims[qq * e + p, i] = tau ** p * scale[qq] * QUNITS[qq]
    elif alg.kind == "matrix_cm":
        F = alg.cm_field
        d, n2, e = alg.d, F.degree, alg.e
        places = F.complex_places()
        ims = np.zeros((alg.dim, e, d, d), dtype=complex)
        for p in range(d):
            for qq in range(d):
                for t in range(n2):
                    for i, z in enumerate(places):
                        ims[(p * d + qq) * n2 + t, i, p, qq] = z ** t
    else:
        raise ModelError("model unavailable for a generic algebra")
    model = RealModel(alg, ims)
    alg._real_model = model
    return model


# ---------------------------------------------------------------- signatures

def _block_matrix(form: SkewForm, model: RealModel, basis=None) -> list[np.ndarray]:
    alg = form.alg
    basis = basis if basis is not None else form.standard_basis()
    m = len(basis)
    s = model.size
    vals = [[model.alpha(form.psi(u, v).c) for v in basis] for u in basis]
    out = []
    for i in range(model.e):
        H = np.zeros((s * m, s * m), dtype=complex)
        for j in range(m):
            for k in range(m):
                H[j * s:(j + 1) * s, k * s:(k + 1) * s] = vals[j][k][i]
        out.append(H)
    return out


def signature_of(form: SkewForm, model: RealModel | None = None, basis=None) -> tuple[int, ...]:
    """Per real component, the number of eigenvalues with positive imaginary part."""
    alg = form.alg
    if alg.albert_type != "IV":
        raise ModelError("signatures are defined for type IV algebras")
    model = model or real_model(alg)
    sig = []
    for H in _block_matrix(form, model, basis):
        ev = np.linalg.eigvals(H).imag
        scale = max(1.0, float(np.abs(H).max()))
        if np.any(np.abs(ev) < EIG_TOL * scale):
            with mpmath.workdps(60):
                ev = [float(mpmath.im(z)) for z in mpmath.eig(mpmath.matrix(H.tolist()))[0]]
            if any(abs(v) < EIG_TOL * scale for v in ev):
                raise ModelError("indeterminate signature")
            ev = np.asarray(ev)
        sig.append(int(np.sum(ev > 0)))
    return tuple(sig)


@dataclass
class SignMatrix:
    """signs[i][j][l] = +1 or -1, meaning the l-th diagonal entry of block (i, j) is ±i."""
    signs: np.ndarray

    def counts(self) -> tuple[int, ...]:
        return tuple(int(np.sum(self.signs[i] > 0)) for i in range(self.signs.shape[0]))

    def block(self, i: int, j: int) -> np.ndarray:
        return np.diag(1j * self.signs[i, j].astype(complex))


@dataclass
class Normalization:
    scalars: list[np.ndarray]  # real coordinates of s_j in D_R
    sign: SignMatrix
    bounds_ok: bool
    ratios: list[float] = field(default_factory=list)


def _normalize_quaternion(A: np.ndarray) -> np.ndarray:
    """s with A = s * QI * s^†, for a nonzero pure quaternion A."""
    a = A[0, 0].imag
    b = A[0, 1].real
    c = A[0, 1].imag
    r = math.sqrt(a * a + b * b + c * c)
    if r == 0:
        raise ModelError("pairing vanishes in a component")
    x = (r + a) * QUNITS[0] + c * QJ - b * QK
    nx = ((r + a) ** 2 + b * b + c * c)
    if nx < 1e-24 * max(1.0, r * r):
        x, nx = QJ.copy(), 1.0
    alpha = nx * r
    return math.sqrt(alpha) * x.conj().T / nx


def alpha_eps_normalize(form: SkewForm, weak_basis, model: RealModel | None = None) -> Normalization:
    alg = form.alg
    model = model or real_model(alg)
    m = len(weak_basis)
    for i in range(m):
        for j in range(m):
            if i != j and form.psi(weak_basis[i], weak_basis[j]):
                raise FormError("basis is not weakly unitary")
    k = 1 if alg.albert_type == "III" else alg.d
    s_size = model.size
    signs = np.ones((model.e, m, 1 if alg.albert_type == "III" else s_size), dtype=int)
    scalars, ratios = [], []
    ok = True
    for j, v in enumerate(weak_basis):
        y = form.psi(v, v)
        Ay = model.alpha(y.c)
        comps = []
        for i in range(model.e):
            if alg.albert_type == "III":
                comps.append(_normalize_quaternion(Ay[i]))
            else:
                Hm = -1j * Ay[i]
                Hm = (Hm + Hm.conj().T) / 2
                mu, P = np.linalg.eigh(Hm)
                if np.any(np.abs(mu) < TOL * max(1.0, np.abs(mu).max())):
                    raise FormError("pairing is singular in a component")
                signs[i, j] = np.sign(mu).astype(int)
                comps.append(P @ np.diag(np.sqrt(np.abs(mu))))
        s = model.alpha_inv(np.array(comps))
        scalars.append(s)
        # check alpha(s^-1 y s^-†) = eps
        for i, c in enumerate(comps):
            ci = np.linalg.inv(c)
            got = ci @ Ay[i] @ ci.conj().T
            want = QI if alg.albert_type == "III" else np.diag(1j * signs[i, j])
            if np.abs(got - want).max() > 1e-7:
                raise ModelError("normalization residual too large")
        bound = (2 * k * alg.e) ** 0.25 * math.sqrt(model.dnorm(Ay))
        norm_s = model.dnorm(np.array(comps))
        ratios.append(norm_s / bound)
        if norm_s > bound * (1 + TOL):
            ok = False
    return Normalization(scalars, SignMatrix(signs), ok, ratios)


# ---------------------------------------------------------------- invertible values

def posdef_shift(n, m) -> float:
    """t with n + t*m positive definite: max|eig(n)| / lambda_min(m) + 1."""
    N = np.atleast_2d(np.asarray(n, dtype=complex))
    M = np.atleast_2d(np.asarray(m, dtype=complex))
    lam = np.linalg.eigvalsh((M + M.conj().T) / 2)
    if lam.min() <= 0:
        raise ModelError("m is not positive definite")
    mu = np.linalg.eigvalsh((N + N.conj().T) / 2)
    t = float(np.abs(mu).max()) / float(lam.min()) + 1.0
    np.linalg.cholesky((N + N.conj().T) / 2 + t * M)
    return t


def _smallest_sv(A: np.ndarray) -> float:
    return float(np.linalg.svd(A, compute_uv=False).min())


def invertible_value(H: np.ndarray, x: np.ndarray, y: np.ndarray, t_scale: float = 1.0) -> np.ndarray:
    """z in the C-span of x, y (left M_d(C) action) with psi(z, z) invertible.

    The component space is (C^d)^k with psi(u, w) = u H w^*, u and w being d x dk
    matrices and H skew-Hermitian; requires psi(x, y) = I.
    """
    def psi(u, w):
        return u @ H @ w.conj().T

    d = x.shape[0]
    if np.abs(psi(x, y) - np.eye(d)).max() > 1e-8:
        raise ModelError("precondition psi(x, y) = I fails")
    for cand in (x, y):
        if _smallest_sv(psi(cand, cand)) > TOL:
            return cand
    R0 = psi(y, y)
    lam, W = np.linalg.eigh((-1j * R0 + (-1j * R0).conj().T) / 2)
    scale = max(1.0, float(np.abs(lam).max()))
    pos = [i for i in range(d) if lam[i] > TOL * scale]
    neg = [i for i in range(d) if lam[i] < -TOL * scale]
    zero = [i for i in range(d) if abs(lam[i]) <= TOL * scale]
    order = pos + neg + zero
    Q = np.zeros((d, d), dtype=complex)
    for row, i in enumerate(order):
        f = 1 / math.sqrt(abs(lam[i])) if i not in zero else 1.0
        Q[row] = f * W[:, i].conj()
    X = np.linalg.inv(Q.conj().T) @ x
    Y = Q @ y
    P = psi(X, X)
    r, p = len(pos) + len(neg), len(pos)
    C = -P[r:, r:] / 2
    Dm = -C - 0.5j * np.eye(d - r)
    A1, A2, A3 = P[:p, :p], P[:p, p:r], P[p:r, p:r]
    P2 = P[:r, r:]
    t = 0.0
    if r - p:
        t = posdef_shift(-0.5j * A3, np.eye(r - p))
    t = max(t, 1.0) * t_scale
    for _ in range(30):
        K3 = A3 / 2 + 1j * t * np.eye(r - p)
        K2 = A2 @ np.linalg.inv(1j * K3.conj().T + np.eye(r - p)) if r - p else np.zeros((p, 0))
        S1 = A1 + 1j * K2 @ K2.conj().T
        K1 = S1 / 2 - 1j * t * np.eye(p)
        U = np.zeros((d, d), dtype=complex)
        U[:p, :p] = K1
        U[:p, p:r] = K2
        U[p:r, p:r] = K3
        U[:r, r:] = P2
        U[r:, r:] = Dm
        z = X + U @ Y
        val = psi(z, z)
        if _smallest_sv(val) > TOL * max(1.0, float(np.abs(val).max())):
            return z
        t *= 2
    raise ModelError("conditioning failure in the invertible-value construction")


# ---------------------------------------------------------------- symplectic bases

def _unit_rbasis(alg: Algebra, model: RealModel, sign: SignMatrix, j: int):
    """Orthonormal a_r in D_R with the pairing order, per component."""
    s = model.size
    out = []
    for i in range(model.e):
        def comp(mat):
            arr = np.zeros((model.e, s, s), dtype=complex)
            arr[i] = mat
            return model.alpha_inv(arr)
        if alg.albert_type == "III":
            for u in (QUNITS[0], QI, QK, QJ):
                out.append(comp(u / math.sqrt(2)))
        else:
            for p in range(s):
                for qq in range(s):
                    E = np.zeros((s, s), dtype=complex)
                    E[p, qq] = 1 / math.sqrt(2)
                    pair = [comp(E), comp(1j * E)]
                    if sign.signs[i, j, qq] < 0:
                        pair.reverse()
                    out.extend(pair)
    return out


@dataclass
class SymplecticBasis:
    vectors: np.ndarray  # rows a_r u_j in real coordinates of D^m
    gram: np.ndarray
    order: list[int]
    sign: SignMatrix
    unit_vectors: list[np.ndarray]  # u_j = s_j^{-1} v_j
    a_r: list[list[np.ndarray]]


def _dr_inverse(alg: Algebra, s) -> np.ndarray:
    L = np.array([alg.mul_float(list(s), [float(t == l) for t in range(alg.dim)]) for l in range(alg.dim)])
    one = np.array([float(v) for v in alg.one.c])
    return np.linalg.solve(L.T, one)


def _left_mul_vec(alg: Algebra, a, v) -> np.ndarray:
    n = alg.dim
    out = []
    for j in range(len(v) // n):
        out.extend(alg.mul_float(list(a), list(v[j * n:(j + 1) * n])))
    return np.asarray(out)


def symplectic_rbasis(form: SkewForm, model: RealModel | None = None, weak_basis=None) -> SymplecticBasis:
    alg = form.alg
    model = model or real_model(alg)
    weak_basis = weak_basis if weak_basis is not None else weakly_unitary_dbasis(form)
    norm = alpha_eps_normalize(form, weak_basis, model)
    units = []
    for s, v in zip(norm.scalars, weak_basis):
        sinv = _dr_inverse(alg, s)
        units.append(_left_mul_vec(alg, sinv, [float(c) for c in v]))
    vectors, a_rs = [], []
    for j, u in enumerate(units):
        ar = _unit_rbasis(alg, model, norm.sign, j)
        a_rs.append(ar)
        for a in ar:
            vectors.append(_left_mul_vec(alg, a, u))
    V = np.array(vectors)
    n = len(vectors)
    G = np.zeros((n, n))
    trd = np.asarray(alg.float_trd_vec)
    for r in range(n):
        for c in range(n):
            G[r, c] = float(np.dot(form.psi_float(V[r], V[c]), trd))
    J = standard_j(n)
    if np.abs(G - J).max() > 1e-8 * max(1.0, np.abs(G).max()):
        raise ModelError("symplectic basis check failed")
    for ar in a_rs:
        for x in ar:
            if abs(dnorm_float(alg, x) - 1) > 1e-8:
                raise ModelError("a_r not orthonormal")
    return SymplecticBasis(V, G, list(range(n)), norm.sign, units, a_rs)


def standard_j(n: int) -> np.ndarray:
    J = np.zeros((n, n))
    for k in range(0, n, 2):
        J[k, k + 1] = 1
        J[k + 1, k] = -1
    return J


# ---------------------------------------------------------------- adapted norm

@dataclass
class NormModel:
    """|x|^2 = x Q x^T on real coordinates of D^m (inflated by `slack`)."""
    Q: np.ndarray
    slack: float
    alg: Algebra

    def norm(self, x) -> float:
        x = np.asarray([float(v) for v in x])
        return math.sqrt(max(0.0, float(x @ self.Q @ x)))

    def gram(self, lattice: fmpq_mat) -> np.ndarray:
        B = np.array([[float(lattice[i, j]) for j in range(lattice.ncols())] for i in range(lattice.nrows())])
        return B @ self.Q @ B.T

    def covolume(self, lattice: fmpq_mat) -> float:
        return math.sqrt(abs(np.linalg.det(self.gram(lattice))))


SLACK = 1 + 1e-6


def adapted_norm(form: SkewForm, model: RealModel | None = None) -> NormModel:
    alg = form.alg
    model = model or real_model(alg)
    sb = symplectic_rbasis(form, model)
    B = sb.vectors
    Binv = np.linalg.inv(B)
    Q = Binv @ Binv.T * SLACK ** 2
    return NormModel((Q + Q.T) / 2, SLACK, alg)


# ---------------------------------------------------------------- iota_0

@dataclass
class Iota0:
    albert_type: str
    d: int
    e: int
    m: int
    sig: tuple[int, ...]
    size: int

    def realify(self, A) -> fmpq_mat:
        """Gaussian-rational d x d matrix (pairs (re, im)) to its 2d x 2d real form."""
        n = len(A)
        M = fmpq_mat(2 * n, 2 * n)
        for p in range(n):
            for qq in range(n):
                x, y = A[p][qq]
                M[2 * p, 2 * qq] = x
                M[2 * p, 2 * qq + 1] = -y
                M[2 * p + 1, 2 * qq] = y
                M[2 * p + 1, 2 * qq + 1] = x
        return M

    def image(self, element) -> fmpq_mat:
        """element: per component, a d x d matrix of (re, im) pairs (IV) or a quaternion 4-tuple (III)."""
        out = fmpq_mat(self.size, self.size)
        pos = 0
        for i in range(self.e):
            comp = element[i]
            if self.albert_type == "IV":
                blocks = [self.realify(comp)] * self.sig[i]
                conj = [[(x, -y) for (x, y) in row] for row in comp]
                blocks += [self.realify(conj)] * (self.d * self.m - self.sig[i])
            else:
                blocks = [quaternion_left_regular(comp)] * self.m
            for blk in blocks:
                k = blk.nrows()
                for a in range(k):
                    for b in range(k):
                        out[pos + a, pos + b] = blk[a, b]
                pos += k
        return out

    def generators(self):
        gens = []
        for i in range(self.e):
            if self.albert_type == "IV":
                for p in range(self.d):
                    for qq in range(self.d):
                        for val in ((1, 0), (0, 1)):
                            comp = [[(0, 0)] * self.d for _ in range(self.d)]
                            comp[p][qq] = val
                            gens.append(self._embed_component(i, comp))
            else:
                for u in range(4):
                    gens.append(self._embed_component(i, tuple(int(t == u) for t in range(4))))
        return gens

    def _embed_component(self, i, comp):
        zero = [[(0, 0)] * self.d for _ in range(self.d)] if self.albert_type == "IV" else (0, 0, 0, 0)
        return [comp if t == i else zero for t in range(self.e)]

    def multiply(self, g, h):
        out = []
        for a, b in zip(g, h):
            if self.albert_type == "IV":
                n = len(a)
                prod = []
                for p in range(n):
                    row = []
                    for s in range(n):
                        re = sum(fmpq(a[p][t][0]) * b[t][s][0] - fmpq(a[p][t][1]) * b[t][s][1] for t in range(n))
                        im = sum(fmpq(a[p][t][0]) * b[t][s][1] + fmpq(a[p][t][1]) * b[t][s][0] for t in range(n))
                        row.append((re, im))
                    prod.append(row)
                out.append(prod)
            else:
                out.append(quaternion_product(a, b))
        return out

    def check_homomorphism(self) -> bool:
        gens = self.generators()
        for g in gens:
            for h in gens:
                if self.image(self.multiply(g, h)) != self.image(g) * self.image(h):
                    return False
        return True

    def commutes_with_j(self) -> bool:
        J = qmat(standard_j(self.size).astype(int).tolist())
        return all(self.image(g) * J == J * self.image(g) for g in self.generators())

    def commutant_dimension(self) -> int:
        n = self.size
        rows = []
        for g in self.generators():
            G = self.image(g)
            # X G - G X = 0, unknowns X flattened row-major
            for a in range(n):
                for b in range(n):
                    row = [fmpq(0)] * (n * n)
                    for t in range(n):
                        row[a * n + t] += G[t, b]
                        row[t * n + b] -= G[a, t]
                    rows.append(row)
        return n * n - rank(qmat(rows))

    def expected_commutant_dimension(self) -> int:
        if self.albert_type == "IV":
            return 2 * self.e * (self.m * self.d) ** 2
        return 4 * self.e * self.m ** 2


_QMUL = {
    (0, 0): (0, 1), (0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1),
    (1, 0): (1, 1), (1, 1): (0, -1), (1, 2): (3, 1), (1, 3): (2, -1),
    (2, 0): (2, 1), (2, 1): (3, -1), (2, 2): (0, -1), (2, 3): (1, 1),
    (3, 0): (3, 1), (3, 1): (2, 1), (3, 2): (1, -1), (3, 3): (0, -1),
}


def quaternion_product(a, b):
    out = [fmpq(0)] * 4
    for x in range(4):
        for y in range(4):
            k, s = _QMUL[(x, y)]
            out[k] += fmpq(a[x]) * b[y] * s
    return tuple(out)


def quaternion_left_regular(a) -> fmpq_mat:
    """Left multiplication by a in the basis (1, i, k, j), acting on columns."""
    order = [0, 1, 3, 2]
    M = fmpq_mat(4, 4)
    for col, u in enumerate(order):
        basis = tuple(int(t == u) for t in range(4))
        img = quaternion_product(a, basis)
        for row, w in enumerate(order):
            M[row, col] = img[w]
    return M


def iota0_embed(d: int, e: int, m: int, sig=None, albert_type: str = "IV") -> Iota0:
    if albert_type == "III":
        if d != 2:
            raise ModelError("type III needs d = 2")
        size = 4 * e * m
        sig = tuple(sig) if sig is not None else ()
    else:
        size = 2 * d * d * e * m
        sig = tuple(sig) if sig is not None else tuple(d * m for _ in range(e))
        if len(sig) != e or any(not 0 <= r <= d * m for r in sig):
            raise ModelError("signature entries must lie in [0, dm]")
    return Iota0(albert_type, d, e, m, sig, size)
