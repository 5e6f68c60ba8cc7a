"""Short vectors, Minkowski D-bases and the inductive weakly unitary basis."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy
from flint import fmpq, fmpq_mat

from ._linalg import (
    complete_basis,
    contains,
    dual_of_span,
    index_of,
    intersect_subspace,
    is_integral,
    lattice_basis,
    left_kernel_rat,
    log_rational,
    qmat,
    rows_of,
    solve_coords,
)
from .algebra import (
    AlgElement,
    AlgOrder,
    AlgebraError,
    dnorm,
    eta_for,
    reduced_trace_norm,
    stabilizer_order,
    vec_left_mul,
)
from .exactfield import NFIdeal, NFOrder, conductor, ideal_norm, maximal_order
from .hermforms import SkewForm, combine, d_independent, d_span_rows, split, trd_gram
from .realmodels import NormModel, adapted_norm


class ReductionError(RuntimeError):
    """An internal consistency check failed (should be impossible for valid input)."""


# ---------------------------------------------------------------- Hermite constants

_HERMITE_POW = {1: Fraction(1), 2: Fraction(4, 3), 3: Fraction(2), 4: Fraction(4), 5: Fraction(8),
                6: Fraction(64, 3), 7: Fraction(64), 8: Fraction(256)}


@lru_cache(maxsize=None)
def hermite_upper(n: int) -> float:
    """Upper bound for the Hermite constant gamma_n (exact value for n <= 8, rounded up)."""
    if n < 1:
        raise ValueError("dimension must be positive")
    if n in _HERMITE_POW:
        val = float(_HERMITE_POW[n]) ** (1.0 / n)
    else:
        val = (2 / math.pi) * math.gamma(2 + n / 2) ** (2 / n)
    return val * (1 + 1e-12)


# ---------------------------------------------------------------- LLL and enumeration

def _gso(G: np.ndarray):
    n = G.shape[0]
    mu = np.zeros((n, n))
    bstar = np.zeros(n)
    for i in range(n):
        for j in range(i):
            mu[i, j] = (G[i, j] - sum(mu[j, l] * mu[i, l] * bstar[l] for l in range(j))) / bstar[j]
        bstar[i] = G[i, i] - sum(mu[i, l] ** 2 * bstar[l] for l in range(i))
    return mu, bstar


def lll_transform(gram_of, n: int, delta: float = 0.99) -> list[list[int]]:
    """Integer T making the rows of T*B LLL-reduced; gram_of(T) returns the float Gram."""
    T = [[int(i == j) for j in range(n)] for i in range(n)]
    if n <= 1:
        return T
    G = gram_of(T)
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            raise ReductionError("LLL did not terminate")
        mu, bstar = _gso(G)
        changed = False
        for j in range(k - 1, -1, -1):
            r = round(mu[k, j])
            if r:
                T[k] = [a - r * b for a, b in zip(T[k], T[j])]
                changed = True
                G = gram_of(T)
                mu, bstar = _gso(G)
        if bstar[k] >= (delta - mu[k, k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            T[k], T[k - 1] = T[k - 1], T[k]
            G = gram_of(T)
            k = max(k - 1, 1)
    return T


def _float_gram_of(G: np.ndarray):
    def f(T):
        Tm = np.array(T, dtype=float)
        return Tm @ G @ Tm.T
    return f


def _enumerate(G: np.ndarray, bound: float, outer: int = 0) -> list[tuple[int, ...]]:
    """Integer y != 0 with y G y^T <= bound; if outer > 0 some y_t with t >= outer is nonzero."""
    n = G.shape[0]
    mu, bstar = _gso(G)
    if np.any(bstar <= 0):
        raise ReductionError("Gram matrix is not positive definite")
    out = []
    x = [0] * n
    eps = 1e-9

    def rec(i: int, partial: float):
        c = -sum(mu[j, i] * x[j] for j in range(i + 1, n))
        rem = bound - partial
        if rem < 0:
            return
        r = math.sqrt(rem / bstar[i])
        lo = math.ceil(c - r - eps)
        hi = math.floor(c + r + eps)
        for v in range(lo, hi + 1):
            x[i] = v
            p = partial + bstar[i] * (v - c) ** 2
            if p > bound * (1 + 1e-12) + 1e-300:
                continue
            if outer and i == outer and not any(x[outer:]):
                continue
            if i == 0:
                if any(x):
                    out.append(tuple(x))
            else:
                rec(i - 1, p)
        x[i] = 0

    rec(n - 1, 0.0)
    return out


def _to_fmpq_mat(gram) -> fmpq_mat:
    return gram if isinstance(gram, fmpq_mat) else qmat(gram)


def shortest_vectors(gram, bound) -> list[tuple[int, ...]]:
    """All nonzero integer v with v G v^T <= bound, sorted by value then lexicographically."""
    G = _to_fmpq_mat(gram)
    bound = fmpq(bound) if not isinstance(bound, fmpq) else bound
    if isinstance(bound, fmpq) and bound <= 0:
        raise ValueError("bound must be positive")
    n = G.nrows()
    Gf = np.array([[float(G[i, j]) for j in range(n)] for i in range(n)])

    def exact_gram_of(T):
        Tm = qmat(T)
        R = Tm * G * Tm.transpose()
        return np.array([[float(R[i, j]) for j in range(n)] for i in range(n)])

    T = lll_transform(exact_gram_of, n)
    Gr = exact_gram_of(T)
    ys = _enumerate(Gr, float(bound) * (1 + 1e-9) + 1e-12)
    found = []
    for y in ys:
        v = [int(sum(y[k] * T[k][j] for k in range(n))) for j in range(n)]
        vm = qmat([v])
        val = (vm * G * vm.transpose())[0, 0]
        if val <= bound:
            found.append((val, tuple(v)))
    found.sort()
    return [v for _, v in found]


def _sign_normalize(v):
    for c in v:
        if c != 0:
            return tuple(v) if c > 0 else tuple(-a for a in v)
    return tuple(v)


def shortest_nonzero(gram) -> tuple[int, ...]:
    """A shortest nonzero vector, sign fixed (first nonzero coordinate positive), lexicographic ties."""
    G = _to_fmpq_mat(gram)
    n = G.nrows()
    cands = []
    bound = min(G[i, i] for i in range(n))

    def exact_gram_of(T):
        Tm = qmat(T)
        R = Tm * G * Tm.transpose()
        return np.array([[float(R[i, j]) for j in range(n)] for i in range(n)])

    T = lll_transform(exact_gram_of, n)
    Tm = qmat(T)
    R = Tm * G * Tm.transpose()
    bound = min(bound, min(R[i, i] for i in range(n)))
    vs = shortest_vectors(G, bound)
    best = None
    for v in vs:
        vm = qmat([v])
        val = (vm * G * vm.transpose())[0, 0]
        key = (val, tuple(-abs(c) for c in _sign_normalize(v)), _sign_normalize(v))
        if best is None or key < best[0]:
            best = (key, _sign_normalize(v))
    return best[1]


# ---------------------------------------------------------------- instances

@dataclass
class LatticeInstance:
    form: SkewForm
    lattice: fmpq_mat
    order: AlgOrder
    disc_l: int
    eta: int

    @property
    def alg(self):
        return self.form.alg

    @property
    def m(self) -> int:
        return self.form.m

    @classmethod
    def build(cls, form: SkewForm, lattice, order: AlgOrder | None = None, eta: int | None = None,
              check_order: bool = True) -> LatticeInstance:
        alg = form.alg
        if alg.is_division is False:
            raise ValueError("reduction needs a division algebra")
        L = lattice if isinstance(lattice, fmpq_mat) else qmat(lattice)
        n = alg.dim * form.m
        if L.nrows() != n or L.ncols() != n:
            raise ValueError(f"lattice must have {n} basis vectors of length {n}")
        if L.det() == 0:
            raise ValueError("lattice basis is not of full rank")
        T = trd_gram(form, L)
        if not is_integral(T):
            raise ValueError("trace form not integral on the lattice")
        disc = abs(T.det())
        if disc == 0:
            raise ValueError("form is degenerate")
        disc_l = int(disc.p)
        if order is None:
            order = stabilizer_order(alg, L)
        elif check_order:
            for r in order.elements():
                moved = qmat([vec_left_mul(alg, r, row) for row in rows_of(L)])
                if not contains(L, moved):
                    raise ValueError("order does not stabilise the lattice")
        if eta is None:
            eta = eta_for(order, disc_l)
        return cls(form, L, order, disc_l, int(eta))


# ---------------------------------------------------------------- constants

@dataclass(frozen=True)
class Power:
    """base ** exponent with rational base and exponent."""
    base: Fraction
    exponent: Fraction

    def log(self) -> float:
        return float(self.exponent) * log_rational(self.base)

    def __str__(self):
        return f"({self.base})^({self.exponent})"


@dataclass(frozen=True)
class Constants:
    albert_type: str
    d: int
    e: int
    m: int
    c_index_mult: Power
    c_index_eta: Fraction
    c_index_R: Fraction
    c_index_L: Fraction
    c_psi_mult: Power
    c_psi_eta: Fraction
    c_psi_R: Fraction
    c_psi_L: Fraction

    def row(self) -> dict:
        return {k: (str(v) if not isinstance(v, int) else v) for k, v in self.__dict__.items()}

    def to_json(self) -> dict:
        out = {"albert_type": self.albert_type, "d": self.d, "e": self.e, "m": self.m}
        for k in ("c_index_mult", "c_psi_mult"):
            p = getattr(self, k)
            out[k] = {"base": str(p.base), "exponent": str(p.exponent)}
        for k in ("c_index_eta", "c_index_R", "c_index_L", "c_psi_eta", "c_psi_R", "c_psi_L"):
            out[k] = str(getattr(self, k))
        return out


def constants_table(albert_type: str, d: int, e: int, m: int) -> Constants:
    if min(d, e, m) < 1:
        raise ValueError("d, e and m must be positive")
    if albert_type == "III" and d != 2:
        raise ValueError("type III algebras have degree d = 2")
    F = Fraction
    if albert_type == "III":
        return Constants(
            "III", d, e, m,
            Power(F(8 * e * m * m), F(5 * e * e * m * (m + 2))),
            F(14 * e * m),
            F(m * (m + 16), 4) + 24 * m * (m - 1) * e * e,
            F(m - 1, 2) + 4 * (m + 1) * e,
            Power(F(4 * e * m * m), F(e * (m * (m + 1) + 14))),
            F(7),
            F(e * (m * (m + 1) + 26), 16) + 12 * e,
            F(m + 1, 8),
        )
    if albert_type == "IV":
        return Constants(
            "IV", d, e, m,
            Power(F(64 * d ** 3 * e * m * m), F(5 * d ** 4 * e * e * m * (m + 2))),
            F(3 * d * d * e * m),
            F(m * (m + 8), 4) + 14 * m * (m - 1) * d ** 3 * e * e,
            F(m - 1, 2) + 4 * (m + 1) * d * d * e,
            Power(F(4 * d * d * e * m * m), F(d * d * e * (m * (m + 1) + 14), 4)),
            F(3),
            F(e * m * (m + 1) + 24 * d * d, 4),
            F(m + 1, 2),
        )
    raise ValueError("albert_type must be 'III' or 'IV'")


def constants_expressions(albert_type: str) -> dict:
    """The table entries as sympy expressions in d, e, m."""
    d, e, m = sympy.symbols("d e m", positive=True, integer=True)
    R = sympy.Rational
    if albert_type == "III":
        return {
            "c_index_mult": (8 * e * m ** 2) ** (5 * e ** 2 * m * (m + 2)),
            "c_index_eta": 14 * e * m,
            "c_index_R": m * (m + 16) / 4 + 24 * m * (m - 1) * e ** 2,
            "c_index_L": (m - 1) / R(2) + 4 * (m + 1) * e,
            "c_psi_mult": (4 * e * m ** 2) ** (e * (m * (m + 1) + 14)),
            "c_psi_eta": sympy.Integer(7),
            "c_psi_R": e * (m * (m + 1) + 26) / 16 + 12 * e,
            "c_psi_L": (m + 1) / R(8),
        }
    return {
        "c_index_mult": (64 * d ** 3 * e * m ** 2) ** (5 * d ** 4 * e ** 2 * m * (m + 2)),
        "c_index_eta": 3 * d ** 2 * e * m,
        "c_index_R": m * (m + 8) / 4 + 14 * m * (m - 1) * d ** 3 * e ** 2,
        "c_index_L": (m - 1) / R(2) + 4 * (m + 1) * d ** 2 * e,
        "c_psi_mult": (4 * d ** 2 * e * m ** 2) ** (d ** 2 * e * (m * (m + 1) + 14) / 4),
        "c_psi_eta": sympy.Integer(3),
        "c_psi_R": (e * m * (m + 1) + 24 * d ** 2) / 4,
        "c_psi_L": (m + 1) / R(2),
    }


def _pow_le(lhs: Fraction, terms: list[tuple[Fraction, Fraction]]) -> bool:
    """Exact test lhs <= prod base**exp, rational exponents, positive bases."""
    den = 1
    for _, ex in terms:
        den = math.lcm(den, Fraction(ex).denominator)
    left = Fraction(lhs) ** den
    right = Fraction(1)
    for base, ex in terms:
        right *= Fraction(base) ** int(Fraction(ex) * den)
    return left <= right


def index_bound_terms(c: Constants, eta: int, disc_r: int, disc_l: int, eta_is_disc_l: bool = True):
    """Factors of the index bound; with eta_is_disc_l=True, eta is replaced by disc(L)."""
    terms = [(c.c_index_mult.base, c.c_index_mult.exponent), (Fraction(disc_r), c.c_index_R)]
    if eta_is_disc_l:
        terms.append((Fraction(disc_l), c.c_index_eta + c.c_index_L))
    else:
        terms += [(Fraction(eta), c.c_index_eta), (Fraction(disc_l), c.c_index_L)]
    return terms


def psi_bound_terms(c: Constants, eta: int, disc_r: int, disc_l: int, eta_is_disc_l: bool = True):
    """Factors of the bound on |psi|_D^2 (all exponents doubled)."""
    terms = [(c.c_psi_mult.base, 2 * c.c_psi_mult.exponent), (Fraction(disc_r), 2 * c.c_psi_R)]
    if eta_is_disc_l:
        terms.append((Fraction(disc_l), 2 * (c.c_psi_eta + c.c_psi_L)))
    else:
        terms += [(Fraction(eta), 2 * c.c_psi_eta), (Fraction(disc_l), 2 * c.c_psi_L)]
    return terms


def log_terms(terms) -> float:
    return sum(float(ex) * log_rational(base) for base, ex in terms)


# ---------------------------------------------------------------- Minkowski D-basis

def _d_span_conditions(alg, vectors, size: int) -> fmpq_mat:
    """K with x*K = 0 exactly when x lies in the D-span of vectors."""
    S = d_span_rows(alg, vectors)
    K = left_kernel_rat(S.transpose())
    return K.transpose() if K.nrows() else fmpq_mat(size, 0)


def _reduce_blocks(G: np.ndarray, k: int) -> np.ndarray:
    """Integer transform: LLL on the first k rows and on the projection of the rest."""
    n = G.shape[0]
    T = [[int(i == j) for j in range(n)] for i in range(n)]
    if k > 1:
        Ti = lll_transform(_float_gram_of(G[:k, :k]), k)
        for a in range(k):
            T[a] = Ti[a] + [0] * (n - k)
    Tf = np.array(T, dtype=float)
    G1 = Tf @ G @ Tf.T
    if n - k > 1:
        if k:
            Gii = G1[:k, :k]
            Gio = G1[:k, k:]
            P = G1[k:, k:] - Gio.T @ np.linalg.solve(Gii, Gio)
        else:
            P = G1
        To = lll_transform(_float_gram_of((P + P.T) / 2), n - k)
        outer = [[sum(To[a][t] * T[k + t][j] for t in range(n - k)) for j in range(n)] for a in range(n - k)]
        for a in range(n - k):
            T[k + a] = outer[a]
    if k:
        Tf = np.array(T, dtype=float)
        G1 = Tf @ G @ Tf.T
        Gii = G1[:k, :k]
        for a in range(k, n):
            coeff = np.linalg.solve(Gii, G1[:k, a])
            r = [round(c) for c in coeff]
            if any(r):
                T[a] = [T[a][j] - sum(r[t] * T[t][j] for t in range(k)) for j in range(n)]
    return T


@dataclass
class MinkowskiBasis:
    vectors: list[list]
    norms: list[float]
    covolume: float
    product_bound_ok: bool


def _norm_sq(Q: np.ndarray, v) -> float:
    x = np.array([float(c) for c in v])
    return float(x @ Q @ x)


def minkowski_dbasis(inst: LatticeInstance, norm: NormModel) -> MinkowskiBasis:
    alg = inst.alg
    L = inst.lattice
    n = L.nrows()
    chosen: list[list] = []
    for _ in range(inst.m):
        if chosen:
            K = _d_span_conditions(alg, chosen, n)
            sub = intersect_subspace(L, K)
            B = complete_basis(L, sub)
            k = sub.nrows()
        else:
            B, k = L, 0
        Bf = np.array([[float(B[i, j]) for j in range(n)] for i in range(n)])
        G = Bf @ norm.Q @ Bf.T
        G = (G + G.T) / 2
        T = _reduce_blocks(G, k)
        Tm = qmat(T)
        B2 = Tm * B
        Bf2 = np.array([[float(B2[i, j]) for j in range(n)] for i in range(n)])
        G2 = Bf2 @ norm.Q @ Bf2.T
        G2 = (G2 + G2.T) / 2
        bound = min(G2[a, a] for a in range(k, n))
        ys = _enumerate(G2, bound * (1 + 1e-9), outer=k)
        best = None
        for y in ys:
            val = float(np.array(y, dtype=float) @ G2 @ np.array(y, dtype=float))
            v = rows_of(qmat([list(y)]) * B2)[0]
            sv = _sign_normalize([Fraction(int(c.p), int(c.q)) for c in v])
            key = (round(val, 9 - int(math.floor(math.log10(max(val, 1e-300))))),
                   tuple(-abs(c) for c in sv), sv)
            if best is None or key < best[0]:
                best = (key, v)
        w = best[1]
        wn = _sign_normalize([Fraction(int(c.p), int(c.q)) for c in w])
        w = [fmpq(c.numerator, c.denominator) for c in wn]
        if not d_independent(alg, chosen + [w]):
            raise ReductionError("enumeration returned a vector inside the current D-span")
        chosen.append(w)
    norms = [math.sqrt(_norm_sq(norm.Q, w)) for w in chosen]
    covol = norm.covolume(L)
    k = 4 if alg.albert_type == "III" else 2 * alg.d ** 2
    ke = k * alg.e
    lhs = sum(math.log(x) for x in norms)
    rhs = inst.m / 2 * math.log(hermite_upper(ke * inst.m)) + math.log(covol) / ke
    return MinkowskiBasis(chosen, norms, covol, lhs <= rhs + 1e-9)


# ---------------------------------------------------------------- pair selection

def select_pair(basis, form: SkewForm, norm: NormModel) -> tuple[int, int]:
    """0-based (i, j) satisfying the three short-pair conditions, smallest |w_i||w_j| first."""
    m = len(basis)
    norms = [math.sqrt(_norm_sq(norm.Q, w)) for w in basis]
    logp = 2 / m * sum(math.log(x) for x in norms)
    zero_diag = [not form.psi(w, w) for w in basis]
    best = None
    for i in range(m):
        for j in range(m):
            if i != j and not zero_diag[i]:
                continue
            lp = math.log(norms[i]) + math.log(norms[j])
            if lp > logp + 1e-9:
                continue
            if not form.psi(basis[i], basis[j]):
                continue
            key = (lp, i, j)
            if best is None or key < best:
                best = key
    if best is None:
        raise ReductionError("no admissible pair found")
    return best[1], best[2]


# ---------------------------------------------------------------- the antisymmetric element

@dataclass
class OmegaResult:
    omega: AlgElement
    norm: float
    bound: float
    checks: dict


def _alg_lattice(alg, elements) -> fmpq_mat:
    return lattice_basis(qmat([list(x.c) for x in elements]))


def omega_antisym(order: AlgOrder, eta: int) -> OmegaResult:
    alg = order.alg
    if alg.f0 is None:
        raise AlgebraError("omega needs the real subfield of the centre")
    if not order.contains_all(x.dag() * eta for x in order.elements()):
        raise ValueError("eta * R† is not contained in R")
    n = alg.dim
    F0 = alg.f0
    e = F0.degree
    O = maximal_order(F0)
    E0 = alg.f0_matrix  # e x n
    # R ∩ F0: x in R with x in row space of E0
    kern = left_kernel_rat(E0.transpose())  # vectors orthogonal to F0's span
    cond = kern.transpose()
    cap = intersect_subspace(order.basis, cond)
    cap_coords = solve_coords(E0, cap)
    RcapF = NFOrder(F0, lattice_basis(cap_coords, reduce=False))
    idx = index_of(RcapF.basis, O.basis)
    S_gens = [alg.f0_embed(o) * r for o in O.elements() for r in order.elements()]
    S = AlgOrder(alg, _alg_lattice(alg, S_gens))
    disc_r, disc_s = order.disc, S.disc
    checks = {"index_RcapF": idx * idx * disc_s <= disc_r}
    c_ideal = conductor(RcapF, O)
    S_dual = S.dual
    Sinv = S.basis.inv()
    gens = []
    for s in rows_of(S_dual):
        sd = alg(s)
        cols = [rows_of(qmat([list((alg.f0_embed(o) * sd).c)]) * Sinv)[0] for o in O.elements()]
        for w in range(n):
            gens.append([cols[t][w] for t in range(e)])
    I_coords = dual_of_span(qmat(gens))
    I = NFIdeal(O, lattice_basis(I_coords * O.basis, reduce=False))
    nm_I = ideal_norm(O, I)
    checks["dual_ideal"] = Fraction(nm_I) <= Fraction(disc_s, alg.d ** n)
    c_els = [alg.f0_embed(c) for c in c_ideal.elements()]
    checks["conductor_S_in_R"] = order.contains_all(c * s for c in c_els for s in S.elements())
    Rd = [alg(r) for r in rows_of(order.dual)]
    checks["conductor_Rdual_in_Sdual"] = contains(S_dual, qmat([list((c * r).c) for c in c_els for r in Rd]))
    J = c_ideal * c_ideal * I
    minus = intersect_subspace(S.basis, alg.inv + fmpq_mat([[int(i == j) for j in range(n)] for i in range(n)]))
    JS = _alg_lattice(alg, [alg.f0_embed(j) * alg(s) for j in J.elements() for s in rows_of(minus)])
    G = JS * alg.dnorm_gram * JS.transpose()
    y = shortest_nonzero(G)
    omega = alg(rows_of(qmat([list(y)]) * JS)[0])
    omega = alg(_sign_normalize(list(omega.c)))
    checks["antisymmetric"] = omega.dag() == -omega and bool(omega)
    checks["omega_Rdual"] = order.contains_all(omega * r for r in Rd)
    checks["Rdual_omega"] = order.contains_all(r * omega for r in Rd)
    if alg.albert_type == "III":
        logk = -20 / 3 * math.log(2) + 0.5 * math.log(hermite_upper(3 * e)) + 5 / 3 * math.log(eta)
        l = 3
    else:
        d = alg.d
        logk = math.log(4) + 0.5 * math.log(hermite_upper(d * d * e)) + 3 * math.log(eta) - 4 * d * d * math.log(d)
        l = 1
    logbound = logk + 2 * l / e * math.log(disc_r)
    nrm = dnorm(alg, omega)
    checks["norm_bound"] = 0.5 * log_rational(nrm.square) <= logbound + 1e-9
    nrm = nrm.value
    return OmegaResult(omega, nrm, math.exp(min(logbound, 700)), checks)


# ---------------------------------------------------------------- hyperbolic split

@dataclass
class SplitResult:
    v1: list
    v2: list
    a: AlgElement
    b: AlgElement
    wj_prime: list


def hyperbolic_split(inst: LatticeInstance, wi, wj, omega: AlgElement) -> SplitResult:
    form, alg, R = inst.form, inst.alg, inst.order
    if form.psi(wi, wi):
        raise ValueError("psi(w_i, w_i) must vanish")
    pij = form.psi(wi, wj)
    if not pij:
        raise ValueError("psi(w_i, w_j) must be nonzero")
    pji = form.psi(wj, wi)
    pjj = form.psi(wj, wj)
    nrd = abs(reduced_trace_norm(alg, pij)[1])
    d, e = alg.d, alg.e
    disc = Fraction(R.disc)
    if alg.albert_type == "IV":
        coef = Fraction(d) ** (2 - 8 * d ** 4 * e * e) * disc ** (4 * d * d * e) * nrd ** (2 * d)
    else:
        coef = Fraction(2) ** (2 - 32 * e * e) * disc ** (8 * e) * nrd ** 4
    coef = fmpq(coef.numerator, coef.denominator)
    b = omega * pji.inverse() * coef
    a = b * pjj * pij.inverse()
    if not (R.contains(b) and R.contains(a)):
        raise ReductionError("a or b is not in the order")
    wjp = [x - y for x, y in zip(vec_left_mul(alg, b * 2, wj), vec_left_mul(alg, a, wi))]
    v1 = [x - y for x, y in zip(wi, wjp)]
    v2 = [x + y for x, y in zip(wi, wjp)]
    if form.psi(v1, v2) or form.psi(v2, v1):
        raise ReductionError("split vectors are not orthogonal")
    p = form.psi(wjp, wi)
    if form.psi(v1, v1) != p * (-2) or form.psi(v2, v2) != p * 2:
        raise ReductionError("split pairings do not match")
    return SplitResult(v1, v2, a, b, wjp)


# ---------------------------------------------------------------- pre-induction step

@dataclass
class PreInduction:
    vectors: list[list]
    case: str
    module: fmpq_mat
    index: int
    pair: tuple[int, int]
    checks: dict = field(default_factory=dict)


def _module(alg, order: AlgOrder, vectors) -> fmpq_mat:
    rows = [vec_left_mul(alg, r, v) for v in vectors for r in order.elements()]
    return lattice_basis(qmat(rows))


def _log_dnorm(alg, x) -> float:
    return 0.5 * log_rational(dnorm(alg, x).square)


def pre_induction(inst: LatticeInstance, norm: NormModel | None = None,
                  omega: OmegaResult | None = None) -> PreInduction:
    alg, form, R = inst.alg, inst.form, inst.order
    norm = norm or adapted_norm(form)
    mb = minkowski_dbasis(inst, norm)
    w = mb.vectors
    i, j = select_pair(w, form, norm)
    d, e, m = alg.d, alg.e, inst.m
    k = 4 if alg.albert_type == "III" else 2 * d * d
    kem = k * e * m
    log_disc_l = math.log(inst.disc_l)
    log_disc_r = math.log(R.disc)
    slack_log = 2 * inst.lattice.nrows() / (k * e) * math.log(norm.slack) / m + 1e-9
    checks = {"minkowski_product": mb.product_bound_ok}
    lhs = _log_dnorm(alg, form.psi(w[i], w[j]))
    mid = math.log(mb.norms[i]) + math.log(mb.norms[j])
    rhs = math.log(hermite_upper(kem)) + log_disc_l / kem
    checks["epsi1_adapted"] = lhs <= mid + 1e-9
    checks["epsi1_minkowski"] = mid <= rhs + slack_log
    M = _module(alg, R, [w[i]] if i == j else [w[i], w[j]])
    r = 1 if i == j else 2
    disc_m = abs(trd_gram(form, M).det())
    checks["restriction_nondegenerate"] = disc_m != 0
    g = math.log(hermite_upper(kem))
    if alg.albert_type == "III":
        reading1 = (2 * g - math.log(d ** 3 * e)) * d * d * e * r / 2
        reading2 = (2 * math.log(hermite_upper(2 * d * d * e * m)) - math.log(d ** 3 * e)) * d * d * e * r
        const = max(reading1, reading2)
    else:
        const = (2 * g - math.log(d ** 3 * e)) * d * d * e * r
    checks["disc_M"] = log_rational(disc_m) <= const + r * log_disc_r + r / m * log_disc_l + 1e-9
    if i == j:
        case = "a" if alg.albert_type == "III" else "c"
        v = w[i]
        checks["case_norm"] = _log_dnorm(alg, form.psi(v, v)) <= rhs + slack_log
        return PreInduction([v], case, M, 1, (i, j), checks)
    case = "b" if alg.albert_type == "III" else "d"
    omega = omega or omega_antisym(R, inst.eta)
    sp = hyperbolic_split(inst, w[i], w[j], omega.omega)
    sub = _module(alg, R, [sp.v1, sp.v2])
    idx = index_of(sub, M)
    eta = inst.eta
    if alg.albert_type == "III":
        g3 = math.log(hermite_upper(3 * e))
        lb_norm = 0.5 * g3 + 5 / 3 * math.log(eta) + (8 * e + 6 / e) * log_disc_r + 8 * e * g + 2 / m * log_disc_l
        lb_index = ((32 * e * e + 24) * log_disc_r - 80 * e / 3 * math.log(2) + 20 * e / 3 * math.log(eta)
                    + e * g3 + (32 * e * e - 4 * e) * g + (8 * e - 1) / m * log_disc_l)
    else:
        gd = math.log(hermite_upper(d * d * e))
        lb_norm = (math.log(16) + 0.5 * gd + 3 * math.log(eta) + (4 * d * d * e + 2 / e) * log_disc_r
                   + 4 * d * d * e * g + 2 / m * log_disc_l)
        lb_index = (2 * d * e * (1 + d) * math.log(4) + 4 * d * d * (1 + 2 * d * e * e) * log_disc_r
                    + 6 * d * d * e * math.log(eta) + d * d * e * gd
                    + 2 * d * d * e * (4 * d * d * e - 1) * (g - d * d * e * math.log(d * e))
                    + (4 * d * d * e - 1) / m * log_disc_l)
    slack = 1e-9 + 8 * d * d * e * slack_log
    checks["case_norm"] = max(_log_dnorm(alg, form.psi(sp.v1, sp.v1)),
                              _log_dnorm(alg, form.psi(sp.v2, sp.v2))) <= lb_norm + slack
    checks["case_index"] = math.log(idx) <= lb_index + slack * 8 * d * d * e
    return PreInduction([sp.v1, sp.v2], case, M, idx, (i, j), checks)


# ---------------------------------------------------------------- induction

@dataclass
class ReductionCertificate:
    basis: list[list]
    pairings: list[list[AlgElement]]
    index: int
    disc_r: int
    disc_l: int
    eta: int
    constants: Constants
    flags: dict
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_json(self) -> dict:
        return {
            "basis": [[str(c) for c in v] for v in self.basis],
            "pairings": [[p.to_json() for p in row] for row in self.pairings],
            "index": self.index,
            "disc_R": self.disc_r,
            "disc_L": self.disc_l,
            "eta": self.eta,
            "constants": self.constants.to_json(),
            "flags": self.flags,
            "metadata": self.metadata,
        }


def _complement(inst: LatticeInstance, vectors):
    """Sub-instance on the psi-orthogonal complement of the D-span of `vectors`."""
    alg, form = inst.alg, inst.form
    size = alg.dim * inst.m
    cols = []
    for v in vectors:
        rows = []
        for t in range(size):
            x = [int(s == t) for s in range(size)]
            rows.append(list(form.psi(x, v).c))
        cols.append(qmat(rows))
    C = fmpq_mat([sum((rows_of(Cv)[r] for Cv in cols), []) for r in range(size)])
    Lp = intersect_subspace(inst.lattice, C)
    dbasis = []
    for row in rows_of(Lp):
        if d_independent(alg, dbasis + [row]):
            dbasis.append(row)
    m2 = inst.m - len(vectors)
    if len(dbasis) != m2:
        raise ReductionError("orthogonal complement has the wrong dimension")
    sub_form = form.restrict(dbasis)
    X = solve_coords(d_span_rows(alg, dbasis), Lp)
    sub = LatticeInstance.build(sub_form, X, order=inst.order, eta=inst.eta)
    return sub, dbasis, Lp


def _reduce(inst: LatticeInstance, omega_cache: dict, trace: list, depth: int = 0) -> list[list]:
    if inst.m == 0:
        return []
    omega = omega_cache.get("omega")
    pre = pre_induction(inst, omega=omega)
    if pre.case in ("b", "d") and omega is None:
        omega_cache["omega"] = omega_antisym(inst.order, inst.eta)
    node = {"depth": depth, "m": inst.m, "case": pre.case, "pair": list(pre.pair),
            "index_M": pre.index, "disc_L": inst.disc_l,
            "checks": {k: bool(v) for k, v in pre.checks.items()}}
    trace.append(node)
    vs = pre.vectors
    if len(vs) == inst.m:
        return vs
    sub, dbasis, Lp = _complement(inst, vs)
    MLp = lattice_basis(qmat(rows_of(pre.module) + rows_of(Lp)))
    node["index_L_over_M_plus_complement"] = index_of(MLp, inst.lattice)
    rec = _reduce(sub, omega_cache, trace, depth + 1)
    pulled = [combine(inst.alg, split(inst.alg, c), dbasis) for c in rec]
    return vs + pulled


def clause_flags(inst: LatticeInstance, basis, index: int, constants: Constants) -> tuple[dict, dict]:
    """Clauses (i)-(iv) of the height bound, plus the witnesses behind them."""
    alg, form, R = inst.alg, inst.form, inst.order
    m = inst.m
    witnesses = {}
    flags = {}
    Bm = qmat([list(v) for v in basis]) if basis else fmpq_mat(0, inst.lattice.ncols())
    coords = solve_coords(inst.lattice, Bm)
    flags["i"] = coords is not None and is_integral(coords)
    indep = len(basis) == m and d_independent(alg, basis)
    offdiag = all(not form.psi(basis[a], basis[b]) for a in range(len(basis)) for b in range(len(basis)) if a != b)
    flags["ii"] = bool(indep and offdiag)
    witnesses["off_diagonal_zero"] = offdiag
    try:
        true_index = index_of(_module(alg, R, basis), inst.lattice) if flags["i"] and indep else None
    except Exception:
        true_index = None
    witnesses["index_recomputed"] = true_index
    terms = index_bound_terms(constants, inst.eta, R.disc, inst.disc_l, eta_is_disc_l=True)
    flags["iii"] = true_index is not None and true_index == index and _pow_le(Fraction(index), terms)
    witnesses["index_log_margin"] = log_terms(terms) - math.log(index) if index else None
    pterms = psi_bound_terms(constants, inst.eta, R.disc, inst.disc_l, eta_is_disc_l=True)
    worst = -math.inf
    ok = True
    for a in range(len(basis)):
        for b in range(len(basis)):
            p = form.psi(basis[a], basis[b])
            if not p:
                continue
            sq = dnorm(alg, p).square
            exact_ok = _pow_le(sq, pterms)
            margin = 0.5 * log_rational(sq) - 0.5 * log_terms(pterms)
            worst = max(worst, margin)
            ok = ok and (exact_ok or margin <= 1e-9)
    flags["iv"] = ok and len(basis) == m
    witnesses["psi_worst_log_ratio"] = worst
    return flags, witnesses


def weakly_unitary_basis(inst: LatticeInstance) -> ReductionCertificate:
    alg = inst.alg
    trace: list = []
    cache: dict = {}
    basis = _reduce(inst, cache, trace)
    R = inst.order
    index = index_of(_module(alg, R, basis), inst.lattice)
    constants = constants_table(alg.albert_type, alg.d, alg.e, inst.m)
    flags, witnesses = clause_flags(inst, basis, index, constants)
    prop = {
        "index": _pow_le(Fraction(index), index_bound_terms(constants, inst.eta, R.disc, inst.disc_l, False)),
        "psi": all(_pow_le(dnorm(alg, inst.form.psi(v, v)).square,
                           psi_bound_terms(constants, inst.eta, R.disc, inst.disc_l, False)) for v in basis),
    }
    meta = {
        "recursion": trace,
        "complement": "L ∩ M^⊥ (exact intersection)",
        "proposition_flags": prop,
        "witnesses": witnesses,
        "lemma_checks_pass": all(all(node["checks"].values()) for node in trace),
    }
    if "omega" in cache:
        om = cache["omega"]
        meta["omega"] = om.omega.to_json()
        meta["omega_checks"] = {k: bool(v) for k, v in om.checks.items()}
    pairings = [[inst.form.psi(u, v) for v in basis] for u in basis]
    return ReductionCertificate(basis, pairings, index, R.disc, inst.disc_l, inst.eta, constants, flags, meta)


def height_bound_reduce(alg, form: SkewForm, lattice) -> ReductionCertificate:
    if form.alg is not alg:
        raise ValueError("form is defined over a different algebra")
    inst = LatticeInstance.build(form, lattice)
    return weakly_unitary_basis(inst)
