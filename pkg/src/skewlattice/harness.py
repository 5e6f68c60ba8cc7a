"""Instance files, random instances, brute-force oracles and certificate checking."""
from __future__ import annotations

import itertools
import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from flint import fmpq, fmpq_mat

from ._linalg import (
    LatticeError,
    index_of,
    intersect_subspace,
    is_integral,
    lattice_basis,
    log_rational,
    q,
    qmat,
    rows_of,
    smith_diagonal,
    solve_coords,
    to_fraction,
    unimodular,
)
from .algebra import (
    AlgOrder,
    Algebra,
    AlgebraError,
    algebra_from_json,
    dnorm,
    gaussian,
    hamilton,
    make_matrix_cm,
    make_quaternion,
    standard_order,
    vec_left_mul,
)
from .exactfield import NumberField
from .hermforms import FormError, SkewForm, d_span_rows, is_nondegenerate, trd_gram
from .reduction import (
    LatticeInstance,
    ReductionCertificate,
    constants_table,
    weakly_unitary_basis,
)

__all__ = [
    "Instance",
    "InstanceError",
    "Report",
    "gen_instance",
    "index_of",
    "load_certificate",
    "oracle_shortest",
    "parse_instance",
    "reduce_instance",
    "serialize",
    "verify_cert",
]


class InstanceError(ValueError):
    pass


@dataclass
class Instance:
    alg: Algebra
    form: SkewForm
    lattice: fmpq_mat
    order: AlgOrder | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.form.m

    def lattice_instance(self) -> LatticeInstance:
        return LatticeInstance.build(self.form, self.lattice, order=self.order)


# ---------------------------------------------------------------- I/O

def _rational(x) -> fmpq:
    try:
        return q(x)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InstanceError(f"malformed rational {x!r}") from exc


def _rational_rows(rows) -> fmpq_mat:
    rows = [[_rational(v) for v in r] for r in rows]
    if not rows or len({len(r) for r in rows}) != 1:
        raise InstanceError("matrix rows must be non-empty and of equal length")
    return fmpq_mat(rows)


def parse_instance(source) -> Instance:
    """Load from a path, a JSON string or an already decoded dict."""
    if isinstance(source, dict):
        data = source
    else:
        text = Path(source).read_text() if not str(source).lstrip().startswith("{") else str(source)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"invalid JSON: {exc}") from exc
    try:
        alg = algebra_from_json(data["algebra"])
        form_data = data["form"]
        gram = [[[_rational(c) for c in g] for g in row] for row in form_data["gram"]]
        form = SkewForm(alg, gram)
        if "m" in form_data and int(form_data["m"]) != form.m:
            raise InstanceError("form size does not match m")
        lattice = _rational_rows(data["lattice"])
        order = AlgOrder(alg, _rational_rows(data["order"])) if data.get("order") else None
    except KeyError as exc:
        raise InstanceError(f"missing field {exc.args[0]!r}") from exc
    except (AlgebraError, FormError) as exc:
        raise InstanceError(str(exc)) from exc
    n = alg.dim * form.m
    if lattice.nrows() != n or lattice.ncols() != n:
        raise InstanceError(f"lattice must be {n} x {n}")
    if lattice.det() == 0:
        raise InstanceError("lattice basis is not of full rank")
    if not is_integral(trd_gram(form, lattice)):
        raise InstanceError("trace form not integral")
    return Instance(alg, form, lattice, order, dict(data.get("metadata", {})))


def serialize(inst: Instance) -> dict:
    out = {
        "algebra": inst.alg.to_json(),
        "form": inst.form.to_json(),
        "lattice": [[str(v) for v in r] for r in rows_of(inst.lattice)],
        "metadata": inst.metadata,
    }
    if inst.order is not None:
        out["order"] = inst.order.to_json()
    return out


def dump_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(serialize(inst), indent=1) + "\n")


# ---------------------------------------------------------------- random instances

def algebra_for(albert_type: str, d: int, e: int) -> Algebra:
    if albert_type == "IV" and d == 1 and e == 1:
        return gaussian()
    if albert_type == "IV" and d == 2 and e == 1:
        return make_matrix_cm(NumberField([1, 0, 1]), 2)
    if albert_type == "IV" and d == 1 and e == 2:
        return make_matrix_cm(NumberField([1, 0, 0, 0, 1]), 1)
    if albert_type == "III" and d == 2 and e == 1:
        return hamilton()
    if albert_type == "III" and d == 2 and e == 2:
        return make_quaternion(NumberField([-2, 0, 1]), -1, -1)
    raise InstanceError(f"no built-in algebra for type {albert_type} with d={d}, e={e}")


def _random_element(rng: random.Random, basis: fmpq_mat, height: int) -> list:
    coeffs = [rng.randint(-height, height) for _ in range(basis.nrows())]
    out = [fmpq(0)] * basis.ncols()
    for c, row in zip(coeffs, rows_of(basis)):
        if c:
            out = [a + c * b for a, b in zip(out, row)]
    return out


def _random_gram(alg: Algebra, order: AlgOrder, m: int, height: int, rng: random.Random, hyperbolic: bool):
    n = alg.dim
    ident = fmpq_mat([[int(i == j) for j in range(n)] for i in range(n)])
    minus = intersect_subspace(order.basis, alg.inv + ident)
    gram = [[None] * m for _ in range(m)]
    for j in range(m):
        if hyperbolic:
            gram[j][j] = alg.zero()
        else:
            gram[j][j] = alg(_random_element(rng, minus, height))
        for k in range(j + 1, m):
            g = alg(_random_element(rng, order.basis, height))
            gram[j][k] = g
            gram[k][j] = -g.dag()
    return gram


def gen_instance(albert_type: str, d: int, e: int, m: int, height: int, seed: int,
                 max_attempts: int = 100) -> Instance:
    """Random non-degenerate instance; the same arguments always give the same instance."""
    if height < 1:
        raise InstanceError("height must be at least 1")
    if m < 1:
        raise InstanceError("m must be at least 1")
    alg = algebra_for(albert_type, d, e)
    order = standard_order(alg)
    rng = random.Random(f"{albert_type}-{d}-{e}-{m}-{height}-{seed}")
    n = alg.dim * m
    for attempt in range(max_attempts):
        hyperbolic = m > 1 and rng.random() < 0.5
        gram = _random_gram(alg, order, m, height, rng, hyperbolic)
        form = SkewForm(alg, gram)
        if not is_nondegenerate(form):
            continue
        U = qmat(unimodular(n, rng))
        U2 = qmat(unimodular(n, rng))
        diag = qmat([[rng.choice([1, 1, 1, 2]) if i == j else 0 for j in range(n)] for i in range(n)])
        lattice = U * diag * U2
        if not is_integral(trd_gram(form, lattice)):
            continue
        meta = {"type": albert_type, "d": d, "e": e, "m": m, "height": height, "seed": seed,
                "attempts": attempt + 1, "hyperbolic": hyperbolic}
        return Instance(alg, form, lattice, None, meta)
    raise InstanceError(f"no non-degenerate draw after {max_attempts} attempts")


# ---------------------------------------------------------------- oracle

def oracle_shortest(gram, bound, cap: int = 5_000_000) -> list[tuple[int, ...]]:
    """Exhaustive box enumeration of nonzero v with v G v^T <= bound, exact integer arithmetic."""
    G = [[to_fraction(v) for v in row] for row in (rows_of(gram) if isinstance(gram, fmpq_mat) else gram)]
    bound = to_fraction(bound)
    n = len(G)
    if bound <= 0:
        raise ValueError("bound must be positive")
    Ginv = fmpq_mat([[q(v) for v in row] for row in G]).inv()
    # |v_i|^2 <= bound * (G^-1)_ii for every v in the ellipsoid
    radii = []
    for i in range(n):
        r2 = bound * to_fraction(Ginv[i, i])
        r = math.isqrt(r2.numerator // r2.denominator)
        while Fraction((r + 1) ** 2) <= r2:
            r += 1
        radii.append(r)
    size = math.prod(2 * r + 1 for r in radii)
    if size > cap:
        raise ValueError(f"box of {size} points exceeds the enumeration cap")
    den = math.lcm(*(v.denominator for row in G for v in row), bound.denominator)
    Gi = np.array([[int(v * den) for v in row] for row in G], dtype=object)
    limit = int(bound * den)
    axes = [np.arange(-r, r + 1, dtype=np.int64) for r in radii]
    out = []
    for block in itertools.product(*axes[:-1]) if n > 1 else [()]:
        last = axes[-1]
        head = np.array(block, dtype=np.int64)
        V = np.concatenate([np.tile(head, (len(last), 1)), last[:, None]], axis=1).astype(object)
        vals = np.einsum("ij,jk,ik->i", V, Gi, V) if n else np.array([])
        for v, val in zip(V, vals):
            if val <= limit and any(v):
                out.append((Fraction(int(val), den), tuple(int(c) for c in v)))
    out.sort()
    return [v for _, v in out]


# ---------------------------------------------------------------- reduction and verification

def reduce_instance(inst: Instance) -> ReductionCertificate:
    return weakly_unitary_basis(inst.lattice_instance())


@dataclass
class Report:
    clauses: dict
    witnesses: dict
    timings: dict
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())

    def to_json(self) -> dict:
        return {"passed": self.passed, "clauses": self.clauses, "witnesses": self.witnesses,
                "timings": self.timings, "notes": self.notes}


def load_certificate(source) -> dict:
    if isinstance(source, dict):
        return source
    if isinstance(source, ReductionCertificate):
        return source.to_json()
    return json.loads(Path(source).read_text())


def _exact_le(lhs: Fraction, terms) -> bool:
    """lhs <= prod base**exp with rational exponents, by raising both sides to a common power."""
    den = math.lcm(*(Fraction(x).denominator for _, x in terms))
    right = Fraction(1)
    for base, ex in terms:
        right *= Fraction(base) ** int(Fraction(ex) * den)
    return Fraction(lhs) ** den <= right


def _log_of(terms) -> float:
    return sum(float(x) * log_rational(b) for b, x in terms)


def verify_cert(inst: Instance, cert) -> Report:
    """Recheck the four clauses of the height bound from the instance alone."""
    t0 = time.perf_counter()
    cert = load_certificate(cert)
    alg = inst.alg
    m, n = inst.m, alg.dim * inst.m
    basis = [[_rational(c) for c in v] for v in cert["basis"]]
    if len(basis) != m or any(len(v) != n for v in basis):
        raise InstanceError("certificate does not match the instance dimensions")
    li = inst.lattice_instance()
    R = li.order
    t_setup = time.perf_counter()
    clauses, wit, notes = {}, {}, []

    # (i) every basis vector lies in L
    coords = solve_coords(inst.lattice, qmat(basis))
    clauses["i"] = coords is not None and is_integral(coords)
    wit["coordinates_integral"] = clauses["i"]

    # (ii) D-basis and off-diagonal pairings vanish
    span = d_span_rows(alg, basis)
    d_rank_full = span.rank() == n
    pair = [[inst.form.psi(u, v) for v in basis] for u in basis]
    nonzero_off = [[a, b] for a in range(m) for b in range(m) if a != b and pair[a][b]]
    clauses["ii"] = d_rank_full and not nonzero_off
    wit["d_rank_full"] = d_rank_full
    wit["nonzero_off_diagonal"] = nonzero_off

    # (iii) exact index of R v_1 + ... + R v_m in L against the bound with eta = disc(L)
    consts = constants_table(alg.albert_type, alg.d, alg.e, m)
    claimed = cert.get("index")
    sub = lattice_basis(qmat([vec_left_mul(alg, r, v) for v in basis for r in R.elements()]))
    index = None
    if clauses["i"] and d_rank_full:
        try:
            sd = smith_diagonal(sub, inst.lattice)
            index = math.prod(sd)
            wit["smith_diagonal"] = sd
        except LatticeError as exc:
            notes.append(str(exc))
    wit["index"] = index
    disc_r, disc_l = R.disc, li.disc_l
    wit["disc_R"], wit["disc_L"], wit["eta"] = disc_r, disc_l, li.eta
    iterms = [(consts.c_index_mult.base, consts.c_index_mult.exponent),
              (Fraction(disc_r), consts.c_index_R),
              (Fraction(disc_l), consts.c_index_eta + consts.c_index_L)]
    consistent = (claimed == index and cert.get("disc_R") == disc_r and cert.get("disc_L") == disc_l)
    if claimed != index:
        notes.append(f"claimed index {claimed} differs from recomputed {index}")
    if cert.get("disc_R") != disc_r or cert.get("disc_L") != disc_l:
        notes.append("claimed discriminants differ from recomputed values")
    clauses["iii"] = index is not None and consistent and _exact_le(Fraction(index), iterms)
    wit["index_log_margin"] = _log_of(iterms) - math.log(index) if index else None

    # (iv) |psi(v_i, v_i)|_D against the bound with eta = disc(L), exact squares
    pterms = [(consts.c_psi_mult.base, 2 * consts.c_psi_mult.exponent),
              (Fraction(disc_r), 2 * consts.c_psi_R),
              (Fraction(disc_l), 2 * (consts.c_psi_eta + consts.c_psi_L))]
    squares, ok = [], True
    for a in range(m):
        sq = dnorm(alg, pair[a][a]).square
        squares.append(str(sq))
        exact = _exact_le(Fraction(sq), pterms)
        slack = 0.5 * log_rational(sq) <= 0.5 * _log_of(pterms) + 1e-9 if sq else True
        ok = ok and (exact or slack)
    claimed_pairs = cert.get("pairings")
    if claimed_pairs is not None:
        same = all(alg([_rational(c) for c in claimed_pairs[a][b]]) == pair[a][b]
                   for a in range(m) for b in range(m))
        if not same:
            notes.append("claimed pairings differ from recomputed values")
            ok = False
    clauses["iv"] = ok
    wit["pairing_norm_squares"] = squares
    wit["psi_log_bound"] = 0.5 * _log_of(pterms)
    t_end = time.perf_counter()
    return Report(clauses, wit, {"setup": t_setup - t0, "checks": t_end - t_setup}, notes)
