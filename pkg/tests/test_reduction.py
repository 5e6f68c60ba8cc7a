import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from flint import fmpq
from hypothesis import given, settings
from hypothesis import strategies as st

from skewlattice import fixture_path
from skewlattice._linalg import index_of, qmat, smith_diagonal
from skewlattice.algebra import dnorm, gaussian, standard_order, vec_left_mul
from skewlattice.harness import gen_instance, oracle_shortest, parse_instance, verify_cert
from skewlattice.hermforms import SkewForm
from skewlattice.realmodels import adapted_norm
from skewlattice.reduction import (
    LatticeInstance,
    constants_expressions,
    constants_table,
    height_bound_reduce,
    hermite_upper,
    hyperbolic_split,
    minkowski_dbasis,
    omega_antisym,
    pre_induction,
    select_pair,
    shortest_nonzero,
    shortest_vectors,
    weakly_unitary_basis,
)

ZI = gaussian()


def fixture(name):
    return parse_instance(fixture_path(name))


def zi_instance(gram, lattice=None):
    form = SkewForm(ZI, [[ZI(c) for c in row] for row in gram])
    n = 2 * form.m
    lattice = lattice or [[int(i == j) for j in range(n)] for i in range(n)]
    return LatticeInstance.build(form, lattice)


def test_hermite_upper_bounds():
    exact = [1, Fraction(4, 3), 2, 4, 8, Fraction(64, 3), 64, 256]
    for n, g in enumerate(exact, start=1):
        assert hermite_upper(n) ** n >= float(g)
        assert math.isclose(hermite_upper(n) ** n, float(g), rel_tol=1e-9)
    # beyond the exact range the bound stays above the linear lower estimate n / (2 pi e)
    for n in range(9, 40):
        assert hermite_upper(n) >= n / (2 * math.pi * math.e)
    with pytest.raises(ValueError):
        hermite_upper(0)


def test_shortest_vectors_examples():
    assert set(shortest_vectors([[1, 0], [0, 1]], 1)) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    got = shortest_vectors([[2, 1], [1, 2]], 2)
    assert set(got) == {(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)}
    assert shortest_vectors([[4, 0], [0, 9]], 3) == []
    with pytest.raises(ValueError):
        shortest_vectors([[1, 0], [0, 1]], 0)
    vals = [2 * a * a + 2 * a * b + 2 * b * b for a, b in shortest_vectors([[2, 1], [1, 2]], 6)]
    assert vals == sorted(vals)


@st.composite
def pd_gram(draw):
    n = draw(st.integers(1, 6))
    A = [[draw(st.integers(-2, 2)) for _ in range(n)] for _ in range(n)]
    G = (np.array(A) @ np.array(A).T + np.eye(n, dtype=int)).astype(int)
    return G.tolist()


@settings(max_examples=30)
@given(pd_gram(), st.integers(1, 10))
def test_shortest_vectors_match_oracle(G, bound):
    assert set(shortest_vectors(G, bound)) == set(oracle_shortest(G, bound))


def test_shortest_nonzero_sign_and_tie_break():
    assert shortest_nonzero([[1, 0], [0, 1]]) == (1, 0)
    assert shortest_nonzero([[5, 0], [0, 2]]) == (0, 1)


def test_constants_spot_values():
    c = constants_table("IV", 1, 1, 2)
    assert c.c_index_eta == 6 and c.c_psi_eta == 3 and c.c_psi_L == Fraction(3, 2)
    assert c.c_index_L == Fraction(25, 2)
    c = constants_table("III", 2, 1, 2)
    assert c.c_psi_eta == 7 and c.c_psi_L == Fraction(3, 8) and c.c_index_eta == 28
    assert constants_table("IV", 2, 1, 1).c_psi_R == Fraction(49, 2)
    with pytest.raises(ValueError):
        constants_table("III", 1, 1, 1)
    with pytest.raises(ValueError):
        constants_table("IV", 1, 0, 1)


@pytest.mark.parametrize("albert_type", ["III", "IV"])
def test_constants_match_symbolic_table(albert_type):
    exprs = constants_expressions(albert_type)
    d, e, m = sympy.symbols("d e m", positive=True, integer=True)
    for dd in ([2] if albert_type == "III" else [1, 2, 3]):
        for ee in (1, 2):
            for mm in (1, 2, 3):
                c = constants_table(albert_type, dd, ee, mm)
                sub = {d: dd, e: ee, m: mm}
                for key, expr in exprs.items():
                    val = getattr(c, key)
                    if key.endswith("mult"):
                        assert sympy.Rational(val.base) ** sympy.Rational(val.exponent) == expr.subs(sub)
                    else:
                        assert sympy.Rational(val) == expr.subs(sub)


def test_minkowski_examples():
    inst = zi_instance([[(0, 1)]])
    mb = minkowski_dbasis(inst, adapted_norm(inst.form))
    assert mb.vectors == [[1, 0]] and mb.product_bound_ok
    inst = fixture("zi_hyperbolic.json").lattice_instance()
    mb = minkowski_dbasis(inst, adapted_norm(inst.form))
    units = [[1, 0], [-1, 0], [0, 1], [0, -1]]
    spans = {tuple(v) for v in mb.vectors}
    expected = {tuple(vec_left_mul(ZI, u, [int(t == 2 * j) for t in range(4)])) for u in units for j in range(2)}
    assert spans <= expected and mb.product_bound_ok


def test_minkowski_homogeneity():
    inst = fixture("zi_hyperbolic.json").lattice_instance()
    norm = adapted_norm(inst.form)
    base = minkowski_dbasis(inst, norm)
    scaled = LatticeInstance.build(inst.form, inst.lattice * 3)
    mb = minkowski_dbasis(scaled, norm)
    assert mb.vectors == [[c * 3 for c in v] for v in base.vectors]
    prod = math.prod(mb.norms)
    assert math.isclose(prod, 3 ** 2 * math.prod(base.norms), rel_tol=1e-9)


def test_select_pair_examples():
    inst = zi_instance([[(0, 1)]])
    assert select_pair([[1, 0]], inst.form, adapted_norm(inst.form)) == (0, 0)
    hyp = fixture("zi_hyperbolic.json").lattice_instance()
    e = [[1, 0, 0, 0], [0, 0, 1, 0]]
    assert select_pair(e, hyp.form, adapted_norm(hyp.form)) == (0, 1)
    diag = zi_instance([[(0, 1), (0, 0)], [(0, 0), (0, 1)]])
    assert select_pair(e, diag.form, adapted_norm(diag.form)) == (0, 0)


def test_omega_examples():
    om = omega_antisym(standard_order(ZI), 1)
    assert om.omega == ZI([0, 2])
    assert math.isclose(om.norm, 2 * math.sqrt(2))
    assert all(om.checks.values())
    lip = fixture("lipschitz_rank1.json").lattice_instance()
    om = omega_antisym(lip.order, lip.eta)
    assert om.omega.dag() == -om.omega and om.omega
    assert all(om.checks.values())


def test_hyperbolic_split_example():
    inst = fixture("zi_hyperbolic.json").lattice_instance()
    assert inst.order.disc == 4
    w1, w2 = [1, 0, 0, 0], [0, 0, 1, 0]
    res = hyperbolic_split(inst, w1, w2, ZI([0, 2]))
    assert res.b == ZI([0, -512])
    f = inst.form
    assert not f.psi(res.v1, res.v2)
    assert f.psi(res.v1, res.v1) == -f.psi(res.v2, res.v2)
    assert f.psi(res.v1, res.v1) == f.psi(res.wj_prime, w1) * (-2)


def test_hyperbolic_split_scaled_form():
    inst = zi_instance([[(0, 0), (2, 0)], [(-2, 0), (0, 0)]])
    res = hyperbolic_split(inst, [1, 0, 0, 0], [0, 0, 1, 0], ZI([0, 2]))
    assert inst.order.contains(res.b) and inst.order.contains(res.a)
    assert not inst.form.psi(res.v1, res.v2)
    with pytest.raises(ValueError):
        hyperbolic_split(inst, [0, 0, 1, 0], [0, 0, 1, 0], ZI([0, 2]))


def test_hyperbolic_split_type_iii():
    inst = fixture("lipschitz_hyperbolic.json").lattice_instance()
    om = omega_antisym(inst.order, inst.eta)
    w1 = [1, 0, 0, 0, 0, 0, 0, 0]
    w2 = [0, 0, 0, 0, 1, 0, 0, 0]
    res = hyperbolic_split(inst, w1, w2, om.omega)
    assert inst.order.contains(res.b)
    assert not inst.form.psi(res.v1, res.v2)


@pytest.mark.parametrize("name,case", [
    ("zi_rank1.json", "c"), ("zi_hyperbolic.json", "d"),
    ("lipschitz_rank1.json", "a"), ("lipschitz_hyperbolic.json", "b"),
])
def test_pre_induction_cases(name, case):
    inst = fixture(name).lattice_instance()
    pre = pre_induction(inst)
    assert pre.case == case
    assert all(pre.checks.values()), pre.checks
    if case in ("b", "d"):
        v1, v2 = pre.vectors
        assert not inst.form.psi(v1, v2)
        assert pre.index >= 1


def test_certificate_zi_rank1():
    inst = fixture("zi_rank1.json")
    cert = height_bound_reduce(inst.alg, inst.form, inst.lattice)
    assert cert.index == 1 and cert.passed
    assert dnorm(ZI, cert.pairings[0][0]).square == 2


@pytest.mark.parametrize("name,psi_eta,psi_l", [
    ("zi_hyperbolic.json", 3, Fraction(3, 2)), ("lipschitz_hyperbolic.json", 7, Fraction(3, 8)),
])
def test_certificate_hyperbolic(name, psi_eta, psi_l):
    inst = fixture(name)
    cert = weakly_unitary_basis(inst.lattice_instance())
    assert cert.passed, cert.flags
    assert cert.constants.c_psi_eta == psi_eta and cert.constants.c_psi_L == psi_l
    li = inst.lattice_instance()
    rows = [vec_left_mul(inst.alg, r, v) for v in cert.basis for r in li.order.elements()]
    assert cert.index == math.prod(smith_diagonal(qmat(rows), li.lattice))
    assert cert.index == index_of(qmat(rows), li.lattice)
    assert verify_cert(inst, cert.to_json()).passed


def test_reduction_rejects_split_algebra():
    from skewlattice.harness import algebra_for
    M2 = algebra_for("IV", 2, 1)
    form = SkewForm(M2, [[M2([0, 1, 0, 0, 0, 0, 0, -1])]])
    with pytest.raises(ValueError, match="division algebra"):
        LatticeInstance.build(form, [[int(i == j) for j in range(8)] for i in range(8)])


def test_reduction_rejects_non_integral_trace():
    with pytest.raises(ValueError, match="trace form not integral"):
        zi_instance([[(0, 1)]], [[fmpq(1, 2), 0], [0, fmpq(1, 2)]])


@settings(max_examples=12)
@given(st.sampled_from([("IV", 1, 1), ("III", 2, 1), ("IV", 1, 2)]), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_certificates_are_sound(params, m, seed):
    t, d, e = params
    if e == 2 and m > 2:
        m = 2
    inst = gen_instance(t, d, e, m, 10, seed)
    li = inst.lattice_instance()
    cert = weakly_unitary_basis(li)
    assert cert.passed, cert.flags
    assert cert.metadata["lemma_checks_pass"]
    assert verify_cert(inst, cert.to_json()).passed
    if "omega_checks" in cert.metadata:
        assert all(cert.metadata["omega_checks"].values())


@settings(max_examples=10)
@given(st.sampled_from(["III", "IV"]), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_adapted_norm_bounds_pairings_of_minkowski_basis(t, m, seed):
    inst = gen_instance(t, 2 if t == "III" else 1, 1, m, 10, seed).lattice_instance()
    norm = adapted_norm(inst.form)
    mb = minkowski_dbasis(inst, norm)
    for a, wa in enumerate(mb.vectors):
        for b, wb in enumerate(mb.vectors):
            assert dnorm(inst.alg, inst.form.psi(wa, wb)).value <= mb.norms[a] * mb.norms[b] * (1 + 1e-9)


@pytest.mark.parametrize("t", [2, 3])
def test_scaling_keeps_weak_unitarity(t):
    inst = fixture("zi_hyperbolic.json").lattice_instance()
    scaled = LatticeInstance.build(inst.form, inst.lattice * t)
    assert scaled.disc_l == inst.disc_l * t ** (2 * inst.lattice.nrows())
    cert = weakly_unitary_basis(scaled)
    assert cert.passed
    for a in range(2):
        for b in range(2):
            if a != b:
                assert not cert.pairings[a][b]
    assert all(int(x.p) % t == 0 for v in cert.basis for x in v)
