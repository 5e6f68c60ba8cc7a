import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewlattice.algebra import dnorm_float, gaussian, hamilton, make_matrix_cm, make_quaternion, vec_left_mul
from skewlattice.exactfield import NumberField
from skewlattice.harness import algebra_for
from skewlattice.hermforms import SkewForm, is_nondegenerate, weakly_unitary_dbasis
from skewlattice.realmodels import (
    ModelError,
    alpha_eps_normalize,
    iota0_embed,
    invertible_value,
    posdef_shift,
    quaternion_left_regular,
    real_model,
    signature_of,
    standard_j,
    symplectic_rbasis,
)

ZI = gaussian()
H = hamilton()
M2 = make_matrix_cm(NumberField([1, 0, 1]), 2)


def m2_elt(entries):
    """entries[(p, q)] = (re, im) -> coordinates in M_2(Q(i))."""
    c = [0] * M2.dim
    for (p, q), (re, im) in entries.items():
        c[(p * 2 + q) * 2] = re
        c[(p * 2 + q) * 2 + 1] = im
    return M2(c)


def test_real_models_have_small_residual():
    for alg in (ZI, H, M2, make_quaternion(None, -1, -3), algebra_for("IV", 1, 2), algebra_for("III", 2, 2)):
        assert real_model(alg).residual < 1e-9
    gi = real_model(ZI).alpha([3, 4])
    assert np.allclose(gi, [[[3 + 4j]]])


def test_worked_example_signature_two():
    z = M2.zero()
    A = m2_elt({(0, 0): (0, 1), (1, 1): (0, -1)})
    form = SkewForm(M2, [[A, z], [z, A]])
    assert signature_of(form) == (2,)
    f1 = list(m2_elt({(0, 0): (1, 0)}).c) + list(m2_elt({(1, 0): (1, 0)}).c)
    f2 = list(m2_elt({(0, 1): (1, 0)}).c) + list(m2_elt({(1, 1): (1, 0)}).c)
    assert signature_of(form, basis=[f1, f2]) == (2,)


def test_signature_small_examples():
    assert signature_of(SkewForm(ZI, [[ZI([0, 1])]])) == (1,)
    z, one = ZI.zero(), ZI.one
    assert signature_of(SkewForm(ZI, [[z, one], [-one, z]])) == (1,)
    assert signature_of(SkewForm(ZI, [[ZI([0, -3])]])) == (0,)
    with pytest.raises(ModelError):
        signature_of(SkewForm(H, [[H([0, 1, 0, 0])]]))


def test_normalize_type_iii():
    f = SkewForm(H, [[H([0, 1, 0, 0])]])
    norm = alpha_eps_normalize(f, [[1, 0, 0, 0]])
    assert np.allclose(norm.scalars[0], [1, 0, 0, 0])
    f = SkewForm(H, [[H([0, 0, 1, 0])]])
    norm = alpha_eps_normalize(f, [[1, 0, 0, 0]])
    assert math.isclose(dnorm_float(H, norm.scalars[0]), math.sqrt(2), rel_tol=1e-9)
    assert norm.bounds_ok and math.isclose(norm.ratios[0], 1.0, rel_tol=1e-9)


def test_normalize_type_iv():
    f = SkewForm(ZI, [[ZI([0, -4])]])
    norm = alpha_eps_normalize(f, [[1, 0]])
    assert np.allclose(np.abs(real_model(ZI).alpha(norm.scalars[0])), [[[2]]])
    assert norm.sign.signs[0, 0, 0] == -1
    assert norm.sign.counts() == (0,)


def test_posdef_shift_examples():
    assert posdef_shift(-1, 1) == 2
    assert posdef_shift(np.zeros((2, 2)), np.eye(2)) == 1
    assert posdef_shift(np.diag([-5, 3]), np.eye(2)) == 6
    with pytest.raises(ModelError):
        posdef_shift(1, -1)


def test_invertible_value_examples():
    Hm = np.array([[0, 1], [-1, 0]], dtype=complex)
    z = invertible_value(Hm, np.array([[1, 0]], dtype=complex), np.array([[0, 1]], dtype=complex))
    assert np.allclose(z, [[1, -0.5j]])
    assert np.allclose(z @ Hm @ z.conj().T, [[1j]])
    Hm = np.array([[1j, 1], [-1, 0]], dtype=complex)
    x = np.array([[1, 0]], dtype=complex)
    assert np.allclose(invertible_value(Hm, x, np.array([[0, 1]], dtype=complex)), x)


def _rank_one_skew(rng, d):
    u = rng.normal(size=d) + 1j * rng.normal(size=d)
    return 1j * rng.normal() * np.outer(u, u.conj())


@given(st.integers(0, 10 ** 6), st.sampled_from([1, 2, 3]))
def test_invertible_value_degenerate_blocks(seed, d):
    rng = np.random.default_rng(seed)
    A = _rank_one_skew(rng, d) if d > 1 else np.zeros((1, 1))
    B = _rank_one_skew(rng, d) if d > 1 else np.zeros((1, 1))
    Hm = np.block([[A, np.eye(d)], [-np.eye(d), B]])
    x = np.hstack([np.eye(d), np.zeros((d, d))]).astype(complex)
    y = np.hstack([np.zeros((d, d)), np.eye(d)]).astype(complex)
    z = invertible_value(Hm, x, y)
    val = z @ Hm @ z.conj().T
    assert np.linalg.svd(val, compute_uv=False).min() > 1e-9


@pytest.mark.parametrize("form", [
    SkewForm(H, [[H([0, 1, 0, 0])]]),
    SkewForm(ZI, [[ZI([0, 1])]]),
    SkewForm(ZI, [[ZI.zero(), ZI.one], [-ZI.one, ZI.zero()]]),
    SkewForm(H, [[H([0, 1, 2, 0]), H([1, 1, 0, 0])], [H([-1, 1, 0, 0]), H([0, 0, 0, 3])]]),
], ids=["H-i", "Zi-i", "Zi-hyperbolic", "H-rank2"])
def test_symplectic_basis_gram_is_j(form):
    sb = symplectic_rbasis(form)
    assert np.allclose(sb.gram, standard_j(len(sb.vectors)), atol=1e-8)
    for ar in sb.a_r:
        for a in ar:
            assert math.isclose(dnorm_float(form.alg, a), 1.0, rel_tol=1e-8)


def test_iota0_gaussian():
    io = iota0_embed(1, 1, 1, (1,))
    img = io.image([[[(3, 5)]]])
    assert [[int(img[r, c]) for c in range(2)] for r in range(2)] == [[3, -5], [5, 3]]
    assert io.commutes_with_j() and io.check_homomorphism()


def test_iota0_quaternion_units():
    io = iota0_embed(2, 1, 1, albert_type="III")
    phi = [io.image([tuple(int(t == u) for t in range(4))]) for u in range(4)]
    one, i, j, k = phi
    assert i * j == k and j * k == i and k * i == j
    assert i * i == -one
    assert quaternion_left_regular((0, 1, 0, 0)) == i
    assert io.commutes_with_j() and io.check_homomorphism()


def test_iota0_signature_placement():
    lo = iota0_embed(1, 1, 2, (0,))
    hi = iota0_embed(1, 1, 2, (2,))
    g = [[[(0, 1)]]]
    assert lo.image(g) != hi.image(g)
    assert lo.commutes_with_j() and hi.commutes_with_j()
    with pytest.raises(ModelError):
        iota0_embed(1, 1, 1, (2,))
    with pytest.raises(ModelError):
        iota0_embed(1, 1, 1, albert_type="III")


@pytest.mark.parametrize("args", [
    (1, 1, 1, (1,), "IV"), (1, 1, 2, (1,), "IV"), (2, 1, 1, (1,), "IV"), (1, 2, 1, (0, 1), "IV"),
    (2, 1, 1, None, "III"), (2, 2, 1, None, "III"),
])
def test_iota0_homomorphism_and_commutant(args):
    io = iota0_embed(*args)
    assert io.check_homomorphism()
    assert io.commutes_with_j()
    assert io.commutant_dimension() == io.expected_commutant_dimension()


def _random_form(alg, m, rng):
    def elt():
        return alg([rng.randint(-3, 3) for _ in range(alg.dim)])
    gram = [[None] * m for _ in range(m)]
    for a in range(m):
        x = elt()
        gram[a][a] = x - x.dag()
        for b in range(a + 1, m):
            g = elt()
            gram[a][b], gram[b][a] = g, -g.dag()
    return SkewForm(alg, gram)


@given(st.sampled_from([ZI, algebra_for("IV", 1, 2), M2]), st.integers(1, 2), st.integers(0, 10 ** 6))
def test_signature_is_basis_independent(alg, m, seed):
    rng = random.Random(seed)
    form = _random_form(alg, m, rng)
    if not is_nondegenerate(form):
        return
    basis = weakly_unitary_dbasis(form) if alg.is_division else form.standard_basis()
    sig = signature_of(form, basis=basis)
    assert all(0 <= r <= alg.d * m for r in sig)
    for _ in range(10):
        new = [list(v) for v in basis]
        if m > 1:
            a, b = rng.sample(range(m), 2)
            c = alg([rng.randint(-2, 2) for _ in range(alg.dim)])
            new[a] = [s + t for s, t in zip(new[a], vec_left_mul(alg, c, new[b]))]
        unit = alg.one if rng.random() < 0.5 else -alg.one
        new[0] = vec_left_mul(alg, unit, new[0])
        assert signature_of(form, basis=new) == sig


@given(st.sampled_from([ZI, H, algebra_for("IV", 1, 2), algebra_for("III", 2, 2)]),
       st.integers(1, 3), st.integers(0, 10 ** 6))
def test_normalization_bound_and_unitarity(alg, m, seed):
    form = _random_form(alg, m, random.Random(seed))
    if not is_nondegenerate(form):
        return
    basis = weakly_unitary_dbasis(form)
    norm = alpha_eps_normalize(form, basis)
    assert norm.bounds_ok
    assert all(r <= 1 + 1e-9 for r in norm.ratios)
    if alg.albert_type == "IV":
        assert norm.sign.counts() == signature_of(form, basis=basis)
