from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewlattice._linalg import qmat
from skewlattice.exactfield import (
    FieldError,
    NFIdeal,
    NFOrder,
    NumberField,
    conductor,
    ideal_norm,
    maximal_order,
    nf_norm_trace,
    scaled_covolume,
)

QI = NumberField([1, 0, 1])
QS2 = NumberField([-2, 0, 1])
QQ = NumberField([0, 1])

small = st.integers(-6, 6)


def test_norm_trace_examples():
    assert nf_norm_trace(QI, QI([1, 1])) == (2, 2)
    assert nf_norm_trace(QQ, QQ([5])) == (5, 5)
    assert nf_norm_trace(QS2, QS2([1, 1])) == (-1, 2)


def test_field_validation():
    with pytest.raises(FieldError):
        NumberField([1, 0, -1])  # (x-1)(x+1)
    with pytest.raises(FieldError):
        NumberField([1, 0, 2])  # 2x^2 + 1 is not monic
    assert QS2.totally_real and not QI.totally_real
    assert QI.is_cm and not QS2.is_cm


def test_real_subfield_of_cm_fields():
    f0, _ = QI.real_subfield()
    assert f0.degree == 1
    f0, _ = NumberField([1, 0, 0, 0, 1]).real_subfield()
    assert f0 == NumberField([-2, 0, 1])


def test_ideal_norm_examples():
    zi = maximal_order(QI)
    assert ideal_norm(zi, NFIdeal.generated(zi, [QI([2, 0])])) == 4
    z = maximal_order(QQ)
    assert ideal_norm(z, NFIdeal.generated(z, [QQ([3])])) == 3
    assert ideal_norm(zi, NFIdeal.generated(zi, [QI([1, 1])])) == 2


def test_conductor_examples():
    z = maximal_order(QQ)
    assert ideal_norm(z, conductor(z, z)) == 1
    big = maximal_order(QS2)
    sub = NFOrder(QS2, qmat([[1, 0], [0, 2]]))
    c = conductor(sub, big)
    assert ideal_norm(big, c) == 4
    assert c.basis == NFIdeal.generated(big, [QS2([2, 0])]).basis
    zi = maximal_order(QI)
    sub3 = NFOrder(QI, qmat([[1, 0], [0, 3]]))
    c3 = conductor(sub3, zi)
    assert ideal_norm(zi, c3) == 9


def test_scaled_covolume_examples():
    z = maximal_order(QQ)
    assert scaled_covolume(NFIdeal.generated(z, [QQ([2])]), qmat([[1]]), 1) == 2
    zi = maximal_order(QI)
    assert scaled_covolume(NFIdeal.generated(zi, [QI([1, 1])]), qmat([[1, 0], [0, 1]]), 1) == 2
    assert scaled_covolume(NFIdeal.generated(z, [QQ([3])]), qmat([[1, 0], [0, 1]]), 2) == 9


def test_scaled_covolume_rejects_non_invertible():
    # the conductor 2Z[sqrt2] is not invertible in the order Z + 2Z sqrt2
    sub = NFOrder(QS2, qmat([[1, 0], [0, 2]]))
    ideal = NFIdeal(sub, qmat([[2, 0], [0, 2]]))
    with pytest.raises(FieldError, match="GCI"):
        scaled_covolume(ideal, qmat([[1, 0], [0, 2]]), 1)


@given(st.lists(small, min_size=2, max_size=2), st.lists(small, min_size=2, max_size=2))
def test_norm_multiplicative_trace_additive(a, b):
    for F in (QI, QS2):
        x, y = F(a), F(b)
        nx, tx = nf_norm_trace(F, x)
        ny, ty = nf_norm_trace(F, y)
        nxy, _ = nf_norm_trace(F, x * y)
        _, txy = nf_norm_trace(F, x + y)
        assert nxy == nx * ny
        assert txy == tx + ty


@given(st.integers(1, 6), st.sampled_from([QI, QS2]))
def test_conductor_norm_bounded_by_index_squared(k, F):
    big = maximal_order(F)
    sub = NFOrder(F, qmat([[1, 0], [0, k]]) * big.basis)
    c = conductor(sub, big)
    # [big : sub] = k
    assert ideal_norm(big, c) <= k ** 2


@given(st.lists(small, min_size=2, max_size=2).filter(any), st.integers(1, 2))
def test_covolume_scales_by_ideal_norm(gen, rank):
    for F in (QI, QS2):
        O = maximal_order(F)
        ideal = NFIdeal.generated(O, [F(gen)])
        n = F.degree * rank
        module = qmat([[int(i == j) for j in range(n)] for i in range(n)])
        assert scaled_covolume(ideal, module, rank) == Fraction(ideal_norm(O, ideal)) ** rank
