"""
Signatures over M_2(Q(i))
=========================

Over a type IV algebra the real model turns each pairing into a d x d complex
matrix. The signature counts eigenvalues with positive imaginary part, and it
does not depend on the basis used to compute it.
"""

from skewlattice.algebra import make_matrix_cm, vec_left_mul
from skewlattice.exactfield import NumberField
from skewlattice.hermforms import SkewForm
from skewlattice.realmodels import signature_of

M2 = make_matrix_cm(NumberField([1, 0, 1]), 2)


def elt(entries):
    # coordinates of sum (re + i im) E_pq; index (p*2 + q)*2 + t
    c = [0] * M2.dim
    for (p, q), (re, im) in entries.items():
        c[(p * 2 + q) * 2] = re
        c[(p * 2 + q) * 2 + 1] = im
    return M2(c)


# A rank-2 form whose diagonal entries are diag(i, -i).
A = elt({(0, 0): (0, 1), (1, 1): (0, -1)})
zero = M2.zero()
form = SkewForm(M2, [[A, zero], [zero, A]])
print("signature in the standard basis:", signature_of(form))

# The same form in a different basis: f1 = (E11, E21), f2 = (E12, E22).
f1 = list(elt({(0, 0): (1, 0)}).c) + list(elt({(1, 0): (1, 0)}).c)
f2 = list(elt({(0, 1): (1, 0)}).c) + list(elt({(1, 1): (1, 0)}).c)
print("signature in the f-basis:", signature_of(form, basis=[f1, f2]))

# A shear by a random element changes every Gram entry but not the count.
shear = M2([1, 2, 0, -1, 3, 0, 1, 1])
g1 = [a + b for a, b in zip(f1, vec_left_mul(M2, shear, f2))]
print("after a shear:", signature_of(form, basis=[g1, f2]))

# The CLI prints the same numbers together with the sign matrix:
#   python3 -m skewlattice signature instance.json
