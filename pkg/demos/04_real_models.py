"""
Real models, normalisation and symplectic bases
===============================================

Floating point enters only to guide the search. A weakly unitary basis is
rescaled so that each pairing becomes a diagonal of +i and -i in the real
model. The rescaled vectors give a symplectic real basis, and from that we
get a norm adapted to the form.
"""

import numpy as np

from skewlattice.algebra import dnorm, hamilton
from skewlattice.hermforms import SkewForm
from skewlattice.realmodels import (adapted_norm, alpha_eps_normalize, iota0_embed, standard_j,
                                    symplectic_rbasis)

H = hamilton()

# psi(v, v) = j is rescaled by s = (1 + k)/sqrt 2 and |s|_D = sqrt 2 hits the bound exactly.
form = SkewForm(H, [[H([0, 0, 1, 0])]])
norm = alpha_eps_normalize(form, [[1, 0, 0, 0]])
print("scalar s:", np.round(norm.scalars[0], 6), " ratio to the bound:", norm.ratios[0])

# A rank-2 quaternionic form and its symplectic real basis: the trace form on
# that basis is exactly the standard J up to rounding.
form = SkewForm(H, [[H([0, 1, 2, 0]), H([1, 1, 0, 0])], [H([-1, 1, 0, 0]), H([0, 0, 0, 3])]])
sb = symplectic_rbasis(form)
print("max deviation from J:", np.abs(sb.gram - standard_j(len(sb.vectors))).max())

# The adapted norm dominates the form: |psi(x, y)|_D <= |x| |y|.
nm = adapted_norm(form)
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(200):
    x = rng.integers(-5, 6, 8).tolist()
    y = rng.integers(-5, 6, 8).tolist()
    worst = max(worst, dnorm(H, form.psi(x, y)).value / (nm.norm(x) * nm.norm(y)))
print("largest |psi(x,y)| / (|x||y|) over samples:", round(worst, 6))

# The exact embedding of D into rational symplectic matrices.
io = iota0_embed(2, 1, 1, albert_type="III")
i, j, k = (io.image([tuple(int(t == u) for t in range(4))]) for u in (1, 2, 3))
print("phi(i) phi(j) == phi(k):", i * j == k, " commutes with J:", io.commutes_with_j())
