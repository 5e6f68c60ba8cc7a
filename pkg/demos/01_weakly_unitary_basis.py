"""
Weakly unitary bases and their certificates
===========================================

A skew-Hermitian form on D^m restricted to a lattice L usually has a Gram
matrix full of off-diagonal entries. Here we find a basis of a full-rank
submodule of L on which the form is diagonal, and then check every claim
about it from scratch.
"""

# Instances are JSON files of exact rationals. Four small ones ship with the package.
from skewlattice import fixture_path, parse_instance, reduce_instance, verify_cert

inst = parse_instance(fixture_path("zi_hyperbolic.json"))
print("algebra:", inst.alg)
print("Gram of the form:", [[g.to_json() for g in row] for row in inst.form.gram])

# The hyperbolic plane over Z[i] has psi(e1, e1) = psi(e2, e2) = 0, so the
# standard basis is as far from diagonal as it can be.
cert = reduce_instance(inst)
print("basis:", [[str(c) for c in v] for v in cert.basis])
print("pairings:", [[p.to_json() for p in row] for row in cert.pairings])

# The certificate records the index of R v_1 + R v_2 in L, where R is the
# stabiliser order of L. It also records discriminants and one pass flag per
# clause of the bound.
print("index:", cert.index, " disc(R):", cert.disc_r, " disc(L):", cert.disc_l)
print("flags:", cert.flags)

# The recursion trace shows which case of the splitting step fired at each depth.
for node in cert.metadata["recursion"]:
    print("  depth", node["depth"], "case", node["case"], "pair", node["pair"])

# verify_cert does not trust the certificate. It recomputes membership, weak
# unitarity, the Smith form index and the pairing norms.
report = verify_cert(inst, cert.to_json())
print("independent check:", report.clauses)
print("Smith diagonal:", report.witnesses["smith_diagonal"])

# Forging the index is caught exactly.
forged = dict(cert.to_json(), index=cert.index + 1)
print("forged index passes?", verify_cert(inst, forged).passed)

# The quaternion case runs through the same code path.
lip = parse_instance(fixture_path("lipschitz_hyperbolic.json"))
cert = reduce_instance(lip)
print("Lipschitz hyperbolic plane:", cert.flags, "omega =", cert.metadata["omega"])
