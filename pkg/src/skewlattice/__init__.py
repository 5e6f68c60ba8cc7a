"""Exact skew-Hermitian forms over quaternion and CM division algebras.

Weakly unitary bases with certified index and pairing bounds, signatures
and real normal forms.
"""
from importlib import resources

from .algebra import (
    AlgElement,
    AlgOrder,
    Algebra,
    AlgebraError,
    algebra_from_json,
    dnorm,
    gaussian,
    hamilton,
    make_matrix_cm,
    make_quaternion,
    order_disc,
    reduced_trace_norm,
    stabilizer_order,
    standard_order,
)
from .exactfield import NFElement, NFIdeal, NFOrder, NumberField, conductor, maximal_order
from .harness import (
    Instance,
    InstanceError,
    Report,
    gen_instance,
    index_of,
    oracle_shortest,
    parse_instance,
    reduce_instance,
    serialize,
    verify_cert,
)
from .hermforms import (
    SkewForm,
    disc_weak_diag,
    form_from_symplectic,
    is_nondegenerate,
    solve_functional,
    trd_form,
    weakly_unitary_dbasis,
)
from .realmodels import (
    alpha_eps_normalize,
    invertible_value,
    iota0_embed,
    posdef_shift,
    real_model,
    signature_of,
    symplectic_rbasis,
)
from .reduction import (
    Constants,
    LatticeInstance,
    ReductionCertificate,
    constants_table,
    height_bound_reduce,
    hyperbolic_split,
    minkowski_dbasis,
    omega_antisym,
    pre_induction,
    select_pair,
    shortest_vectors,
    weakly_unitary_basis,
)


def fixture_path(name: str):
    """Path of a bundled instance file, e.g. fixture_path("zi_rank1.json")."""
    return resources.files(__name__).joinpath("fixtures", name)
