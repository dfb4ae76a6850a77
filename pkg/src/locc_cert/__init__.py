"""Numerical toolkit for LOCC indistinguishability of the subspace orthogonal
to the maximally entangled state, and the associated channel counterexample."""

__version__ = "0.1.0"

from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    matrix_unit,
    orthonormal_complete,
    partial_trace_B,
    schmidt_decompose,
    unit_vector,
    unvec,
    vec,
)
from .bipartite import (
    BipartiteSpace,
    BipartiteVector,
    MaxEntProjectors,
    gen_Q_basis,
    make_projectors,
    random_Q_basis,
)
from .measurement import (
    DistinguishabilityReport,
    MergeConflict,
    Partition,
    RankOneSeparableMeasurement,
    SeparableMeasurement,
    check_perfect,
    merge_proportional,
    refine_to_rank_one,
    sample_one_round_measurement,
    validate,
)
from .certificate import (
    Certificate,
    IdentityReport,
    alpha,
    diagonalization_report,
    find_noncommuting_pair,
    identity_report,
    theorem_harness,
)
from .qubits import TaggedBasis, distinguishable_basis_2x2, verify_construction
from .channel import (
    ChannelRealization,
    ChoiMatrix,
    apply_channel,
    build_counterexample_channel,
    choi,
    corrected_capacity_witness,
    recover_environment_unitary,
)
from .estimator import SearchResult, estimate_success
