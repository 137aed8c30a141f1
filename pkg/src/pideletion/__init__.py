"""Permutation-invariant quantum codes that correct qubit deletions."""
from .codes import (
    CodeSpec,
    ConditionReport,
    GnuParams,
    binomial,
    check_conditions,
    gnu_code,
    lemma_comb_check,
    search_symmetric,
    spec_from_dict,
    spec_to_dict,
    symmetric_single_deletion_code,
)
from .encdec import (
    ConditionError,
    CorrectionData,
    DecodeResult,
    DeletionMixture,
    LogicalState,
    OutOfCodeError,
    SymmetricState,
    build_measurement,
    complete_unitary,
    correct_fewer_deletions,
    correction_data,
    decode,
    decode_branches,
    deleted_mixture,
    dense_vector,
    encode,
    from_dense,
    to_dense,
)
from .statevec import (
    EMPTY,
    DensityMatrix,
    ProjectorSet,
    PureState,
    apply_unitary,
    basis_state,
    delete,
    fidelity,
    measure,
    partial_trace,
)
from .verify import (
    PauliError,
    VerificationReport,
    combined_claim_check,
    kl_check,
    lemma2_oracle,
    verify_code,
)

__version__ = "0.1.0"
