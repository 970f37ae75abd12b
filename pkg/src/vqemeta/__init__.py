"""Statevector VQE/VQD toolkit with meta-learned warm starts.

Public API is re-exported here; see the module docstrings for conventions
(qubit 0 = least-significant basis bit everywhere).
"""

from . import kernels
from .ansatz import (
    AnsatzProgram,
    ExcitationList,
    ansatz_from_descriptor,
    build_hea,
    build_uccsd,
    enumerate_excitations,
    parameter_shift_gradient,
    run_ansatz,
)
from .errors import (
    CapacityError,
    ModelFormatError,
    NumericalFailure,
    ParseError,
    ShapeMismatchError,
    SizeLimitError,
    TrainingFailure,
    ValidationError,
    VqemetaError,
)
from .exactdiag import Spectrum, eigen_hermitian, ground_energy, spectrum
from .hamiltonians import (
    FermionIntegrals,
    ShoSpec,
    build_sho,
    jordan_wigner,
    load_fcidump,
    load_pauli_sum,
    save_pauli_sum,
)
from .meta import (
    EvalCounter,
    MetaLearner,
    MetaTask,
    TraceExample,
    TrainConfig,
    fc_project,
    init_meta_learner,
    load_meta,
    lstm_step,
    meta_loss,
    pad_features,
    predict_init,
    save_meta,
    train_meta,
)
from .optimize import (
    AdamState,
    OptimizerConfig,
    RunRecord,
    VqdConfig,
    adam_step,
    random_theta,
    run_vqd,
    run_vqe,
    sgd_step,
)
from .pauli import (
    PauliString,
    PauliSum,
    apply_pauli,
    decompose_diagonal,
    decompose_hermitian,
    pauli_matrix,
    pauli_sum_matrix,
)
from .statevector import (
    StateVector,
    apply_cnot,
    apply_pauli_rotation,
    apply_ry,
    apply_rz,
    apply_x,
    expectation,
    overlap_sq,
    random_state,
    zero_state,
)

__version__ = "0.1.0"
