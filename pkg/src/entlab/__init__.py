"""entlab: compound states, entanglement classes, entropies, and capacities
for finite-dimensional block-decomposable operator algebras."""

from .algebra import (
    BlockStructure,
    DensityState,
    central_distribution,
    central_uniform_state,
    rank_dim,
    schatten,
    tracial_state,
)
from .capacity import (
    InfoBundle,
    SamplerConfig,
    bruteforce_info_oracle,
    capacity_estimate,
    decomposition_sampler,
    info_bundle,
    info_d_sup,
    info_o,
    info_q,
    random_density_state,
)
from .channel import (
    Channel,
    Instrument,
    amplitude_damping_channel,
    apply,
    apply_to_compound,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    isometry_channel,
    orthogonality_of_posteriors,
    posterior_states,
    projective_instrument,
    random_channel,
)
from .entangle import (
    AmplitudeOperator,
    CompoundState,
    Decomposition,
    EntanglingOperator,
    c_compound,
    classify,
    compound_from_amplitude,
    d_compound,
    entangling_from_amplitude,
    entangling_from_decomposition,
    marginals,
    schatten_decomposition,
    standard_compound,
    strong_orthogonality_defect,
    weak_orthogonality_defect,
)
from .entropy import (
    EntropyReport,
    conditional_q_entropy,
    disentanglement,
    monotonicity_check,
    mutual_information,
    q_entropy,
    relative_entropy,
    vn_entropy,
)
from .errors import (
    ConsistencyError,
    DomainError,
    EntlabError,
    NotPSDError,
    RefusalError,
    ShapeError,
    SizeError,
    StructureError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
