"""Degradability tests and quantum capacities of channels with a small environment."""

from .capacity import (
    CapacityError,
    CapacityResult,
    bottleneck_bound,
    capacity_or_bounds,
    coherent_information,
    convex_upper_bound,
    qubit_capacity,
    single_letter_capacity,
)
from .channel import (
    ChannelError,
    JamiolkowskiOperator,
    NormalFormParams,
    QuantumChannel,
    TransferMatrix,
    apply,
    compose,
    conjugate,
    convex_mixture,
    from_isometry,
    from_normal_form,
    jamiolkowski,
    kraus_rank,
    transfer_matrix,
    validate,
)
from .degradability import (
    DegradabilityReport,
    Verdict,
    classify,
    h_matrix,
    is_antidegradable,
    is_degradable,
    is_degradable_via_H,
    phi_jamiolkowski,
    twist_diagonalize,
)
from .sampling import SampleStats, degradable_fraction, haar_random_channel

__version__ = "0.1.0"
