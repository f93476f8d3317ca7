"""Distortion bounds and simulation tools for finite-state joint source-channel
coding of individual sequences."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AlignmentError,
    EmptyInputError,
    FsjsccError,
    InfeasibleError,
    ResourceCapError,
    ValidationError,
)
from .core import (  # noqa: E402
    Alphabet,
    DistortionMeasure,
    Dmc,
    FinitePmf,
    JointPmf,
    SymbolSequence,
    average_distortion,
    block_empirical,
    joint_block_empirical,
)
from .channels import (  # noqa: E402
    CostFunction,
    StateChannel,
    capacity,
    causal_state_capacity,
    sphere_packing,
    sphere_packing_exponent,
)
from .ratedist import (  # noqa: E402
    RdProblem,
    WzSolution,
    common_reconstruction_rd,
    conditional_rate_distortion,
    distortion_rate,
    rate_distortion,
    wyner_ziv_rd,
    wz_distortion_rate,
    wz_oracle,
)
from .report import BoundReport  # noqa: E402
from .bounds import (  # noqa: E402
    SystemParams,
    excess_distortion_bound,
    excess_exponent_corollary,
    expected_distortion_bound,
    jscc_exponent_upper,
    marton_exponent,
    wz_excess_bound,
)
from .lzmaxent import (  # noqa: E402
    DifferenceDistortion,
    conditional_lz_complexity,
    joint_parse,
    lz78_parse,
    phi,
    psi,
    two_sided_si_bound,
)
from .simfsm import (  # noqa: E402
    DecoderSpec,
    EncoderSpec,
    SimConfig,
    monte_carlo_distortion,
    monte_carlo_excess,
)
