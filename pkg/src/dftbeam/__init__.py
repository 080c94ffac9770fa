"""DFT-codebook hybrid beamforming for multiuser massive MIMO.

Exact Monte-Carlo ergodic rates, closed-form rate approximations and
analog beam-selection schemes for a Butler-matrix style architecture.
"""

from dftbeam.codebook import (
    AnalogBeamformer,
    BeamSelection,
    DftCodebook,
    analog_beamformer,
    beam_projection_powers,
    build_dft,
)
from dftbeam.channel import (
    LosModel,
    RiceanParams,
    effective_channel,
    gen_los,
    sample_channel,
)
from dftbeam.linkrates import (
    LinkPowers,
    McConfig,
    RateReport,
    dl_mrt_rate,
    dl_zf_rate,
    exact_rate,
    mc_rate,
    ul_mrc_drop_rate,
    ul_zf_drop_rate,
)
from dftbeam.schemes import SCHEMES
from dftbeam.approx import (
    approx_rate,
    chi_set,
    digamma,
    epsilon_factors,
    los_limit_rate,
    rayleigh_rate,
    sigma_hat,
)
from dftbeam.selection import (
    SelectionContext,
    SelectionResult,
    comparison_count,
    exhaustive_search,
    per_user_selection,
    two_step_selection,
)

__version__ = "0.1.0"
