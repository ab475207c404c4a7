"""Active-RIS-aided multi-user massive MIMO uplink simulator.

Monte Carlo link-level simulation and closed-form rate approximations for
an amplifying reconfigurable surface serving single-antenna users toward a
large BS array with low-resolution ADCs, plus a genetic phase-shift
optimizer and a brute-force oracle that certifies every closed form.
"""

from .analytic import (
    ChannelStats,
    channel_gain_moment,
    closed_form_rates,
    closed_form_sum_rate,
    compute_stats,
    dynamic_noise_moment,
    interference_moment,
    quantization_moment,
    rate_active,
    rate_ideal_adc,
    rate_passive,
    signal_moment,
)
from .budget import (
    ConfigurationError,
    LinkBudget,
    Mode,
    SystemConfig,
    circuit_power,
    dbm_to_watts,
    path_loss,
    resolve_budget,
    watts_to_dbm,
)
from .channel import (
    ChannelRealization,
    Geometry,
    array_response,
    los_components,
    make_geometry,
    sample_channels,
    substream,
)
from .ga import GAHistory, GAParams, crossover, mutate, optimize_phases
from .oracle import (
    MomentEstimates,
    WishartMomentReport,
    estimate_moments,
    wishart_moment_check,
)
from .transceiver import (
    PhaseConfig,
    RateReport,
    aqnm_alpha,
    cascaded_channel,
    instantaneous_sinr,
    measured_ris_power,
    monte_carlo_rate,
)

__version__ = "0.1.0"
