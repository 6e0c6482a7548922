"""saginsim: RIS-aided HAPS downlink simulator with ZF and DDPG beamforming.

The heavy lifting lives in the C++ extension module ``saginsim._core``; this
package re-exports its public surface.
"""

from saginsim._core import (  # noqa: F401
    ConfigError,
    GeometryConfig,
    InfeasibleError,
    SingularMatrixError,
    alpha_fair_throughput,
    compute_sinr,
    gradient_check,
    improvement_percent,
    noise_power_w,
    per_user_rates,
    project_power,
    ris_arrival_vector,
    ris_departure_vector,
    ris_phase_profile,
    run_experiment,
    selftest,
    steering_vector,
    total_power,
    zf_directions,
    zf_solve,
)

__version__ = "0.1.0"
