"""Ground-state laser cooling of a trapped Lambda atom by electromagnetically induced transparency."""
from .model import (
    LambdaParams,
    ParameterError,
    ac_stark_shift,
    dressed_states,
    fig3_params,
    lamb_dicke,
    optimal_detuning,
    optimal_rabi,
    validate,
)
from .rate_model import (
    PopulationDistribution,
    cooling_rate,
    eit_vs_sc_ratio,
    evolve_populations,
    mean_n_closed_form,
    rate_coefficients,
    steady_state_distribution,
    steady_state_mean_n,
)
from .spectrum import bloch_steady_state, sideband_weights, spectrum_scan

__version__ = "0.1.0"
