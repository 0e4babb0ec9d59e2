"""Loss-averse multi-armed bandits and the oscillating Brownian motion limit."""

from .asymptotic import (
    ValueResult,
    check_coupling,
    ht_semigroup_residual,
    ht_value,
    normal_expected_utility,
    value_by_quadrature,
    value_exponential_closed_form,
)
from .bandit import (
    ArmSpec,
    BeliefState,
    History,
    NoLearningEnv,
    Strategy,
    TwoArmedEnv,
    chain_probability,
    custom_strategy,
    env_from_dict,
    one_step_conditional,
    parse_strategy,
    path_probability,
    posterior_update,
    s_star,
    s_star_horizon,
    s_star_learning,
    single_arm,
    strategy_decide,
    symmetric_arm,
    table_strategy,
    validate_env,
)
from .config import TOL
from .dp import (
    DpTable,
    optimal_value,
    parity_averaged_indicator,
    rect_identity_check,
    strategy_value_n,
    terminal_distribution,
    upper_indicator_prob_n,
    value_n,
)
from .errors import CouplingError, CouplingWarning, StateSpaceError, ValidationError
from .montecarlo import PosteriorReport, SimReport, posterior_consistency, simulate_paths
from .obm import (
    ObmParams,
    ObmPath,
    indicator_prob,
    sample_endpoints,
    sample_path,
    time1_cdf,
    time1_pdf,
    transition_density,
)
from .utility import (
    Phi1Spec,
    UtilityIndex,
    custom_phi1,
    eval_utility,
    exponential_phi1,
    exponential_utility,
    loss_aversion_measure,
    make_utility,
)

__version__ = "0.1.0"
