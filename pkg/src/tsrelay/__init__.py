"""Rate-maximizing designs for a time-switching energy-harvesting MIMO relay.

A two-hop amplify-and-forward relay harvests RF energy from the source for
a fraction of each block and spends it forwarding data for the rest.  The
package provides a closed-form solver for the relay matrix and TS ratio
under uniform source precoding, an alternating solver that also optimizes
the source covariance, brute-force oracles and KKT checkers to validate
both, and a Monte Carlo sweep harness with a CLI.
"""

from .fixed_source import l_of_mu, solve_fixed_source, x_of_mu
from .joint import (
    assemble_design,
    d_of_mu1,
    q_of_mu2,
    solve_joint,
    solve_subproblem_d,
    solve_subproblem_q,
)
from .linalg import herm_top_eig, is_psd, svd_descending
from .model import (
    ChannelRealization,
    EigenProfile,
    RelayDesign,
    SolveReport,
    SystemParams,
    eigen_profile,
    generate_channel,
    harvest_budget,
    harvest_constraint_slack,
    harvested_power_max,
    naf_design,
    rate_matrix_form,
    rate_scalar_form,
    read_channel_file,
    write_channel_file,
)
from .oracle import (
    GridSpec,
    grid_search_fixed,
    grid_search_joint,
    kkt_residual,
    verify_design,
)
from .sweep import SweepConfig, load_config, parse_config_text, run_sweep, trial_seed
from .verification import run_verification

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization",
    "EigenProfile",
    "GridSpec",
    "RelayDesign",
    "SolveReport",
    "SweepConfig",
    "SystemParams",
    "assemble_design",
    "d_of_mu1",
    "eigen_profile",
    "generate_channel",
    "grid_search_fixed",
    "grid_search_joint",
    "harvest_budget",
    "harvest_constraint_slack",
    "harvested_power_max",
    "herm_top_eig",
    "is_psd",
    "kkt_residual",
    "l_of_mu",
    "load_config",
    "naf_design",
    "parse_config_text",
    "q_of_mu2",
    "rate_matrix_form",
    "rate_scalar_form",
    "read_channel_file",
    "run_sweep",
    "run_verification",
    "solve_fixed_source",
    "solve_joint",
    "solve_subproblem_d",
    "solve_subproblem_q",
    "svd_descending",
    "trial_seed",
    "verify_design",
    "write_channel_file",
    "x_of_mu",
]
