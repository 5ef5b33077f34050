"""H2 synthesis with locality constraints for a chain of coupled second-order subsystems.

The closed loop is parameterized affinely in a free causal ``f`` (system-level
or input-output form), restricted to finite spatial extent ``E`` and FIR in
time, and the resulting model-matching problem is solved by least squares.
"""
from .errors import (AssemblyError, ConfigError, LocalsynError, NumericalError, PoleProximityError,
                     RankDeficiencyError)
from .io_maps import assemble_io, build_lambda, io_extents, io_freq_maps, io_index_maps, recover_controller_io
from .model_match import SolverConfig, SynthesisResult, cost_of, horizon_convergence, solve_finite_extent, sweep, synthesize
from .oracle import OracleConfig, j_inf, per_theta_cost, per_theta_cost_lqg
from .plant import FIG3_PARAMS, PlantParams, apply_sigma, build_freq_plant, sigma_at
from .series import (CausalSeries, ExtentVector, LaurentSeries, causal_check, h2_norm, h2_norm_freq, series,
                     series_add, series_mul, spatial_eval)
from .sl_maps import (assemble_sl, build_r12, build_sl_blocks, recover_controller_sl, sl_extents, sl_freq_maps,
                      sl_index_maps)
from .verify import check_affine_laws, check_equivalence_stacks, check_membership, run_audit

__version__ = "0.1.0"
