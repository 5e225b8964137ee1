"""Solver workbench for l1-penalized least squares (basis pursuit denoising).

Three iterative solvers over the model ``y = a @ h + z``: a per-measurement
message-passing solver in natural parameters (iga), its scalar-precision
approximation (aiga), and the classic soft-threshold approximate
message-passing recursion (amp).  Built-in differential audits check the
per-row belief identities, the restatement and fixed-point conditions, and
the step-for-step equivalence of the scalar-precision solver with amp.
"""

from .aiga import AigaConfig, AigaState, aiga_step, init_aiga_state, run_aiga
from .amp import AmpConfig, AmpState, amp_step, init_amp_state, run_amp
from .errors import (
    ConfigError,
    DivergenceError,
    MetricError,
    NumericalError,
    OracleError,
    SchemaError,
    WorkbenchError,
)
from .harness import (
    ALGORITHMS,
    RESULTS_HEADER,
    EquivalenceReport,
    ExperimentConfig,
    audit_equivalence,
    check_mp_iga_correspondence,
    run_correspondence,
    run_experiment,
    write_results_csv,
)
from .iga import (
    Belief,
    DiagGaussianState,
    IgaConfig,
    IgaState,
    check_m_condition,
    compute_belief_row,
    compute_belief_row_dense_oracle,
    e_condition_residual,
    iga_step,
    init_iga_state,
    run_iga,
)
from .lasso import lasso_objective, solve_lasso_ista, stationarity_residual
from .model import (
    FORMAT_VERSION,
    ProblemInstance,
    SyntheticConfig,
    generate_instance,
    load_instance,
    nmse,
    nmse_or_none,
    noise_variance_from_snr,
    sample_seed,
    save_instance,
)
from .shrinkage import (
    QuadratureConfig,
    ThresholdPair,
    eta,
    eta_prime,
    laplace_prior_moments_quadrature,
    upsilon_pair,
    upsilon_pair_arrays,
    zeta,
    zeta_prime,
)
from .trace import SolverTrace, TraceRecord, fmt17

__version__ = "0.1.0"
