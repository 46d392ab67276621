"""Semicontraction certificates for saddle-matrix and game dynamics.

The package certifies exponential decay of primal-dual saddle flows in
explicit weighted seminorms, specializes the certificates to distributed
optimization over graphs and to Nash-seeking game dynamics, and ships an
experiment harness comparing constraint couplings on random graphs.
"""

from .spectra import (
    CertificateError,
    LmiCheck,
    SymBounds,
    WeightedSeminorm,
    check_lmi,
    diagonal_lyapunov_weights,
    is_hurwitz,
    is_metzler,
    is_schur,
    log_seminorm_weighted,
    spectral_abscissa,
    spectral_radius,
    sym_eigen_bounds,
)
from .saddle import (
    ContractionCertificate,
    CertificateReport,
    SaddleProblem,
    SpectralBounds,
    assemble_saddle,
    deflated_abscissa,
    quarter_rate_certificate,
    sharp_rate_certificate,
    small_tau_certificate,
    spectral_bounds,
    verify_certificate,
)
from .graphs import (
    Graph,
    connectivity,
    erdos_renyi_connected,
    incidence,
    laplacian,
    read_edge_list,
    spectral_gap,
    write_edge_list,
)
from .flows import (
    DecayReport,
    DivergenceError,
    FlowSystem,
    QuadraticCost,
    Trajectory,
    contraction_observed,
    default_timestep,
    distributed_flow_incidence,
    distributed_flow_laplacian,
    integrate,
    primal_dual_flow,
    rate_incidence,
    rate_laplacian,
    read_trajectory_csv,
    write_trajectory_csv,
)
from .games import (
    AggregativeGain,
    EquivalenceReport,
    GameSpec,
    QuadraticGame,
    equivalence_check,
    gain_aggregative,
    gain_best_response,
    gain_best_response_discrete,
    gain_pseudogradient,
    interconnection_rate,
    read_game_file,
    simulate_best_response,
    simulate_pseudogradient,
)
from .harness import (
    SEED_ENV_VAR,
    ExperimentConfig,
    ExperimentRow,
    TrialRecord,
    aggregate_trials,
    default_seed,
    figure1_trials,
    read_saddle_file,
    rows_to_csv,
    run_figure1,
    trial_to_json,
    write_saddle_file,
)

__version__ = "0.1.0"
