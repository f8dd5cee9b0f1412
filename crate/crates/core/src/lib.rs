//! Space-time variational solver for 1+1D wave propagation with a dynamical
//! time map.
//!
//! The doubled-branch action is discretized with regularized
//! summation-by-parts operators, its stationary point is found with a sparse
//! Newton–KKT solve, and the discrete Noether charge of time translations is
//! tracked across τ slices.

pub mod action;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod noether;
pub mod oracle;
pub mod problem;
pub mod sbp;
pub mod solver;
pub mod sparse;
pub mod state;

pub use error::{Error, Result};
pub use action::{evaluate_action, evaluate_gradient, ConstraintResiduals, Discretization, MetricBundle};
pub use grid::GridSpec;
pub use problem::{ProblemSpec, Profile, Setup};
pub use noether::{
    conventional_energy, drift_point, noether_charge, noether_drift_sweep, scaled_n_tau, sweep_setup, ChargeSeries, DriftPoint,
};
pub use oracle::{error_norms, fit_convergence, l2_error, mol_reference, Dalembert, ErrorNorms, MolOptions, PowerLawFit, ReferenceCache};
pub use sbp::{AffineOp, Direction, SbpOrder, SbpPair, SpatialQuadrature};
pub use solver::{cfl_number, precondition, solve, solve_stationarity_system, SolveReport, SolverOptions, StationarityProblem};
pub use sparse::CsrMatrix;
pub use state::{Layout, StateVector};
