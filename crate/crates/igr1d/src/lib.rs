//! # igr1d
//!
//! Variational solver for the unidimensional pressureless gas equations
//! with entropic shock regularization.
//!
//! The deformation map at each time `t` is the minimizer of a strictly
//! convex functional over monotone maps of `[a, b]`: a quadratic
//! transport cost, a linear data term scaled by `t`, and a log barrier on
//! the map derivative weighted by the regularization strength `alpha`.
//! Everything else follows from that structure:
//!
//! - [`solver`] computes the map two independent ways (damped Newton on
//!   the objective, shooting on the first-order optimality recurrence)
//!   and checks the explicit derivative floor.
//! - [`dynamics`] obtains the Lagrangian velocity and acceleration from
//!   SPD elliptic solves whose operator is the objective Hessian, and
//!   evolves frames over a time schedule by direct minimization (no time
//!   integration error).
//! - [`eulerian`] converts frames to velocity/density fields, solves the
//!   screening equation for the entropic pressure, and evaluates
//!   conservation diagnostics and pointwise equation residuals.
//! - [`sticky`] is the unregularized baseline: weighted isotonic
//!   projection of the free flight (pool-adjacent-violators), i.e. the
//!   sticky-particle solution.
//! - [`studies`] turns the structural claims into tables: vanishing
//!   regularization against the baseline, nonexpansiveness sampling, and
//!   refinement studies.
//!
//! Grids, measures and the SPD tridiagonal solver live in [`grid`],
//! [`measure`] and [`tridiag`]; scenario presets in [`scenario`].

pub(crate) mod dd;
pub mod dynamics;
pub mod error;
pub mod eulerian;
pub mod functional;
pub mod grid;
pub mod measure;
pub mod scenario;
pub mod solver;
pub mod sticky;
pub mod studies;
pub mod tridiag;

pub use dynamics::{
    evolve, fd_delta_ladder, lagrangian_acceleration, lagrangian_residual, lagrangian_velocity,
    EvolveMode, LagrangianFrame, TimeSeries,
};
pub use error::{Error, Result};
pub use eulerian::{
    conservation_report, entropic_pressure, eulerian_residual, eulerian_residual_profile,
    pushforward_mass, to_eulerian, total_momentum, ConservationRow, EulerianState,
};
pub use functional::{
    apply_linear, gradient, hessian, kl_pushforward, make_regularized_data, objective_hat,
    scaled_gradient_norm, DataKind, IgrParams, LinearData, MonotoneMap, ObjectiveValue,
};
pub use grid::{cell_derivative, Grid};
pub use measure::DiscreteMeasure;
pub use scenario::{DensitySpec, Scenario};
pub use solver::{
    check_bounds, derivative_lower_bound, solve_newton, solve_shooting, BoundsRecord,
    ShootingState, SolveMethod, SolveReport,
};
pub use sticky::{isotonic_projection, sticky_solution};
pub use studies::{
    gamma_study, refinement_study, stability_study, GammaStudy, GammaStudyRow, RefinementRow,
    StabilityStudy,
};
pub use tridiag::{solve_tridiagonal_spd, TridiagonalSystem};
