//! Mild solutions of the parabolic-parabolic Keller-Segel system
//!
//! ```text
//! u_t = Lap u - div(u grad v) + g,    v_t = Lap v - v + u + h,
//! ```
//!
//! with zero-flux boundaries. The linear operator `S(omega, zeta)` freezes the
//! chemotaxis flux at a given pair and solves both Duhamel equations; the
//! nonlinear solution is its fixed point, reached by Picard iteration on whole
//! trajectories.

mod config;
mod constants;
mod duhamel;
mod picard;
mod time_grid;
mod trajectory;

pub use config::{CheckMode, SolverConfig};
pub use constants::{
    compute_constants, from_estimates, gamma_constants, measure_constants, required_exponents, SolverConstants,
};
pub use duhamel::{
    data_norms, duhamel_u, duhamel_v, flux_series, forcing_norm, linear_bound, solve_linear, LinearBoundReport,
};
pub use picard::{picard_solve, picard_solve_from, smallness_gate, PicardDiagnostics, SmallnessGate, DIVERGENCE_PATIENCE};
pub use time_grid::TimeGrid;
pub use trajectory::{state_norm, x_norm, NodeNorms, SpectralSeries, TrajectoryState};
pub use crate::special::gamma_function;
