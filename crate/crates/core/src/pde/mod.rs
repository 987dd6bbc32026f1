//! Deterministic references: the discrete density and correlation
//! equations, the continuum heat equation and its stationary profile, and a
//! random-walk estimator of the discrete density.

mod corr;
mod density;
mod heat;
mod walk;

pub use corr::{solve_correlation_field, CorrBoundary, CorrDomain, CorrelationSolution};
pub use density::{default_dt, discrete_laplacian, laplacian_at, solve_discrete_density, BoundaryMode, DensitySolver, DiscreteDensitySolution};
pub use heat::{heat_solution, stationary_profile, HeatSolution};
pub use walk::{rw_hitting_estimate, RwEstimate};
