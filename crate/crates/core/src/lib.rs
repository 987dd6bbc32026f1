//! Stochastic simulation of a boundary-driven exclusion process with
//! branching reservoirs, its dual flag process and the associated
//! deterministic references.

pub mod dual;
pub mod error;
pub mod forward;
pub mod gw;
pub mod harness;
pub mod marks;
pub mod model;
pub mod pde;
pub mod stats;

pub use error::{Error, Result};
pub use marks::{Mark, MarkKind, MarkStream};
pub use model::{Configuration, ModelParams, Reservoir, Side};
