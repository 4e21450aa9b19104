//! Delayed chemostat and delayed logistic models.
//!
//! * [`dde`]: method-of-steps integration with dense output.
//! * [`models`]: the model families, nondimensionalization and the change of
//!   variables to Wright's equation.
//! * [`analysis`]: equilibria, linearization, characteristic roots and the
//!   stability classification.
//! * [`verification`]: numerical checks of the structural properties
//!   (Lyapunov decay, order preservation, bounds, long-time behaviour).
//! * [`exec`]: batch evaluation, parallel or sequential.

pub mod analysis;
pub mod dde;
pub mod error;
pub mod exec;
pub mod models;
pub mod state;
pub mod verification;

pub use error::{Error, Result};
pub use state::State;
