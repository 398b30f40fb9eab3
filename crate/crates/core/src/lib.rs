pub mod dense;
pub mod error;
pub mod eval;
pub mod fock;
pub mod form_factor;
pub mod grid;
pub mod guidance;
pub mod harness;
pub mod hamiltonian;
pub mod jump;
pub mod propagator;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
