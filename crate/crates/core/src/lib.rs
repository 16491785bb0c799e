//! Graph-state purification, noise-locality analysis and measurement-based
//! encoded communication.

pub mod diagsim;
pub mod epp;
pub mod experiment;
pub mod error;
pub mod graphstate;
pub mod localfit;
pub mod localize;
pub mod mbqec;
pub mod noise;
pub mod optim;
pub mod pauli;
pub mod symscale;
pub mod tol;
pub mod verify;

pub use error::{Result, SimError};
