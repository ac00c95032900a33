//! Noisy density-matrix simulation and variational quantum compiling lab.
//!
//! The crate simulates the cost-evaluation circuits used to compile a target
//! unitary into a trainable gate sequence, models incoherent noise (Pauli,
//! depolarizing, amplitude damping, thermal relaxation, readout error) as
//! channel insertions at named circuit epochs, trains ansatz parameters with
//! shot-based parameter-shift gradient descent, and numerically verifies the
//! optimal-parameter noise-resilience properties of the four compiling costs.

pub mod ansatz;
pub mod channel;
pub mod circuit;
pub mod cost;
pub mod error;
pub mod linalg;
pub mod noise;
pub mod optimizer;
pub mod pauli;
pub mod rng;
pub mod state;
pub mod targets;
pub mod verifier;

pub use error::{Error, Result};
