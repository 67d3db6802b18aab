//! Twisted-rapid-passage gate synthesis: sweep Hamiltonians, eigenbasis
//! propagation, gate scoring, parameter search and hardware translation.

pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod metrics;
pub mod ode;
pub mod optimize;
pub mod hardware;
pub mod tables;
pub mod propagator;
pub mod targets;

pub use error::{Result, TrpError};
