//! Geometric discord of two-qubit states, with separability certification,
//! the extremal separable X state, and randomized searches over separable
//! states for the discord-1/4 bound.

pub mod cli;
pub mod discord;
pub mod error;
pub mod linalg;
pub mod lu;
pub mod qstate;
pub mod search;
pub mod separability;
pub mod xmax;

pub use error::{Error, Result};
