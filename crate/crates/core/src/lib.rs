//! Numerics for the classical capacity of compound and averaged
//! classical-quantum channels at desk scale.
//!
//! The crate provides dense Hermitian entropy kernels, the minimax Holevo
//! capacity of finite channel families, universal hypothesis tests built on
//! the method of types, one-shot random coding with square-root-measurement
//! decoding, channel-set discretization, and the Fano/Holevo converse
//! machinery — each piece exactly verifiable at small dimensions.

pub mod capacity;
pub mod channel;
pub mod checks;
pub mod coding;
pub mod converse;
pub mod entropy;
pub mod error;
pub mod extreal;
pub mod json;
pub mod linalg;
pub mod net;
pub mod operator;
pub mod pipeline;
pub mod prob;
pub mod random;
pub mod threshold;
pub mod types;
pub mod universal;

pub use error::{CqError, Result};
pub use extreal::ExtReal;
pub use operator::{DensityOperator, HermitianOperator, Numerics, Pvm};
pub use prob::ProbabilityVector;
