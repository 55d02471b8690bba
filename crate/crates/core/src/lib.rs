//! Exact channel-resolvability computations over finite alphabets.
//!
//! The crate evaluates resolvability codes exactly through memoryless block
//! channels, computes information-spectrum laws and their quantiles,
//! evaluates finite-length achievability and converse bounds on the
//! variational distance, minimizes mutual information over inputs that
//! reproduce a target output, and tracks how finite-n quantiles behave as
//! the blocklength grows. All internal information quantities are in nats.
//!
//! | module | contents |
//! |--------|----------|
//! | [`probability`] | alphabets, distributions, channels, block products, variational distance |
//! | [`spectrum`] | information-density laws, exact memoryless convolution, quantiles |
//! | [`typicality`] | types, typicality predicates, typical-set truncation |
//! | [`bounds`] | finite-length upper/lower bounds and their optimization over `c` |
//! | [`codes`] | resolvability codes: evaluation, random construction, exhaustive search |
//! | [`single_letter`] | mutual-information minimization over output-matching inputs |
//! | [`asymptotics`] | blocklength sweeps, second-order normalization, limsup/liminf surrogates |
//! | [`cli`] | model files and the `resolv` command-line front end |

pub mod asymptotics;
pub mod bounds;
pub mod cli;
pub mod codes;
pub mod error;
pub mod numeric;
pub mod probability;
pub mod single_letter;
pub mod spectrum;
pub mod typicality;

pub use error::{Error, Result};
pub use probability::{Alphabet, Channel, FiniteDistribution, MemorylessModel, ProductMode, ProductSpec};
pub use spectrum::{Scale, Spectrum};
