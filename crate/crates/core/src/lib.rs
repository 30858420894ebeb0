//! Randomized quasi-Monte Carlo over base-2 digital nets.
//!
//! The crate covers the whole path from generator matrices to a
//! median-of-means integral estimate:
//!
//! * [`gf2`]: dense bit matrices and vectors over the two-element field.
//! * [`rng`]: keyed, counter-based random streams so every replicate is
//!   reproducible independently of evaluation order.
//! * [`net`]: Sobol' generator matrices, unscrambled net points, and the
//!   quality parameters `t`, `t*_u`, `t_u`.
//! * [`scramble`]: random linear scrambles with a digital shift.
//! * [`walsh`]: Walsh functions, exact gain probabilities, the error
//!   decomposition and the variance identity.
//! * [`partitions`]: exact counts of frequency vectors by total bit
//!   position, with the finite-N bounds used in the concentration analysis.
//! * [`estimator`]: single estimates, replicate batches and aggregation.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, experiment
//! drivers and the command line live in the companion `rqmc` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod estimator;
pub mod gf2;
pub mod integrand;
pub mod net;
pub mod partitions;
pub mod rng;
pub mod scramble;
pub mod walsh;

pub use error::{Error, Result};
pub use estimator::{aggregate, estimate_once, run_batch, Method, ReplicateBatch};
pub use gf2::{BitMatrix, BitVector};
pub use integrand::Integrand;
pub use net::{GeneratorSet, NetQualityReport, PointSet};
pub use rng::RandomStream;
pub use scramble::{draw_scramble, scrambled_points, ScrambleSet};
pub use walsh::{GainProbability, KappaIndex, WalshPolynomial};
