//! Average-dimensionality measures for quantum devices.
//!
//! This crate computes, by exact semidefinite programming at desk scale:
//!
//! - the dimension measure of quantum channels (average preserved coherence),
//! - the memory/dimension measure and incompatibility weight of measurement
//!   sets, including joint-measurability robustness,
//! - the Schmidt measure of bipartite states and steering assemblages,
//!
//! together with the explicit constructions that bound them: noisy mutually
//! unbiased basis pairs, symmetry twirls, and low-compression-dimension
//! pseudo-measurements. All measures are reported in bits (log base 2).
//!
//! ```
//! use dimenq::channels::{named_channel, dimension_measure, ChannelFamily};
//! use dimenq::conic::SolveOptions;
//!
//! let opts = SolveOptions::default();
//! let ch = named_channel(ChannelFamily::Depolarizing, 0.4).unwrap();
//! let r = dimension_measure(&ch, &opts).unwrap();
//! assert!((r.value - 0.4).abs() < 1e-5);
//! assert!(r.certificate.verdict);
//! ```

pub mod channels;
pub mod conic;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measurements;
pub mod states;
pub mod steering;

pub use error::{Error, Result};
