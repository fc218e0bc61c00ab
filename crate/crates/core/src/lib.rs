//! Nested lattice codes for secret communication over the two-user symmetric
//! Gaussian interference channel with an external eavesdropper.
//!
//! The crate is `no_std` (it needs `alloc`). It provides:
//!
//! * [`lattice`]: exact Construction-A lattices with their coarse
//!   sublattices, nearest-point quantization and modulo reduction;
//! * [`codebook`]: Voronoi codebooks, Minkowski sums, power scaling, binning
//!   and layered codebooks;
//! * [`info`]: exact finite-support distributions and information measures,
//!   with entropies kept in closed form until the final float conversion;
//! * [`channel`]: the interference channel, dithered modulo-lattice
//!   transceiver and successive decoders, with seeded Monte Carlo drivers;
//! * [`experiments`]: the verification suites tying everything together.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod channel;
pub mod codebook;
mod cvp;
pub mod error;
pub mod experiments;
pub mod gfp;
pub mod info;
pub mod lattice;
pub mod point;

pub use error::{Error, Result};
pub use point::{LatticePoint, Rational};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default cap on enumerated points or point pairs.
pub const DEFAULT_BUDGET: u64 = 1_000_000;
