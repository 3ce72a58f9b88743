//! Long-range entanglement in Bell-pair ensembles and random free-fermion
//! chains.
//!
//! * [`pairstate`]: states built from Bell pairs with power-law distributed
//!   lengths, their exact entanglement bookkeeping and the closed-form
//!   ensemble scaling laws.
//! * [`fermion`]: ground states of hopping chains, correlation-matrix
//!   entropies and coherent information.
//! * [`disorder`]: random-singlet and rainbow coupling ensembles.
//! * [`census`]: the all-pairs coherent-information census over disorder
//!   ensembles and related scans.
//! * [`fit`]: log-log power-law regression with bootstrap errors.

pub mod bidiag;
pub mod census;
pub mod disorder;
pub mod error;
pub mod fermion;
pub mod fit;
pub mod pairstate;
pub mod rng;

pub use error::{Error, Result};
