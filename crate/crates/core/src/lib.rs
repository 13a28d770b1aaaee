//! Open quantum baker maps on the torus.
//!
//! The crate is organised around four layers:
//!
//! * [`maps`] builds the antiperiodic Fourier kernel, the dyadic and triadic
//!   baker quantizations, escape projectors and the parity / time-reversal
//!   operators.
//! * [`spectral`] diagonalizes the (non-normal) open map into paired
//!   right/left resonances, and provides decay rates, the time-reversal
//!   measure and resonance counting.
//! * [`phasespace`] evaluates torus coherent states, Husimi functions, the
//!   per-resonance distribution `h_i(q,p)` and coherent-state
//!   autocorrelations.
//! * [`classical`] holds the classical maps with escape, pruned symbolic
//!   dynamics, periodic orbits, finite-time repellers, Monte Carlo escape
//!   rates and box counting.
//!
//! ```
//! use openbaker::maps::{MapFamily, Opening, QuantumMap, TorusHilbert};
//! use openbaker::spectral::{resonances, SpectralOptions};
//!
//! let hilbert = TorusHilbert::new(32).unwrap();
//! let map = QuantumMap::open_baker(hilbert, MapFamily::Dyadic, Opening::Dyadic { depth: 3 }).unwrap();
//! let set = resonances(&map, &SpectralOptions::default()).unwrap();
//! assert_eq!(set.null_dim(), 8);
//! assert!(set.resonances()[0].modulus < 1.0);
//! ```

pub mod classical;
mod error;
pub mod fit;
pub mod linalg;
pub mod maps;
pub mod phasespace;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
