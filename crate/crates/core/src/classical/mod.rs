//! Classical open baker dynamics: point maps with escape, pruned symbolic
//! dynamics, periodic orbits, finite-time repellers, Monte Carlo escape rates
//! and box-counting dimensions.
//!
//! Symbols follow the binary (or ternary) expansion of the point:
//! `q = 0.s₀s₁s₂…` holds the future and `p = 0.s₋₁s₋₂…` the past, so one step
//! of the map shifts the leading digit of `q` onto `p`.

mod dynamics;
mod escape;
mod repeller;
mod symbolic;

pub use dynamics::{classical_step, closed_step, ClassicalPoint};
pub use escape::{escape_rate_mc, EscapeEstimate, BOOTSTRAP_REPLICATES, MIN_SAMPLES, MIN_STEPS};
pub use repeller::{box_dimension, finite_time_repeller, Rectangle, RepellerApprox, MAX_REPELLER_DEPTH};
pub use symbolic::{periodic_orbits, transition_matrix, ExactPoint, PeriodicOrbit, SymbolicSystem};
