//! Tradeoff cache placement for cache-enabled RRHs in a Cloud-RAN cell.
//!
//! The crate evaluates how a binary placement of content files across the
//! remote radio heads (RRHs) of one cell trades the cell-average outage
//! probability against fronthaul usage, and searches that placement space.
//!
//! * [`model`]: file library, RRH layout, radio constants, placement matrices
//!   and the canonical placements (MPC, LB-LCD, random, probabilistic).
//! * [`analytics`]: exact received-SNR distribution for a set of cooperating
//!   RRHs (hypoexponential with repeated rates) and the outage probability.
//! * [`quadrature`]: 2-D composite Simpson averaging over the disk.
//! * [`objective`]: the weighted-sum objective, crossover point, Pareto sets.
//! * [`solvers`]: genetic algorithm, exhaustive search, mode selection and
//!   the stochastic baselines.
//! * [`montecarlo`]: independent simulation oracle.
//! * [`scenario`]: TOML scenario schema and the shipped presets.

pub mod analytics;
mod dd;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod objective;
pub mod quadrature;
pub mod scenario;
pub mod solvers;

pub use error::{Error, Result};
