//! Step-graphons, the graphs sampled from them, and Hamiltonian
//! decompositions of those graphs.
//!
//! * [`graphon`]: exact step-graphon model, concentration vector, skeleton
//!   graph and incidence matrix.
//! * [`sampling`]: seeded `G_n ~ W` sampling and the graph dump format.
//! * [`conditions`]: odd-cycle, edge-polytope and relative-interior checks
//!   decided in exact arithmetic.
//! * [`hamdec`]: deciding and constructing Hamiltonian decompositions.
//! * [`montecarlo`]: reproducible trial runner and presets.

pub mod conditions;
pub mod error;
pub mod graphon;
pub mod hamdec;
pub mod montecarlo;
pub mod rational;
pub mod sampling;

pub use error::{Error, Result};
pub use graphon::{StepGraphon, SkeletonGraph, IncidenceMatrix};
pub use rational::Rational;
pub use sampling::SampledGraph;
