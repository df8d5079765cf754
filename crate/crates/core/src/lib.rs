//! Simultaneous centralized power control and interference-channel learning
//! for an underlay cognitive radio network.
//!
//! A cognitive base station probes a primary link with secondary-user power
//! vectors, senses the primary's modulation and coding scheme, turns each
//! observation into linear inequalities on the normalized interference gains,
//! and localizes those gains with a cutting-plane method (analytic center or
//! center of gravity) while steering the probes toward the capped-waterfilling
//! throughput optimum.
//!
//! Module map:
//! - [`scenario`]: configuration, topology generation, block fading.
//! - [`pu_link`]: primary SINR, ACM ladder, interference thresholds.
//! - [`sensing`]: per-SU classification model and plurality fusion.
//! - [`constraints`]: observation to inequality-pair translation, windowing.
//! - [`polytope`]: LP, bounding box, Chebyshev center, Hit-and-Run, centers.
//! - [`control`]: exploration schedule, waterfilling, slice sampling.
//! - [`engine`]: the learning loop, traces, ensembles.

pub mod constraints;
pub mod control;
pub mod engine;
mod error;
pub mod polytope;
pub mod pu_link;
pub mod scenario;
pub mod sensing;
pub mod trace;
pub mod units;

pub use error::{Error, Result};
