//! Attractor-network model of progressive memory impairment.
//!
//! Binary units on a ring store sparse patterns through a coincidence-gated
//! Hebbian rule and recall them from noisy cues. Networks can be damaged by
//! random synaptic deletion or by cascading tau-style output damping, and
//! can compensate either globally or from each neuron's own field
//! statistics. The [`harness`] module scripts the experiments end to end.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compensation;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod learning;
pub mod network;
pub mod params;
pub mod pathology;
pub mod pattern;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
pub use network::{make_network, Network};
pub use params::NetParams;
pub use pattern::{generate_patterns, Pattern};
