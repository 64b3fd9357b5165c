//! Hierarchical beam training and single-anchor localization for a
//! RIS-assisted mmWave MIMO-OFDM downlink.
//!
//! The pipeline is: [`geometry`] derives the channel parameters of a 2-D
//! scene, [`codebook`] builds hierarchical RIS and hybrid MS codebooks,
//! [`training`] runs the beam search, [`estimation`] turns the trained beams
//! into a position and orientation estimate, and [`sim`] sweeps all of it
//! over SNR with seeded Monte Carlo trials.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod codebook;
pub mod error;
pub mod estimation;
pub mod geometry;
mod kv;
pub mod linalg;
pub mod sim;
pub mod training;

pub use error::{Error, Result};
pub use geometry::{Point, ScenarioGeometry};
pub use sim::{SimulationConfig, Simulator, TrialRecord};
pub use training::Scheme;
