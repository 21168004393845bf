//! Numerical laboratory for transfer operators on skew-product solenoids.
//!
//! The crate is organised bottom-up: [`cones`] provides Hilbert projective
//! metrics, [`systems`] the dynamics, [`leafmeasure`] the mass-distribution
//! measures on stable leaves, [`transfer`] the transfer operator and the cone
//! checks, [`maxent`] the maximal-entropy measure and entropy estimators,
//! [`statistics`] correlation decay, Green–Kubo and CLT experiments, and
//! [`dfa`] the symbolic Markov-partition model.

pub mod cones;
pub mod dfa;
pub mod error;
pub mod leafmeasure;
pub mod maxent;
pub mod numerics;
pub mod observable;
pub mod rng;
pub mod statistics;
pub mod systems;
pub mod transfer;

pub use error::{Error, Result};
pub use observable::{Observable, ObservableSpec};
pub use systems::{ItineraryPoint, Point, SkewProduct, SystemSpec};
