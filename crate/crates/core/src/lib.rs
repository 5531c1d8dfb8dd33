//! Step-budgeted ("punctual") instance transformers, online combinatorics,
//! diagonalization adversaries and presented structures, each paired with
//! decoders and audits that can be checked against brute force.
//!
//! The clock model lives in [`clock`]: a [`clock::StepOracle`] stands for a
//! computable instance, a [`clock::PunctualStream`] for a primitive recursive
//! one, and [`clock::certify_punctual`] checks per-stage fuel against a
//! polynomial [`clock::Budget`].

pub mod clock;
pub mod diagonal;
pub mod error;
pub mod finset;
pub mod fixtures;
pub mod online;
pub mod par;
pub mod rat;
pub mod structures;
pub mod transform;

pub use clock::{certify_punctual, Budget, Certificate, Delayed, FuelMeter, PunctualStream, Step, StepOracle};
pub use error::{Error, OutOfFuel, Result};
pub use finset::FinSet;
