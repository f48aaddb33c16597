//! Deterministic UAV vision-language navigation.
//!
//! The pipeline runs in four stages: an instruction is decomposed into typed
//! sub-goals ([`language`]), each sub-goal is grounded against simulated
//! detections ([`perception`]) and compiled into discrete UAV actions over an
//! occupancy grid ([`planner`]), and the [`executive`] drives an episode until
//! its termination criteria hold. [`eval`] computes SR and SPL over generated
//! scene suites.

pub mod world;

mod error;
pub use error::Error;
pub mod eval;
pub mod executive;
pub mod language;
pub mod perception;
pub mod planner;

pub mod http;
mod rng;
pub use rng::derive_seed;
