//! Simulation and verification of self-stabilizing maximum metric spanning
//! tree construction with Byzantine processes.

pub mod analysis;
pub mod checker;
pub mod library;
pub mod metric;
pub mod protocol;
pub mod scenario;
pub mod scheduler;
pub mod system;
