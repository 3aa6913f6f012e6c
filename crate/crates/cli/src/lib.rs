//! Experiment configuration, runners, report emission and the acceptance
//! suite behind the `fatou-lab` binary.

pub mod config;
pub mod experiments;
pub mod report;
pub mod suite;
