//! Downlink simulator for proportional-fair scheduling in two-tier
//! heterogeneous networks with single, dual, and all-BS connectivity.
//!
//! The pipeline for one run is
//! [`topology`] → [`channel`] (RSRP) → [`association`] → slot loop
//! ([`scheduling`] + [`channel`] fading) → [`metrics`]; [`engine`] runs it
//! over a grid of scenarios, MT counts, procedures and seeds.

pub mod association;
pub mod channel;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod scheduling;
pub mod topology;

pub use error::{Error, Result};
