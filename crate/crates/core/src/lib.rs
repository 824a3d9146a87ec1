//! Simulator for RIS-assisted anti-jamming OFDMA downlinks.
//!
//! The crate is organised bottom-up:
//!
//! * [`propagation`] draws geometry and small-scale fading;
//! * [`linkmodel`] turns a channel and RIS phase vector into per-subchannel
//!   gains and evaluates the BER/minimum-power model;
//! * [`allocator`] solves the discrete power/subchannel/mode allocation;
//! * [`nn`] and [`agent`] provide dense networks and the TD3 learner;
//! * [`env`] glues them into a step-based environment;
//! * [`harness`] runs training, baselines and parameter sweeps and writes CSV.

pub mod agent;
pub mod allocator;
pub mod env;
pub mod error;
pub mod harness;
pub mod jamming;
pub mod linkmodel;
pub mod nn;
pub mod propagation;
pub mod units;

pub use error::{Error, Result};
