//! Statistical mmWave channel simulation.
//!
//! Two channel generators share one multipath description
//! ([`realization::ChannelRealization`]): the 3GPP clustered model
//! ([`chan3gpp`]) and the NYUSIM time-cluster / spatial-lobe model
//! ([`channyu`]). [`antenna`] turns rays into MIMO channel matrices,
//! [`beamform`] analyses and precodes them, and [`montecarlo`] drives
//! reproducible multi-user campaigns whose results [`output`] writes as CSV.

pub mod antenna;
pub mod beamform;
pub mod chan3gpp;
pub mod channyu;
pub mod config;
pub mod error;
pub mod mathkit;
pub mod montecarlo;
pub mod output;
pub mod realization;
pub mod scenario;

pub use error::{Result, SimError};
