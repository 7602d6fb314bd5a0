//! Multi-period planning of C+L band elastic optical networks.
//!
//! The crate is organised bottom-up: [`netgraph`] (topology, spans, slot
//! grid), [`qot`] (SNR estimation), [`xcvr`] (transceiver catalog and comb
//! sources), [`rcsa`] (single-period routing, configuration and spectrum
//! assignment), [`planner`] (multi-period flows), [`report`] (metrics and
//! emitted tables) and [`experiment`] (run configuration and the realization
//! harness used by the command line tool).

pub mod error;
pub mod experiment;
pub mod netgraph;
pub mod planner;
pub mod qot;
pub mod rcsa;
pub mod report;
pub mod xcvr;

pub use error::{Error, Result};
