//! System-level simulation of full-duplex small-cell networks.
//!
//! A drop is generated by [`topology`], its static channel by [`propagation`],
//! and the per-TTI loop in [`engine`] ties together power control and SINR
//! evaluation ([`radio`]), feedback ([`csi`]), scheduling ([`scheduling`]),
//! link adaptation with HARQ ([`link`]) and traffic ([`traffic`]).

pub mod config;
pub mod csi;
pub mod engine;
pub mod error;
pub mod link;
pub mod propagation;
pub mod radio;
pub mod report;
pub mod rng;
pub mod scheduling;
pub mod stats;
pub mod topology;
pub mod traffic;
pub mod units;

pub use error::{Result, SimError};
