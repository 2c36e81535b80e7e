//! Discrete-event simulator of downlink reliability with PDCP packet
//! duplication over two-satellite LEO multi-connectivity.

pub mod batch;
pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod mc;
pub mod pdcp;
pub mod phy_mac;
pub mod sim;
pub mod stats;
pub mod traffic;

pub use error::SimError;
