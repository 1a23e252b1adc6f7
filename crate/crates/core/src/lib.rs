//! Multi-planner selfish routing on congestion networks.
//!
//! The crate computes the one-shot planner equilibrium of Pigou's network,
//! simulates the repeated routing game with planner strategies and car
//! defections, and checks individual rationality, resilience to
//! competition, optimality and the absence of collective punishments over
//! finite deviation families.

pub mod config;
pub mod equilibrium;
pub mod game;
pub mod error;
pub mod interval;
pub mod network;
pub mod num;
pub mod scenario;
pub mod strategies;
pub mod verify;

pub use error::{Error, Result};

/// Engine identifier written into output headers.
pub const ENGINE: &str = concat!("planner-routing ", env!("CARGO_PKG_VERSION"));
pub use num::{NumberMode, Scalar, Q};
