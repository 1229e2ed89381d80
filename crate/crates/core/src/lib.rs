//! Joint forwarding, caching and computation placement in cache-enabled
//! computing networks.
//!
//! The crate is organised around the fluid model in [`model`]: a strategy
//! `(phi, y)` determines node traffic, link flows, CPU workloads and cache
//! occupancy, and through them an aggregated convex cost `T`. On top of it
//! sit closed-form marginals ([`marginals`]), an offline Frank-Wolfe
//! optimizer for the caching gain ([`gcfw`]), the online gradient-projection
//! controller ([`gp`]), the comparison baselines ([`baselines`]), scenario
//! generation ([`scenarios`]), a packet-level simulator ([`packetsim`]) and
//! the experiment pipeline ([`harness`]).

pub mod baselines;
pub mod error;
pub mod fixtures;
pub mod gcfw;
pub mod gp;
pub mod harness;
pub mod marginals;
pub mod model;
pub mod packetsim;
pub mod scenarios;
pub mod sep;

pub use error::{Commodity, Element, Error, Result};
pub use model::{CostFn, Network, NodeId, Strategy, Topology, TrafficState};
