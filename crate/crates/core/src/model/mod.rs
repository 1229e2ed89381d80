//! Network model: topology, catalogs, strategies and the fluid cost.

mod cost;
mod network;
mod strategy;
mod topology;
mod traffic;

pub use cost::{CostFn, CustomCost, PoleReached, POLE_GUARD};
pub use network::{Catalogs, CiCommodity, CostModel, Network, SizeModel, Task, TaskSet, Workload};
pub use strategy::{
    check_loop_free, validate_strategy, LoopReport, Slot, Strategy, ValidationReport, Violation, CONSERVATION_TOL,
};
pub use topology::{LinkId, NodeId, Topology};
pub use traffic::{cache_occupancy, cost_breakdown, evaluate, solve_traffic, total_cost, CostBreakdown, TrafficState};

pub(crate) use traffic::{ci_order, di_order};
#[cfg(test)]
pub(crate) use traffic::support_order;

#[cfg(test)]
mod tests;
