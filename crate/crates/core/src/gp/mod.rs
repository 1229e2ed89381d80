//! Online gradient-projection controller with blocked sets and randomized
//! cache rounding.
//!
//! Each slot solves (or measures) the traffic, computes modified marginals
//! and shifts every row's mass toward its minimizing direction. The
//! modified-condition residual serves as the convergence certificate.

mod blocked;
mod measured;
mod rounding;
mod update;

pub use blocked::{build_static_blocked_sets, BlockedPolicy, BlockedSets};
pub use measured::{gp_run_measured, MeasuredConfig, MeasuredEvent, MeasuredTrajectory};
pub use rounding::{randomized_round, round_items, CacheDecision};
pub use update::gp_slot_update;

use serde::{Deserialize, Serialize};

use crate::baselines::sep_route;
use crate::error::{Error, Result};
use crate::marginals::{broadcast_marginals, check_modified_condition};
use crate::model::{cost_breakdown, solve_traffic, Network, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub alpha: f64,
    /// Slot duration, used by the measured controller.
    pub slot: f64,
    pub blocked: BlockedPolicy,
    pub rounding_seed: u64,
    pub max_slots: usize,
    /// Modified-condition residual at which the run stops.
    pub tol: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig { alpha: 0.01, slot: 10.0, blocked: BlockedPolicy::Static, rounding_seed: 0, max_slots: 5000, tol: 1e-6 }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !(self.slot > 0.0) {
            return Err(Error::InvalidParams("stepsize and slot duration must be positive".into()));
        }
        Ok(())
    }
}

/// Per-slot record of a fluid run. Slot `t` holds the state before the
/// `t`-th update.
#[derive(Debug, Clone, Serialize)]
pub struct GpTrajectory {
    pub cost: Vec<f64>,
    pub residual: Vec<f64>,
    /// Expected number of cached items, network-wide.
    pub cache_size: Vec<f64>,
    pub strategy: Strategy,
    pub converged: bool,
    /// Slots in which the stepsize had to be halved to stay feasible.
    pub backtracks: usize,
}

impl GpTrajectory {
    pub fn final_cost(&self) -> f64 {
        *self.cost.last().expect("at least one slot")
    }

    /// Updates performed.
    pub fn updates(&self) -> usize {
        self.cost.len() - 1
    }
}

/// Fluid GP from the SEP strategy with static blocked sets.
pub fn gp_run_fluid(net: &Network, config: &GpConfig) -> Result<GpTrajectory> {
    let blocked = build_static_blocked_sets(net)?;
    gp_run_from(net, sep_route(net)?, &blocked, config, |_, _| {})
}

/// Fluid GP from an arbitrary loop-free start. `observe` sees every
/// strategy the controller installs, starting with `init`.
pub fn gp_run_from(
    net: &Network,
    init: Strategy,
    blocked: &BlockedSets,
    config: &GpConfig,
    mut observe: impl FnMut(usize, &Strategy),
) -> Result<GpTrajectory> {
    config.validate()?;
    let mut s = init;
    let mut traj = GpTrajectory {
        cost: Vec::new(),
        residual: Vec::new(),
        cache_size: Vec::new(),
        strategy: s.clone(),
        converged: false,
        backtracks: 0,
    };
    let mut st = solve_traffic(net, &s)?;
    let mut cost = cost_breakdown(net, &st)?.total();
    for slot in 0..=config.max_slots {
        observe(slot, &s);
        let ms = broadcast_marginals(net, &s, &st, Some(blocked))?;
        let residual = check_modified_condition(net, &s, &ms, config.tol).residual;
        traj.cost.push(cost);
        traj.residual.push(residual);
        traj.cache_size.push(s.cached_items(net).iter().sum());
        if residual <= config.tol {
            traj.converged = true;
            break;
        }
        if slot == config.max_slots {
            break;
        }
        let mut alpha = config.alpha;
        loop {
            let next = gp_slot_update(net, &s, &ms, blocked, &st.ci_t, &st.di_t, alpha);
            let next_st = solve_traffic(net, &next)?;
            match cost_breakdown(net, &next_st) {
                Ok(b) => {
                    s = next;
                    st = next_st;
                    cost = b.total();
                    break;
                }
                Err(Error::CapacityExceeded { .. }) if alpha > config.alpha * 1e-6 => {
                    alpha *= 0.5;
                    traj.backtracks += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
    traj.strategy = s;
    Ok(traj)
}
