//! GP driven by the packet simulator: marginals come from window
//! measurements instead of the fluid model.

use serde::{Deserialize, Serialize};

use super::{gp_slot_update, randomized_round, BlockedSets, GpConfig};
use crate::error::Result;
use crate::marginals::{check_modified_condition, marginals_from, ElementMarginals};
use crate::model::{evaluate, Network, Strategy};
use crate::packetsim::{sim_run, Installed, Measurement, SimConfig, SimSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredConfig {
    pub gp: GpConfig,
    pub slots: usize,
    pub seed: u64,
}

impl Default for MeasuredConfig {
    fn default() -> Self {
        MeasuredConfig { gp: GpConfig::default(), slots: 200, seed: 0 }
    }
}

/// One controller step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasuredEvent {
    pub slot: usize,
    pub time: f64,
    /// Cost of the measured loads in the slot that just ended.
    pub measured_cost: f64,
    /// Fluid cost of the strategy installed for the next slot.
    pub fluid_cost: f64,
    /// Modified-condition residual from the measured marginals.
    pub residual: f64,
    pub cache_items: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasuredTrajectory {
    pub events: Vec<MeasuredEvent>,
    pub strategy: Strategy,
    pub summary: SimSummary,
}

/// Runs GP for `config.slots` slots of length `config.gp.slot`, starting
/// from `init` with its rounded caches.
pub fn gp_run_measured(
    net: &Network,
    init: Strategy,
    blocked: &BlockedSets,
    config: &MeasuredConfig,
) -> Result<MeasuredTrajectory> {
    config.gp.validate()?;
    let sim = SimConfig {
        horizon: config.gp.slot * config.slots as f64,
        window: config.gp.slot,
        drain: false,
        seed: config.seed,
        ..Default::default()
    };
    let rounding = config.gp.rounding_seed;
    let cache = randomized_round(net, &init, rounding);
    let mut events = Vec::new();
    let mut failure = None;
    let mut controller = |net: &Network, m: &Measurement, cur: &Installed| -> Option<Installed> {
        if failure.is_some() {
            return None;
        }
        let elements = ElementMarginals::clamped(net, &m.link_bits, &m.cpu_work, &m.cache_bits);
        let ms = match marginals_from(net, &cur.strategy, &m.ci_traffic, &m.di_traffic, elements, Some(blocked)) {
            Ok(ms) => ms,
            Err(e) => {
                failure = Some(e);
                return None;
            }
        };
        let residual = check_modified_condition(net, &cur.strategy, &ms, config.gp.tol).residual;
        let next = gp_slot_update(net, &cur.strategy, &ms, blocked, &m.ci_traffic, &m.di_traffic, config.gp.alpha);
        let cache = randomized_round(net, &next, rounding.wrapping_add(m.index as u64 + 1));
        events.push(MeasuredEvent {
            slot: m.index,
            time: m.t_end,
            measured_cost: m.cost(net),
            fluid_cost: evaluate(net, &next).unwrap_or(f64::INFINITY),
            residual,
            cache_items: cache.counts(net.n()).iter().sum(),
        });
        Some(Installed { strategy: next, cache })
    };
    let out = sim_run(net, Installed { strategy: init, cache }, &sim, &mut controller)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(MeasuredTrajectory { events, strategy: out.installed.strategy, summary: out.summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::sep_route;
    use crate::fixtures::{chain, ChainParams};
    use crate::gp::{build_static_blocked_sets, gp_run_fluid};

    #[test]
    fn measured_run_tracks_the_fluid_run() {
        // Expensive CPU at a, cheap at s: SEP and GP agree on the direction.
        let net = chain(ChainParams { rate: 0.5, cpu: 0.3, cache_price: 50.0, ..Default::default() });
        let blocked = build_static_blocked_sets(&net).unwrap();
        let init = sep_route(&net).unwrap();
        let config = MeasuredConfig { slots: 150, seed: 3, ..Default::default() };
        let run = gp_run_measured(&net, init.clone(), &blocked, &config).unwrap();
        assert_eq!(run.events.len(), 150);
        let fluid = gp_run_fluid(&net, &GpConfig { max_slots: 150, ..Default::default() }).unwrap();
        let t_fluid = fluid.final_cost();
        let t_meas = run.events.last().unwrap().fluid_cost;
        assert!(t_meas.is_finite());
        assert!((t_meas - t_fluid).abs() < 0.1 * t_fluid, "{t_meas} vs {t_fluid}");
        assert!(run.summary.duplicate_answers == 0);
    }
}
