//! SEP routing with LFU caches whose sizes grow by MinCost.

use serde::{Deserialize, Serialize};

use super::sep_route;
use crate::error::Result;
use crate::marginals::broadcast_marginals;
use crate::model::{solve_traffic, total_cost, Network, Strategy, TrafficState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SepLfuConfig {
    pub slots: usize,
}

impl Default for SepLfuConfig {
    fn default() -> Self {
        SepLfuConfig { slots: 200 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SepLfuTrajectory {
    /// Cost of each slot; slot 0 has no cache capacity.
    pub cost: Vec<f64>,
    /// Cache capacity (items) per node at the best slot.
    pub capacity: Vec<usize>,
    pub best_slot: usize,
    pub best_cost: f64,
    /// Strategy installed at the best slot.
    pub strategy: Strategy,
}

/// One cacheable item at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Item {
    Result(usize),
    Data(usize),
}

fn items_at(net: &Network, i: usize) -> Vec<Item> {
    (0..net.n_ci())
        .map(Item::Result)
        .chain((0..net.n_di()).filter(|&k| !net.server(k, i)).map(Item::Data))
        .collect()
}

/// Per-node miss cost: for every item not cached at the node, its interest
/// rate through the node times the marginal cost of retrieving it along the
/// installed route (`dT/dt` of the row).
pub fn miss_costs(net: &Network, s: &Strategy, st: &TrafficState) -> Result<Vec<f64>> {
    let n = net.n();
    let ms = broadcast_marginals(net, s, st, None)?;
    let mut out = vec![0.0; n];
    for (i, cost) in out.iter_mut().enumerate() {
        for item in items_at(net, i) {
            let (t, cached, marginal) = match item {
                Item::Result(c) => (st.ci_t[c * n + i], s.ci_y[c * n + i] > 0.5, ms.ci_dt[c * n + i]),
                Item::Data(k) => (st.di_t[k * n + i], s.di_y[k * n + i] > 0.5, ms.di_dt[k * n + i]),
            };
            if !cached {
                *cost += t * marginal;
            }
        }
    }
    Ok(out)
}

/// Installs `cached` on top of the single-path `base`.
fn install(net: &Network, base: &Strategy, cached: &[Vec<Item>]) -> Strategy {
    let n = net.n();
    let mut s = base.clone();
    for (i, items) in cached.iter().enumerate() {
        for &item in items {
            match item {
                Item::Result(c) => {
                    s.ci_phi[net.ci_row(c, i)].iter_mut().for_each(|p| *p = 0.0);
                    s.ci_y[c * n + i] = 1.0;
                }
                Item::Data(k) => {
                    s.di_phi[net.di_row(k, i)].iter_mut().for_each(|p| *p = 0.0);
                    s.di_y[k * n + i] = 1.0;
                }
            }
        }
    }
    s
}

/// Fluid SEPLFU: each slot MinCost adds one unit of capacity at the node
/// with the highest miss cost, then every node refills its cache with the
/// most frequently requested items observed in the previous slot. The
/// trajectory minimum is the reported cost.
pub fn run_sep_lfu(net: &Network, config: &SepLfuConfig) -> Result<SepLfuTrajectory> {
    run_sep_lfu_from(net, sep_route(net)?, config)
}

pub fn run_sep_lfu_from(net: &Network, base: Strategy, config: &SepLfuConfig) -> Result<SepLfuTrajectory> {
    let n = net.n();
    let mut capacity = vec![0usize; n];
    let mut cached: Vec<Vec<Item>> = vec![Vec::new(); n];
    let mut s = base.clone();
    let mut st = solve_traffic(net, &s)?;
    let first = total_cost(net, &st)?;
    let mut traj = SepLfuTrajectory {
        cost: vec![first],
        capacity: capacity.clone(),
        best_slot: 0,
        best_cost: first,
        strategy: s.clone(),
    };
    for slot in 1..=config.slots {
        let miss = miss_costs(net, &s, &st)?;
        let grow = (0..n)
            .filter(|&i| capacity[i] < items_at(net, i).len())
            .max_by(|&a, &b| miss[a].total_cmp(&miss[b]).then(b.cmp(&a)));
        let Some(grow) = grow else { break };
        capacity[grow] += 1;
        // LFU refill from the frequencies seen under the previous caches.
        for i in 0..n {
            let mut items = items_at(net, i);
            let freq = |it: &Item| match *it {
                Item::Result(c) => st.ci_t[c * n + i],
                Item::Data(k) => st.di_t[k * n + i],
            };
            let keep = |it: &Item| cached[i].contains(it);
            // Stable sort: ties keep current residents, then catalog order.
            items.sort_by(|a, b| freq(b).total_cmp(&freq(a)).then(keep(b).cmp(&keep(a))));
            items.truncate(capacity[i]);
            cached[i] = items;
        }
        s = install(net, &base, &cached);
        st = solve_traffic(net, &s)?;
        let cost = total_cost(net, &st)?;
        traj.cost.push(cost);
        if cost < traj.best_cost {
            traj.best_cost = cost;
            traj.best_slot = slot;
            traj.capacity = capacity.clone();
            traj.strategy = s.clone();
        }
    }
    Ok(traj)
}
