//! Elastic-caching baselines with frozen forwarding: CloudEC caches results
//! and computes in a small set of high-capacity nodes, EdgeEC caches data
//! and computes at the requesters.

use serde::{Deserialize, Serialize};

use super::follow_paths;
use crate::error::{Error, Result};
use crate::marginals::broadcast_marginals;
use crate::model::{solve_traffic, total_cost, Network, NodeId, Strategy};
use crate::sep::{compute_cost_to_go, data_cost_to_go, CostToGo};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticConfig {
    pub alpha: f64,
    pub max_slots: usize,
    pub tol: f64,
    /// Fraction of nodes, by CPU capacity, used as CloudEC compute sites.
    pub compute_fraction: f64,
}

impl Default for ElasticConfig {
    fn default() -> Self {
        ElasticConfig { alpha: 0.01, max_slots: 5000, tol: 1e-6, compute_fraction: 0.05 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ElasticRun {
    pub cost: Vec<f64>,
    /// Residual of the caching rows of the optimality condition.
    pub residual: Vec<f64>,
    pub strategy: Strategy,
    pub converged: bool,
    /// Rows cached up front to make the starting point feasible.
    pub repaired: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Results,
    Data,
}

/// Nodes with the largest CPU capacity, `ceil(fraction * n)` of them (at
/// least one); ties by node id.
pub fn cloud_compute_set(net: &Network, fraction: f64) -> Vec<NodeId> {
    let n = net.n();
    let size = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut nodes: Vec<NodeId> = (0..n).collect();
    nodes.sort_by(|&a, &b| {
        let ca = net.costs.compute[a].zero_load_marginal();
        let cb = net.costs.compute[b].zero_load_marginal();
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    nodes.truncate(size);
    nodes.sort_unstable();
    nodes
}

fn data_trees(net: &Network) -> Result<Vec<CostToGo>> {
    (0..net.n_di()).map(|k| data_cost_to_go(net, k, None)).collect()
}

/// CloudEC: computation interests routed to the cheapest member of the
/// compute set, results cached by the restricted controller.
pub fn cloud_ec(net: &Network, config: &ElasticConfig) -> Result<ElasticRun> {
    let sites = cloud_compute_set(net, config.compute_fraction);
    let di = data_trees(net)?;
    let ci = (0..net.n_ci())
        .map(|c| compute_cost_to_go(net, c, &di[net.ci_to_di[c]], |v| sites.binary_search(&v).is_ok(), None))
        .collect::<Result<Vec<_>>>()?;
    let s = follow_paths(net, &ci, &di);
    run_elastic(net, s, Side::Results, config)
}

/// EdgeEC: every computation performed where it is requested, data cached
/// by the restricted controller.
pub fn edge_ec(net: &Network, config: &ElasticConfig) -> Result<ElasticRun> {
    let di = data_trees(net)?;
    let mut s = follow_paths(net, &[], &di);
    for c in 0..net.n_ci() {
        for i in net.topology.nodes() {
            s.ci_phi[net.ci_row(c, i).start] = 1.0;
        }
    }
    run_elastic(net, s, Side::Data, config)
}

/// Caches results at requesters, heaviest first, until the cost is finite.
fn repair(net: &Network, s: &mut Strategy, side: Side) -> Result<usize> {
    let n = net.n();
    let mut rows: Vec<usize> = (0..net.rates.len()).filter(|&x| net.rates[x] > 0.0).collect();
    rows.sort_by(|&a, &b| net.rates[b].total_cmp(&net.rates[a]).then(a.cmp(&b)));
    let mut repaired = 0;
    loop {
        let err = match solve_traffic(net, s).and_then(|st| total_cost(net, &st)) {
            Ok(_) => return Ok(repaired),
            Err(e @ Error::CapacityExceeded { .. }) => e,
            Err(e) => return Err(e),
        };
        if side == Side::Data || repaired == rows.len() {
            return Err(err);
        }
        let idx = rows[repaired];
        let (c, i) = (idx / n, idx % n);
        s.ci_phi[net.ci_row(c, i)].iter_mut().for_each(|p| *p = 0.0);
        s.ci_y[idx] = 1.0;
        repaired += 1;
    }
}

/// Gradient projection on the caching variables of one side with the
/// conditional forwarding `rho` of every row frozen: each row trades its
/// forwarding composite marginal `sum rho_j delta_j` against the cache
/// marginal `gamma`, and `phi = rho (1 - y)`.
fn run_elastic(net: &Network, mut s: Strategy, side: Side, config: &ElasticConfig) -> Result<ElasticRun> {
    let n = net.n();
    let repaired = repair(net, &mut s, side)?;
    // Frozen conditional splits, taken from the single-path start.
    let rows: Vec<(std::ops::Range<usize>, usize)> = match side {
        Side::Results => (0..net.n_ci())
            .flat_map(|c| (0..n).map(move |i| (c, i)))
            .map(|(c, i)| (net.ci_row(c, i), c * n + i))
            .collect(),
        Side::Data => (0..net.n_di())
            .flat_map(|k| (0..n).map(move |i| (k, i)))
            .filter(|&(k, i)| !net.server(k, i))
            .map(|(k, i)| (net.di_row(k, i), k * n + i))
            .collect(),
    };
    let mut rho = match side {
        Side::Results => s.ci_phi.clone(),
        Side::Data => s.di_phi.clone(),
    };
    for (row, idx) in &rows {
        let y = match side {
            Side::Results => s.ci_y[*idx],
            Side::Data => s.di_y[*idx],
        };
        if y >= 1.0 {
            // Fully cached by the repair step: remember the original route.
            let base = match side {
                Side::Results => super::sep_route(net)?.ci_phi,
                Side::Data => unreachable!("data side is never repaired"),
            };
            rho[row.clone()].copy_from_slice(&base[row.clone()]);
        }
    }

    let mut run = ElasticRun { cost: Vec::new(), residual: Vec::new(), strategy: s.clone(), converged: false, repaired };
    for slot in 0..=config.max_slots {
        let st = solve_traffic(net, &s)?;
        let cost = total_cost(net, &st)?;
        let ms = broadcast_marginals(net, &s, &st, None)?;
        let mut residual: f64 = 0.0;
        let mut updates = Vec::with_capacity(rows.len());
        for (row, idx) in &rows {
            let (delta, gamma, t, y) = match side {
                Side::Results => (&ms.ci_delta, ms.ci_gamma[*idx], st.ci_t[*idx], s.ci_y[*idx]),
                Side::Data => (&ms.di_delta, ms.di_gamma[*idx], st.di_t[*idx], s.di_y[*idx]),
            };
            if t <= 0.0 {
                updates.push(0.0);
                continue;
            }
            let fwd: f64 = row.clone().map(|x| rho[x] * delta[x]).sum();
            let e = gamma - fwd;
            // Residual on the caching subspace.
            let r = if y > 1e-8 && y < 1.0 - 1e-8 {
                e.abs()
            } else if y <= 1e-8 {
                (-e).max(0.0)
            } else {
                e.max(0.0)
            };
            residual = residual.max(r);
            updates.push(if e > 0.0 { -y.min(config.alpha * e) } else { (1.0 - y).min(-config.alpha * e) });
        }
        run.cost.push(cost);
        run.residual.push(residual);
        if residual <= config.tol {
            run.converged = true;
            break;
        }
        if slot == config.max_slots {
            break;
        }
        let mut scale = 1.0;
        loop {
            let mut next = s.clone();
            for ((row, idx), (dy, _)) in rows.iter().zip(updates.iter().zip(0..)) {
                let (phi, yv, t) = match side {
                    Side::Results => (&mut next.ci_phi, &mut next.ci_y[*idx], st.ci_t[*idx]),
                    Side::Data => (&mut next.di_phi, &mut next.di_y[*idx], st.di_t[*idx]),
                };
                let y = if t <= 0.0 { 0.0 } else { (*yv + scale * dy).clamp(0.0, 1.0) };
                *yv = y;
                for x in row.clone() {
                    phi[x] = rho[x] * (1.0 - y);
                }
            }
            match solve_traffic(net, &next).and_then(|st| total_cost(net, &st)) {
                Ok(_) => {
                    s = next;
                    break;
                }
                Err(Error::CapacityExceeded { .. }) if scale > 1e-6 => scale *= 0.5,
                Err(e) => return Err(e),
            }
        }
    }
    run.strategy = s;
    Ok(run)
}
