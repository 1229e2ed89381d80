//! Extended shortest paths: cost-to-go toward data servers and toward
//! computation sites, computed with zero-load marginal weights.
//!
//! A data interest sent from `i` to `j` costs `L^d * D'_ji(0)`, since its
//! response crosses `(j, i)`. A computation interest pays `L^c * D'_ji(0)`
//! per hop and `W * C'_v(0)` plus the data cost-to-go at the node `v` that
//! computes it. The Dijkstra settle order doubles as a static node ranking
//! from which loop-free blocked sets are derived.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::{Network, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub struct CostToGo {
    pub cost: Vec<f64>,
    /// Next hop on the shortest path; `None` at terminal nodes (servers for
    /// data, the chosen computation site for computation interests).
    pub next: Vec<Option<NodeId>>,
    /// Position in settle order; terminals come first.
    pub rank: Vec<usize>,
}

#[derive(PartialEq)]
struct Item(f64, NodeId);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra on cost-to-go. `init[v]` is the cost of stopping
/// at `v` (infinite if `v` is not terminal), `size` the packet size of the
/// responses, `link_up` masks failed links.
fn cost_to_go(net: &Network, init: &[f64], size: f64, link_up: Option<&[bool]>) -> CostToGo {
    let n = net.n();
    let topo = &net.topology;
    let mut cost = init.to_vec();
    let mut next = vec![None; n];
    let mut rank = vec![usize::MAX; n];
    let mut heap: BinaryHeap<Item> =
        (0..n).filter(|&v| init[v].is_finite()).map(|v| Item(init[v], v)).collect();
    let mut settled = 0;
    while let Some(Item(d, v)) = heap.pop() {
        if rank[v] != usize::MAX || d > cost[v] {
            continue;
        }
        rank[v] = settled;
        settled += 1;
        // Arc u -> v is used by interests; the response flows on l = (v, u).
        for l in topo.out_links(v) {
            if link_up.is_some_and(|up| !up[l] || !up[topo.reverse(l)]) {
                continue;
            }
            let u = topo.head(l);
            if rank[u] != usize::MAX {
                continue;
            }
            let w = size * net.costs.link[l].zero_load_marginal();
            if d + w < cost[u] {
                cost[u] = d + w;
                next[u] = Some(v);
                heap.push(Item(d + w, u));
            }
        }
    }
    CostToGo { cost, next, rank }
}

/// Shortest data path cost from every node to the servers of DI commodity `k`.
pub fn data_cost_to_go(net: &Network, k: usize, link_up: Option<&[bool]>) -> Result<CostToGo> {
    let n = net.n();
    let init: Vec<f64> = (0..n).map(|i| if net.server(k, i) { 0.0 } else { f64::INFINITY }).collect();
    let out = cost_to_go(net, &init, net.data_size[k], link_up);
    if let Some(node) = out.rank.iter().position(|&r| r == usize::MAX) {
        return Err(Error::Unreachable { node, data: net.di[k] });
    }
    Ok(out)
}

/// Extended cost-to-go of CI commodity `c`: route to some eligible compute
/// node, compute there, then fetch the data. `data` is the DI commodity's
/// [`data_cost_to_go`].
pub fn compute_cost_to_go(
    net: &Network,
    c: usize,
    data: &CostToGo,
    eligible: impl Fn(NodeId) -> bool,
    link_up: Option<&[bool]>,
) -> Result<CostToGo> {
    let n = net.n();
    let init: Vec<f64> = (0..n)
        .map(|v| {
            if eligible(v) {
                net.workload[c * n + v] * net.costs.compute[v].zero_load_marginal() + data.cost[v]
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let out = cost_to_go(net, &init, net.result_size[c], link_up);
    if let Some(node) = out.rank.iter().position(|&r| r == usize::MAX) {
        return Err(Error::Unreachable { node, data: net.ci[c].data });
    }
    Ok(out)
}

/// Cost-to-go for every commodity with every node eligible to compute.
#[derive(Debug, Clone)]
pub struct ExtendedPaths {
    pub ci: Vec<CostToGo>,
    pub di: Vec<CostToGo>,
}

impl ExtendedPaths {
    pub fn compute(net: &Network, link_up: Option<&[bool]>) -> Result<Self> {
        let di = (0..net.n_di()).map(|k| data_cost_to_go(net, k, link_up)).collect::<Result<Vec<_>>>()?;
        let ci = (0..net.n_ci())
            .map(|c| compute_cost_to_go(net, c, &di[net.ci_to_di[c]], |_| true, link_up))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExtendedPaths { ci, di })
    }
}
