//! Fluid traffic fixed point and aggregated cost.

use serde::Serialize;

use super::network::Network;
use super::strategy::{ci_support, di_support, find_cycle, Strategy};
use super::topology::{NodeId, Topology};
use crate::error::{Commodity, Element, Error, Result};

/// Solution of the traffic equations for a fixed forwarding strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrafficState {
    /// `t^c_i(m,k)`, indexed `[c * n + i]`.
    pub ci_t: Vec<f64>,
    /// `t^d_i(k)`, indexed `[k * n + i]`.
    pub di_t: Vec<f64>,
    /// CI rates per slot in CI row layout; slot 0 holds `g_i(m,k)`.
    pub ci_f: Vec<f64>,
    /// DI link rates in DI row layout.
    pub di_f: Vec<f64>,
    /// Response flow `F_ij` (bits/sec) per directed link.
    pub link_flow: Vec<f64>,
    /// Workload `G_i` per node.
    pub workload: Vec<f64>,
    /// Expected cache occupancy `Y_i` per node, in bits.
    pub cache: Vec<f64>,
    /// Topological order of each CI commodity's support.
    pub ci_order: Vec<Vec<NodeId>>,
    /// Topological order of each DI commodity's support.
    pub di_order: Vec<Vec<NodeId>>,
}

impl TrafficState {
    pub fn g(&self, net: &Network, c: usize, i: NodeId) -> f64 {
        self.ci_f[net.ci_row(c, i).start]
    }
}

/// Kahn's algorithm over the rows of one commodity. `edge(i, q)` reports
/// whether the `q`-th out-link of `i` carries positive support.
pub(crate) fn support_order(topo: &Topology, edge: impl Fn(NodeId, usize) -> bool) -> Option<Vec<NodeId>> {
    let n = topo.node_count();
    let mut indeg = vec![0u32; n];
    for i in 0..n {
        for (q, &j) in topo.neighbors(i).iter().enumerate() {
            if edge(i, q) {
                indeg[j] += 1;
            }
        }
    }
    let mut stack: Vec<NodeId> = (0..n).rev().filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = stack.pop() {
        order.push(u);
        for (q, &v) in topo.neighbors(u).iter().enumerate() {
            if edge(u, q) {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    stack.push(v);
                }
            }
        }
    }
    (order.len() == n).then_some(order)
}

pub(crate) fn ci_order(net: &Network, s: &Strategy, c: usize) -> Result<Vec<NodeId>> {
    support_order(&net.topology, |i, q| s.ci_phi[net.ci_row(c, i).start + 1 + q] != 0.0).ok_or_else(|| {
        Error::LoopDetected { commodity: Commodity::Ci(c), cycle: find_cycle(&ci_support(net, s, c)).unwrap_or_default() }
    })
}

pub(crate) fn di_order(net: &Network, s: &Strategy, k: usize) -> Result<Vec<NodeId>> {
    support_order(&net.topology, |i, q| s.di_phi[net.di_row(k, i).start + q] != 0.0).ok_or_else(|| {
        Error::LoopDetected { commodity: Commodity::Di(k), cycle: find_cycle(&di_support(net, s, k)).unwrap_or_default() }
    })
}

/// Solves the traffic equations exactly by substitution along each
/// commodity's support DAG: CI commodities first, then DI commodities whose
/// injections are the local computation rates.
pub fn solve_traffic(net: &Network, s: &Strategy) -> Result<TrafficState> {
    if !s.dims_match(net) {
        return Err(Error::DimensionMismatch("strategy does not match network".into()));
    }
    let n = net.n();
    let topo = &net.topology;
    let mut st = TrafficState {
        ci_t: net.rates.clone(),
        di_t: vec![0.0; net.n_di() * n],
        ci_f: vec![0.0; s.ci_phi.len()],
        di_f: vec![0.0; s.di_phi.len()],
        link_flow: vec![0.0; net.links()],
        workload: vec![0.0; n],
        cache: vec![0.0; n],
        ci_order: Vec::with_capacity(net.n_ci()),
        di_order: Vec::with_capacity(net.n_di()),
    };

    for c in 0..net.n_ci() {
        let order = ci_order(net, s, c)?;
        let lc = net.result_size[c];
        let k = net.ci_to_di[c];
        for &u in &order {
            let row = net.ci_row(c, u);
            let t = st.ci_t[c * n + u];
            let g = t * s.ci_phi[row.start];
            st.ci_f[row.start] = g;
            st.workload[u] += net.workload[c * n + u] * g;
            st.di_t[k * n + u] += g;
            for (q, l) in topo.out_links(u).enumerate() {
                let phi = s.ci_phi[row.start + 1 + q];
                if phi != 0.0 {
                    let f = t * phi;
                    st.ci_f[row.start + 1 + q] = f;
                    st.ci_t[c * n + topo.head(l)] += f;
                    st.link_flow[topo.reverse(l)] += lc * f;
                }
            }
        }
        st.ci_order.push(order);
    }

    for k in 0..net.n_di() {
        let order = di_order(net, s, k)?;
        let ld = net.data_size[k];
        for &u in &order {
            let row = net.di_row(k, u);
            let t = st.di_t[k * n + u];
            for (q, l) in topo.out_links(u).enumerate() {
                let phi = s.di_phi[row.start + q];
                if phi != 0.0 {
                    let f = t * phi;
                    st.di_f[row.start + q] = f;
                    st.di_t[k * n + topo.head(l)] += f;
                    st.link_flow[topo.reverse(l)] += ld * f;
                }
            }
        }
        st.di_order.push(order);
    }

    st.cache = cache_occupancy(net, s);
    Ok(st)
}

/// Expected cache occupancy in bits: results weighted by `L^c`, data by `L^d`.
pub fn cache_occupancy(net: &Network, s: &Strategy) -> Vec<f64> {
    let n = net.n();
    let mut y = vec![0.0; n];
    for c in 0..net.n_ci() {
        for i in 0..n {
            y[i] += net.result_size[c] * s.ci_y[c * n + i];
        }
    }
    for k in 0..net.n_di() {
        for i in 0..n {
            y[i] += net.data_size[k] * s.di_y[k * n + i];
        }
    }
    y
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub link: f64,
    pub compute: f64,
    pub cache: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.link + self.compute + self.cache
    }
}

/// `sum D_ij(F_ij) + sum C_i(G_i) + sum B_i(Y_i)` split by component.
pub fn cost_breakdown(net: &Network, st: &TrafficState) -> Result<CostBreakdown> {
    let topo = &net.topology;
    let mut out = CostBreakdown { link: 0.0, compute: 0.0, cache: 0.0 };
    for (l, &f) in st.link_flow.iter().enumerate() {
        out.link += net.costs.link[l].value(f).map_err(|p| Error::CapacityExceeded {
            element: Element::Link(topo.tail(l), topo.head(l)),
            load: p.load,
            capacity: p.capacity,
        })?;
    }
    for (i, &g) in st.workload.iter().enumerate() {
        out.compute += net.costs.compute[i].value(g).map_err(|p| Error::CapacityExceeded {
            element: Element::Cpu(i),
            load: p.load,
            capacity: p.capacity,
        })?;
    }
    for (i, &y) in st.cache.iter().enumerate() {
        out.cache += net.costs.cache[i].value(y).map_err(|p| Error::CapacityExceeded {
            element: Element::Cache(i),
            load: p.load,
            capacity: p.capacity,
        })?;
    }
    Ok(out)
}

/// Aggregated cost `T`.
pub fn total_cost(net: &Network, st: &TrafficState) -> Result<f64> {
    cost_breakdown(net, st).map(|b| b.total())
}

/// Convenience: `total_cost(solve_traffic(s))`.
pub fn evaluate(net: &Network, s: &Strategy) -> Result<f64> {
    total_cost(net, &solve_traffic(net, s)?)
}
