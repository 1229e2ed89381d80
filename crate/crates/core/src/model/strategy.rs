//! Forwarding and caching strategies, their feasibility and loop checks.

use serde::{Deserialize, Serialize};

use super::network::Network;
use super::topology::NodeId;
use crate::error::Commodity;

/// Joint forwarding/caching strategy `(phi, y)`.
///
/// The forwarding vectors use the row layout of [`Network::ci_row`] and
/// [`Network::di_row`]; caching vectors are indexed `[commodity * n + node]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub ci_phi: Vec<f64>,
    pub ci_y: Vec<f64>,
    pub di_phi: Vec<f64>,
    pub di_y: Vec<f64>,
}

impl Strategy {
    /// All-zero vectors of the right shape (not feasible on its own).
    pub fn zeros(net: &Network) -> Self {
        let n = net.n();
        Strategy {
            ci_phi: vec![0.0; net.n_ci() * net.ci_block()],
            ci_y: vec![0.0; net.n_ci() * n],
            di_phi: vec![0.0; net.n_di() * net.links()],
            di_y: vec![0.0; net.n_di() * n],
        }
    }

    /// Every CI computed where it arrives; DI rows are left empty.
    pub fn local_compute(net: &Network) -> Self {
        let mut s = Strategy::zeros(net);
        for c in 0..net.n_ci() {
            for i in net.topology.nodes() {
                s.ci_phi[net.ci_row(c, i).start] = 1.0;
            }
        }
        s
    }

    pub fn dims_match(&self, net: &Network) -> bool {
        self.ci_phi.len() == net.n_ci() * net.ci_block()
            && self.ci_y.len() == net.n_ci() * net.n()
            && self.di_phi.len() == net.n_di() * net.links()
            && self.di_y.len() == net.n_di() * net.n()
    }

    /// Conditional forwarding split `phi / (1 - y)` of CI row `(c, i)`;
    /// `None` when the row is fully cached.
    pub fn ci_conditional(&self, net: &Network, c: usize, i: NodeId) -> Option<Vec<f64>> {
        let row = &self.ci_phi[net.ci_row(c, i)];
        let miss: f64 = row.iter().sum();
        (miss > 0.0).then(|| row.iter().map(|p| p / miss).collect())
    }

    pub fn di_conditional(&self, net: &Network, k: usize, i: NodeId) -> Option<Vec<f64>> {
        let row = &self.di_phi[net.di_row(k, i)];
        let miss: f64 = row.iter().sum();
        (miss > 0.0).then(|| row.iter().map(|p| p / miss).collect())
    }

    /// Expected number of cached items at each node.
    pub fn cached_items(&self, net: &Network) -> Vec<f64> {
        let n = net.n();
        let mut out = vec![0.0; n];
        for (idx, y) in self.ci_y.iter().enumerate() {
            out[idx % n] += y;
        }
        for (idx, y) in self.di_y.iter().enumerate() {
            out[idx % n] += y;
        }
        out
    }

    /// Largest |row sum - target| over all rows.
    pub fn max_conservation_residual(&self, net: &Network) -> f64 {
        let n = net.n();
        let mut worst: f64 = 0.0;
        for c in 0..net.n_ci() {
            for i in 0..n {
                let s: f64 = self.ci_phi[net.ci_row(c, i)].iter().sum::<f64>() + self.ci_y[c * n + i];
                worst = worst.max((s - 1.0).abs());
            }
        }
        for k in 0..net.n_di() {
            for i in 0..n {
                let target = if net.server(k, i) { 0.0 } else { 1.0 };
                let s: f64 = self.di_phi[net.di_row(k, i)].iter().sum::<f64>() + self.di_y[k * n + i];
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }
}

/// One violated constraint found by [`validate_strategy`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    DimensionMismatch(String),
    /// Row sum (forwarding plus caching) differs from its target.
    Conservation { commodity: Commodity, node: NodeId, residual: f64 },
    /// Entry outside `[0, 1]`.
    OutOfRange { commodity: Commodity, node: NodeId, slot: Slot, value: f64 },
    /// A designated server forwards data interests.
    ServerForwards { data: usize, node: NodeId, total: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Slot {
    Local,
    Cache,
    Neighbor(NodeId),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Absolute tolerance for a row to count as conserved.
pub const CONSERVATION_TOL: f64 = 1e-9;

/// Lists every conservation, range and server-forwarding violation.
///
/// Forwarding entries on non-links are unrepresentable in the row layout,
/// so they never appear in the report.
pub fn validate_strategy(net: &Network, s: &Strategy) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !s.dims_match(net) {
        report.violations.push(Violation::DimensionMismatch(format!(
            "strategy has ({}, {}, {}, {}) entries",
            s.ci_phi.len(),
            s.ci_y.len(),
            s.di_phi.len(),
            s.di_y.len()
        )));
        return report;
    }
    let n = net.n();
    let topo = &net.topology;
    let range = |commodity, node, slot, value: f64, out: &mut Vec<Violation>| {
        if !(0.0..=1.0).contains(&value) {
            out.push(Violation::OutOfRange { commodity, node, slot, value });
        }
    };
    for c in 0..net.n_ci() {
        let commodity = Commodity::Ci(c);
        for i in 0..n {
            let row = &s.ci_phi[net.ci_row(c, i)];
            let y = s.ci_y[c * n + i];
            range(commodity, i, Slot::Local, row[0], &mut report.violations);
            for (q, &j) in topo.neighbors(i).iter().enumerate() {
                range(commodity, i, Slot::Neighbor(j), row[1 + q], &mut report.violations);
            }
            range(commodity, i, Slot::Cache, y, &mut report.violations);
            let residual = row.iter().sum::<f64>() + y - 1.0;
            if residual.abs() > CONSERVATION_TOL {
                report.violations.push(Violation::Conservation { commodity, node: i, residual });
            }
        }
    }
    for k in 0..net.n_di() {
        let commodity = Commodity::Di(k);
        for i in 0..n {
            let row = &s.di_phi[net.di_row(k, i)];
            let y = s.di_y[k * n + i];
            for (q, &j) in topo.neighbors(i).iter().enumerate() {
                range(commodity, i, Slot::Neighbor(j), row[q], &mut report.violations);
            }
            range(commodity, i, Slot::Cache, y, &mut report.violations);
            let fwd: f64 = row.iter().sum();
            if net.server(k, i) {
                if fwd != 0.0 {
                    report.violations.push(Violation::ServerForwards { data: net.di[k], node: i, total: fwd });
                }
                if y.abs() > CONSERVATION_TOL {
                    report.violations.push(Violation::Conservation { commodity, node: i, residual: y });
                }
            } else {
                let residual = fwd + y - 1.0;
                if residual.abs() > CONSERVATION_TOL {
                    report.violations.push(Violation::Conservation { commodity, node: i, residual });
                }
            }
        }
    }
    report
}

/// Per-commodity loop verdicts; `None` means the support is acyclic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopReport {
    pub ci: Vec<Option<Vec<NodeId>>>,
    pub di: Vec<Option<Vec<NodeId>>>,
}

impl LoopReport {
    pub fn loop_free(&self) -> bool {
        self.ci.iter().chain(&self.di).all(Option::is_none)
    }

    pub fn first_cycle(&self) -> Option<(Commodity, &[NodeId])> {
        self.ci
            .iter()
            .enumerate()
            .find_map(|(c, w)| w.as_deref().map(|w| (Commodity::Ci(c), w)))
            .or_else(|| self.di.iter().enumerate().find_map(|(k, w)| w.as_deref().map(|w| (Commodity::Di(k), w))))
    }
}

/// Successor lists of the support digraph `{(i, j) : phi_ij != 0}`.
pub(crate) fn ci_support(net: &Network, s: &Strategy, c: usize) -> Vec<Vec<NodeId>> {
    let topo = &net.topology;
    topo.nodes()
        .map(|i| {
            let row = &s.ci_phi[net.ci_row(c, i)];
            topo.neighbors(i).iter().enumerate().filter(|&(q, _)| row[1 + q] != 0.0).map(|(_, &j)| j).collect()
        })
        .collect()
}

pub(crate) fn di_support(net: &Network, s: &Strategy, k: usize) -> Vec<Vec<NodeId>> {
    let topo = &net.topology;
    topo.nodes()
        .map(|i| {
            let row = &s.di_phi[net.di_row(k, i)];
            topo.neighbors(i).iter().enumerate().filter(|&(q, _)| row[q] != 0.0).map(|(_, &j)| j).collect()
        })
        .collect()
}

/// Depth-first search for one directed cycle. The witness starts and ends at
/// the same node, e.g. `[a, b, a]`.
pub(crate) fn find_cycle(succ: &[Vec<NodeId>]) -> Option<Vec<NodeId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = succ.len();
    let mut mark = vec![Mark::New; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
        mark[root] = Mark::Open;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if let Some(&v) = succ[u].get(*next) {
                *next += 1;
                match mark[v] {
                    Mark::New => {
                        mark[v] = Mark::Open;
                        stack.push((v, 0));
                    }
                    Mark::Open => {
                        let pos = stack.iter().position(|&(w, _)| w == v).unwrap();
                        let mut cycle: Vec<NodeId> = stack[pos..].iter().map(|&(w, _)| w).collect();
                        cycle.push(v);
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[u] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// Checks every commodity's support digraph for cycles.
pub fn check_loop_free(net: &Network, s: &Strategy) -> LoopReport {
    LoopReport {
        ci: (0..net.n_ci()).map(|c| find_cycle(&ci_support(net, s, c))).collect(),
        di: (0..net.n_di()).map(|k| find_cycle(&di_support(net, s, k))).collect(),
    }
}
