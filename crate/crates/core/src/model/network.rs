//! Catalogs, tasks, sizes and costs bundled into a solvable network instance.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::cost::CostFn;
use super::topology::{LinkId, NodeId, Topology};
use crate::error::{Error, Result};

/// Computation and data catalogs with designated servers per data object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalogs {
    pub computations: usize,
    pub data: usize,
    /// `servers[k]` is the non-empty set of nodes storing data `k`.
    pub servers: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub requester: NodeId,
    pub computation: usize,
    pub data: usize,
    /// Computation-interest rate in packets per second.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TaskSet {
    pub tasks: Vec<Task>,
}

impl TaskSet {
    /// Collapses duplicate `(requester, computation, data)` entries by
    /// summing their rates.
    pub fn collapsed(tasks: impl IntoIterator<Item = Task>) -> Self {
        let mut merged: BTreeMap<(NodeId, usize, usize), f64> = BTreeMap::new();
        for t in tasks {
            *merged.entry((t.requester, t.computation, t.data)).or_default() += t.rate;
        }
        TaskSet {
            tasks: merged
                .into_iter()
                .map(|((requester, computation, data), rate)| Task { requester, computation, data, rate })
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        TaskSet { tasks: self.tasks.iter().map(|t| Task { rate: t.rate * factor, ..*t }).collect() }
    }

    pub fn total_rate(&self) -> f64 {
        self.tasks.iter().map(|t| t.rate).sum()
    }
}

/// Per-node computation workload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Workload {
    Uniform(f64),
    /// Dense table indexed `[(node * computations + m) * data + k]`.
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeModel {
    /// Data size `L^d_k` in bits.
    pub data: Vec<f64>,
    /// Result size `L^c_{mk}`, indexed `[m * data + k]`.
    pub result: Vec<f64>,
    pub workload: Workload,
}

impl SizeModel {
    pub fn uniform(catalogs: &Catalogs, data_size: f64, result_size: f64, workload: f64) -> Self {
        SizeModel {
            data: vec![data_size; catalogs.data],
            result: vec![result_size; catalogs.data * catalogs.computations],
            workload: Workload::Uniform(workload),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostModel {
    /// Indexed by [`LinkId`].
    pub link: Vec<CostFn>,
    pub compute: Vec<CostFn>,
    pub cache: Vec<CostFn>,
}

/// A computation-interest commodity: computation `m` applied to data `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CiCommodity {
    pub computation: usize,
    pub data: usize,
}

/// A fully specified instance. Only demanded commodities are materialized:
/// CI commodities are the distinct `(m, k)` pairs appearing in the task set,
/// DI commodities the distinct data objects they use.
#[derive(Debug, Clone)]
pub struct Network {
    pub topology: Topology,
    pub catalogs: Catalogs,
    pub tasks: TaskSet,
    pub sizes: SizeModel,
    pub costs: CostModel,
    pub ci: Vec<CiCommodity>,
    /// Data object of each DI commodity.
    pub di: Vec<usize>,
    /// DI commodity used by each CI commodity.
    pub ci_to_di: Vec<usize>,
    /// `rates[c * n + i]` is `r_i(m,k)` for CI commodity `c`.
    pub rates: Vec<f64>,
    /// `L^c` per CI commodity.
    pub result_size: Vec<f64>,
    /// `L^d` per DI commodity.
    pub data_size: Vec<f64>,
    /// `W` per CI commodity and node, `[c * n + i]`.
    pub workload: Vec<f64>,
    /// `is_server[k * n + i]` for DI commodity `k`.
    pub is_server: Vec<bool>,
}

impl Network {
    pub fn new(
        topology: Topology,
        catalogs: Catalogs,
        tasks: TaskSet,
        sizes: SizeModel,
        costs: CostModel,
    ) -> Result<Self> {
        let n = topology.node_count();
        let links = topology.link_count();
        if catalogs.servers.len() != catalogs.data {
            return Err(Error::DimensionMismatch(format!(
                "{} server sets for {} data objects",
                catalogs.servers.len(),
                catalogs.data
            )));
        }
        for (k, s) in catalogs.servers.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidParams(format!("data {k} has no designated server")));
            }
            if let Some(&bad) = s.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidParams(format!("server {bad} of data {k} is not a node")));
            }
        }
        if costs.link.len() != links || costs.compute.len() != n || costs.cache.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "cost model sized ({}, {}, {}) for {links} links and {n} nodes",
                costs.link.len(),
                costs.compute.len(),
                costs.cache.len()
            )));
        }
        if sizes.data.len() != catalogs.data || sizes.result.len() != catalogs.data * catalogs.computations {
            return Err(Error::DimensionMismatch("size model does not match catalogs".into()));
        }
        if let Workload::Table(w) = &sizes.workload {
            if w.len() != n * catalogs.computations * catalogs.data {
                return Err(Error::DimensionMismatch("workload table does not match catalogs".into()));
            }
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !sizes.data.iter().chain(&sizes.result).copied().all(positive) {
            return Err(Error::InvalidParams("sizes must be strictly positive".into()));
        }

        let mut seen = std::collections::BTreeSet::new();
        for t in &tasks.tasks {
            if t.requester >= n || t.computation >= catalogs.computations || t.data >= catalogs.data {
                return Err(Error::InvalidParams(format!("task {t:?} out of range")));
            }
            if !positive(t.rate) {
                return Err(Error::InvalidParams(format!("task {t:?} has non-positive rate")));
            }
            if !seen.insert((t.requester, t.computation, t.data)) {
                return Err(Error::InvalidParams(format!("duplicate task {t:?}")));
            }
        }

        let ci: Vec<CiCommodity> = tasks
            .tasks
            .iter()
            .map(|t| CiCommodity { computation: t.computation, data: t.data })
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let di: Vec<usize> =
            ci.iter().map(|c| c.data).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let ci_to_di: Vec<usize> = ci.iter().map(|c| di.binary_search(&c.data).unwrap()).collect();

        let mut rates = vec![0.0; ci.len() * n];
        for t in &tasks.tasks {
            let c = ci.binary_search(&CiCommodity { computation: t.computation, data: t.data }).unwrap();
            rates[c * n + t.requester] += t.rate;
        }
        let result_size = ci.iter().map(|c| sizes.result[c.computation * catalogs.data + c.data]).collect();
        let data_size = di.iter().map(|&k| sizes.data[k]).collect();
        let mut workload = vec![0.0; ci.len() * n];
        for (c, cc) in ci.iter().enumerate() {
            for i in 0..n {
                workload[c * n + i] = match &sizes.workload {
                    Workload::Uniform(w) => *w,
                    Workload::Table(tab) => tab[(i * catalogs.computations + cc.computation) * catalogs.data + cc.data],
                };
            }
        }
        if !workload.iter().copied().all(positive) {
            return Err(Error::InvalidParams("workloads must be strictly positive".into()));
        }
        let mut is_server = vec![false; di.len() * n];
        for (k, &data) in di.iter().enumerate() {
            for &s in &catalogs.servers[data] {
                is_server[k * n + s] = true;
            }
        }

        Ok(Network {
            topology,
            catalogs,
            tasks,
            sizes,
            costs,
            ci,
            di,
            ci_to_di,
            rates,
            result_size,
            data_size,
            workload,
            is_server,
        })
    }

    /// Same network with every task rate multiplied by `factor`.
    pub fn with_scaled_rates(&self, factor: f64) -> Result<Self> {
        Network::new(
            self.topology.clone(),
            self.catalogs.clone(),
            self.tasks.scaled(factor),
            self.sizes.clone(),
            self.costs.clone(),
        )
    }

    pub fn n(&self) -> usize {
        self.topology.node_count()
    }

    pub fn links(&self) -> usize {
        self.topology.link_count()
    }

    pub fn n_ci(&self) -> usize {
        self.ci.len()
    }

    pub fn n_di(&self) -> usize {
        self.di.len()
    }

    /// Length of one CI commodity's block of forwarding variables: one
    /// local-computation slot per node plus one slot per directed link.
    pub fn ci_block(&self) -> usize {
        self.n() + self.links()
    }

    /// Slots of CI row `(c, i)`: index 0 is local computation, index `1 + q`
    /// is the `q`-th neighbor of `i`.
    pub fn ci_row(&self, c: usize, i: NodeId) -> Range<usize> {
        let s = c * self.ci_block() + i + self.topology.link_offset(i);
        s..s + 1 + self.topology.degree(i)
    }

    /// Slots of DI row `(k, i)`: index `q` is the `q`-th neighbor of `i`.
    pub fn di_row(&self, k: usize, i: NodeId) -> Range<usize> {
        let s = k * self.links() + self.topology.link_offset(i);
        s..s + self.topology.degree(i)
    }

    pub fn rate(&self, c: usize, i: NodeId) -> f64 {
        self.rates[c * self.n() + i]
    }

    pub fn server(&self, k: usize, i: NodeId) -> bool {
        self.is_server[k * self.n() + i]
    }

    pub fn link_cost(&self, l: LinkId) -> &CostFn {
        &self.costs.link[l]
    }
}
