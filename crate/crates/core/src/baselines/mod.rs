//! Comparison methods: shortest-extended-path routing, SEP with LFU caching
//! and MinCost sizing, and the cloud/edge elastic-caching variants.

mod elastic;
mod sep_lfu;

pub use elastic::{cloud_ec, cloud_compute_set, edge_ec, ElasticConfig, ElasticRun};
pub use sep_lfu::{miss_costs, run_sep_lfu, run_sep_lfu_from, SepLfuConfig, SepLfuTrajectory};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Network, Strategy};
use crate::sep::{CostToGo, ExtendedPaths};

/// Comparison method tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gcfw,
    Gp,
    SepLfu,
    CloudEc,
    EdgeEc,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Gcfw, Method::Gp, Method::SepLfu, Method::CloudEc, Method::EdgeEc];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Gcfw => "gcfw",
            Method::Gp => "gp",
            Method::SepLfu => "sep_lfu",
            Method::CloudEc => "cloud_ec",
            Method::EdgeEc => "edge_ec",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| crate::error::Error::InvalidParams(format!("unknown method {s:?}")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Single-path strategy following per-commodity shortest-path trees.
pub(crate) fn follow_paths(net: &Network, ci: &[CostToGo], di: &[CostToGo]) -> Strategy {
    let mut s = Strategy::zeros(net);
    let topo = &net.topology;
    for (c, tree) in ci.iter().enumerate() {
        for i in topo.nodes() {
            let row = net.ci_row(c, i);
            match tree.next[i] {
                None => s.ci_phi[row.start] = 1.0,
                Some(j) => s.ci_phi[row.start + 1 + topo.neighbors(i).binary_search(&j).unwrap()] = 1.0,
            }
        }
    }
    for (k, tree) in di.iter().enumerate() {
        for i in topo.nodes() {
            if let Some(j) = tree.next[i] {
                s.di_phi[net.di_row(k, i).start + topo.neighbors(i).binary_search(&j).unwrap()] = 1.0;
            }
        }
    }
    s
}

/// Shortest extended path routing without caching: each computation
/// interest follows the cheapest route through a compute site to the data,
/// weighting hops and CPUs by their zero-load marginal costs.
pub fn sep_route(net: &Network) -> Result<Strategy> {
    let paths = ExtendedPaths::compute(net, None)?;
    Ok(follow_paths(net, &paths.ci, &paths.di))
}
