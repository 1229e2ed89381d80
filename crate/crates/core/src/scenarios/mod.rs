//! Scenario specifications: topology, catalogs, tasks and cost parameters,
//! all expanded deterministically from a master seed.
//!
//! A [`ScenarioSpec`] serializes to the `scenario.json` format:
//!
//! ```json
//! {
//!   "name": "grid-25",
//!   "topology": { "kind": "grid", "rows": 5, "cols": 5 },
//!   "data": 50, "computations": 10, "tasks": 50,
//!   "link_mean": 3.0, "cpu_mean": 5.0, "cache_mean": 10.0,
//!   "zipf": 1.0, "rate_range": [1.0, 5.0],
//!   "data_size": 0.2, "result_size": 0.1, "workload": 1.0,
//!   "rate_scale": 1.0, "target_utilization": 0.4, "cache_scale": 70.0,
//!   "seed": 1
//! }
//! ```
//!
//! `topology.kind` is one of `er {n, p}`, `grid {rows, cols}`,
//! `tree {depth}`, `fog {arity, depth}`, `sw {n, k, p}`,
//! `random_connected {n, edges}`, `builtin {name}` (one of the shipped
//! edge lists: `geant`, `lhc`, `dtelekom`) or `file {path}`.
//! With `target_utilization` set, task rates are further scaled so that the
//! most loaded link or CPU under shortest-extended-path routing runs at that
//! utilization. Linear cache prices are scaled by the same factor, which
//! keeps the ratio between cache price and zero-load forwarding cost of the
//! unscaled parameters.

mod generators;

pub use generators::{binary_tree, erdos_renyi, fog, grid, random_connected, small_world};

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::baselines::sep_route;
use crate::error::{Error, Result};
use crate::model::{solve_traffic, Catalogs, CostFn, CostModel, Network, SizeModel, Task, TaskSet, Topology, Workload};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologySource {
    Er { n: usize, p: f64 },
    Grid { rows: usize, cols: usize },
    Tree { depth: usize },
    Fog { arity: usize, depth: usize },
    Sw { n: usize, k: usize, p: f64 },
    RandomConnected { n: usize, edges: usize },
    Builtin { name: String },
    File { path: String },
}

const BUILTIN: [(&str, &str); 3] = [
    ("geant", include_str!("../../data/geant.txt")),
    ("lhc", include_str!("../../data/lhc.txt")),
    ("dtelekom", include_str!("../../data/dtelekom.txt")),
];

/// Text of a shipped edge list.
pub fn builtin_edge_list(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Builds a topology. `seed` drives the random generators only.
pub fn gen_topology(source: &TopologySource, seed: u64) -> Result<Topology> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match source {
        TopologySource::Er { n, p } => erdos_renyi(&mut rng, *n, *p),
        TopologySource::Grid { rows, cols } => grid(*rows, *cols),
        TopologySource::Tree { depth } => binary_tree(*depth),
        TopologySource::Fog { arity, depth } => fog(*arity, *depth),
        TopologySource::Sw { n, k, p } => small_world(&mut rng, *n, *k, *p),
        TopologySource::RandomConnected { n, edges } => random_connected(&mut rng, *n, *edges),
        TopologySource::Builtin { name } => Topology::parse_edge_list(
            builtin_edge_list(name).ok_or_else(|| Error::InvalidParams(format!("no builtin topology {name:?}")))?,
        ),
        TopologySource::File { path } => load_topology(path),
    }
}

/// Reads an edge-list file (`u v` per line, `#` comments).
pub fn load_topology(path: impl AsRef<Path>) -> Result<Topology> {
    Topology::load(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub topology: TopologySource,
    /// Number of data objects.
    pub data: usize,
    pub computations: usize,
    /// Number of task draws; duplicates are merged.
    pub tasks: usize,
    pub link_mean: f64,
    pub cpu_mean: f64,
    pub cache_mean: f64,
    pub zipf: f64,
    pub rate_range: (f64, f64),
    pub data_size: f64,
    pub result_size: f64,
    pub workload: f64,
    /// Global multiplier on every task rate, applied after the utilization
    /// target so that sweeps move the load away from the calibrated point.
    #[serde(default = "one")]
    pub rate_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_utilization: Option<f64>,
    /// Multiplier on every linear cache price.
    #[serde(default = "one")]
    pub cache_scale: f64,
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

/// Randomness of one scenario, split into independent streams.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Everything [`sample_workload`] draws for a topology.
#[derive(Debug, Clone)]
pub struct Workloads {
    pub catalogs: Catalogs,
    pub tasks: TaskSet,
    pub costs: CostModel,
    pub sizes: SizeModel,
}

/// Catalogs, tasks, sizes and costs for `topology`: requesters uniform,
/// computations and data Zipf-distributed, uniform rates, one uniformly
/// placed server per data object and costs uniform around their means.
pub fn sample_workload(spec: &ScenarioSpec, topology: &Topology, seed: u64) -> Result<Workloads> {
    if spec.data == 0 || spec.computations == 0 {
        return Err(Error::InvalidParams("catalogs must be non-empty".into()));
    }
    let (lo, hi) = spec.rate_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::InvalidParams(format!("bad rate range ({lo}, {hi})")));
    }
    let n = topology.node_count();
    let mut rng = stream(seed, 1);
    let zipf = |size: usize| {
        Zipf::new(size as f64, spec.zipf).map_err(|e| Error::InvalidParams(format!("zipf: {e}")))
    };
    let (zm, zk) = (zipf(spec.computations)?, zipf(spec.data)?);
    let servers = (0..spec.data).map(|_| vec![rng.random_range(0..n)]).collect();
    let draws: Vec<Task> = (0..spec.tasks)
        .map(|_| Task {
            requester: rng.random_range(0..n),
            computation: zm.sample(&mut rng) as usize - 1,
            data: zk.sample(&mut rng) as usize - 1,
            rate: if hi > lo { rng.random_range(lo..hi) } else { lo },
        })
        .collect();
    let tasks = TaskSet::collapsed(draws);

    let mut rng = stream(seed, 2);
    let mut around = |mean: f64| rng.random_range(0.5 * mean..=1.5 * mean);
    let costs = CostModel {
        link: (0..topology.link_count()).map(|_| CostFn::queueing(around(spec.link_mean))).collect(),
        compute: (0..n).map(|_| CostFn::queueing(around(spec.cpu_mean))).collect(),
        cache: (0..n).map(|_| CostFn::linear(around(spec.cache_mean))).collect(),
    };
    let catalogs = Catalogs { computations: spec.computations, data: spec.data, servers };
    let sizes = SizeModel {
        data: vec![spec.data_size; spec.data],
        result: vec![spec.result_size; spec.data * spec.computations],
        workload: Workload::Uniform(spec.workload),
    };
    Ok(Workloads { catalogs, tasks, costs, sizes })
}

/// Largest utilization (load / capacity) of any link or CPU.
pub fn max_utilization(net: &Network, s: &crate::model::Strategy) -> Result<f64> {
    let st = solve_traffic(net, s)?;
    let links = st.link_flow.iter().zip(&net.costs.link).map(|(f, c)| f / c.capacity());
    let cpus = st.workload.iter().zip(&net.costs.compute).map(|(g, c)| g / c.capacity());
    Ok(links.chain(cpus).fold(0.0, f64::max))
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs always serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Expands the spec into a network instance.
    pub fn build(&self) -> Result<Network> {
        let topology = gen_topology(&self.topology, self.seed)?;
        let w = sample_workload(self, &topology, self.seed)?;
        let net = Network::new(topology, w.catalogs, w.tasks, w.sizes, w.costs)?;
        let f = match self.target_utilization {
            None => 1.0,
            Some(u) => {
                if !(u > 0.0 && u < 1.0) {
                    return Err(Error::InvalidParams(format!("target utilization {u} not in (0, 1)")));
                }
                match max_utilization(&net, &sep_route(&net)?)? {
                    0.0 => 1.0,
                    peak => u / peak,
                }
            }
        };
        if f == 1.0 && self.cache_scale == 1.0 && self.rate_scale == 1.0 {
            return Ok(net);
        }
        let mut costs = net.costs.clone();
        for b in &mut costs.cache {
            if let CostFn::Linear { param } = b {
                *param *= f * self.cache_scale;
            }
        }
        Network::new(net.topology, net.catalogs, net.tasks.scaled(f * self.rate_scale), net.sizes, costs)
    }

    /// Same scenario with another seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        ScenarioSpec { seed, ..self.clone() }
    }
}

/// Default to a moderately loaded network: the busiest element under the
/// starting SEP routing runs at 40% of capacity.
const PRESET_UTILIZATION: f64 = 0.4;

/// Cache prices of the presets relative to the rate-scaled means. At this
/// level the optimum caches a minority of the items, so caching competes
/// with routing and offloading instead of absorbing all traffic.
const PRESET_CACHE_SCALE: f64 = 70.0;

#[allow(clippy::too_many_arguments)]
fn preset(
    name: &str,
    topology: TopologySource,
    data: usize,
    computations: usize,
    tasks: usize,
    d: f64,
    c: f64,
    b: f64,
) -> ScenarioSpec {
    ScenarioSpec {
        name: name.into(),
        topology,
        data,
        computations,
        tasks,
        link_mean: d,
        cpu_mean: c,
        cache_mean: b,
        zipf: 1.0,
        rate_range: (1.0, 5.0),
        data_size: 0.2,
        result_size: 0.1,
        workload: 1.0,
        rate_scale: 1.0,
        target_utilization: Some(PRESET_UTILIZATION),
        cache_scale: PRESET_CACHE_SCALE,
        seed: 1,
    }
}

/// Names accepted by [`preset_spec`].
pub const PRESETS: [&str; 9] = ["er", "grid-100", "tree", "fog", "geant", "lhc", "dtelekom", "sw", "grid-25"];

/// Built-in scenario presets modelled on the standard evaluation suite.
pub fn preset_spec(name: &str) -> Option<ScenarioSpec> {
    use TopologySource as T;
    let builtin = |n: &str| T::Builtin { name: n.into() };
    Some(match name {
        "er" => preset(name, T::Er { n: 50, p: 0.07 }, 100, 20, 200, 5.0, 10.0, 20.0),
        "grid-100" => preset(name, T::Grid { rows: 10, cols: 10 }, 100, 20, 400, 5.0, 15.0, 30.0),
        "tree" => preset(name, T::Tree { depth: 6 }, 100, 20, 100, 5.0, 10.0, 20.0),
        "fog" => preset(name, T::Fog { arity: 3, depth: 4 }, 100, 20, 150, 3.0, 10.0, 30.0),
        "geant" => preset(name, builtin("geant"), 50, 10, 100, 3.0, 5.0, 10.0),
        "lhc" => preset(name, builtin("lhc"), 50, 10, 100, 3.0, 10.0, 15.0),
        "dtelekom" => preset(name, builtin("dtelekom"), 200, 30, 400, 5.0, 15.0, 20.0),
        "sw" => preset(name, T::Sw { n: 120, k: 4, p: 0.43 }, 200, 30, 400, 5.0, 15.0, 20.0),
        "grid-25" => preset(name, T::Grid { rows: 5, cols: 5 }, 50, 10, 50, 3.0, 5.0, 10.0),
        _ => return None,
    })
}
