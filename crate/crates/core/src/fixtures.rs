//! Small hand-checkable networks and random loop-free instances, shared by
//! tests, benches and the CLI's self-checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{
    solve_traffic, Catalogs, CostFn, CostModel, Network, NodeId, SizeModel, Strategy, Task, TaskSet, Topology,
};

/// Parameters of the three-node chain `a - b - s` (nodes 0, 1, 2) with one
/// task requested at `a` for data stored at `s`.
#[derive(Debug, Clone, Copy)]
pub struct ChainParams {
    pub link: f64,
    pub cpu: f64,
    pub cache_price: f64,
    pub data_size: f64,
    pub result_size: f64,
    pub workload: f64,
    pub rate: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams { link: 1.0, cpu: 0.5, cache_price: 1.0, data_size: 0.2, result_size: 0.1, workload: 1.0, rate: 1.0 }
    }
}

pub fn chain(p: ChainParams) -> Network {
    let topology = Topology::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
    let catalogs = Catalogs { computations: 1, data: 1, servers: vec![vec![2]] };
    let tasks = TaskSet { tasks: vec![Task { requester: 0, computation: 0, data: 0, rate: p.rate }] };
    let sizes = SizeModel::uniform(&catalogs, p.data_size, p.result_size, p.workload);
    let costs = CostModel {
        link: vec![CostFn::queueing(p.link); topology.link_count()],
        compute: vec![CostFn::queueing(p.cpu); 3],
        cache: vec![CostFn::linear(p.cache_price); 3],
    };
    Network::new(topology, catalogs, tasks, sizes, costs).unwrap()
}

/// CI `a -> b`, computed at `b`; DI `b -> s`. Rows with no traffic compute
/// locally (CI) or forward toward `s` (DI).
pub fn chain_strategy(net: &Network) -> Strategy {
    let mut s = Strategy::zeros(net);
    let set = |s: &mut Strategy, i: NodeId, j: Option<NodeId>| {
        let row = net.ci_row(0, i);
        match j {
            None => s.ci_phi[row.start] = 1.0,
            Some(j) => {
                let q = net.topology.neighbors(i).binary_search(&j).unwrap();
                s.ci_phi[row.start + 1 + q] = 1.0;
            }
        }
    };
    set(&mut s, 0, Some(1));
    set(&mut s, 1, None);
    set(&mut s, 2, None);
    let di = |s: &mut Strategy, i: NodeId, j: NodeId| {
        let q = net.topology.neighbors(i).binary_search(&j).unwrap();
        s.di_phi[net.di_row(0, i).start + q] = 1.0;
    };
    di(&mut s, 0, 1);
    di(&mut s, 1, 2);
    s
}

/// Random connected graph: a random spanning tree plus each remaining pair
/// with probability `p`.
pub fn random_connected_topology<R: Rng>(rng: &mut R, n: usize, p: f64) -> Topology {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for t in 1..n {
        let parent = perm[rng.random_range(0..t)];
        edges.push((perm[t], parent));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Topology::from_edges(n, &edges).unwrap()
}

/// Random network with `n` nodes and up to `commodities` CI commodities.
///
/// Queueing capacities are sized from a worst-case bound on every link and
/// CPU load (each commodity's rate can cross a link at most once on a
/// loop-free support), so any loop-free strategy stays within the domain.
pub fn random_network<R: Rng>(rng: &mut R, n: usize, commodities: usize) -> Network {
    let topology = random_connected_topology(rng, n, 0.35);
    let data = rng.random_range(1..=commodities.max(1));
    let computations = 2;
    let servers = (0..data).map(|_| vec![rng.random_range(0..n)]).collect();
    let catalogs = Catalogs { computations, data, servers };
    let mut tasks = Vec::new();
    let pairs: Vec<(usize, usize)> = (0..commodities)
        .map(|c| (rng.random_range(0..computations), if c < data { c } else { rng.random_range(0..data) }))
        .collect();
    for &(m, k) in &pairs {
        let requesters = rng.random_range(1..=2.min(n));
        for _ in 0..requesters {
            tasks.push(Task { requester: rng.random_range(0..n), computation: m, data: k, rate: rng.random_range(0.5..2.0) });
        }
    }
    let tasks = TaskSet::collapsed(tasks);
    let sizes = SizeModel {
        data: (0..data).map(|_| rng.random_range(0.1..0.4)).collect(),
        result: (0..data * computations).map(|_| rng.random_range(0.05..0.3)).collect(),
        workload: crate::model::Workload::Uniform(1.0),
    };
    let mut bound_bits = 0.0;
    let mut bound_work = 0.0;
    for t in &tasks.tasks {
        bound_bits += t.rate * (sizes.result[t.computation * data + t.data] + sizes.data[t.data]);
        bound_work += t.rate;
    }
    let links = topology.link_count();
    let costs = CostModel {
        link: (0..links).map(|_| CostFn::queueing(rng.random_range(0.3..0.9) / bound_bits)).collect(),
        compute: (0..n).map(|_| CostFn::queueing(rng.random_range(0.3..0.9) / bound_work)).collect(),
        cache: (0..n).map(|_| CostFn::linear(rng.random_range(0.5..3.0))).collect(),
    };
    Network::new(topology, catalogs, tasks, sizes, costs).unwrap()
}

/// Random feasible strategy whose support only uses arcs from higher to
/// lower `rank`, hence loop-free. `cache_prob` is the chance a row gets a
/// positive caching share.
pub fn random_dag_strategy<R: Rng>(rng: &mut R, net: &Network, rank: &[usize], cache_prob: f64) -> Strategy {
    let n = net.n();
    let topo = &net.topology;
    let mut s = Strategy::zeros(net);
    for c in 0..net.n_ci() {
        for i in 0..n {
            let row = net.ci_row(c, i);
            let mut w = vec![0.0; row.len() + 1];
            w[0] = if rng.random_bool(0.6) { rng.random::<f64>() } else { 0.0 };
            for (q, &j) in topo.neighbors(i).iter().enumerate() {
                if rank[j] < rank[i] && rng.random_bool(0.6) {
                    w[1 + q] = rng.random();
                }
            }
            if rng.random_bool(cache_prob) {
                w[row.len()] = rng.random();
            }
            if w.iter().all(|&x| x == 0.0) {
                w[0] = 1.0;
            }
            let total: f64 = w.iter().sum();
            for (q, x) in w[..row.len()].iter().enumerate() {
                s.ci_phi[row.start + q] = x / total;
            }
            s.ci_y[c * n + i] = w[row.len()] / total;
        }
    }
    for k in 0..net.n_di() {
        for i in 0..n {
            if net.server(k, i) {
                continue;
            }
            let row = net.di_row(k, i);
            let mut w = vec![0.0; row.len() + 1];
            for (q, &j) in topo.neighbors(i).iter().enumerate() {
                if rank[j] < rank[i] && rng.random_bool(0.7) {
                    w[q] = rng.random();
                }
            }
            if rng.random_bool(cache_prob) || w.iter().all(|&x| x == 0.0) {
                w[row.len()] = rng.random::<f64>() + 1e-3;
            }
            let total: f64 = w.iter().sum();
            for (q, x) in w[..row.len()].iter().enumerate() {
                s.di_phi[row.start + q] = x / total;
            }
            s.di_y[k * n + i] = w[row.len()] / total;
        }
    }
    debug_assert!(solve_traffic(net, &s).is_ok());
    s
}

/// A uniformly random node ranking.
pub fn random_rank<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(rng);
    rank
}
