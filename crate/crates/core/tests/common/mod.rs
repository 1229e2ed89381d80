//! Oracles shared by the integration tests. Nothing here calls the solver
//! internals it is checked against.

#![allow(dead_code)]

use netplace::model::{Catalogs, CostFn, CostModel, SizeModel, Task, TaskSet, Topology};
use netplace::{Network, Strategy};

/// Node traffic by explicit path enumeration: every interest generated at
/// `v` reaches `i` with the product of the forwarding fractions along each
/// path.
pub struct Enumerated {
    pub ci_t: Vec<f64>,
    pub di_t: Vec<f64>,
    /// Response bits per link, indexed like `Topology` links.
    pub link_flow: Vec<f64>,
    pub workload: Vec<f64>,
}

fn walk(topo: &Topology, phi: impl Fn(usize, usize) -> f64 + Copy, v: usize, mass: f64, t: &mut [f64], depth: usize) {
    assert!(depth <= topo.node_count(), "path longer than the node count");
    t[v] += mass;
    for (q, &j) in topo.neighbors(v).iter().enumerate() {
        let p = phi(v, q);
        if p > 0.0 {
            walk(topo, phi, j, mass * p, t, depth + 1);
        }
    }
}

pub fn enumerate_traffic(net: &Network, s: &Strategy) -> Enumerated {
    let n = net.n();
    let topo = &net.topology;
    let mut ci_t = vec![0.0; net.n_ci() * n];
    let mut di_t = vec![0.0; net.n_di() * n];
    let mut link_flow = vec![0.0; topo.link_count()];
    let mut workload = vec![0.0; n];
    let mut injected = vec![0.0; net.n_di() * n];
    for c in 0..net.n_ci() {
        let phi = |i: usize, q: usize| s.ci_phi[net.ci_row(c, i).start + 1 + q];
        let t = &mut ci_t[c * n..(c + 1) * n];
        for v in 0..n {
            let r = net.rates[c * n + v];
            if r > 0.0 {
                walk(topo, phi, v, r, t, 0);
            }
        }
        for i in 0..n {
            let g = s.ci_phi[net.ci_row(c, i).start] * t[i];
            workload[i] += net.workload[c * n + i] * g;
            injected[net.ci_to_di[c] * n + i] += g;
            for (q, &j) in topo.neighbors(i).iter().enumerate() {
                // Results travel j -> i for interests sent i -> j.
                link_flow[topo.link(j, i).unwrap()] += net.result_size[c] * t[i] * phi(i, q);
            }
        }
    }
    for k in 0..net.n_di() {
        let phi = |i: usize, q: usize| s.di_phi[net.di_row(k, i).start + q];
        let t = &mut di_t[k * n..(k + 1) * n];
        for v in 0..n {
            let r = injected[k * n + v];
            if r > 0.0 {
                walk(topo, phi, v, r, t, 0);
            }
        }
        for i in 0..n {
            for (q, &j) in topo.neighbors(i).iter().enumerate() {
                link_flow[topo.link(j, i).unwrap()] += net.data_size[k] * t[i] * phi(i, q);
            }
        }
    }
    Enumerated { ci_t, di_t, link_flow, workload }
}

/// Central difference of `f` at `x` with step `h`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// All vectors of `parts` non-negative multiples of `1 / steps` summing to 1.
pub fn simplex_grid(parts: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(parts: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(parts - 1, left - k, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, steps, steps, &mut Vec::new(), &mut out);
    out
}

/// Where one decision variable of a brute-force row lives in a strategy.
#[derive(Debug, Clone, Copy)]
pub enum Var {
    CiPhi(usize),
    CiY(usize),
    DiPhi(usize),
    DiY(usize),
}

fn set(s: &mut Strategy, v: Var, x: f64) {
    match v {
        Var::CiPhi(i) => s.ci_phi[i] = x,
        Var::CiY(i) => s.ci_y[i] = x,
        Var::DiPhi(i) => s.di_phi[i] = x,
        Var::DiY(i) => s.di_y[i] = x,
    }
}

/// Exhaustive search over the product of per-row simplex grids. Each row
/// lists the variables that share its unit mass; every other entry of
/// `base` stays fixed. Points where `cost` fails are skipped. Returns the
/// best point and its cost.
pub fn grid_minimum(
    base: &Strategy,
    rows: &[Vec<Var>],
    steps: usize,
    cost: impl Fn(&Strategy) -> Option<f64>,
) -> (Strategy, f64, usize) {
    let grids: Vec<_> = rows.iter().map(|r| simplex_grid(r.len(), steps)).collect();
    let mut best = (base.clone(), f64::INFINITY);
    let mut s = base.clone();
    let mut idx = vec![0usize; rows.len()];
    let mut visited = 0;
    'outer: loop {
        for (r, row) in rows.iter().enumerate() {
            for (v, &x) in row.iter().zip(&grids[r][idx[r]]) {
                set(&mut s, *v, x);
            }
        }
        visited += 1;
        if let Some(t) = cost(&s) {
            if t < best.1 {
                best = (s.clone(), t);
            }
        }
        for r in 0..rows.len() {
            idx[r] += 1;
            if idx[r] < grids[r].len() {
                continue 'outer;
            }
            idx[r] = 0;
        }
        break;
    }
    (best.0, best.1, visited)
}

/// Brute-force maximum of `cost` over the forwarding-only points of the
/// same grid (every row's cache share zero).
pub fn grid_maximum_without_caching(
    base: &Strategy,
    rows: &[Vec<Var>],
    steps: usize,
    cost: impl Fn(&Strategy) -> Option<f64>,
) -> f64 {
    let stripped: Vec<Vec<Var>> = rows
        .iter()
        .map(|r| r.iter().copied().filter(|v| !matches!(v, Var::CiY(_) | Var::DiY(_))).collect())
        .collect();
    let neg = grid_minimum(base, &stripped, steps, |s| cost(s).map(|t| -t));
    -neg.1
}

/// Two nodes `a = 0`, `s = 1`, data at `s`. `requesters` lists the nodes
/// asking for the single computation.
pub fn two_node(requesters: &[(usize, f64)], link: f64, cpu: [f64; 2], cache: [f64; 2]) -> Network {
    let topology = Topology::from_edges(2, &[(0, 1)]).unwrap();
    let catalogs = Catalogs { computations: 1, data: 1, servers: vec![vec![1]] };
    let tasks = TaskSet {
        tasks: requesters.iter().map(|&(i, rate)| Task { requester: i, computation: 0, data: 0, rate }).collect(),
    };
    let sizes = SizeModel::uniform(&catalogs, 0.3, 0.1, 1.0);
    let costs = CostModel {
        link: vec![CostFn::queueing(link); 2],
        compute: cpu.iter().map(|&c| CostFn::queueing(c)).collect(),
        cache: cache.iter().map(|&b| CostFn::linear(b)).collect(),
    };
    Network::new(topology, catalogs, tasks, sizes, costs).unwrap()
}

/// Chain `a - b - s` (0, 1, 2) with one task at `a` for data at `s`.
pub fn three_chain(rate: f64, link: f64, cpu: [f64; 3], cache: [f64; 3]) -> Network {
    let topology = Topology::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
    let catalogs = Catalogs { computations: 1, data: 1, servers: vec![vec![2]] };
    let tasks = TaskSet { tasks: vec![Task { requester: 0, computation: 0, data: 0, rate }] };
    let sizes = SizeModel::uniform(&catalogs, 0.3, 0.1, 1.0);
    let costs = CostModel {
        link: vec![CostFn::queueing(link); 4],
        compute: cpu.iter().map(|&c| CostFn::queueing(c)).collect(),
        cache: cache.iter().map(|&b| CostFn::linear(b)).collect(),
    };
    Network::new(topology, catalogs, tasks, sizes, costs).unwrap()
}

/// Every non-server row of `net` with all its forwarding slots and its
/// cache share.
pub fn all_rows(net: &Network) -> Vec<Vec<Var>> {
    let n = net.n();
    let mut rows = Vec::new();
    for c in 0..net.n_ci() {
        for i in 0..n {
            let mut r: Vec<Var> = net.ci_row(c, i).map(Var::CiPhi).collect();
            r.push(Var::CiY(c * n + i));
            rows.push(r);
        }
    }
    for k in 0..net.n_di() {
        for i in 0..n {
            if net.server(k, i) {
                continue;
            }
            let mut r: Vec<Var> = net.di_row(k, i).map(Var::DiPhi).collect();
            r.push(Var::DiY(k * n + i));
            rows.push(r);
        }
    }
    rows
}

/// Relative error with an absolute floor.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
