//! Topology generators.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{NodeId, Topology};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

fn connected(n: usize, edges: &[(NodeId, NodeId)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    let mut parts = n;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            parts -= 1;
        }
    }
    parts == 1
}

/// Random spanning tree: each node in a random order attaches to a uniformly
/// chosen earlier node.
fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Vec<(NodeId, NodeId)> {
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(rng);
    (1..n).map(|t| (order[t], order[rng.random_range(0..t)])).collect()
}

/// Erdős–Rényi `G(n, p)`, resampled up to 100 times until connected, then
/// augmented with the missing edges of a random spanning tree.
pub fn erdos_renyi<R: Rng>(rng: &mut R, n: usize, p: f64) -> Result<Topology> {
    if n < 2 || !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("er needs n >= 2 and p in [0, 1], got n={n}, p={p}")));
    }
    let mut edges = Vec::new();
    for _ in 0..100 {
        edges.clear();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        if connected(n, &edges) {
            return Topology::from_edges(n, &edges);
        }
    }
    edges.extend(random_tree(rng, n));
    Topology::from_edges(n, &edges)
}

/// `rows x cols` 4-neighbour grid.
pub fn grid(rows: usize, cols: usize) -> Result<Topology> {
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(invalid(format!("grid {rows}x{cols} is too small")));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Topology::from_edges(rows * cols, &edges)
}

/// Full `arity`-ary tree with `depth` levels, nodes numbered breadth-first.
fn full_tree(arity: usize, depth: usize) -> (usize, Vec<(NodeId, NodeId)>, Vec<Vec<NodeId>>) {
    let mut edges = Vec::new();
    let mut children = Vec::new();
    let mut level = vec![0];
    let mut n = 1;
    for _ in 1..depth {
        let mut next = Vec::new();
        for &p in &level {
            let kids: Vec<NodeId> = (n..n + arity).collect();
            n += arity;
            for &k in &kids {
                edges.push((p, k));
            }
            next.extend(&kids);
            children.push(kids);
        }
        level = next;
    }
    (n, edges, children)
}

/// Full binary tree with `depth` levels (`2^depth - 1` nodes).
pub fn binary_tree(depth: usize) -> Result<Topology> {
    if depth < 2 {
        return Err(invalid("tree depth must be at least 2"));
    }
    let (n, edges, _) = full_tree(2, depth);
    Topology::from_edges(n, &edges)
}

/// Full `arity`-ary tree whose sibling groups are additionally chained.
pub fn fog(arity: usize, depth: usize) -> Result<Topology> {
    if arity < 1 || depth < 2 {
        return Err(invalid("fog needs arity >= 1 and depth >= 2"));
    }
    let (n, mut edges, children) = full_tree(arity, depth);
    for kids in children {
        edges.extend(kids.windows(2).map(|w| (w[0], w[1])));
    }
    Topology::from_edges(n, &edges)
}

/// Ring where each node links to its `k / 2` nearest neighbours on each
/// side, plus, for every lattice edge, a shortcut between uniformly random
/// endpoints with probability `p`.
pub fn small_world<R: Rng>(rng: &mut R, n: usize, k: usize, p: f64) -> Result<Topology> {
    if n < 3 || k < 2 || k % 2 != 0 || k >= n || !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("sw needs n >= 3, even 2 <= k < n and p in [0, 1], got ({n}, {k}, {p})")));
    }
    let mut seen = std::collections::BTreeSet::new();
    for u in 0..n {
        for d in 1..=k / 2 {
            let v = (u + d) % n;
            seen.insert((u.min(v), u.max(v)));
        }
    }
    let lattice = seen.len();
    for _ in 0..lattice {
        if rng.random_bool(p) {
            loop {
                let u = rng.random_range(0..n);
                let v = rng.random_range(0..n);
                if u != v && seen.insert((u.min(v), u.max(v))) {
                    break;
                }
            }
        }
    }
    let edges: Vec<_> = seen.into_iter().collect();
    Topology::from_edges(n, &edges)
}

/// Connected graph with exactly `m` undirected edges: a random spanning
/// tree plus uniformly random extra pairs.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, m: usize) -> Result<Topology> {
    if n < 2 || m + 1 < n || m > n * (n - 1) / 2 {
        return Err(invalid(format!("cannot build a connected graph with {n} nodes and {m} edges")));
    }
    let mut seen: std::collections::BTreeSet<(usize, usize)> =
        random_tree(rng, n).into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
    while seen.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            seen.insert((u.min(v), u.max(v)));
        }
    }
    let edges: Vec<_> = seen.into_iter().collect();
    Topology::from_edges(n, &edges)
}
