use std::collections::VecDeque;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type LinkId = usize;

/// Directed graph with symmetric link closure, stored as a CSR adjacency.
///
/// Links are numbered by tail node and then by ascending head node, so the
/// out-links of node `i` occupy the contiguous range [`Topology::out_links`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TopologyRepr", into = "TopologyRepr")]
pub struct Topology {
    n: usize,
    start: Vec<usize>,
    heads: Vec<NodeId>,
    tails: Vec<NodeId>,
    reverse: Vec<LinkId>,
}

#[derive(Serialize, Deserialize)]
struct TopologyRepr {
    nodes: usize,
    edges: Vec<(NodeId, NodeId)>,
}

impl TryFrom<TopologyRepr> for Topology {
    type Error = Error;
    fn try_from(r: TopologyRepr) -> Result<Self> {
        Topology::from_edges(r.nodes, &r.edges)
    }
}

impl From<Topology> for TopologyRepr {
    fn from(t: Topology) -> Self {
        TopologyRepr { nodes: t.n, edges: t.undirected_edges() }
    }
}

impl Topology {
    /// Builds a topology from (possibly one-directional) edges, closing them
    /// symmetrically. Rejects self-loops, out-of-range ids and disconnected
    /// graphs.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTopology("no nodes".into()));
        }
        let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidTopology(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidTopology(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut heads = Vec::new();
        let mut tails = Vec::new();
        start.push(0);
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            for &j in list.iter() {
                heads.push(j);
                tails.push(i);
            }
            start.push(heads.len());
        }
        let mut topo = Topology { n, start, heads, tails, reverse: Vec::new() };
        topo.reverse = (0..topo.heads.len())
            .map(|l| topo.link(topo.heads[l], topo.tails[l]).expect("symmetric closure"))
            .collect();
        if !topo.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(topo)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of directed links.
    pub fn link_count(&self) -> usize {
        self.heads.len()
    }

    pub fn nodes(&self) -> Range<NodeId> {
        0..self.n
    }

    pub fn neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.heads[self.start[i]..self.start[i + 1]]
    }

    pub fn degree(&self, i: NodeId) -> usize {
        self.start[i + 1] - self.start[i]
    }

    pub fn out_links(&self, i: NodeId) -> Range<LinkId> {
        self.start[i]..self.start[i + 1]
    }

    /// Offset of node `i`'s first out-link.
    pub fn link_offset(&self, i: NodeId) -> usize {
        self.start[i]
    }

    pub fn head(&self, l: LinkId) -> NodeId {
        self.heads[l]
    }

    pub fn tail(&self, l: LinkId) -> NodeId {
        self.tails[l]
    }

    /// The link carrying traffic in the opposite direction.
    pub fn reverse(&self, l: LinkId) -> LinkId {
        self.reverse[l]
    }

    pub fn link(&self, i: NodeId, j: NodeId) -> Option<LinkId> {
        if i >= self.n {
            return None;
        }
        self.neighbors(i).binary_search(&j).ok().map(|q| self.start[i] + q)
    }

    /// Each undirected edge once, as `(min, max)`.
    pub fn undirected_edges(&self) -> Vec<(NodeId, NodeId)> {
        (0..self.link_count())
            .filter(|&l| self.tails[l] < self.heads[l])
            .map(|l| (self.tails[l], self.heads[l]))
            .collect()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Parses a whitespace-separated `u v` edge list. Blank lines and lines
    /// starting with `#` are ignored. Node ids are arbitrary non-negative
    /// integers and are relabelled to `0..n` in ascending order.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut next = |what: &str| -> Result<u64> {
                let tok = it.next().ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    msg: format!("missing {what} node id"),
                })?;
                tok.parse::<u64>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad node id {tok:?}: {e}"),
                })
            };
            let u = next("first")?;
            let v = next("second")?;
            if it.next().is_some() {
                return Err(Error::Parse { line: lineno + 1, msg: "expected exactly two ids".into() });
            }
            raw.push((u, v));
        }
        if raw.is_empty() {
            return Err(Error::Parse { line: 0, msg: "edge list is empty".into() });
        }
        let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
        ids.sort_unstable();
        ids.dedup();
        let index = |x: u64| ids.binary_search(&x).expect("collected id");
        let edges: Vec<_> = raw.iter().map(|&(u, v)| (index(u), index(v))).collect();
        Topology::from_edges(ids.len(), &edges)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_edge_list(&text)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.undirected_edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Hop distances from `src` (breadth-first).
    pub fn hop_distances(&self, src: NodeId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_adds_reverse_links() {
        let t = Topology::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(t.link_count(), 4);
        for l in 0..t.link_count() {
            let r = t.reverse(l);
            assert_eq!(t.tail(r), t.head(l));
            assert_eq!(t.head(r), t.tail(l));
        }
        assert_eq!(t.neighbors(1), &[0, 2]);
    }

    #[test]
    fn rejects_self_loop_and_disconnected() {
        assert!(matches!(Topology::from_edges(2, &[(0, 0)]), Err(Error::InvalidTopology(_))));
        assert!(matches!(Topology::from_edges(3, &[(0, 1)]), Err(Error::Disconnected)));
    }

    #[test]
    fn parse_relabels_and_closes() {
        let t = Topology::parse_edge_list("# comment\n10 20\n20 30\n").unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.link_count(), 4);
        assert!(t.link(1, 0).is_some());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Topology::parse_edge_list(""), Err(Error::Parse { .. })));
        assert!(matches!(Topology::parse_edge_list("1 x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Topology::parse_edge_list("1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn serde_round_trip() {
        let t = Topology::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: Topology = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
    }
}
