//! Blocked next-hop sets that keep every commodity's routing acyclic.

use crate::error::Result;
use crate::model::{Network, NodeId};
use crate::sep::ExtendedPaths;

/// Forbidden next hops, stored as flags in the strategy's row layout.
///
/// The local-computation slot of a CI row is never blocked.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedSets {
    pub ci: Vec<bool>,
    pub di: Vec<bool>,
}

/// How blocked sets are maintained across slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockedPolicy {
    #[default]
    Static,
    /// Recomputed from the current marginals every slot. Not implemented;
    /// currently behaves as `Static`.
    Dynamic,
}

impl BlockedSets {
    /// Nothing blocked.
    pub fn none(net: &Network) -> Self {
        BlockedSets { ci: vec![false; net.n_ci() * net.ci_block()], di: vec![false; net.n_di() * net.links()] }
    }

    /// Static sets from extended-shortest-path ranks: `j` is blocked at `i`
    /// iff `rank(j) >= rank(i)`, so allowed arcs strictly decrease rank.
    /// Computation ranks use the extended cost-to-go through a compute site,
    /// data ranks the distance to the servers.
    pub fn from_ranks(net: &Network, paths: &ExtendedPaths) -> Self {
        let mut b = BlockedSets::none(net);
        let topo = &net.topology;
        for c in 0..net.n_ci() {
            let rank = &paths.ci[c].rank;
            for i in topo.nodes() {
                let start = net.ci_row(c, i).start + 1;
                for (q, &j) in topo.neighbors(i).iter().enumerate() {
                    b.ci[start + q] = rank[j] >= rank[i];
                }
            }
        }
        for k in 0..net.n_di() {
            let rank = &paths.di[k].rank;
            for i in topo.nodes() {
                let start = net.di_row(k, i).start;
                for (q, &j) in topo.neighbors(i).iter().enumerate() {
                    b.di[start + q] = rank[j] >= rank[i];
                }
            }
        }
        b
    }

    /// Blocks arcs on a failed `(i, j)` link in every commodity, on top of
    /// the existing sets.
    pub fn block_link(&mut self, net: &Network, i: NodeId, j: NodeId) {
        let Ok(q) = net.topology.neighbors(i).binary_search(&j) else { return };
        for c in 0..net.n_ci() {
            self.ci[net.ci_row(c, i).start + 1 + q] = true;
        }
        for k in 0..net.n_di() {
            self.di[net.di_row(k, i).start + q] = true;
        }
    }

    /// Whether slot `q` (0 = local, `1 + nbr index` otherwise) of CI row
    /// `(c, i)` is blocked.
    pub fn ci_blocked(&self, net: &Network, c: usize, i: NodeId, q: usize) -> bool {
        self.ci[net.ci_row(c, i).start + q]
    }

    pub fn di_blocked(&self, net: &Network, k: usize, i: NodeId, q: usize) -> bool {
        self.di[net.di_row(k, i).start + q]
    }
}

/// [`BlockedSets::from_ranks`] on freshly computed extended paths.
///
/// Fails with `Unreachable` if some node cannot reach a server.
pub fn build_static_blocked_sets(net: &Network) -> Result<BlockedSets> {
    Ok(BlockedSets::from_ranks(net, &ExtendedPaths::compute(net, None)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, ChainParams};
    use crate::model::support_order;

    #[test]
    fn chain_blocks_away_from_server() {
        let net = chain(ChainParams::default());
        let b = build_static_blocked_sets(&net).unwrap();
        // DI at b: neighbours are [a, s]; a is farther from s.
        assert!(b.di_blocked(&net, 0, 1, 0));
        assert!(!b.di_blocked(&net, 0, 1, 1));
        assert!(b.di_blocked(&net, 0, 2, 0));
        for i in 0..3 {
            assert!(!b.ci_blocked(&net, 0, i, 0));
        }
    }

    #[test]
    fn allowed_digraphs_are_acyclic() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let net = crate::fixtures::random_network(&mut rng, 8, 3);
            let b = build_static_blocked_sets(&net).unwrap();
            for c in 0..net.n_ci() {
                assert!(support_order(&net.topology, |i, q| !b.ci_blocked(&net, c, i, 1 + q)).is_some());
            }
            for k in 0..net.n_di() {
                assert!(support_order(&net.topology, |i, q| !b.di_blocked(&net, k, i, q)).is_some());
                // Every non-server keeps at least one allowed hop.
                for i in net.topology.nodes() {
                    if !net.server(k, i) {
                        assert!((0..net.topology.degree(i)).any(|q| !b.di_blocked(&net, k, i, q)));
                    }
                }
            }
        }
    }
}
