//! Closed-form marginal costs and the optimality conditions built on them.
//!
//! The marginals are obtained by a two-stage sweep that mirrors the
//! distributed broadcast: data-interest marginals `dT/dt^d` first, in reverse
//! topological order of each DI support, then computation-interest marginals
//! `dT/dt^c`, which read the data stage through the local-computation slot.

use serde::Serialize;

use crate::error::{Commodity, Element, Error, Result};
use crate::gp::BlockedSets;
use crate::model::{ci_order, di_order, Network, NodeId, Slot, Strategy, TrafficState};

/// Derivatives `D'_ij(F_ij)`, `C'_i(G_i)` and `B'_i(Y_i)` at the current load.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementMarginals {
    pub link: Vec<f64>,
    pub cpu: Vec<f64>,
    pub cache: Vec<f64>,
}

impl ElementMarginals {
    /// Exact derivatives at fluid loads; fails at a pole.
    pub fn fluid(net: &Network, st: &TrafficState) -> Result<Self> {
        let topo = &net.topology;
        let link = st
            .link_flow
            .iter()
            .enumerate()
            .map(|(l, &f)| {
                net.costs.link[l].derivative(f).map_err(|p| Error::CapacityExceeded {
                    element: Element::Link(topo.tail(l), topo.head(l)),
                    load: p.load,
                    capacity: p.capacity,
                })
            })
            .collect::<Result<_>>()?;
        let cpu = st
            .workload
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                net.costs.compute[i].derivative(g).map_err(|p| Error::CapacityExceeded {
                    element: Element::Cpu(i),
                    load: p.load,
                    capacity: p.capacity,
                })
            })
            .collect::<Result<_>>()?;
        let cache = st
            .cache
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                net.costs.cache[i].derivative(y).map_err(|p| Error::CapacityExceeded {
                    element: Element::Cache(i),
                    load: p.load,
                    capacity: p.capacity,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ElementMarginals { link, cpu, cache })
    }

    /// Derivatives at measured loads, clamped just below any pole.
    pub fn clamped(net: &Network, link_flow: &[f64], workload: &[f64], cache: &[f64]) -> Self {
        ElementMarginals {
            link: link_flow.iter().zip(&net.costs.link).map(|(&f, d)| d.derivative_clamped(f)).collect(),
            cpu: workload.iter().zip(&net.costs.compute).map(|(&g, c)| c.derivative_clamped(g)).collect(),
            cache: cache.iter().zip(&net.costs.cache).map(|(&y, b)| b.derivative_clamped(y)).collect(),
        }
    }
}

/// Marginal costs of one strategy.
///
/// `delta` vectors use the strategy's row layout (slot 0 of a CI row is the
/// local-computation marginal). `gamma` is `+inf` on rows without traffic
/// and at designated servers. Minima skip blocked next hops.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalState {
    pub elements: ElementMarginals,
    /// `dT/dt^c`, `[c * n + i]`.
    pub ci_dt: Vec<f64>,
    /// `dT/dt^d`, `[k * n + i]`.
    pub di_dt: Vec<f64>,
    pub ci_delta: Vec<f64>,
    pub di_delta: Vec<f64>,
    pub ci_gamma: Vec<f64>,
    pub di_gamma: Vec<f64>,
    pub ci_min: Vec<f64>,
    pub di_min: Vec<f64>,
    /// Direction attaining the minimum; ties go to local computation, then
    /// caching, then the smallest neighbour id. `None` at servers.
    pub ci_argmin: Vec<Option<Slot>>,
    pub di_argmin: Vec<Option<Slot>>,
}

/// Fluid marginals at `s` with traffic `st`.
pub fn broadcast_marginals(
    net: &Network,
    s: &Strategy,
    st: &TrafficState,
    blocked: Option<&BlockedSets>,
) -> Result<MarginalState> {
    let elements = ElementMarginals::fluid(net, st)?;
    marginals_from(net, s, &st.ci_t, &st.di_t, elements, blocked)
}

/// Marginals from arbitrary traffic estimates and element derivatives.
pub fn marginals_from(
    net: &Network,
    s: &Strategy,
    ci_t: &[f64],
    di_t: &[f64],
    elements: ElementMarginals,
    blocked: Option<&BlockedSets>,
) -> Result<MarginalState> {
    let n = net.n();
    let topo = &net.topology;
    let mut ms = MarginalState {
        ci_dt: vec![0.0; net.n_ci() * n],
        di_dt: vec![0.0; net.n_di() * n],
        ci_delta: vec![0.0; s.ci_phi.len()],
        di_delta: vec![0.0; s.di_phi.len()],
        ci_gamma: vec![f64::INFINITY; net.n_ci() * n],
        di_gamma: vec![f64::INFINITY; net.n_di() * n],
        ci_min: vec![0.0; net.n_ci() * n],
        di_min: vec![0.0; net.n_di() * n],
        ci_argmin: vec![None; net.n_ci() * n],
        di_argmin: vec![None; net.n_di() * n],
        elements,
    };
    let el = &ms.elements;

    // Stage 1: data interests.
    for k in 0..net.n_di() {
        let order = di_order(net, s, k)?;
        let ld = net.data_size[k];
        let dt = &mut ms.di_dt[k * n..(k + 1) * n];
        for &u in order.iter().rev() {
            if net.server(k, u) {
                continue;
            }
            let row = net.di_row(k, u);
            let mut acc = 0.0;
            for (q, l) in topo.out_links(u).enumerate() {
                let phi = s.di_phi[row.start + q];
                if phi != 0.0 {
                    acc += phi * (ld * el.link[topo.reverse(l)] + dt[topo.head(l)]);
                }
            }
            dt[u] = acc;
        }
        for u in 0..n {
            let row = net.di_row(k, u);
            for (q, l) in topo.out_links(u).enumerate() {
                ms.di_delta[row.start + q] = ld * el.link[topo.reverse(l)] + ms.di_dt[k * n + topo.head(l)];
            }
            let idx = k * n + u;
            if net.server(k, u) {
                continue;
            }
            if di_t[idx] > 0.0 {
                ms.di_gamma[idx] = ld * el.cache[u] / di_t[idx];
            }
            let mut best = (ms.di_gamma[idx], Slot::Cache);
            for (q, &j) in topo.neighbors(u).iter().enumerate() {
                if blocked.is_some_and(|b| b.di[row.start + q]) {
                    continue;
                }
                let d = ms.di_delta[row.start + q];
                if d < best.0 {
                    best = (d, Slot::Neighbor(j));
                }
            }
            ms.di_min[idx] = best.0;
            ms.di_argmin[idx] = Some(best.1);
        }
    }

    // Stage 2: computation interests.
    for c in 0..net.n_ci() {
        let order = ci_order(net, s, c)?;
        let k = net.ci_to_di[c];
        let lc = net.result_size[c];
        for &u in order.iter().rev() {
            let row = net.ci_row(c, u);
            let mut acc = 0.0;
            let local = s.ci_phi[row.start];
            if local != 0.0 {
                acc += local * (net.workload[c * n + u] * el.cpu[u] + ms.di_dt[k * n + u]);
            }
            for (q, l) in topo.out_links(u).enumerate() {
                let phi = s.ci_phi[row.start + 1 + q];
                if phi != 0.0 {
                    acc += phi * (lc * el.link[topo.reverse(l)] + ms.ci_dt[c * n + topo.head(l)]);
                }
            }
            ms.ci_dt[c * n + u] = acc;
        }
        for u in 0..n {
            let row = net.ci_row(c, u);
            let idx = c * n + u;
            ms.ci_delta[row.start] = net.workload[idx] * el.cpu[u] + ms.di_dt[k * n + u];
            for (q, l) in topo.out_links(u).enumerate() {
                ms.ci_delta[row.start + 1 + q] = lc * el.link[topo.reverse(l)] + ms.ci_dt[c * n + topo.head(l)];
            }
            if ci_t[idx] > 0.0 {
                ms.ci_gamma[idx] = lc * el.cache[u] / ci_t[idx];
            }
            let mut best = (ms.ci_delta[row.start], Slot::Local);
            if ms.ci_gamma[idx] < best.0 {
                best = (ms.ci_gamma[idx], Slot::Cache);
            }
            for (q, &j) in topo.neighbors(u).iter().enumerate() {
                if blocked.is_some_and(|b| b.ci[row.start + 1 + q]) {
                    continue;
                }
                let d = ms.ci_delta[row.start + 1 + q];
                if d < best.0 {
                    best = (d, Slot::Neighbor(j));
                }
            }
            ms.ci_min[idx] = best.0;
            ms.ci_argmin[idx] = Some(best.1);
        }
    }
    Ok(ms)
}

/// Partial derivatives of `T(y, phi)`, with `y` and `phi` treated as
/// independent variables. Same layout as [`Strategy`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gradient {
    pub ci_phi: Vec<f64>,
    pub ci_y: Vec<f64>,
    pub di_phi: Vec<f64>,
    pub di_y: Vec<f64>,
}

/// `dT/dphi = t * delta` and `dT/dy = L * B'(Y)`.
pub fn strategy_gradient(net: &Network, st: &TrafficState, ms: &MarginalState) -> Gradient {
    let n = net.n();
    let mut g = Gradient {
        ci_phi: vec![0.0; ms.ci_delta.len()],
        ci_y: vec![0.0; net.n_ci() * n],
        di_phi: vec![0.0; ms.di_delta.len()],
        di_y: vec![0.0; net.n_di() * n],
    };
    for c in 0..net.n_ci() {
        for i in 0..n {
            let t = st.ci_t[c * n + i];
            for idx in net.ci_row(c, i) {
                g.ci_phi[idx] = t * ms.ci_delta[idx];
            }
            g.ci_y[c * n + i] = net.result_size[c] * ms.elements.cache[i];
        }
    }
    for k in 0..net.n_di() {
        for i in 0..n {
            let t = st.di_t[k * n + i];
            for idx in net.di_row(k, i) {
                g.di_phi[idx] = t * ms.di_delta[idx];
            }
            g.di_y[k * n + i] = net.data_size[k] * ms.elements.cache[i];
        }
    }
    g
}

/// One strategy entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Entry {
    pub commodity: Commodity,
    pub node: NodeId,
    pub slot: Slot,
}

/// Outcome of an optimality-condition check.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConditionReport {
    /// Largest gap between an active entry's marginal and its row minimum.
    pub residual: f64,
    pub worst: Option<Entry>,
    /// Rows excluded because they carry no traffic (the KKT condition) or
    /// because an active cache entry has an infinite modified marginal.
    pub degenerate: Vec<(Commodity, NodeId)>,
}

impl ConditionReport {
    fn record(&mut self, gap: f64, entry: Entry) {
        if gap > self.residual {
            self.residual = gap;
            self.worst = Some(entry);
        }
    }
}

/// Default active-set tolerance for condition checks.
pub const ACTIVE_TOL: f64 = 1e-8;

fn slot_of(net: &Network, i: NodeId, q: usize, ci: bool) -> Slot {
    match (ci, q) {
        (true, 0) => Slot::Local,
        (true, q) => Slot::Neighbor(net.topology.neighbors(i)[q - 1]),
        (false, q) => Slot::Neighbor(net.topology.neighbors(i)[q]),
    }
}

/// KKT residual: per row, the multiplier is the minimum raw partial over the
/// row's forwarding entries and its cache entry; every entry above `tol`
/// must attain it. Rows with zero traffic are listed as degenerate, since
/// their forwarding partials vanish identically.
pub fn check_kkt(
    net: &Network,
    s: &Strategy,
    st: &TrafficState,
    ms: &MarginalState,
    tol: f64,
    blocked: Option<&BlockedSets>,
) -> ConditionReport {
    let n = net.n();
    let g = strategy_gradient(net, st, ms);
    let mut report = ConditionReport::default();
    for c in 0..net.n_ci() {
        for i in 0..n {
            let idx = c * n + i;
            if st.ci_t[idx] <= 0.0 {
                report.degenerate.push((Commodity::Ci(c), i));
                continue;
            }
            let row = net.ci_row(c, i);
            let allowed = |q: usize| !blocked.is_some_and(|b| b.ci[row.start + q]);
            let lambda = row
                .clone()
                .enumerate()
                .filter(|&(q, _)| allowed(q))
                .map(|(_, x)| g.ci_phi[x])
                .fold(g.ci_y[idx], f64::min);
            for (q, x) in row.clone().enumerate() {
                if s.ci_phi[x] > tol {
                    let e = Entry { commodity: Commodity::Ci(c), node: i, slot: slot_of(net, i, q, true) };
                    report.record(g.ci_phi[x] - lambda, e);
                }
            }
            if s.ci_y[idx] > tol {
                report.record(g.ci_y[idx] - lambda, Entry { commodity: Commodity::Ci(c), node: i, slot: Slot::Cache });
            }
        }
    }
    for k in 0..net.n_di() {
        for i in 0..n {
            let idx = k * n + i;
            if net.server(k, i) {
                continue;
            }
            if st.di_t[idx] <= 0.0 {
                report.degenerate.push((Commodity::Di(k), i));
                continue;
            }
            let row = net.di_row(k, i);
            let allowed = |q: usize| !blocked.is_some_and(|b| b.di[row.start + q]);
            let lambda = row
                .clone()
                .enumerate()
                .filter(|&(q, _)| allowed(q))
                .map(|(_, x)| g.di_phi[x])
                .fold(g.di_y[idx], f64::min);
            for (q, x) in row.clone().enumerate() {
                if s.di_phi[x] > tol {
                    let e = Entry { commodity: Commodity::Di(k), node: i, slot: slot_of(net, i, q, false) };
                    report.record(g.di_phi[x] - lambda, e);
                }
            }
            if s.di_y[idx] > tol {
                report.record(g.di_y[idx] - lambda, Entry { commodity: Commodity::Di(k), node: i, slot: Slot::Cache });
            }
        }
    }
    report
}

/// Residual of the modified condition: every forwarding entry above `tol`
/// must attain its row's minimum modified marginal, and so must the cache
/// entry when it is above `tol`. Infinite cache marginals are not scored
/// and their rows are listed as degenerate. Blocked hops are excluded from
/// the minima (see [`marginals_from`]) but still scored when active.
pub fn check_modified_condition(net: &Network, s: &Strategy, ms: &MarginalState, tol: f64) -> ConditionReport {
    let n = net.n();
    let mut report = ConditionReport::default();
    for c in 0..net.n_ci() {
        for i in 0..n {
            let idx = c * n + i;
            let min = ms.ci_min[idx];
            for (q, x) in net.ci_row(c, i).enumerate() {
                if s.ci_phi[x] > tol {
                    let e = Entry { commodity: Commodity::Ci(c), node: i, slot: slot_of(net, i, q, true) };
                    report.record(ms.ci_delta[x] - min, e);
                }
            }
            if s.ci_y[idx] > tol {
                if ms.ci_gamma[idx].is_finite() {
                    let e = Entry { commodity: Commodity::Ci(c), node: i, slot: Slot::Cache };
                    report.record(ms.ci_gamma[idx] - min, e);
                } else {
                    report.degenerate.push((Commodity::Ci(c), i));
                }
            }
        }
    }
    for k in 0..net.n_di() {
        for i in 0..n {
            if net.server(k, i) {
                continue;
            }
            let idx = k * n + i;
            let min = ms.di_min[idx];
            for (q, x) in net.di_row(k, i).enumerate() {
                if s.di_phi[x] > tol {
                    let e = Entry { commodity: Commodity::Di(k), node: i, slot: slot_of(net, i, q, false) };
                    report.record(ms.di_delta[x] - min, e);
                }
            }
            if s.di_y[idx] > tol {
                if ms.di_gamma[idx].is_finite() {
                    let e = Entry { commodity: Commodity::Di(k), node: i, slot: Slot::Cache };
                    report.record(ms.di_gamma[idx] - min, e);
                } else {
                    report.degenerate.push((Commodity::Di(k), i));
                }
            }
        }
    }
    report
}

/// Right-hand side of the bounded-gap inequality
/// `T(ref) - T(s) >= sum delta_min * (y - y_ref) * (t_ref - t)`, with the
/// minima taken from `ms` computed at `s`.
pub fn bounded_gap_rhs(
    net: &Network,
    s: &Strategy,
    st: &TrafficState,
    ms: &MarginalState,
    reference: &Strategy,
    st_ref: &TrafficState,
) -> f64 {
    let mut rhs = 0.0;
    for idx in 0..s.di_y.len() {
        if net.is_server[idx] {
            continue;
        }
        let min = ms.di_min[idx];
        let dy = s.di_y[idx] - reference.di_y[idx];
        if dy != 0.0 {
            rhs += min * dy * (st_ref.di_t[idx] - st.di_t[idx]);
        }
    }
    for idx in 0..s.ci_y.len() {
        let dy = s.ci_y[idx] - reference.ci_y[idx];
        if dy != 0.0 {
            rhs += ms.ci_min[idx] * dy * (st_ref.ci_t[idx] - st.ci_t[idx]);
        }
    }
    rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, chain_strategy, random_dag_strategy, random_network, random_rank, ChainParams};
    use crate::model::{evaluate, solve_traffic, total_cost};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn marg(net: &Network, s: &Strategy) -> (TrafficState, MarginalState) {
        let st = solve_traffic(net, s).unwrap();
        let ms = broadcast_marginals(net, s, &st, None).unwrap();
        (st, ms)
    }

    #[test]
    fn chain_marginals_by_hand() {
        let net = chain(ChainParams::default());
        let s = chain_strategy(&net);
        let (st, ms) = marg(&net, &s);
        let topo = &net.topology;
        // D'(F) = mu / (mu - F)^2 with mu = 1; C'(G) with mu = 2.
        let d_sb = 1.0 / (0.8f64 * 0.8);
        let d_ba = 1.0 / (0.9f64 * 0.9);
        let c_b = 2.0 / (1.0f64 * 1.0);
        assert!((ms.elements.link[topo.link(2, 1).unwrap()] - d_sb).abs() < 1e-12);
        assert_eq!(ms.di_dt[2], 0.0);
        assert!((ms.di_dt[1] - 0.2 * d_sb).abs() < 1e-12);
        assert!((ms.ci_dt[1] - (c_b + 0.2 * d_sb)).abs() < 1e-12);
        assert!((ms.ci_dt[0] - (0.1 * d_ba + c_b + 0.2 * d_sb)).abs() < 1e-12);
        let g = strategy_gradient(&net, &st, &ms);
        let ab = net.ci_row(0, 0).start + 1;
        assert!((g.ci_phi[ab] - (0.1 * d_ba + ms.ci_dt[1])).abs() < 1e-12);
        assert!((g.ci_y[0] - 0.1).abs() < 1e-15);
        // No traffic at s: cache marginal is infinite, forwarding partials vanish.
        assert!(ms.ci_gamma[2].is_infinite());
        assert!(net.ci_row(0, 2).all(|x| g.ci_phi[x] == 0.0));
    }

    #[test]
    fn caching_at_requester_zeroes_its_marginal() {
        let net = chain(ChainParams::default());
        let mut s = chain_strategy(&net);
        s.ci_phi[net.ci_row(0, 0).start + 1] = 0.0;
        s.ci_y[0] = 1.0;
        let (_, ms) = marg(&net, &s);
        assert_eq!(ms.ci_dt[0], 0.0);
        // gamma = L^c b / t = 0.1.
        assert!((ms.ci_gamma[0] - 0.1).abs() < 1e-15);
        assert_eq!(ms.ci_argmin[0], Some(Slot::Cache));
    }

    #[test]
    fn finite_differences_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = 1e-6;
        let mut checked = 0;
        for _ in 0..30 {
            let n = rng.random_range(3..7);
            let net = random_network(&mut rng, n, 2);
            let rank = random_rank(&mut rng, n);
            let s = random_dag_strategy(&mut rng, &net, &rank, 0.4);
            let (st, ms) = marg(&net, &s);
            let g = strategy_gradient(&net, &st, &ms);
            let topo = &net.topology;
            for c in 0..net.n_ci() {
                for i in 0..n {
                    for (q, x) in net.ci_row(c, i).enumerate() {
                        if q > 0 && rank[topo.neighbors(i)[q - 1]] >= rank[i] {
                            continue;
                        }
                        let mut p = s.clone();
                        p.ci_phi[x] += h;
                        let up = evaluate(&net, &p).unwrap();
                        p.ci_phi[x] -= 2.0 * h;
                        let down = evaluate(&net, &p).unwrap();
                        let fd = (up - down) / (2.0 * h);
                        assert!((fd - g.ci_phi[x]).abs() <= 1e-5 * fd.abs().max(1e-3), "{fd} vs {}", g.ci_phi[x]);
                        checked += 1;
                    }
                }
            }
            for idx in 0..s.di_y.len() {
                if net.is_server[idx] {
                    continue;
                }
                let mut p = s.clone();
                p.di_y[idx] += h;
                let up = evaluate(&net, &p).unwrap();
                p.di_y[idx] -= 2.0 * h;
                let down = evaluate(&net, &p).unwrap();
                let fd = (up - down) / (2.0 * h);
                assert!((fd - g.di_y[idx]).abs() <= 1e-5 * fd.abs().max(1e-3));
            }
            let _ = total_cost(&net, &st).unwrap();
        }
        assert!(checked > 100);
    }

    #[test]
    fn minima_bound_every_allowed_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let net = random_network(&mut rng, 7, 3);
            let rank = random_rank(&mut rng, 7);
            let s = random_dag_strategy(&mut rng, &net, &rank, 0.3);
            let (_, ms) = marg(&net, &s);
            for c in 0..net.n_ci() {
                for i in 0..7 {
                    let idx = c * 7 + i;
                    assert!(ms.ci_min[idx] <= ms.ci_gamma[idx]);
                    for x in net.ci_row(c, i) {
                        assert!(ms.ci_min[idx] <= ms.ci_delta[x]);
                    }
                }
            }
            for k in 0..net.n_di() {
                for i in 0..7 {
                    if net.server(k, i) {
                        assert_eq!(ms.di_dt[k * 7 + i], 0.0);
                        continue;
                    }
                    for x in net.di_row(k, i) {
                        assert!(ms.di_min[k * 7 + i] <= ms.di_delta[x]);
                    }
                }
            }
        }
    }

    #[test]
    fn kkt_at_single_path_stationary_point() {
        // Results are smaller than data and CPUs are cheap, so the best
        // single path ships the interest to s and computes there.
        let net = chain(ChainParams { cpu: 0.01, link: 5.0, rate: 0.5, cache_price: 100.0, ..Default::default() });
        let mut s = chain_strategy(&net);
        let row = net.ci_row(0, 1);
        s.ci_phi[row.start] = 0.0;
        s.ci_phi[row.start + 2] = 1.0;
        let (st, ms) = marg(&net, &s);
        let r = check_kkt(&net, &s, &st, &ms, ACTIVE_TOL, None);
        assert!(r.residual <= 1e-8, "{r:?}");
        assert!(r.degenerate.contains(&(Commodity::Di(0), 1)));
        let m = check_modified_condition(&net, &s, &ms, ACTIVE_TOL);
        assert!(m.residual <= 1e-8, "{m:?}");

        // Computing at b is not stationary.
        let s = chain_strategy(&net);
        let (st, ms) = marg(&net, &s);
        assert!(check_kkt(&net, &s, &st, &ms, ACTIVE_TOL, None).residual > 1e-3);
    }

    #[test]
    fn bounded_gap_rhs_vanishes_for_same_caching() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = random_network(&mut rng, 5, 2);
        let rank = random_rank(&mut rng, 5);
        let s = random_dag_strategy(&mut rng, &net, &rank, 0.5);
        let (st, ms) = marg(&net, &s);
        assert_eq!(bounded_gap_rhs(&net, &s, &st, &ms, &s, &st), 0.0);
        let mut other = random_dag_strategy(&mut rng, &net, &rank, 0.5);
        other.ci_y = s.ci_y.clone();
        other.di_y = s.di_y.clone();
        let st2 = solve_traffic(&net, &other).unwrap();
        assert_eq!(bounded_gap_rhs(&net, &s, &st, &ms, &other, &st2), 0.0);
    }

    #[test]
    fn recomputation_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = random_network(&mut rng, 6, 2);
        let rank = random_rank(&mut rng, 6);
        let s = random_dag_strategy(&mut rng, &net, &rank, 0.5);
        let (st, a) = marg(&net, &s);
        let b = broadcast_marginals(&net, &s, &st, None).unwrap();
        assert_eq!(a, b);
    }
}
