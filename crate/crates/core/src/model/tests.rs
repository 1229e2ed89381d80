use super::*;
use crate::error::{Commodity, Element, Error};
use crate::fixtures::{chain, chain_strategy, random_dag_strategy, random_network, random_rank, ChainParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const A: NodeId = 0;
const B: NodeId = 1;
const S: NodeId = 2;

fn slot(net: &Network, i: NodeId, j: NodeId) -> usize {
    net.topology.neighbors(i).binary_search(&j).unwrap()
}

#[test]
fn chain_traffic_by_hand() {
    let net = chain(ChainParams::default());
    let s = chain_strategy(&net);
    assert!(validate_strategy(&net, &s).is_valid());
    let st = solve_traffic(&net, &s).unwrap();
    assert_eq!(st.ci_t, vec![1.0, 1.0, 0.0]);
    assert_eq!(st.g(&net, 0, B), 1.0);
    assert_eq!(st.di_t, vec![0.0, 1.0, 1.0]);
    assert_eq!(st.di_f[net.di_row(0, B).start + slot(&net, B, S)], 1.0);
    let topo = &net.topology;
    assert!((st.link_flow[topo.link(S, B).unwrap()] - 0.2).abs() < 1e-15);
    assert!((st.link_flow[topo.link(B, A).unwrap()] - 0.1).abs() < 1e-15);
    assert_eq!(st.link_flow[topo.link(A, B).unwrap()], 0.0);
    assert_eq!(st.workload, vec![0.0, 1.0, 0.0]);
}

#[test]
fn chain_total_cost() {
    let net = chain(ChainParams::default());
    let t = evaluate(&net, &chain_strategy(&net)).unwrap();
    let expected = 0.2 / 0.8 + 0.1 / 0.9 + 1.0 / (2.0 - 1.0);
    assert!((t - expected).abs() < 1e-12, "{t} vs {expected}");
    assert!((t - 1.3611).abs() < 1e-4);
}

#[test]
fn zero_rates_give_zero_traffic_and_cost() {
    let net = chain(ChainParams { rate: 1.0, ..Default::default() });
    let mut net0 = net.clone();
    net0.rates.iter_mut().for_each(|r| *r = 0.0);
    let st = solve_traffic(&net0, &chain_strategy(&net0)).unwrap();
    assert!(st.ci_t.iter().chain(&st.di_t).chain(&st.link_flow).chain(&st.workload).all(|&x| x == 0.0));
    assert_eq!(total_cost(&net0, &st).unwrap(), 0.0);
}

#[test]
fn saturated_link_is_reported() {
    // L^d = 1 with d = 1 puts F_sb exactly on the pole.
    let net = chain(ChainParams { data_size: 1.0, cpu: 0.1, ..Default::default() });
    match evaluate(&net, &chain_strategy(&net)) {
        Err(Error::CapacityExceeded { element, .. }) => assert_eq!(element, Element::Link(S, B)),
        other => panic!("expected CapacityExceeded, got {other:?}"),
    }
    let net = chain(ChainParams { cpu: 1.0, ..Default::default() });
    assert!(matches!(
        evaluate(&net, &chain_strategy(&net)),
        Err(Error::CapacityExceeded { element: Element::Cpu(B), .. })
    ));
}

#[test]
fn validation_reports_residual_and_server_forwarding() {
    let net = chain(ChainParams::default());
    let mut s = chain_strategy(&net);
    s.ci_phi[net.ci_row(0, A).start + 1 + slot(&net, A, B)] = 0.5;
    s.ci_y[A] = 0.4;
    let report = validate_strategy(&net, &s);
    assert_eq!(report.violations.len(), 1);
    match report.violations[0] {
        Violation::Conservation { commodity: Commodity::Ci(0), node: A, residual } => {
            assert!((residual + 0.1).abs() < 1e-12)
        }
        ref v => panic!("unexpected {v:?}"),
    }

    let mut s = chain_strategy(&net);
    s.di_phi[net.di_row(0, S).start + slot(&net, S, B)] = 0.3;
    let report = validate_strategy(&net, &s);
    assert!(report.violations.iter().any(|v| matches!(v, Violation::ServerForwards { node: S, .. })));

    let mut s = chain_strategy(&net);
    s.ci_y[B] = -0.2;
    s.ci_phi[net.ci_row(0, B).start] = 1.2;
    let report = validate_strategy(&net, &s);
    assert_eq!(report.violations.iter().filter(|v| matches!(v, Violation::OutOfRange { .. })).count(), 2);

    let mut s = chain_strategy(&net);
    s.ci_y.pop();
    assert!(matches!(validate_strategy(&net, &s).violations[..], [Violation::DimensionMismatch(_)]));
}

#[test]
fn two_cycle_is_detected() {
    let net = chain(ChainParams::default());
    let mut s = chain_strategy(&net);
    assert!(check_loop_free(&net, &s).loop_free());
    let row = net.ci_row(0, B);
    s.ci_phi[row.start] = 0.9;
    s.ci_phi[row.start + 1 + slot(&net, B, A)] = 0.1;
    let report = check_loop_free(&net, &s);
    let (commodity, cycle) = report.first_cycle().unwrap();
    assert_eq!(commodity, Commodity::Ci(0));
    assert_eq!(cycle, &[A, B, A]);
    assert!(report.di.iter().all(Option::is_none));
    match solve_traffic(&net, &s) {
        Err(Error::LoopDetected { commodity: Commodity::Ci(0), cycle }) => assert_eq!(cycle.len(), 3),
        other => panic!("expected LoopDetected, got {other:?}"),
    }
}

#[test]
fn caching_at_requester_zeroes_everything_downstream() {
    let net = chain(ChainParams::default());
    let mut s = chain_strategy(&net);
    s.ci_phi[net.ci_row(0, A).start + 1 + slot(&net, A, B)] = 0.0;
    s.ci_y[A] = 1.0;
    let st = solve_traffic(&net, &s).unwrap();
    assert_eq!(st.ci_t[B], 0.0);
    assert!(st.link_flow.iter().all(|&f| f == 0.0));
    let b = cost_breakdown(&net, &st).unwrap();
    assert_eq!(b.link + b.compute, 0.0);
    assert!((b.cache - 0.1).abs() < 1e-15);
    assert_eq!(s.cached_items(&net), vec![1.0, 0.0, 0.0]);
}

#[test]
fn conditional_split_and_residual() {
    let net = chain(ChainParams::default());
    let mut s = chain_strategy(&net);
    let row = net.ci_row(0, A);
    s.ci_phi[row.start + 1 + slot(&net, A, B)] = 0.3;
    s.ci_phi[row.start] = 0.3;
    s.ci_y[A] = 0.4;
    let rho = s.ci_conditional(&net, 0, A).unwrap();
    assert!((rho[0] - 0.5).abs() < 1e-15 && (rho[1] - 0.5).abs() < 1e-15);
    assert!(s.max_conservation_residual(&net) < 1e-15);
    s.ci_phi[row.clone()].iter_mut().for_each(|p| *p = 0.0);
    s.ci_y[A] = 1.0;
    assert!(s.ci_conditional(&net, 0, A).is_none());
}

#[test]
fn random_dag_strategies_satisfy_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = 5 + (rand::Rng::random_range(&mut rng, 0..4));
        let net = random_network(&mut rng, n, 3);
        let rank = random_rank(&mut rng, n);
        let s = random_dag_strategy(&mut rng, &net, &rank, 0.3);
        assert!(validate_strategy(&net, &s).is_valid());
        assert!(check_loop_free(&net, &s).loop_free());
        let st = solve_traffic(&net, &s).unwrap();
        let topo = &net.topology;
        for c in 0..net.n_ci() {
            for i in 0..n {
                let mut rhs = net.rate(c, i);
                for &j in topo.neighbors(i) {
                    rhs += s.ci_phi[net.ci_row(c, j).start + 1 + slot(&net, j, i)] * st.ci_t[c * n + j];
                }
                assert!((st.ci_t[c * n + i] - rhs).abs() < 1e-9);
            }
        }
        for k in 0..net.n_di() {
            for i in 0..n {
                let mut rhs: f64 = (0..net.n_ci()).filter(|&c| net.ci_to_di[c] == k).map(|c| st.g(&net, c, i)).sum();
                for &j in topo.neighbors(i) {
                    rhs += s.di_phi[net.di_row(k, j).start + slot(&net, j, i)] * st.di_t[k * n + j];
                }
                assert!((st.di_t[k * n + i] - rhs).abs() < 1e-9);
            }
        }
        assert!(total_cost(&net, &st).unwrap().is_finite());
    }
}

#[test]
fn forwarding_more_never_lowers_flow_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut probes = 0;
    while probes < 100 {
        let net = random_network(&mut rng, 6, 2);
        let rank = random_rank(&mut rng, 6);
        let s = random_dag_strategy(&mut rng, &net, &rank, 0.8);
        let base = cost_breakdown(&net, &solve_traffic(&net, &s).unwrap()).unwrap();
        // Move some caching mass of a random CI row into an allowed slot.
        let c = rand::Rng::random_range(&mut rng, 0..net.n_ci());
        let i = rand::Rng::random_range(&mut rng, 0..6);
        let y = s.ci_y[c * 6 + i];
        if y <= 0.0 {
            continue;
        }
        let row = net.ci_row(c, i);
        let allowed: Vec<usize> = std::iter::once(0)
            .chain(net.topology.neighbors(i).iter().enumerate().filter(|&(_, &j)| rank[j] < rank[i]).map(|(q, _)| q + 1))
            .collect();
        let q = allowed[rand::Rng::random_range(&mut rng, 0..allowed.len())];
        let h = y * rand::Rng::random::<f64>(&mut rng);
        let mut s2 = s.clone();
        s2.ci_phi[row.start + q] += h;
        s2.ci_y[c * 6 + i] -= h;
        let after = cost_breakdown(&net, &solve_traffic(&net, &s2).unwrap()).unwrap();
        assert!(after.link + after.compute >= base.link + base.compute - 1e-12);
        probes += 1;
    }
}

#[test]
fn strategy_serde_round_trip() {
    let net = chain(ChainParams::default());
    let s = chain_strategy(&net);
    let text = serde_json::to_string(&s).unwrap();
    let back: Strategy = serde_json::from_str(&text).unwrap();
    assert_eq!(s, back);
}
