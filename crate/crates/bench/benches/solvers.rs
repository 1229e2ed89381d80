use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use netplace::baselines::sep_route;
use netplace::fixtures::{random_dag_strategy, random_network, random_rank};
use netplace::gcfw::{gcfw_run, GcfwConfig};
use netplace::gp::{build_static_blocked_sets, gp_run_from, randomized_round, GpConfig};
use netplace::marginals::{broadcast_marginals, strategy_gradient};
use netplace::model::{evaluate, solve_traffic};
use netplace::scenarios::preset_spec;
use netplace::Network;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn preset(name: &str) -> Network {
    preset_spec(name).expect("known preset").build().expect("preset builds")
}

fn traffic_and_marginals(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    for name in ["grid-25", "geant", "grid-100"] {
        let net = preset(name);
        let s = sep_route(&net).unwrap();
        let st = solve_traffic(&net, &s).unwrap();
        group.bench_with_input(BenchmarkId::new("traffic", name), &net, |b, net| {
            b.iter(|| solve_traffic(net, black_box(&s)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("cost", name), &net, |b, net| {
            b.iter(|| evaluate(net, black_box(&s)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("marginals", name), &net, |b, net| {
            b.iter(|| {
                let ms = broadcast_marginals(net, &s, &st, None).unwrap();
                strategy_gradient(net, &st, &ms)
            })
        });
    }
    group.finish();
}

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solvers");
    group.sample_size(10);
    for name in ["grid-25", "geant"] {
        let net = preset(name);
        let blocked = build_static_blocked_sets(&net).unwrap();
        let init = sep_route(&net).unwrap();
        let gp = GpConfig { max_slots: 100, ..Default::default() };
        group.bench_function(BenchmarkId::new("gp_100_slots", name), |b| {
            b.iter(|| gp_run_from(&net, init.clone(), &blocked, &gp, |_, _| {}).unwrap())
        });
        let gcfw = GcfwConfig { iters: 20 };
        group.bench_function(BenchmarkId::new("gcfw_20_iters", name), |b| b.iter(|| gcfw_run(&net, &gcfw).unwrap()));
    }
    group.finish();
}

fn rounding(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = random_network(&mut rng, 30, 12);
    let rank = random_rank(&mut rng, net.n());
    let s = random_dag_strategy(&mut rng, &net, &rank, 0.7);
    let mut seed = 0;
    c.bench_function("randomized_round/random-30", |b| {
        b.iter(|| {
            seed += 1;
            randomized_round(&net, &s, seed)
        })
    });
}

criterion_group!(benches, traffic_and_marginals, solvers, rounding);
criterion_main!(benches);
