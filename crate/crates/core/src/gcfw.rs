//! Offline gain maximization by gradient-combining Frank-Wolfe.
//!
//! The gain `G = T0 - T` splits into `M = T0 - (D + C)` (flow and compute
//! savings) and `N = -B` (cache cost). Caching is eliminated through
//! conservation, `y = 1 - sum(phi)` per row, so the iterate lives on the
//! forwarding variables alone. Each iteration solves a linear program over
//! the allowed slots with the combined direction `grad M + 2 grad N` and
//! moves a fixed `eps^2` of the way toward its vertex.

use serde::{Deserialize, Serialize};

use crate::baselines::sep_route;
use crate::error::{Error, Result};
use crate::gp::{build_static_blocked_sets, BlockedSets};
use crate::marginals::{broadcast_marginals, strategy_gradient};
use crate::model::{cost_breakdown, solve_traffic, Network, Strategy, TrafficState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcfwConfig {
    /// Iteration count `N`; the step is `N^(-2/3)`.
    pub iters: usize,
}

impl Default for GcfwConfig {
    fn default() -> Self {
        GcfwConfig { iters: 100 }
    }
}

impl GcfwConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iters < 2 {
            return Err(Error::InvalidParams("GCFW needs at least two iterations".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.iters as f64).powf(-2.0 / 3.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainParts {
    pub m: f64,
    pub n: f64,
    /// Total cost `T = T0 - M - N`.
    pub t: f64,
}

impl GainParts {
    pub fn gain(&self) -> f64 {
        self.m + self.n
    }
}

/// `M` and `N` of a strategy against the reference cost `t0`.
pub fn gain_parts(net: &Network, s: &Strategy, t0: f64) -> Result<GainParts> {
    let st = solve_traffic(net, s)?;
    gain_parts_of(net, &st, t0)
}

fn gain_parts_of(net: &Network, st: &TrafficState, t0: f64) -> Result<GainParts> {
    let b = cost_breakdown(net, st)?;
    Ok(GainParts { m: t0 - b.link - b.compute, n: -b.cache, t: b.total() })
}

/// Reference cost: shortest-extended-path routing with nothing cached.
pub fn reference_cost(net: &Network) -> Result<f64> {
    crate::model::evaluate(net, &sep_route(net)?)
}

/// Gradients of `M` and `N` with respect to the forwarding variables, in
/// the layout of `Strategy::ci_phi` / `Strategy::di_phi`. Server DI rows
/// are fixed and get zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainGradient {
    pub ci_m: Vec<f64>,
    pub ci_n: Vec<f64>,
    pub di_m: Vec<f64>,
    pub di_n: Vec<f64>,
}

impl GainGradient {
    /// `grad M + 2 grad N` for CI and DI entries.
    pub fn combined(&self) -> (Vec<f64>, Vec<f64>) {
        let mix = |m: &[f64], n: &[f64]| m.iter().zip(n).map(|(m, n)| m + 2.0 * n).collect();
        (mix(&self.ci_m, &self.ci_n), mix(&self.di_m, &self.di_n))
    }
}

/// `dM/dphi = -t * delta` and `dN/dphi = +L * B'`: forwarding more of a
/// row caches less of it.
pub fn grad_gain(net: &Network, s: &Strategy, st: &TrafficState) -> Result<GainGradient> {
    let ms = broadcast_marginals(net, s, st, None)?;
    let g = strategy_gradient(net, st, &ms);
    let n = net.n();
    let mut out = GainGradient {
        ci_m: g.ci_phi.iter().map(|x| -x).collect(),
        ci_n: vec![0.0; g.ci_phi.len()],
        di_m: g.di_phi.iter().map(|x| -x).collect(),
        di_n: vec![0.0; g.di_phi.len()],
    };
    for c in 0..net.n_ci() {
        for i in 0..n {
            for idx in net.ci_row(c, i) {
                out.ci_n[idx] = g.ci_y[c * n + i];
            }
        }
    }
    for k in 0..net.n_di() {
        for i in 0..n {
            let server = net.server(k, i);
            for idx in net.di_row(k, i) {
                if server {
                    out.di_m[idx] = 0.0;
                } else {
                    out.di_n[idx] = g.di_y[k * n + i];
                }
            }
        }
    }
    Ok(out)
}

/// Index of the largest unblocked positive coefficient; earlier slots win
/// ties (local computation first, then neighbours by id).
fn best_slot(g: &[f64], blocked: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (q, (&v, &b)) in g.iter().zip(blocked).enumerate() {
        if b || !(v >= 0.0) {
            continue;
        }
        if best.is_none_or(|p| v > g[p]) {
            best = Some(q);
        }
    }
    best
}

/// Linear maximization over the feasible set: each row puts all its mass
/// on its best allowed slot, or caches fully if every coefficient is
/// negative. `ci_g`, `ci_g` are [`GainGradient::combined`] outputs.
pub fn lp_step(net: &Network, ci_g: &[f64], di_g: &[f64], blocked: &BlockedSets) -> Strategy {
    let n = net.n();
    let mut psi = Strategy::zeros(net);
    for c in 0..net.n_ci() {
        for i in 0..n {
            let row = net.ci_row(c, i);
            match best_slot(&ci_g[row.clone()], &blocked.ci[row.clone()]) {
                Some(q) => psi.ci_phi[row.start + q] = 1.0,
                None => psi.ci_y[c * n + i] = 1.0,
            }
        }
    }
    for k in 0..net.n_di() {
        for i in 0..n {
            if net.server(k, i) {
                continue;
            }
            let row = net.di_row(k, i);
            match best_slot(&di_g[row.clone()], &blocked.di[row.clone()]) {
                Some(q) => psi.di_phi[row.start + q] = 1.0,
                None => psi.di_y[k * n + i] = 1.0,
            }
        }
    }
    psi
}

fn mix(a: &Strategy, b: &Strategy, w: f64) -> Strategy {
    let lerp = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(x, y)| (1.0 - w) * x + w * y).collect();
    Strategy {
        ci_phi: lerp(&a.ci_phi, &b.ci_phi),
        ci_y: lerp(&a.ci_y, &b.ci_y),
        di_phi: lerp(&a.di_phi, &b.di_phi),
        di_y: lerp(&a.di_y, &b.di_y),
    }
}

/// One row of the iteration trace (`iter,G,M,N,T`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GcfwRecord {
    pub iter: usize,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GcfwRun {
    pub t0: f64,
    /// Iterate 0 is the starting point.
    pub trace: Vec<GcfwRecord>,
    pub best: Strategy,
    pub best_iter: usize,
    /// Steps shortened to keep the iterate inside the cost domain.
    pub shortened: usize,
}

impl GcfwRun {
    pub fn best_cost(&self) -> f64 {
        self.trace[self.best_iter].t
    }
}

/// GCFW from shortest-extended-path routing with static blocked sets; the
/// start's cost is the reference `T0`.
pub fn gcfw_run(net: &Network, config: &GcfwConfig) -> Result<GcfwRun> {
    let init = sep_route(net)?;
    let t0 = crate::model::evaluate(net, &init)?;
    gcfw_run_from(net, init, &build_static_blocked_sets(net)?, t0, config, |_, _| {})
}

/// GCFW from a loop-free start that respects `blocked`. `observe` sees
/// every iterate, starting with `init`.
pub fn gcfw_run_from(
    net: &Network,
    init: Strategy,
    blocked: &BlockedSets,
    t0: f64,
    config: &GcfwConfig,
    mut observe: impl FnMut(usize, &Strategy),
) -> Result<GcfwRun> {
    config.validate()?;
    let eps2 = config.step();
    let mut s = init;
    let mut st = solve_traffic(net, &s)?;
    let mut parts = gain_parts_of(net, &st, t0)?;
    let record = |iter, p: GainParts| GcfwRecord { iter, g: p.gain(), m: p.m, n: p.n, t: p.t };
    let mut run = GcfwRun { t0, trace: vec![record(0, parts)], best: s.clone(), best_iter: 0, shortened: 0 };
    observe(0, &s);
    for iter in 1..=config.iters {
        let (ci_g, di_g) = grad_gain(net, &s, &st)?.combined();
        let psi = lp_step(net, &ci_g, &di_g, blocked);
        let mut w = eps2;
        loop {
            let next = mix(&s, &psi, w);
            let next_st = solve_traffic(net, &next)?;
            match gain_parts_of(net, &next_st, t0) {
                Ok(p) => {
                    s = next;
                    st = next_st;
                    parts = p;
                    break;
                }
                Err(Error::CapacityExceeded { .. }) if w > eps2 * 1e-6 => {
                    w *= 0.5;
                    run.shortened += 1;
                }
                Err(e) => return Err(e),
            }
        }
        observe(iter, &s);
        run.trace.push(record(iter, parts));
        if parts.gain() > run.trace[run.best_iter].g {
            run.best_iter = iter;
            run.best = s.clone();
        }
    }
    Ok(run)
}
