//! Experiment plans, the comparison pipeline and parameter sweeps.
//!
//! A plan lists scenarios, methods and seeds. Every (scenario, seed, method)
//! cell rebuilds its network from the scenario spec with the cell seed, so
//! a run is reproducible from the plan file alone. Cells run on the rayon
//! pool and results keep plan order.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{cloud_ec, edge_ec, run_sep_lfu, sep_route, ElasticConfig, Method, SepLfuConfig};
use crate::error::{Error, Result};
use crate::gcfw::{gcfw_run, GcfwConfig};
use crate::gp::{build_static_blocked_sets, gp_run_fluid, gp_run_measured, GpConfig, MeasuredConfig};
use crate::model::{solve_traffic, Network, Strategy};
use crate::scenarios::ScenarioSpec;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodConfigs {
    pub gp: GpConfig,
    pub gcfw: GcfwConfig,
    pub sep_lfu: SepLfuConfig,
    pub elastic: ElasticConfig,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by the worst method's mean cost in the scenario.
    #[default]
    Worst,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub scenarios: Vec<ScenarioSpec>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub configs: MethodConfigs,
    /// Simulated time for packet-level GP cells; `None` runs GP on the
    /// fluid model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub normalization: Normalization,
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        self.configs.gp.validate()?;
        self.configs.gcfw.validate()?;
        if let Some(h) = self.horizon {
            if !(h >= self.configs.gp.slot) {
                return Err(Error::InvalidParams(format!("horizon {h} shorter than one slot")));
            }
        }
        let mut names: Vec<_> = self.scenarios.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("scenario names must be unique".into()));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(&ScenarioSpec, u64, Method)> {
        let mut out = Vec::new();
        for spec in &self.scenarios {
            for &seed in &self.seeds {
                for &m in &self.methods {
                    out.push((spec, seed, m));
                }
            }
        }
        out
    }
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub method: Method,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: f64,
    pub iters: usize,
    /// Seconds.
    pub wallclock: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub scenario: String,
    pub method: Method,
    pub seed: u64,
    pub error: String,
}

/// Per-scenario, per-method mean over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRow {
    pub scenario: String,
    pub method: Method,
    pub mean_t: f64,
    pub std_t: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<CellFailure>,
    pub normalized: Vec<NormalizedRow>,
}

/// Result of a single method on a single network.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub cost: f64,
    pub iters: usize,
    pub strategy: Strategy,
    pub converged: bool,
}

/// Runs one method: GCFW reports its best iterate, SEPLFU its best slot,
/// the others their final state.
pub fn run_method(net: &Network, method: Method, configs: &MethodConfigs) -> Result<MethodOutcome> {
    Ok(match method {
        Method::Gcfw => {
            let run = gcfw_run(net, &configs.gcfw)?;
            MethodOutcome { cost: run.best_cost(), iters: run.trace.len() - 1, strategy: run.best, converged: true }
        }
        Method::Gp => {
            let tr = gp_run_fluid(net, &configs.gp)?;
            MethodOutcome { cost: tr.final_cost(), iters: tr.updates(), converged: tr.converged, strategy: tr.strategy }
        }
        Method::SepLfu => {
            let tr = run_sep_lfu(net, &configs.sep_lfu)?;
            MethodOutcome { cost: tr.best_cost, iters: tr.best_slot, strategy: tr.strategy, converged: true }
        }
        Method::CloudEc | Method::EdgeEc => {
            let run = if method == Method::CloudEc { cloud_ec(net, &configs.elastic)? } else { edge_ec(net, &configs.elastic)? };
            MethodOutcome {
                cost: *run.cost.last().expect("at least one slot"),
                iters: run.cost.len() - 1,
                converged: run.converged,
                strategy: run.strategy,
            }
        }
    })
}

/// GP driven by the packet simulator; the cost is the mean measured cost
/// over the last tenth of the windows.
fn run_gp_measured(net: &Network, configs: &MethodConfigs, horizon: f64, seed: u64) -> Result<MethodOutcome> {
    let gp = GpConfig { rounding_seed: seed, ..configs.gp.clone() };
    let slots = (horizon / gp.slot).floor() as usize;
    let config = MeasuredConfig { gp, slots, seed };
    let run = gp_run_measured(net, sep_route(net)?, &build_static_blocked_sets(net)?, &config)?;
    let tail = (run.events.len() / 10).max(1);
    let cost = run.events.iter().rev().take(tail).map(|e| e.measured_cost).sum::<f64>() / tail as f64;
    Ok(MethodOutcome { cost, iters: run.events.len(), strategy: run.strategy, converged: false })
}

fn run_cell(spec: &ScenarioSpec, seed: u64, method: Method, plan: &ExperimentPlan) -> Result<(MethodOutcome, f64)> {
    let net = spec.with_seed(seed).build()?;
    let start = Instant::now();
    let configs = MethodConfigs { gp: GpConfig { rounding_seed: seed, ..plan.configs.gp.clone() }, ..plan.configs.clone() };
    let out = match (method, plan.horizon) {
        (Method::Gp, Some(h)) => run_gp_measured(&net, &configs, h, seed)?,
        _ => run_method(&net, method, &configs)?,
    };
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Executes every cell. Failed cells are recorded and skipped.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ResultsTable> {
    run_plan_with(plan, |_, _| {})
}

/// As [`run_plan`]; `inspect` also sees each successful cell's network and
/// outcome.
pub fn run_plan_with(
    plan: &ExperimentPlan,
    inspect: impl Fn(&ResultRow, &MethodOutcome) + Sync,
) -> Result<ResultsTable> {
    plan.validate()?;
    let outcomes: Vec<_> = plan
        .cells()
        .into_par_iter()
        .map(|(spec, seed, method)| {
            let res = run_cell(spec, seed, method, plan);
            if let Ok((out, wall)) = &res {
                inspect(&row_of(spec, seed, method, out, *wall), out);
            }
            (spec, seed, method, res)
        })
        .collect();
    let mut table = ResultsTable::default();
    for (spec, seed, method, res) in outcomes {
        match res {
            Ok((out, wall)) => table.rows.push(row_of(spec, seed, method, &out, wall)),
            Err(e) => table.failures.push(CellFailure {
                scenario: spec.name.clone(),
                method,
                seed,
                error: e.to_string(),
            }),
        }
    }
    table.normalized = normalize(&table.rows, plan.normalization);
    Ok(table)
}

fn row_of(spec: &ScenarioSpec, seed: u64, method: Method, out: &MethodOutcome, wallclock: f64) -> ResultRow {
    ResultRow { scenario: spec.name.clone(), method, seed, t: out.cost, iters: out.iters, wallclock }
}

/// Mean and population standard deviation over seeds, then division by
/// the largest mean of the scenario.
pub fn normalize(rows: &[ResultRow], rule: Normalization) -> Vec<NormalizedRow> {
    let mut groups: BTreeMap<&str, BTreeMap<Method, Vec<f64>>> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !groups.contains_key(r.scenario.as_str()) {
            order.push(&r.scenario);
        }
        groups.entry(&r.scenario).or_default().entry(r.method).or_default().push(r.t);
    }
    let mut out = Vec::new();
    for scenario in order {
        let methods = &groups[scenario];
        let stats: Vec<_> = methods
            .iter()
            .map(|(&m, ts)| {
                let mean = ts.iter().sum::<f64>() / ts.len() as f64;
                let var = ts.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / ts.len() as f64;
                (m, mean, var.sqrt())
            })
            .collect();
        let worst = stats.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        for (method, mean_t, std_t) in stats {
            let normalized = match rule {
                Normalization::Worst if worst > 0.0 => mean_t / worst,
                Normalization::Worst => 1.0,
                Normalization::None => mean_t,
            };
            out.push(NormalizedRow { scenario: scenario.to_string(), method, mean_t, std_t, normalized });
        }
    }
    out
}

pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

/// Writes `results.csv` and `normalized.csv` (plus `failures.csv` when a
/// cell failed) into `dir`.
pub fn write_results(dir: impl AsRef<Path>, table: &ResultsTable) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_header_only_if_empty(dir.join("results.csv"), &table.rows, "scenario,method,seed,T,iters,wallclock")?;
    write_header_only_if_empty(
        dir.join("normalized.csv"),
        &table.normalized,
        "scenario,method,mean_t,std_t,normalized",
    )?;
    if !table.failures.is_empty() {
        write_csv(dir.join("failures.csv"), &table.failures)?;
    }
    Ok(())
}

fn write_header_only_if_empty<T: Serialize>(path: impl AsRef<Path>, rows: &[T], header: &str) -> Result<()> {
    if rows.is_empty() {
        std::fs::write(path, format!("{header}\n"))?;
        Ok(())
    } else {
        write_csv(path, rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knob {
    /// Multiplier on every task rate.
    RateScale,
    /// Result size over data size.
    ResultSizeRatio,
    /// Multiplier on every cache price.
    CachePrice,
    /// GP and elastic-baseline stepsize.
    Stepsize,
}

impl std::str::FromStr for Knob {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::InvalidParams(format!("unknown sweep knob {s:?}")))
    }
}

impl Knob {
    pub fn as_str(&self) -> &'static str {
        match self {
            Knob::RateScale => "rate_scale",
            Knob::ResultSizeRatio => "result_size_ratio",
            Knob::CachePrice => "cache_price",
            Knob::Stepsize => "stepsize",
        }
    }

    /// The plan with this knob set to `value`.
    pub fn apply(&self, plan: &ExperimentPlan, value: f64) -> Result<ExperimentPlan> {
        if !(value > 0.0) {
            return Err(Error::InvalidParams(format!("{} must be positive, got {value}", self.as_str())));
        }
        let mut p = plan.clone();
        for s in &mut p.scenarios {
            match self {
                Knob::RateScale => s.rate_scale *= value,
                Knob::ResultSizeRatio => s.result_size = value * s.data_size,
                Knob::CachePrice => s.cache_scale *= value,
                Knob::Stepsize => {}
            }
        }
        if *self == Knob::Stepsize {
            p.configs.gp.alpha = value;
            p.configs.elastic.alpha = value;
        }
        Ok(p)
    }
}

/// One line of a sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub knob: Knob,
    pub value: f64,
    pub scenario: String,
    pub method: Method,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: f64,
    pub iters: usize,
    pub wallclock: f64,
    /// Mean hops travelled by a CI and by a DI.
    pub ci_hops: f64,
    pub di_hops: f64,
}

/// Mean hop counts of CI and DI packets under `s`: forwarded interest rate
/// over injected interest rate.
pub fn mean_hops(net: &Network, s: &Strategy) -> Result<(f64, f64)> {
    let st = solve_traffic(net, s)?;
    let n = net.n();
    let mut ci_fwd = 0.0;
    let mut injected_di = 0.0;
    for c in 0..net.n_ci() {
        for i in 0..n {
            let row = net.ci_row(c, i);
            ci_fwd += st.ci_f[row.start + 1..row.end].iter().sum::<f64>();
            injected_di += st.ci_f[row.start];
        }
    }
    let di_fwd: f64 = st.di_f.iter().sum();
    let injected_ci: f64 = net.rates.iter().sum();
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    Ok((ratio(ci_fwd, injected_ci), ratio(di_fwd, injected_di)))
}

/// Re-runs the plan at each knob value.
pub fn sweep(plan: &ExperimentPlan, knob: Knob, values: &[f64]) -> Result<(Vec<SweepRow>, Vec<CellFailure>)> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &value in values {
        let p = knob.apply(plan, value)?;
        let hops = std::sync::Mutex::new(BTreeMap::new());
        let specs: BTreeMap<_, _> = p.scenarios.iter().map(|s| (s.name.clone(), s.clone())).collect();
        let table = run_plan_with(&p, |row, out| {
            let net = specs[&row.scenario].with_seed(row.seed).build();
            let h = net.and_then(|net| mean_hops(&net, &out.strategy)).unwrap_or((f64::NAN, f64::NAN));
            hops.lock().unwrap().insert((row.scenario.clone(), row.seed, row.method), h);
        })?;
        let hops = hops.into_inner().unwrap();
        for r in table.rows {
            let (ci_hops, di_hops) = hops[&(r.scenario.clone(), r.seed, r.method)];
            rows.push(SweepRow {
                knob,
                value,
                scenario: r.scenario,
                method: r.method,
                seed: r.seed,
                t: r.t,
                iters: r.iters,
                wallclock: r.wallclock,
                ci_hops,
                di_hops,
            });
        }
        failures.extend(table.failures);
    }
    Ok((rows, failures))
}
