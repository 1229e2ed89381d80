use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use netplace::baselines::{sep_route, Method};
use netplace::gcfw::gcfw_run;
use netplace::gp::{build_static_blocked_sets, gp_run_fluid, gp_run_measured, randomized_round, GpConfig, MeasuredConfig};
use netplace::harness::{
    normalize, run_method, run_plan, sweep, write_csv, write_results, ExperimentPlan, Knob, MethodConfigs,
};
use netplace::marginals::{broadcast_marginals, check_modified_condition};
use netplace::model::{check_loop_free, cost_breakdown, solve_traffic, validate_strategy};
use netplace::packetsim::{measurement_rows, sim_run, Installed, SimConfig, StaticController};
use netplace::scenarios::{preset_spec, ScenarioSpec, PRESETS};
use netplace::{Network, Strategy};

#[derive(Parser)]
#[command(name = "netplace", version, about = "Forwarding, caching and computation placement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Overrides the scenario seed and seeds every random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct ScenarioArg {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
}

impl ScenarioArg {
    fn spec(&self, seed: Option<u64>) -> Result<ScenarioSpec> {
        let spec = match (&self.scenario, &self.preset) {
            (Some(p), _) => ScenarioSpec::load(p).with_context(|| format!("reading {}", p.display()))?,
            (None, Some(name)) => preset_spec(name)
                .with_context(|| format!("unknown preset {name:?}; available: {}", PRESETS.join(", ")))?,
            (None, None) => bail!("pass --scenario FILE or --preset NAME"),
        };
        Ok(match seed {
            Some(s) => spec.with_seed(s),
            None => spec,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a scenario JSON and its edge list.
    GenScenario {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[command(flatten)]
        common: Common,
    },
    /// Run one optimizer and write its trajectory and final strategy.
    Optimize {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value = "gp")]
        method: Method,
        /// GP and elastic-baseline stepsize.
        #[arg(long)]
        alpha: Option<f64>,
        /// GP slot budget.
        #[arg(long)]
        slots: Option<usize>,
        /// GCFW iterations.
        #[arg(long)]
        iters: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the packet-level simulator.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, value_enum, default_value = "static")]
        controller: ControllerKind,
        /// Strategy JSON to install (default: SEP routing without caches).
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long, default_value_t = 1000.0)]
        horizon: f64,
        /// Measurement window, and slot length of the GP controller.
        #[arg(long, default_value_t = 10.0)]
        window: f64,
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every method on every scenario and seed.
    Compare {
        #[command(flatten)]
        plan: PlanArg,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run a comparison at several values of one knob.
    Sweep {
        #[command(flatten)]
        plan: PlanArg,
        #[arg(long)]
        knob: Knob,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a scenario and optionally a strategy for it.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerKind {
    Static,
    Gp,
}

#[derive(Args, Clone)]
struct PlanArg {
    /// Plan JSON; otherwise a plan is assembled from the flags below.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "geant,grid-25")]
    presets: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "gcfw,gp,sep_lfu,cloud_ec,edge_ec")]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    seeds: Vec<u64>,
    /// GP slot budget.
    #[arg(long)]
    slots: Option<usize>,
}

impl PlanArg {
    fn plan(&self, seed: Option<u64>) -> Result<ExperimentPlan> {
        let mut plan = match &self.plan {
            Some(p) => ExperimentPlan::from_json(&fs::read_to_string(p)?)?,
            None => {
                let scenarios = self
                    .presets
                    .iter()
                    .map(|n| preset_spec(n).with_context(|| format!("unknown preset {n:?}")))
                    .collect::<Result<_>>()?;
                ExperimentPlan {
                    scenarios,
                    methods: self.methods.clone(),
                    seeds: self.seeds.clone(),
                    configs: MethodConfigs::default(),
                    horizon: None,
                    normalization: Default::default(),
                }
            }
        };
        if let Some(s) = seed {
            plan.seeds = vec![s];
        }
        if let Some(n) = self.slots {
            plan.configs.gp.max_slots = n;
        }
        Ok(plan)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

fn out_dir(common: &Common) -> Result<&Path> {
    fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    Ok(&common.out)
}

#[derive(Serialize)]
struct GpRow {
    slot: usize,
    #[serde(rename = "T")]
    t: f64,
    residual: f64,
    total_cache_size: f64,
}

#[derive(Serialize)]
struct OptimizeSummary {
    scenario: String,
    method: Method,
    seed: u64,
    #[serde(rename = "T")]
    t: f64,
    iters: usize,
    converged: bool,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenScenario { scenario, common } => {
            let spec = scenario.spec(common.seed)?;
            let net = spec.build()?;
            let out = out_dir(&common)?;
            fs::write(out.join("scenario.json"), spec.to_json())?;
            fs::write(out.join("topology.txt"), net.topology.to_edge_list())?;
            println!(
                "{}: {} nodes, {} links, {} CI and {} DI commodities",
                spec.name,
                net.n(),
                net.links() / 2,
                net.n_ci(),
                net.n_di()
            );
        }
        Command::Optimize { scenario, method, alpha, slots, iters, common } => {
            let spec = scenario.spec(common.seed)?;
            let net = spec.build()?;
            let out = out_dir(&common)?;
            let mut configs = MethodConfigs::default();
            configs.gp.rounding_seed = spec.seed;
            if let Some(a) = alpha {
                configs.gp.alpha = a;
                configs.elastic.alpha = a;
            }
            if let Some(n) = slots {
                configs.gp.max_slots = n;
            }
            if let Some(n) = iters {
                configs.gcfw.iters = n;
            }
            let (strategy, t, iters, converged) = match method {
                Method::Gp => {
                    let tr = gp_run_fluid(&net, &configs.gp)?;
                    let rows: Vec<_> = (0..tr.cost.len())
                        .map(|k| GpRow { slot: k, t: tr.cost[k], residual: tr.residual[k], total_cache_size: tr.cache_size[k] })
                        .collect();
                    write_csv(out.join("trajectory.csv"), &rows)?;
                    (tr.strategy.clone(), tr.final_cost(), tr.updates(), tr.converged)
                }
                Method::Gcfw => {
                    let run = gcfw_run(&net, &configs.gcfw)?;
                    write_csv(out.join("trajectory.csv"), &run.trace)?;
                    (run.best.clone(), run.best_cost(), run.trace.len() - 1, true)
                }
                other => {
                    let o = run_method(&net, other, &configs)?;
                    (o.strategy, o.cost, o.iters, o.converged)
                }
            };
            write_json(&out.join("strategy.json"), &strategy)?;
            let summary = OptimizeSummary { scenario: spec.name.clone(), method, seed: spec.seed, t, iters, converged };
            write_json(&out.join("summary.json"), &summary)?;
            println!("{} {}: T = {t:.6} after {iters} iterations", spec.name, method);
        }
        Command::Simulate { scenario, controller, strategy, horizon, window, alpha, common } => {
            let spec = scenario.spec(common.seed)?;
            let net = spec.build()?;
            let out = out_dir(&common)?;
            let seed = common.seed.unwrap_or(spec.seed);
            let init = match &strategy {
                Some(p) => load_strategy(&net, p)?,
                None => sep_route(&net)?,
            };
            let config = SimConfig { horizon, window, seed, ..Default::default() };
            let (measurements, summary) = match controller {
                ControllerKind::Static => {
                    let cache = randomized_round(&net, &init, seed);
                    let o = sim_run(&net, Installed { strategy: init, cache }, &config, &mut StaticController)?;
                    (o.measurements, o.summary)
                }
                ControllerKind::Gp => {
                    let gp = GpConfig { slot: window, alpha: alpha.unwrap_or(0.01), rounding_seed: seed, ..Default::default() };
                    let mc = MeasuredConfig { gp, slots: (horizon / window).floor() as usize, seed };
                    let run = gp_run_measured(&net, init, &build_static_blocked_sets(&net)?, &mc)?;
                    write_csv(out.join("trajectory.csv"), &run.events)?;
                    write_json(&out.join("strategy.json"), &run.strategy)?;
                    (Vec::new(), run.summary)
                }
            };
            if !measurements.is_empty() {
                let rows: Vec<_> = measurements.iter().flat_map(|m| measurement_rows(&net, m)).collect();
                write_csv(out.join("measurements.csv"), &rows)?;
            }
            write_json(&out.join("summary.json"), &summary)?;
            println!(
                "{}: {} CIs, {} answered, mean latency {:?}, {} unstable elements",
                spec.name,
                summary.ci_generated,
                summary.ci_answered,
                summary.mean_latency,
                summary.unstable.len()
            );
        }
        Command::Compare { plan, common } => {
            let plan = plan.plan(common.seed)?;
            let table = run_plan(&plan)?;
            let out = out_dir(&common)?;
            write_results(out, &table)?;
            fs::write(out.join("plan.json"), plan.to_json())?;
            for r in normalize(&table.rows, plan.normalization) {
                println!("{:<12} {:<9} T = {:<12.6} normalized {:.4}", r.scenario, r.method, r.mean_t, r.normalized);
            }
            for f in &table.failures {
                eprintln!("failed: {} {} seed {}: {}", f.scenario, f.method, f.seed, f.error);
            }
        }
        Command::Sweep { plan, knob, values, common } => {
            let plan = plan.plan(common.seed)?;
            let (rows, failures) = sweep(&plan, knob, &values)?;
            let out = out_dir(&common)?;
            write_csv(out.join("sweep.csv"), &rows)?;
            if !failures.is_empty() {
                write_csv(out.join("failures.csv"), &failures)?;
            }
            println!("{} rows for {} values of {}", rows.len(), values.len(), knob.as_str());
        }
        Command::Validate { scenario, strategy, common } => {
            let spec = scenario.spec(common.seed)?;
            let net = spec.build()?;
            let out = out_dir(&common)?;
            let mut report = serde_json::json!({
                "scenario": spec.name,
                "nodes": net.n(),
                "links": net.links(),
                "ci_commodities": net.n_ci(),
                "di_commodities": net.n_di(),
            });
            let mut ok = true;
            if let Some(p) = &strategy {
                let s = load_strategy(&net, p)?;
                let validity = validate_strategy(&net, &s);
                let loops = check_loop_free(&net, &s);
                ok = validity.is_valid() && loops.loop_free();
                report["valid"] = validity.is_valid().into();
                report["loop_free"] = loops.loop_free().into();
                report["violations"] = serde_json::to_value(&validity.violations)?;
                if ok {
                    let st = solve_traffic(&net, &s)?;
                    report["T"] = cost_breakdown(&net, &st).map(|b| b.total()).unwrap_or(f64::INFINITY).into();
                    if let Ok(ms) = broadcast_marginals(&net, &s, &st, None) {
                        report["residual"] = check_modified_condition(&net, &s, &ms, 1e-6).residual.into();
                    }
                }
            }
            write_json(&out.join("validation.json"), &report)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !ok {
                bail!("strategy is not a valid loop-free strategy");
            }
        }
    }
    Ok(())
}

fn load_strategy(net: &Network, path: &Path) -> Result<Strategy> {
    let s: Strategy = serde_json::from_str(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?;
    if !s.dims_match(net) {
        bail!("strategy in {} does not match the scenario dimensions", path.display());
    }
    Ok(s)
}
