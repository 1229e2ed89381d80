//! Packet-level discrete-event simulation of the request/response cycle.
//!
//! Interests travel instantly and sample their next hop from the installed
//! conditional forwarding split. Responses retrace the interest path in
//! reverse through FIFO link servers with exponential service of mean
//! `size * d_ij`; computations queue at CPUs with exponential service of
//! mean `W * c_i`. Under these choices the mean number of packets at an
//! element equals its queueing cost `F / (1/d - F)`.
//!
//! A controller is called at the end of every measurement window and may
//! install a new strategy and cache content.

mod measure;

pub use measure::{measurement_rows, Measurement, MeasurementRow};

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Commodity, Element, Error, Result};
use crate::gp::CacheDecision;
use crate::model::{CostFn, LinkId, Network, NodeId, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Arrivals stop at this time.
    pub horizon: f64,
    /// Measurement window and controller period.
    pub window: f64,
    /// Windows ending before this time are left out of the summary.
    pub warmup: f64,
    /// Consecutive saturated windows before an element is flagged unstable.
    pub patience: usize,
    /// Keep serving after the horizon until every packet is delivered.
    pub drain: bool,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { horizon: 1000.0, window: 10.0, warmup: 0.0, patience: 10, drain: true, seed: 0 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0) || !(self.horizon > self.warmup) || self.warmup < 0.0 {
            return Err(Error::InvalidParams("need window > 0 and horizon > warmup >= 0".into()));
        }
        Ok(())
    }
}

/// Strategy and cache content in force at the nodes.
#[derive(Debug, Clone)]
pub struct Installed {
    pub strategy: Strategy,
    pub cache: CacheDecision,
}

/// Invoked at every window boundary.
pub trait Controller {
    fn on_window(&mut self, net: &Network, m: &Measurement, current: &Installed) -> Option<Installed>;
}

/// Never changes the installed state.
pub struct StaticController;

impl Controller for StaticController {
    fn on_window(&mut self, _: &Network, _: &Measurement, _: &Installed) -> Option<Installed> {
        None
    }
}

impl<F: FnMut(&Network, &Measurement, &Installed) -> Option<Installed>> Controller for F {
    fn on_window(&mut self, net: &Network, m: &Measurement, current: &Installed) -> Option<Installed> {
        self(net, m, current)
    }
}

/// An element whose server stayed saturated while its queue kept growing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnstableQueue {
    pub element: Element,
    /// Window at which the patience ran out.
    pub window: usize,
}

/// End-of-run event log summary.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SimSummary {
    pub end_time: f64,
    pub events: u64,
    pub ci_generated: u64,
    pub ci_answered: u64,
    pub ci_cache_hits: u64,
    pub di_generated: u64,
    pub di_cache_hits: u64,
    pub dr_delivered: u64,
    /// Interests that met an empty row and were absorbed in place.
    pub fallbacks: u64,
    /// CIs still unanswered when the run ended.
    pub unanswered: u64,
    /// CIs that received more than one response; always 0.
    pub duplicate_answers: u64,
    pub drained: bool,
    pub mean_latency: Option<f64>,
    /// Time-average packets at each link over the measured windows.
    pub link_occupancy: Vec<f64>,
    pub cpu_occupancy: Vec<f64>,
    pub unstable: Vec<UnstableQueue>,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub measurements: Vec<Measurement>,
    pub summary: SimSummary,
    pub installed: Installed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Arrival,
    LinkDone(LinkId),
    CpuDone(NodeId),
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Timed {
    time: f64,
    seq: u64,
    event: Event,
}

impl Eq for Timed {}

impl Ord for Timed {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Timed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Cr,
    Dr,
}

#[derive(Debug)]
struct Response {
    job: usize,
    kind: Kind,
    size: f64,
    /// Remaining reverse path; the next hop is at the end.
    back: Vec<NodeId>,
    /// For a DR: the reverse CI path the result will take afterwards.
    ci_back: Vec<NodeId>,
}

#[derive(Debug)]
struct Job {
    c: usize,
    created: f64,
    answered: bool,
}

/// A FIFO single-server queue with time-weighted occupancy accounting.
#[derive(Debug)]
struct Server<T> {
    queue: VecDeque<T>,
    last: f64,
    area: f64,
    busy: f64,
    done: f64,
    saturated: usize,
    last_len: usize,
    flagged: bool,
}

impl<T> Server<T> {
    fn new() -> Self {
        Server { queue: VecDeque::new(), last: 0.0, area: 0.0, busy: 0.0, done: 0.0, saturated: 0, last_len: 0, flagged: false }
    }

    fn advance(&mut self, now: f64) {
        let dt = now - self.last;
        self.area += dt * self.queue.len() as f64;
        if !self.queue.is_empty() {
            self.busy += dt;
        }
        self.last = now;
    }
}

fn exp_sample(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    if mean > 0.0 {
        Exp::new(1.0 / mean).expect("positive rate").sample(rng)
    } else {
        0.0
    }
}

/// Mean per-unit service time of a queueing element; other cost families
/// serve instantly.
fn unit_service(cost: &CostFn) -> f64 {
    match cost {
        CostFn::Queueing { param } => *param,
        _ => 0.0,
    }
}

/// Cumulative forwarding split of one row; `None` if the row is empty.
fn cumulative(row: &[f64]) -> Option<Vec<f64>> {
    let mut acc = 0.0;
    let out: Vec<f64> = row.iter().map(|p| {
        acc += p.max(0.0);
        acc
    })
    .collect();
    (acc > 0.0).then_some(out)
}

fn pick(cum: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u = rng.random::<f64>() * cum[cum.len() - 1];
    cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
}

struct Tables {
    ci: Vec<Option<Vec<f64>>>,
    di: Vec<Option<Vec<f64>>>,
}

impl Tables {
    fn build(net: &Network, s: &Strategy) -> Self {
        let n = net.n();
        Tables {
            ci: (0..net.n_ci() * n).map(|idx| cumulative(&s.ci_phi[net.ci_row(idx / n, idx % n)])).collect(),
            di: (0..net.n_di() * n).map(|idx| cumulative(&s.di_phi[net.di_row(idx / n, idx % n)])).collect(),
        }
    }
}

struct Sim<'a> {
    net: &'a Network,
    config: SimConfig,
    rng: ChaCha8Rng,
    heap: BinaryHeap<Timed>,
    seq: u64,
    now: f64,
    installed: Installed,
    tables: Tables,
    arrivals: Option<(WeightedIndex<f64>, Vec<usize>, f64)>,
    jobs: Vec<Job>,
    links: Vec<Server<Response>>,
    cpus: Vec<Server<(usize, Vec<NodeId>)>>,
    window_ci: Vec<f64>,
    window_di: Vec<f64>,
    window_latency: (f64, u64),
    window_start: f64,
    windows: usize,
    summary: SimSummary,
    latency: (f64, u64),
}

impl<'a> Sim<'a> {
    fn new(net: &'a Network, installed: Installed, config: SimConfig) -> Result<Self> {
        config.validate()?;
        if !installed.strategy.dims_match(net)
            || installed.cache.ci.len() != installed.strategy.ci_y.len()
            || installed.cache.di.len() != installed.strategy.di_y.len()
        {
            return Err(Error::DimensionMismatch("installed state does not fit the network".into()));
        }
        let sources: Vec<usize> = (0..net.rates.len()).filter(|&x| net.rates[x] > 0.0).collect();
        let arrivals = if sources.is_empty() {
            None
        } else {
            let w: Vec<f64> = sources.iter().map(|&x| net.rates[x]).collect();
            let total = w.iter().sum();
            Some((WeightedIndex::new(w).map_err(|e| Error::InvalidParams(e.to_string()))?, sources, total))
        };
        let n = net.n();
        let tables = Tables::build(net, &installed.strategy);
        let mut sim = Sim {
            net,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            heap: BinaryHeap::new(),
            seq: 0,
            now: 0.0,
            installed,
            tables,
            arrivals,
            jobs: Vec::new(),
            links: (0..net.links()).map(|_| Server::new()).collect(),
            cpus: (0..n).map(|_| Server::new()).collect(),
            window_ci: vec![0.0; net.n_ci() * n],
            window_di: vec![0.0; net.n_di() * n],
            window_latency: (0.0, 0),
            window_start: 0.0,
            windows: 0,
            summary: SimSummary::default(),
            latency: (0.0, 0),
        };
        sim.schedule_arrival();
        let w = sim.config.window;
        sim.push(w, Event::Window);
        Ok(sim)
    }

    fn push(&mut self, time: f64, event: Event) {
        self.seq += 1;
        self.heap.push(Timed { time, seq: self.seq, event });
    }

    fn schedule_arrival(&mut self) {
        if let Some((_, _, total)) = &self.arrivals {
            let t = self.now + exp_sample(&mut self.rng, 1.0 / total);
            if t < self.config.horizon {
                self.push(t, Event::Arrival);
            }
        }
    }

    fn run(&mut self, controller: &mut dyn Controller, out: &mut Vec<Measurement>) -> Result<()> {
        while let Some(Timed { time, event, .. }) = self.heap.pop() {
            self.now = time;
            self.summary.events += 1;
            match event {
                Event::Arrival => {
                    let (dist, sources, _) = self.arrivals.as_ref().expect("arrivals scheduled");
                    let idx = sources[dist.sample(&mut self.rng)];
                    self.schedule_arrival();
                    self.new_ci(idx / self.net.n(), idx % self.net.n())?;
                }
                Event::LinkDone(l) => self.link_done(l),
                Event::CpuDone(i) => self.cpu_done(i),
                Event::Window => {
                    let m = self.close_window();
                    if let Some(next) = controller.on_window(self.net, &m, &self.installed) {
                        self.install(next)?;
                    }
                    out.push(m);
                    let next = self.now + self.config.window;
                    if next <= self.config.horizon + 1e-9 {
                        self.push(next, Event::Window);
                    } else if !self.config.drain {
                        break;
                    }
                }
            }
        }
        self.summary.drained = self.heap.is_empty();
        self.summary.end_time = self.now;
        Ok(())
    }

    fn install(&mut self, next: Installed) -> Result<()> {
        if !next.strategy.dims_match(self.net) {
            return Err(Error::DimensionMismatch("controller returned a mis-shaped strategy".into()));
        }
        self.tables = Tables::build(self.net, &next.strategy);
        self.installed = next;
        Ok(())
    }

    fn new_ci(&mut self, c: usize, requester: NodeId) -> Result<()> {
        let net = self.net;
        let n = net.n();
        let job = self.jobs.len();
        self.jobs.push(Job { c, created: self.now, answered: false });
        self.summary.ci_generated += 1;
        let mut cur = requester;
        let mut path = Vec::new();
        loop {
            self.window_ci[c * n + cur] += 1.0;
            if self.installed.cache.ci[c * n + cur] {
                self.summary.ci_cache_hits += 1;
                let r = Response { job, kind: Kind::Cr, size: net.result_size[c], back: path, ci_back: Vec::new() };
                self.forward(r, cur);
                return Ok(());
            }
            let slot = match &self.tables.ci[c * n + cur] {
                Some(cum) => pick(cum, &mut self.rng),
                None => {
                    self.summary.fallbacks += 1;
                    0
                }
            };
            if slot == 0 {
                return self.new_di(job, c, cur, path);
            }
            path.push(cur);
            if path.len() > n {
                return Err(Error::LoopDetected { commodity: Commodity::Ci(c), cycle: path });
            }
            cur = net.topology.neighbors(cur)[slot - 1];
        }
    }

    /// Commits the computation of `job` at `site` and fetches its data.
    fn new_di(&mut self, job: usize, c: usize, site: NodeId, ci_back: Vec<NodeId>) -> Result<()> {
        let net = self.net;
        let n = net.n();
        let k = net.ci_to_di[c];
        self.summary.di_generated += 1;
        let mut cur = site;
        let mut path = Vec::new();
        loop {
            self.window_di[k * n + cur] += 1.0;
            let server = net.server(k, cur);
            if server || self.installed.cache.di[k * n + cur] {
                if !server {
                    self.summary.di_cache_hits += 1;
                }
                break;
            }
            match &self.tables.di[k * n + cur] {
                Some(cum) => {
                    let q = pick(cum, &mut self.rng);
                    path.push(cur);
                    if path.len() > n {
                        return Err(Error::LoopDetected { commodity: Commodity::Di(k), cycle: path });
                    }
                    cur = net.topology.neighbors(cur)[q];
                }
                None => {
                    self.summary.fallbacks += 1;
                    break;
                }
            }
        }
        let r = Response { job, kind: Kind::Dr, size: net.data_size[k], back: path, ci_back };
        self.forward(r, cur);
        Ok(())
    }

    /// Moves a response one hop back along its path, or delivers it.
    fn forward(&mut self, mut r: Response, at: NodeId) {
        match r.back.pop() {
            Some(next) => {
                let l = self.net.topology.link(at, next).expect("paths follow links");
                let server = &mut self.links[l];
                server.advance(self.now);
                let mean = r.size * unit_service(&self.net.costs.link[l]);
                server.queue.push_back(r);
                if server.queue.len() == 1 {
                    let t = self.now + exp_sample(&mut self.rng, mean);
                    self.push(t, Event::LinkDone(l));
                }
            }
            None => match r.kind {
                Kind::Dr => {
                    self.summary.dr_delivered += 1;
                    let c = self.jobs[r.job].c;
                    let server = &mut self.cpus[at];
                    server.advance(self.now);
                    server.queue.push_back((r.job, r.ci_back));
                    if server.queue.len() == 1 {
                        let mean = self.net.workload[c * self.net.n() + at] * unit_service(&self.net.costs.compute[at]);
                        let t = self.now + exp_sample(&mut self.rng, mean);
                        self.push(t, Event::CpuDone(at));
                    }
                }
                Kind::Cr => {
                    let job = &mut self.jobs[r.job];
                    if job.answered {
                        self.summary.duplicate_answers += 1;
                        return;
                    }
                    job.answered = true;
                    self.summary.ci_answered += 1;
                    let lat = self.now - job.created;
                    self.latency.0 += lat;
                    self.latency.1 += 1;
                    self.window_latency.0 += lat;
                    self.window_latency.1 += 1;
                }
            },
        }
    }

    fn link_done(&mut self, l: LinkId) {
        let server = &mut self.links[l];
        server.advance(self.now);
        let r = server.queue.pop_front().expect("busy link has a packet");
        server.done += r.size;
        if let Some(head) = server.queue.front() {
            let mean = head.size * unit_service(&self.net.costs.link[l]);
            let t = self.now + exp_sample(&mut self.rng, mean);
            self.push(t, Event::LinkDone(l));
        }
        let at = self.net.topology.head(l);
        self.forward(r, at);
    }

    fn cpu_done(&mut self, i: NodeId) {
        let n = self.net.n();
        let server = &mut self.cpus[i];
        server.advance(self.now);
        let (job, ci_back) = server.queue.pop_front().expect("busy CPU has a job");
        let c = self.jobs[job].c;
        server.done += self.net.workload[c * n + i];
        if let Some(&(next, _)) = server.queue.front() {
            let cn = self.jobs[next].c;
            let mean = self.net.workload[cn * n + i] * unit_service(&self.net.costs.compute[i]);
            let t = self.now + exp_sample(&mut self.rng, mean);
            self.push(t, Event::CpuDone(i));
        }
        let r = Response { job, kind: Kind::Cr, size: self.net.result_size[c], back: ci_back, ci_back: Vec::new() };
        self.forward(r, i);
    }

    fn close_window(&mut self) -> Measurement {
        let net = self.net;
        let n = net.n();
        let len = self.now - self.window_start;
        let per = |x: f64| if len > 0.0 { x / len } else { 0.0 };
        let patience = self.config.patience;
        let index = self.windows;
        let mut unstable = Vec::new();
        let mut check = |s: &mut ServerStats, element: Element| {
            let busy = per(s.busy);
            if busy >= 0.99 && s.len >= s.last_len && s.len > 0 {
                s.saturated += 1;
            } else {
                s.saturated = 0;
            }
            if s.saturated >= patience && !s.flagged {
                s.flagged = true;
                unstable.push(UnstableQueue { element, window: index });
            }
        };
        let mut link_bits = vec![0.0; net.links()];
        let mut link_occupancy = vec![0.0; net.links()];
        let mut link_busy = vec![0.0; net.links()];
        for (l, s) in self.links.iter_mut().enumerate() {
            s.advance(self.now);
            link_bits[l] = per(s.done);
            link_occupancy[l] = per(s.area);
            link_busy[l] = per(s.busy);
            let mut st = ServerStats::take(s);
            check(&mut st, Element::Link(net.topology.tail(l), net.topology.head(l)));
            st.put(s);
        }
        let mut cpu_work = vec![0.0; n];
        let mut cpu_occupancy = vec![0.0; n];
        let mut cpu_busy = vec![0.0; n];
        for (i, s) in self.cpus.iter_mut().enumerate() {
            s.advance(self.now);
            cpu_work[i] = per(s.done);
            cpu_occupancy[i] = per(s.area);
            cpu_busy[i] = per(s.busy);
            let mut st = ServerStats::take(s);
            check(&mut st, Element::Cpu(i));
            st.put(s);
        }
        self.summary.unstable.extend(unstable);
        let counts = self.installed.cache.counts(n);
        let mut cache_bits = vec![0.0; n];
        for (idx, &x) in self.installed.cache.ci.iter().enumerate() {
            if x {
                cache_bits[idx % n] += net.result_size[idx / n];
            }
        }
        for (idx, &x) in self.installed.cache.di.iter().enumerate() {
            if x {
                cache_bits[idx % n] += net.data_size[idx / n];
            }
        }
        let m = Measurement {
            index,
            t_start: self.window_start,
            t_end: self.now,
            link_bits,
            cpu_work,
            link_occupancy,
            cpu_occupancy,
            link_busy,
            cpu_busy,
            cache_items: counts,
            cache_bits,
            ci_traffic: self.window_ci.iter().map(|&x| per(x)).collect(),
            di_traffic: self.window_di.iter().map(|&x| per(x)).collect(),
            mean_latency: (self.window_latency.1 > 0).then(|| self.window_latency.0 / self.window_latency.1 as f64),
            answered: self.window_latency.1,
        };
        for s in &mut self.links {
            s.area = 0.0;
            s.busy = 0.0;
            s.done = 0.0;
        }
        for s in &mut self.cpus {
            s.area = 0.0;
            s.busy = 0.0;
            s.done = 0.0;
        }
        self.window_ci.iter_mut().for_each(|x| *x = 0.0);
        self.window_di.iter_mut().for_each(|x| *x = 0.0);
        self.window_latency = (0.0, 0);
        self.window_start = self.now;
        self.windows += 1;
        m
    }

    fn finish(&mut self, measurements: &[Measurement]) {
        let counted: Vec<&Measurement> = measurements.iter().filter(|m| m.t_start >= self.config.warmup).collect();
        let avg = |f: &dyn Fn(&Measurement) -> &[f64], len: usize| -> Vec<f64> {
            let mut out = vec![0.0; len];
            for m in &counted {
                for (o, v) in out.iter_mut().zip(f(m)) {
                    *o += v;
                }
            }
            let k = counted.len().max(1) as f64;
            out.iter().map(|x| x / k).collect()
        };
        self.summary.link_occupancy = avg(&|m| &m.link_occupancy, self.net.links());
        self.summary.cpu_occupancy = avg(&|m| &m.cpu_occupancy, self.net.n());
        self.summary.unanswered = self.jobs.iter().filter(|j| !j.answered).count() as u64;
        self.summary.mean_latency = (self.latency.1 > 0).then(|| self.latency.0 / self.latency.1 as f64);
    }
}

/// Saturation bookkeeping detached from a server so the check closure can
/// borrow it mutably alongside the measurement buffers.
struct ServerStats {
    busy: f64,
    len: usize,
    last_len: usize,
    saturated: usize,
    flagged: bool,
}

impl ServerStats {
    fn take<T>(s: &Server<T>) -> Self {
        ServerStats { busy: s.busy, len: s.queue.len(), last_len: s.last_len, saturated: s.saturated, flagged: s.flagged }
    }

    fn put<T>(self, s: &mut Server<T>) {
        s.last_len = self.len;
        s.saturated = self.saturated;
        s.flagged = self.flagged;
    }
}

/// Runs the simulation from `installed`, calling `controller` at every
/// window boundary.
pub fn sim_run(
    net: &Network,
    installed: Installed,
    config: &SimConfig,
    controller: &mut dyn Controller,
) -> Result<SimOutput> {
    let mut sim = Sim::new(net, installed, config.clone())?;
    let mut measurements = Vec::new();
    sim.run(controller, &mut measurements)?;
    sim.finish(&measurements);
    Ok(SimOutput { measurements, summary: sim.summary, installed: sim.installed })
}
