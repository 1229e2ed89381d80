use serde::Serialize;

use crate::model::Network;

/// Window averages collected by the simulator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Response bits per unit time that finished crossing each link.
    pub link_bits: Vec<f64>,
    /// Workload per unit time completed at each CPU.
    pub cpu_work: Vec<f64>,
    /// Time-average packets queued or in service.
    pub link_occupancy: Vec<f64>,
    pub cpu_occupancy: Vec<f64>,
    /// Fraction of the window the server was busy.
    pub link_busy: Vec<f64>,
    pub cpu_busy: Vec<f64>,
    /// Items cached at each node at the window end.
    pub cache_items: Vec<usize>,
    /// Cached bits at each node at the window end.
    pub cache_bits: Vec<f64>,
    /// Interest arrivals per unit time, `[c * n + i]` and `[k * n + i]`.
    pub ci_traffic: Vec<f64>,
    pub di_traffic: Vec<f64>,
    pub mean_latency: Option<f64>,
    /// Responses delivered to requesters during the window.
    pub answered: u64,
}

impl Measurement {
    /// Cost of the measured loads, with each element clamped below its pole.
    pub fn cost(&self, net: &Network) -> f64 {
        let links: f64 = self.link_bits.iter().zip(&net.costs.link).map(|(&f, d)| d.value_clamped(f)).sum();
        let cpus: f64 = self.cpu_work.iter().zip(&net.costs.compute).map(|(&g, c)| c.value_clamped(g)).sum();
        let caches: f64 = self.cache_bits.iter().zip(&net.costs.cache).map(|(&y, b)| b.value_clamped(y)).sum();
        links + cpus + caches
    }
}

/// One line of the measurement CSV (`t,element,metric,value`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementRow {
    pub t: f64,
    pub element: String,
    pub metric: &'static str,
    pub value: f64,
}

/// Flattens a measurement; links are named `i-j`, nodes by their id.
pub fn measurement_rows(net: &Network, m: &Measurement) -> Vec<MeasurementRow> {
    let topo = &net.topology;
    let mut rows = Vec::new();
    let mut push = |element: String, metric, value| rows.push(MeasurementRow { t: m.t_end, element, metric, value });
    for l in 0..topo.link_count() {
        let name = format!("{}-{}", topo.tail(l), topo.head(l));
        push(name.clone(), "flow", m.link_bits[l]);
        push(name, "occupancy", m.link_occupancy[l]);
    }
    for i in topo.nodes() {
        push(i.to_string(), "workload", m.cpu_work[i]);
        push(i.to_string(), "cpu_occupancy", m.cpu_occupancy[i]);
        push(i.to_string(), "cache_items", m.cache_items[i] as f64);
    }
    if let Some(lat) = m.mean_latency {
        push("network".into(), "latency", lat);
    }
    rows
}
