use std::fmt;

use crate::model::NodeId;

/// Identifies a single commodity: either a computation-interest commodity
/// (indexed into [`crate::model::Network::ci`]) or a data-interest commodity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Commodity {
    Ci(usize),
    Di(usize),
}

impl fmt::Display for Commodity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Commodity::Ci(c) => write!(f, "CI commodity {c}"),
            Commodity::Di(k) => write!(f, "DI commodity {k}"),
        }
    }
}

/// A network element whose cost function can saturate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Element {
    Link(NodeId, NodeId),
    Cpu(NodeId),
    Cache(NodeId),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Link(i, j) => write!(f, "link ({i},{j})"),
            Element::Cpu(i) => write!(f, "cpu at node {i}"),
            Element::Cache(i) => write!(f, "cache at node {i}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("routing loop in {commodity}: {cycle:?}")]
    LoopDetected { commodity: Commodity, cycle: Vec<NodeId> },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("capacity exceeded on {element}: load {load} vs capacity {capacity}")]
    CapacityExceeded { element: Element, load: f64, capacity: f64 },

    #[error("node {node} cannot reach any server of data {data}")]
    Unreachable { node: NodeId, data: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("topology is disconnected")]
    Disconnected,

    #[error("cost family check failed: {0}")]
    CostFamily(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
