//! Convex cost families for links, CPUs and caches.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from a queueing pole at which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-12;

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied cost family given as a (value, derivative) pair.
pub struct CustomCost {
    name: String,
    value: Box<ScalarFn>,
    derivative: Box<ScalarFn>,
    limit: f64,
}

impl fmt::Debug for CustomCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomCost").field("name", &self.name).field("limit", &self.limit).finish()
    }
}

impl CustomCost {
    /// Registers a cost family defined on `[0, limit)`.
    ///
    /// The pair is sampled on a grid: the value must start at zero, be
    /// non-decreasing and convex, and the derivative must agree with
    /// finite differences of the value.
    pub fn register(
        name: impl Into<String>,
        limit: f64,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Arc<Self>> {
        let name = name.into();
        if !(limit > 0.0) {
            return Err(Error::CostFamily(format!("{name}: domain limit must be positive")));
        }
        if value(0.0).abs() > 1e-12 {
            return Err(Error::CostFamily(format!("{name}: value at 0 is {}", value(0.0))));
        }
        let top = if limit.is_finite() { 0.95 * limit } else { 100.0 };
        const SAMPLES: usize = 64;
        let xs: Vec<f64> = (0..=SAMPLES).map(|s| top * s as f64 / SAMPLES as f64).collect();
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (da, db) = (derivative(a), derivative(b));
            if da < -1e-12 {
                return Err(Error::CostFamily(format!("{name}: decreasing at {a}")));
            }
            if db < da - 1e-9 * da.abs().max(1.0) {
                return Err(Error::CostFamily(format!("{name}: not convex on [{a},{b}]")));
            }
            let slope = (value(b) - value(a)) / (b - a);
            if slope < da - 1e-6 * da.abs().max(1.0) || slope > db + 1e-6 * db.abs().max(1.0) {
                return Err(Error::CostFamily(format!(
                    "{name}: derivative inconsistent with value on [{a},{b}]"
                )));
            }
        }
        Ok(Arc::new(CustomCost { name, value: Box::new(value), derivative: Box::new(derivative), limit }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Cost function of a single link, CPU or cache.
///
/// `Queueing` with parameter `p` is the M/M/1 occupancy `x / (1/p - x)`;
/// its derivative at zero load equals `p`. `Linear` is `p * x`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CostFn {
    Queueing { param: f64 },
    #[serde(alias = "linear_cache")]
    Linear { param: f64 },
    #[serde(skip)]
    Custom(Arc<CustomCost>),
}

/// Why a cost could not be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleReached {
    pub load: f64,
    pub capacity: f64,
}

impl CostFn {
    pub fn queueing(param: f64) -> Self {
        CostFn::Queueing { param }
    }

    pub fn linear(param: f64) -> Self {
        CostFn::Linear { param }
    }

    /// Load at which the cost becomes infinite.
    pub fn capacity(&self) -> f64 {
        match self {
            CostFn::Queueing { param } => 1.0 / param,
            CostFn::Linear { .. } => f64::INFINITY,
            CostFn::Custom(c) => c.limit,
        }
    }

    fn guard(&self, x: f64) -> Result<(), PoleReached> {
        let cap = self.capacity();
        if cap.is_finite() && !(x < cap - POLE_GUARD) {
            Err(PoleReached { load: x, capacity: cap })
        } else {
            Ok(())
        }
    }

    pub fn value(&self, x: f64) -> Result<f64, PoleReached> {
        self.guard(x)?;
        Ok(match self {
            CostFn::Queueing { param } => x / (1.0 / param - x),
            CostFn::Linear { param } => param * x,
            CostFn::Custom(c) => (c.value)(x),
        })
    }

    pub fn derivative(&self, x: f64) -> Result<f64, PoleReached> {
        self.guard(x)?;
        Ok(match self {
            CostFn::Queueing { param } => {
                let mu = 1.0 / param;
                mu / ((mu - x) * (mu - x))
            }
            CostFn::Linear { param } => *param,
            CostFn::Custom(c) => (c.derivative)(x),
        })
    }

    /// Derivative with the load clamped just below the pole; used when the
    /// load is a noisy measurement rather than a fluid value.
    pub fn derivative_clamped(&self, x: f64) -> f64 {
        let cap = self.capacity();
        let x = if cap.is_finite() { x.min(cap * (1.0 - 1e-3)) } else { x };
        self.derivative(x.max(0.0)).unwrap_or(f64::INFINITY)
    }

    pub fn value_clamped(&self, x: f64) -> f64 {
        let cap = self.capacity();
        let x = if cap.is_finite() { x.min(cap * (1.0 - 1e-3)) } else { x };
        self.value(x.max(0.0)).unwrap_or(f64::INFINITY)
    }

    /// Marginal cost at zero load.
    pub fn zero_load_marginal(&self) -> f64 {
        self.derivative(0.0).expect("zero load is in every domain")
    }
}
