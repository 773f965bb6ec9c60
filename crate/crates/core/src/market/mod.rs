//! Demand oracles, revenue evaluation and the gradient feedback channels
//! that learners consume.

mod demand;
mod feedback;
mod smoothed;

pub use demand::{elasticity_fd, Ces, DemandModel, Igs, ModelSpec, OwnPriceCurve};
pub use feedback::{
    adjusted_gradient, exact_log_gradient, log_revenue, revenue, smoothed_gradient,
    FeedbackChannel, SmoothingParams,
};
pub use smoothed::{smoothed_log_revenue, SmoothedCurve, DEFAULT_QUADRATURE_POINTS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step used by finite-difference elasticity probes, in log-price.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// A strictly positive price vector together with its element-wise log.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePoint {
    prices: Vec<f64>,
    log_prices: Vec<f64>,
}

impl PricePoint {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if let Some(p) = prices.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Domain(format!("prices must be positive, got {p}")));
        }
        let log_prices = prices.iter().map(|p| p.ln()).collect();
        Ok(PricePoint { prices, log_prices })
    }

    pub fn from_log(log_prices: Vec<f64>) -> Result<Self> {
        if let Some(lp) = log_prices.iter().find(|lp| !lp.is_finite()) {
            return Err(Error::Domain(format!("log-price must be finite, got {lp}")));
        }
        let prices = log_prices.iter().map(|lp| lp.exp()).collect();
        Ok(PricePoint { prices, log_prices })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn log_prices(&self) -> &[f64] {
        &self.log_prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Closed price interval `[min, max]`; learners act on its log image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceDomain {
    pub min: f64,
    pub max: f64,
}

impl Default for PriceDomain {
    fn default() -> Self {
        PriceDomain { min: 1e-2, max: 1e2 }
    }
}

impl PriceDomain {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        let d = PriceDomain { min, max };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min > 0.0 && self.min < self.max)
        {
            return Err(Error::Config(format!(
                "price domain must satisfy 0 < min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn log_min(&self) -> f64 {
        self.min.ln()
    }

    pub fn log_max(&self) -> f64 {
        self.max.ln()
    }

    pub fn log_midpoint(&self) -> f64 {
        0.5 * (self.log_min() + self.log_max())
    }

    /// Width of the log-price interval.
    pub fn log_diameter(&self) -> f64 {
        self.log_max() - self.log_min()
    }

    /// Euclidean projection of a log-price onto the domain.
    pub fn project_log(&self, log_price: f64) -> f64 {
        log_price.clamp(self.log_min(), self.log_max())
    }

    pub fn contains(&self, price: f64) -> bool {
        price >= self.min && price <= self.max
    }

    /// `points` evenly spaced log-prices from `log_min` to `log_max` inclusive.
    pub fn log_grid(&self, points: usize) -> Vec<f64> {
        let (lo, hi) = (self.log_min(), self.log_max());
        match points {
            0 => Vec::new(),
            1 => vec![lo],
            _ => {
                let step = (hi - lo) / (points - 1) as f64;
                (0..points)
                    .map(|k| if k + 1 == points { hi } else { lo + step * k as f64 })
                    .collect()
            }
        }
    }
}
