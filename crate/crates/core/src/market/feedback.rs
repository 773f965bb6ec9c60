use serde::{Deserialize, Serialize};

use super::DemandModel;
use crate::error::{Error, Result};

/// Revenue `p * min(x, w)`.
pub fn revenue(price: f64, demand: f64, supply: f64) -> f64 {
    price * demand.min(supply)
}

pub fn log_revenue(price: f64, demand: f64, supply: f64) -> f64 {
    price.ln() + demand.min(supply).ln()
}

/// Exact derivative of log-revenue in own log-price for the IGS model:
/// `1 - E` while demand is below supply, `1` once supply binds.
pub fn exact_log_gradient(
    model: &DemandModel,
    prices: &[f64],
    i: usize,
    supply: f64,
) -> Result<f64> {
    let igs = model.as_igs().ok_or_else(|| {
        Error::UnsupportedVariant(
            "exact log-revenue gradient needs constant elasticity (IGS); use adjusted or smoothed feedback"
                .into(),
        )
    })?;
    let x = model.demand_of(i, prices)?;
    Ok(if x < supply {
        1.0 - igs.elasticity()
    } else {
        1.0
    })
}

/// Model-free sign feedback: `-1` below supply, `+1` at or above it.
pub fn adjusted_gradient(demand: f64, supply: f64) -> f64 {
    if demand < supply {
        -1.0
    } else {
        1.0
    }
}

/// Smoothing constant and revenue bounds `r <= R` shared by all sellers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingParams {
    pub epsilon: f64,
    pub r_lower: f64,
    pub r_upper: f64,
}

impl SmoothingParams {
    pub fn new(epsilon: f64, r_lower: f64, r_upper: f64) -> Result<Self> {
        let sp = SmoothingParams {
            epsilon,
            r_lower,
            r_upper,
        };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if !(self.r_lower > 0.0 && self.r_lower <= self.r_upper && self.r_upper.is_finite()) {
            return Err(Error::Config(format!(
                "revenue bounds must satisfy 0 < r <= R, got r = {}, R = {}",
                self.r_lower, self.r_upper
            )));
        }
        Ok(())
    }

    /// `epsilon * r`, the log-width of the smoothing band.
    pub fn band(&self) -> f64 {
        self.epsilon * self.r_lower
    }

    /// `epsilon * R`, the multiplicative revenue discount.
    pub fn discount(&self) -> f64 {
        self.epsilon * self.r_upper
    }

    /// Threshold demand `w / exp(epsilon * r)`.
    pub fn threshold(&self, supply: f64) -> f64 {
        supply / self.band().exp()
    }

    /// Lipschitz constant `E^2 / (epsilon * r)` of the smoothed gradient.
    pub fn lipschitz(&self, elasticity: f64) -> f64 {
        elasticity * elasticity / self.band()
    }
}

/// Continuous surrogate for the log-revenue gradient that interpolates
/// linearly in log-demand between `1 - E` (at the threshold) and `1` (at supply).
pub fn smoothed_gradient(
    demand: f64,
    supply: f64,
    elasticity: f64,
    sp: &SmoothingParams,
) -> Result<f64> {
    let band = sp.band();
    if !(band > 0.0) {
        return Err(Error::DegenerateSmoothing(band));
    }
    if !(demand > 0.0 && supply > 0.0) {
        return Err(Error::Domain(format!(
            "demand and supply must be positive, got {demand}, {supply}"
        )));
    }
    let log_w = supply.ln();
    let log_threshold = log_w - band;
    let log_x = demand.ln();
    Ok(if log_x > log_w {
        1.0
    } else if log_x < log_threshold {
        1.0 - elasticity
    } else {
        1.0 + elasticity * (log_x - log_w) / band
    })
}

/// Which gradient signal a seller observes after each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackChannel {
    /// Exact log-revenue gradient; requires the IGS model.
    Exact,
    /// Sign feedback, usable when the elasticity is unknown.
    Adjusted,
    /// Lipschitz-smoothed gradient around the supply kink.
    Smoothed,
}

impl FeedbackChannel {
    pub fn name(&self) -> &'static str {
        match self {
            FeedbackChannel::Exact => "exact",
            FeedbackChannel::Adjusted => "adjusted",
            FeedbackChannel::Smoothed => "smoothed",
        }
    }

    /// Feedback for a seller with realized demand `demand` and supply `supply`.
    pub fn gradient(
        &self,
        model: &DemandModel,
        demand: f64,
        supply: f64,
        elasticity: f64,
        smoothing: Option<&SmoothingParams>,
    ) -> Result<f64> {
        match self {
            FeedbackChannel::Exact => {
                let igs = model.as_igs().ok_or_else(|| {
                    Error::UnsupportedVariant("exact feedback requires the IGS model".into())
                })?;
                Ok(if demand < supply {
                    1.0 - igs.elasticity()
                } else {
                    1.0
                })
            }
            FeedbackChannel::Adjusted => Ok(adjusted_gradient(demand, supply)),
            FeedbackChannel::Smoothed => {
                let sp = smoothing.ok_or_else(|| {
                    Error::Config("smoothed feedback requires smoothing parameters".into())
                })?;
                smoothed_gradient(demand, supply, elasticity, sp)
            }
        }
    }
}
