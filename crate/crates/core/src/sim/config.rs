use serde::{Deserialize, Serialize};

use super::supply::SupplySpec;
use crate::equilibrium::EquilibriumSolverConfig;
use crate::error::{Error, Result};
use crate::learners::{make_schedule, Algorithm, ScheduleKind, ScheduleParams, StepSchedule};
use crate::market::{DemandModel, FeedbackChannel, PriceDomain, SmoothingParams};

/// Full description of one simulated market run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: DemandModel,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub domain: PriceDomain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<SmoothingParams>,
    /// Elasticity plugged into smoothed feedback and fixed-horizon step sizes.
    /// Defaults to the model's nominal elasticity (`E` for IGS, `sigma` for CES).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elasticity: Option<f64>,
    /// Half-width of a uniform log-price jitter applied to initial prices.
    #[serde(default)]
    pub initial_jitter: f64,
    pub sellers: Vec<SellerConfig>,
    #[serde(default)]
    pub equilibrium: EquilibriumSolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputPaths>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellerConfig {
    pub learner: Algorithm,
    pub feedback: FeedbackChannel,
    pub step: ScheduleKind,
    /// Starting price; the log-domain midpoint when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_price: Option<f64>,
    pub supply: SupplySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn n(&self) -> usize {
        self.sellers.len()
    }

    pub fn feedback_elasticity(&self) -> f64 {
        self.elasticity
            .unwrap_or_else(|| self.model.nominal_elasticity())
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.sellers.len() != self.model.n() {
            return Err(Error::Config(format!(
                "model has {} goods but {} sellers are configured",
                self.model.n(),
                self.sellers.len()
            )));
        }
        if let Some(e) = self.elasticity {
            if !(e.is_finite() && e > 1.0) {
                return Err(Error::Config(format!("elasticity must exceed 1, got {e}")));
            }
        }
        if !(self.initial_jitter.is_finite() && self.initial_jitter >= 0.0) {
            return Err(Error::Config(format!(
                "initial_jitter must be non-negative, got {}",
                self.initial_jitter
            )));
        }
        if let Some(sp) = &self.smoothing {
            sp.validate()?;
            if sp.discount() >= 1.0 {
                return Err(Error::Config(format!(
                    "smoothing: epsilon * R = {} must be below 1",
                    sp.discount()
                )));
            }
        }
        for (i, s) in self.sellers.iter().enumerate() {
            match s.feedback {
                FeedbackChannel::Exact if !self.model.is_igs() => {
                    return Err(Error::Config(format!(
                        "seller {i}: exact feedback is only available for the IGS model"
                    )))
                }
                FeedbackChannel::Smoothed => match &self.smoothing {
                    None => {
                        return Err(Error::Config(format!(
                            "seller {i}: smoothed feedback requires smoothing parameters"
                        )))
                    }
                    Some(sp) if !(sp.band() > 0.0) => {
                        return Err(Error::Config(format!(
                            "seller {i}: smoothed feedback requires epsilon * r > 0"
                        )))
                    }
                    _ => {}
                },
                _ => {}
            }
            if let Some(p) = s.initial_price {
                if !self.domain.contains(p) {
                    return Err(Error::Config(format!(
                        "seller {i}: initial price {p} outside [{}, {}]",
                        self.domain.min, self.domain.max
                    )));
                }
            }
            s.supply.validate().map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("seller {i}: {msg}")),
                other => other,
            })?;
            self.step_schedule(i)?;
        }
        Ok(())
    }

    /// Resolved step-size schedule of seller `i`.
    pub fn step_schedule(&self, i: usize) -> Result<StepSchedule> {
        let params = ScheduleParams {
            horizon: Some(self.horizon),
            sellers: Some(self.n()),
            elasticity: Some(self.feedback_elasticity()),
            smoothing: self.smoothing,
        };
        make_schedule(self.sellers[i].step, &params).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("seller {i}: {msg}")),
            other => other,
        })
    }
}
