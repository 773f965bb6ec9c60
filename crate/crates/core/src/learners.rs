//! Online learners over a one-dimensional log-price interval.
//!
//! All three algorithms use the squared-distance regularizer, so every update is
//! a projected gradient step. Utilities are maximized (ascent convention).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{PriceDomain, SmoothingParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Projected online gradient ascent.
    Ogd,
    /// Optimistic mirror descent with prediction `M_t = g_{t-1}`.
    Omd,
    /// Optimistic follow-the-regularized-leader with prediction `M_t = g_{t-1}`.
    Oftrl,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Ogd => "ogd",
            Algorithm::Omd => "omd",
            Algorithm::Oftrl => "oftrl",
        }
    }
}

/// Requested step-size rule, before horizon and market constants are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleKind {
    /// `eta_t = t^(-1/2)`.
    InverseSqrt,
    /// `eta = (L n)^(-1/2) T^(-1/4)` with `L = E^2 / (epsilon r)`.
    FixedHorizon,
    Constant { eta: f64 },
}

/// Inputs needed to resolve a [`ScheduleKind`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ScheduleParams {
    pub horizon: Option<usize>,
    pub sellers: Option<usize>,
    pub elasticity: Option<f64>,
    pub smoothing: Option<SmoothingParams>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    InverseSqrt,
    Fixed { eta: f64 },
}

impl StepSchedule {
    /// Step size for round `t` (1-based).
    pub fn rate(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::InverseSqrt => (t.max(1) as f64).sqrt().recip(),
            StepSchedule::Fixed { eta } => eta,
        }
    }

    /// The constant step size, if the schedule has one.
    pub fn fixed_rate(&self) -> Option<f64> {
        match *self {
            StepSchedule::Fixed { eta } => Some(eta),
            StepSchedule::InverseSqrt => None,
        }
    }
}

/// `(L n)^(-1/2) T^(-1/4)`.
pub fn fixed_horizon_rate(lipschitz: f64, sellers: usize, horizon: usize) -> f64 {
    (lipschitz * sellers as f64).sqrt().recip() * (horizon as f64).powf(-0.25)
}

pub fn make_schedule(kind: ScheduleKind, params: &ScheduleParams) -> Result<StepSchedule> {
    match kind {
        ScheduleKind::InverseSqrt => Ok(StepSchedule::InverseSqrt),
        ScheduleKind::Constant { eta } => {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::Config(format!("step size must be positive, got {eta}")));
            }
            Ok(StepSchedule::Fixed { eta })
        }
        ScheduleKind::FixedHorizon => {
            let horizon = params
                .horizon
                .filter(|t| *t > 0)
                .ok_or_else(|| Error::Config("fixed-horizon step size needs the horizon T".into()))?;
            let sellers = params
                .sellers
                .filter(|n| *n > 0)
                .ok_or_else(|| Error::Config("fixed-horizon step size needs n".into()))?;
            let e = params
                .elasticity
                .ok_or_else(|| Error::Config("fixed-horizon step size needs E".into()))?;
            let sp = params.smoothing.ok_or_else(|| {
                Error::Config("fixed-horizon step size needs smoothing parameters".into())
            })?;
            if !(sp.band() > 0.0) {
                return Err(Error::DegenerateSmoothing(sp.band()));
            }
            Ok(StepSchedule::Fixed {
                eta: fixed_horizon_rate(sp.lipschitz(e), sellers, horizon),
            })
        }
    }
}

/// One projected ascent step in log-price.
pub fn projected_ascent(domain: &PriceDomain, log_price: f64, eta: f64, gradient: f64) -> f64 {
    domain.project_log(log_price + eta * gradient)
}

/// Per-seller learner state.
#[derive(Debug, Clone, PartialEq)]
pub struct Learner {
    algorithm: Algorithm,
    schedule: StepSchedule,
    domain: PriceDomain,
    initial: f64,
    /// Feedback rounds consumed so far.
    round: usize,
    play: f64,
    secondary: f64,
    cumulative: f64,
    last_gradient: f64,
}

impl Learner {
    /// `initial_log_price` defaults to the midpoint of the log domain.
    pub fn new(
        algorithm: Algorithm,
        schedule: StepSchedule,
        domain: PriceDomain,
        initial_log_price: Option<f64>,
    ) -> Result<Self> {
        domain.validate()?;
        let initial = match initial_log_price {
            Some(x) if !x.is_finite() => {
                return Err(Error::Config(format!("initial log-price must be finite, got {x}")))
            }
            Some(x) => domain.project_log(x),
            None => domain.log_midpoint(),
        };
        Ok(Learner {
            algorithm,
            schedule,
            domain,
            initial,
            round: 0,
            play: initial,
            secondary: initial,
            cumulative: 0.0,
            last_gradient: 0.0,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn schedule(&self) -> StepSchedule {
        self.schedule
    }

    pub fn domain(&self) -> &PriceDomain {
        &self.domain
    }

    pub fn initial_log_price(&self) -> f64 {
        self.initial
    }

    /// Log-price to post in the upcoming round.
    pub fn log_price(&self) -> f64 {
        self.play
    }

    pub fn price(&self) -> f64 {
        self.play.exp()
    }

    /// Secondary iterate `y_t` (OMD); equals the play for the other algorithms.
    pub fn secondary(&self) -> f64 {
        match self.algorithm {
            Algorithm::Omd => self.secondary,
            _ => self.play,
        }
    }

    /// Sum of every gradient observed so far.
    pub fn cumulative_gradient(&self) -> f64 {
        self.cumulative
    }

    /// Optimistic prediction for the next round: the last observed gradient.
    pub fn prediction(&self) -> f64 {
        self.last_gradient
    }

    pub fn rounds_observed(&self) -> usize {
        self.round
    }

    /// Consume the gradient of the current round and move to the next play.
    pub fn observe(&mut self, gradient: f64) -> Result<f64> {
        let t = self.round + 1;
        if !gradient.is_finite() {
            return Err(Error::Feedback {
                round: t,
                message: format!("gradient must be finite, got {gradient}"),
            });
        }
        let eta = self.schedule.rate(t);
        let eta_next = self.schedule.rate(t + 1);
        match self.algorithm {
            Algorithm::Ogd => {
                self.play = projected_ascent(&self.domain, self.play, eta, gradient);
            }
            Algorithm::Omd => {
                self.secondary = projected_ascent(&self.domain, self.secondary, eta, gradient);
                self.play = projected_ascent(&self.domain, self.secondary, eta_next, gradient);
            }
            Algorithm::Oftrl => {
                self.play = projected_ascent(
                    &self.domain,
                    self.initial,
                    eta_next,
                    self.cumulative + gradient + gradient,
                );
            }
        }
        self.cumulative += gradient;
        self.last_gradient = gradient;
        self.round = t;
        Ok(self.play)
    }
}
