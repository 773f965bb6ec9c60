use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ScenarioConfig;
use super::supply::make_supply_schedule;
use super::trace::{RoundRecord, Trace};
use crate::equilibrium::SupplySchedule;
use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::market::revenue;

/// The only interface a seller exposes to the market: post a price, receive a
/// scalar gradient.
pub trait PricingAgent {
    fn post_price(&mut self) -> f64;
    fn receive_feedback(&mut self, gradient: f64) -> Result<()>;
}

impl PricingAgent for Learner {
    fn post_price(&mut self) -> f64 {
        self.price()
    }

    fn receive_feedback(&mut self, gradient: f64) -> Result<()> {
        self.observe(gradient).map(|_| ())
    }
}

/// Builds the configured learners, including the seeded initial-price jitter.
pub fn build_learners(config: &ScenarioConfig) -> Result<Vec<Learner>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let j = config.initial_jitter;
    (0..config.n())
        .map(|i| {
            let s = &config.sellers[i];
            let base = s
                .initial_price
                .map(f64::ln)
                .unwrap_or_else(|| config.domain.log_midpoint());
            let start = if j > 0.0 {
                base + rng.gen_range(-j..=j)
            } else {
                base
            };
            Learner::new(
                s.learner,
                config.step_schedule(i)?,
                config.domain,
                Some(start),
            )
        })
        .collect()
}

pub fn scenario_supply(config: &ScenarioConfig) -> Result<SupplySchedule> {
    let specs: Vec<_> = config.sellers.iter().map(|s| s.supply).collect();
    make_supply_schedule(&specs, config.seed, config.horizon)
}

/// Runs the configured scenario to completion.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Trace> {
    config.validate()?;
    let mut agents = build_learners(config)?;
    let supply = scenario_supply(config)?;
    run_with_agents(config, &mut agents, &supply)
}

/// Round loop over arbitrary agents. Prices are collected from every agent
/// before demand is evaluated, then each agent gets its own gradient only.
pub fn run_with_agents<A: PricingAgent>(
    config: &ScenarioConfig,
    agents: &mut [A],
    supply: &SupplySchedule,
) -> Result<Trace> {
    let n = config.n();
    if agents.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: agents.len(),
        });
    }
    if supply.len() < config.horizon {
        return Err(Error::LengthMismatch {
            expected: config.horizon,
            actual: supply.len(),
        });
    }
    let elasticity = config.feedback_elasticity();
    let smoothing = config.smoothing.as_ref();
    let mut trace = Trace::new(config.clone());
    for t in 1..=config.horizon {
        let prices: Vec<f64> = agents.iter_mut().map(|a| a.post_price()).collect();
        let w = supply.at(t).to_vec();
        let demands = config
            .model
            .demand(&prices)
            .map_err(|e| Error::Round {
                round: t,
                source: Box::new(e),
            })?;
        let revenues: Vec<f64> = (0..n).map(|i| revenue(prices[i], demands[i], w[i])).collect();
        let mut gradients = Vec::with_capacity(n);
        for i in 0..n {
            let g = config.sellers[i]
                .feedback
                .gradient(&config.model, demands[i], w[i], elasticity, smoothing)
                .map_err(|e| Error::Feedback {
                    round: t,
                    message: format!("seller {i}: {e}"),
                })?;
            gradients.push(g);
        }
        for (i, (a, &g)) in agents.iter_mut().zip(&gradients).enumerate() {
            a.receive_feedback(g).map_err(|e| Error::Feedback {
                round: t,
                message: format!("seller {i}: {e}"),
            })?;
        }
        trace.push(RoundRecord {
            t,
            prices,
            demands,
            revenues,
            gradients,
            supplies: w,
        })?;
    }
    Ok(trace)
}
