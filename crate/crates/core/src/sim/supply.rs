use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equilibrium::SupplySchedule;
use crate::error::{Error, Result};

/// Supply generator for one seller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupplySpec {
    Static { level: f64 },
    /// Geometric ramp from `start` at round 1 to `end` at round `T`.
    Drift { start: f64, end: f64 },
    /// Log-space random walk with steps uniform in `[-step_cap, step_cap]`.
    RandomWalk { start: f64, step_cap: f64 },
}

impl SupplySpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("supply {name} must be positive, got {v}")))
            }
        };
        match *self {
            SupplySpec::Static { level } => positive("level", level),
            SupplySpec::Drift { start, end } => {
                positive("start", start)?;
                positive("end", end)
            }
            SupplySpec::RandomWalk { start, step_cap } => {
                positive("start", start)?;
                if !(step_cap.is_finite() && step_cap >= 0.0) {
                    return Err(Error::Config(format!(
                        "random-walk step cap must be non-negative, got {step_cap}"
                    )));
                }
                Ok(())
            }
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            SupplySpec::Static { .. } => "static",
            SupplySpec::Drift { .. } => "drift",
            SupplySpec::RandomWalk { .. } => "random_walk",
        }
    }
}

/// Builds the per-round supply vectors for all sellers. Random walks draw from a
/// ChaCha stream seeded by `seed`, one step per seller per round in seller order.
pub fn make_supply_schedule(
    specs: &[SupplySpec],
    seed: u64,
    horizon: usize,
) -> Result<SupplySchedule> {
    for s in specs {
        s.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current: Vec<f64> = specs
        .iter()
        .map(|s| match *s {
            SupplySpec::Static { level } => level.ln(),
            SupplySpec::Drift { start, .. } | SupplySpec::RandomWalk { start, .. } => start.ln(),
        })
        .collect();
    let mut rounds = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        if t > 1 {
            for (s, log_w) in specs.iter().zip(current.iter_mut()) {
                match *s {
                    SupplySpec::Static { .. } => {}
                    SupplySpec::Drift { start, end } => {
                        let frac = (t - 1) as f64 / (horizon - 1) as f64;
                        *log_w = start.ln() + frac * (end.ln() - start.ln());
                    }
                    SupplySpec::RandomWalk { step_cap, .. } => {
                        if step_cap > 0.0 {
                            *log_w += rng.gen_range(-step_cap..=step_cap);
                        }
                    }
                }
            }
        }
        rounds.push(current.iter().map(|lw| lw.exp()).collect());
    }
    let mut tags: Vec<&str> = specs.iter().map(|s| s.tag()).collect();
    tags.dedup();
    SupplySchedule::new(rounds, tags.join("+"), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::supply_variation;

    #[test]
    fn static_has_zero_variation() {
        let s = make_supply_schedule(&[SupplySpec::Static { level: 1.0 }; 2], 1, 100).unwrap();
        assert_eq!(s.len(), 100);
        assert_eq!(supply_variation(&s), 0.0);
    }

    #[test]
    fn drift_doubling_variation() {
        let spec = SupplySpec::Drift {
            start: 1.0,
            end: 2.0,
        };
        let s = make_supply_schedule(&[spec, spec], 0, 500).unwrap();
        assert!((supply_variation(&s) - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!((s.at(500)[0] - 2.0).abs() < 1e-12);
        assert_eq!(s.at(1)[0], 1.0);
    }

    #[test]
    fn random_walk_bounded_and_reproducible() {
        let spec = SupplySpec::RandomWalk {
            start: 1.0,
            step_cap: 0.05,
        };
        let a = make_supply_schedule(&[spec; 3], 42, 300).unwrap();
        let b = make_supply_schedule(&[spec; 3], 42, 300).unwrap();
        let c = make_supply_schedule(&[spec; 3], 43, 300).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.rounds(), c.rounds());
        assert!(supply_variation(&a) <= 3.0 * 0.05 * 300.0);
        for pair in a.rounds().windows(2) {
            for (x, y) in pair[0].iter().zip(&pair[1]) {
                assert!((y.ln() - x.ln()).abs() <= 0.05 + 1e-12);
            }
        }
    }

    #[test]
    fn negative_step_cap_rejected() {
        let spec = SupplySpec::RandomWalk {
            start: 1.0,
            step_cap: -0.1,
        };
        assert!(matches!(
            make_supply_schedule(&[spec], 0, 10),
            Err(Error::Config(_))
        ));
    }
}
