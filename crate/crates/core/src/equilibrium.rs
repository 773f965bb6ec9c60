//! Walrasian equilibrium prices for gross-substitutes markets and supply-drift
//! metrics used by the dynamic benchmark.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{DemandModel, PriceDomain, PricePoint};

/// Per-round supply vectors `w^1 .. w^T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplySchedule {
    rounds: Vec<Vec<f64>>,
    /// Generator description, e.g. `static`, `drift`, `random_walk`.
    pub generator: String,
    pub seed: u64,
}

impl SupplySchedule {
    pub fn new(rounds: Vec<Vec<f64>>, generator: impl Into<String>, seed: u64) -> Result<Self> {
        if let Some(first) = rounds.first() {
            let n = first.len();
            for (t, w) in rounds.iter().enumerate() {
                if w.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        actual: w.len(),
                    });
                }
                if let Some(v) = w.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(Error::Domain(format!(
                        "supply at round {} must be positive, got {v}",
                        t + 1
                    )));
                }
            }
        }
        Ok(SupplySchedule {
            rounds,
            generator: generator.into(),
            seed,
        })
    }

    pub fn constant(w: Vec<f64>, horizon: usize) -> Result<Self> {
        Self::new(vec![w; horizon], "static", 0)
    }

    pub fn rounds(&self) -> &[Vec<f64>] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Supply vector of round `t` (1-based).
    pub fn at(&self, t: usize) -> &[f64] {
        &self.rounds[t - 1]
    }
}

/// Cumulative log-supply drift `W_T = sum_t || ln w^t - ln w^{t-1} ||_1`.
pub fn supply_variation(schedule: &SupplySchedule) -> f64 {
    log_path_length(schedule.rounds())
}

pub(crate) fn log_path_length(rounds: &[Vec<f64>]) -> f64 {
    rounds
        .windows(2)
        .map(|pair| {
            pair[0]
                .iter()
                .zip(&pair[1])
                .map(|(a, b)| (b.ln() - a.ln()).abs())
                .sum::<f64>()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquilibriumSolverConfig {
    /// Step multiplier on log-excess-demand; `None` means `0.5 / E` with `E` the
    /// model's nominal elasticity.
    pub damping: Option<f64>,
    /// Convergence threshold on `max_i |ln x_i - ln w_i|`.
    pub tol: f64,
    pub max_iter: usize,
    pub domain: PriceDomain,
}

impl Default for EquilibriumSolverConfig {
    fn default() -> Self {
        EquilibriumSolverConfig {
            damping: None,
            tol: 1e-8,
            max_iter: 100_000,
            domain: PriceDomain::default(),
        }
    }
}

impl EquilibriumSolverConfig {
    fn validate(&self) -> Result<()> {
        if let Some(k) = self.damping {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Config(format!("damping must be positive, got {k}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        self.domain.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub point: PricePoint,
    /// `max_i |ln x_i(p) - ln w_i|` at the returned prices.
    pub residual: f64,
    pub iterations: usize,
}

fn log_excess(model: &DemandModel, log_prices: &[f64], log_supply: &[f64], out: &mut [f64]) {
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = model.log_demand_unchecked(j, log_prices) - log_supply[j];
    }
}

fn check_supply(model: &DemandModel, supply: &[f64]) -> Result<()> {
    if supply.len() != model.n() {
        return Err(Error::LengthMismatch {
            expected: model.n(),
            actual: supply.len(),
        });
    }
    if let Some(v) = supply.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!("supply must be positive, got {v}")));
    }
    Ok(())
}

/// Equilibrium prices for supply `supply`, starting from the domain midpoint.
pub fn tatonnement(
    model: &DemandModel,
    supply: &[f64],
    cfg: &EquilibriumSolverConfig,
) -> Result<Equilibrium> {
    tatonnement_from(model, supply, cfg, None)
}

/// As [`tatonnement`], optionally warm-started from `start` (log-prices).
pub fn tatonnement_from(
    model: &DemandModel,
    supply: &[f64],
    cfg: &EquilibriumSolverConfig,
    start: Option<&[f64]>,
) -> Result<Equilibrium> {
    cfg.validate()?;
    check_supply(model, supply)?;
    if let DemandModel::Igs(igs) = model {
        return igs_equilibrium(model, igs.elasticity(), supply, cfg);
    }

    let n = model.n();
    let domain = cfg.domain;
    let damping = cfg.damping.unwrap_or(0.5 / model.nominal_elasticity());
    let log_supply: Vec<f64> = supply.iter().map(|w| w.ln()).collect();
    let mut x: Vec<f64> = match start {
        Some(s) if s.len() == n => s.iter().map(|v| domain.project_log(*v)).collect(),
        Some(s) => {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: s.len(),
            })
        }
        None => vec![domain.log_midpoint(); n],
    };
    let mut excess = vec![0.0; n];
    for iterations in 0..=cfg.max_iter {
        log_excess(model, &x, &log_supply, &mut excess);
        let residual = excess.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        if residual < cfg.tol {
            return Ok(Equilibrium {
                point: PricePoint::from_log(x)?,
                residual,
                iterations,
            });
        }
        if !residual.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite excess demand after {iterations} iterations"
            )));
        }
        if iterations == cfg.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual,
            });
        }
        let mut moved = false;
        for (xi, e) in x.iter_mut().zip(&excess) {
            let next = domain.project_log(*xi + damping * e);
            moved |= next != *xi;
            *xi = next;
        }
        if !moved {
            return Err(Error::OutsideDomain { residual });
        }
    }
    unreachable!("loop returns on its last iteration")
}

// ln x = ln c + A ln p with A = E (1 1^T) - 2E I. For n >= 3 A is invertible:
// A^{-1} = -1/(2E) (I - 1 1^T / (n - 2)). For n = 2 it is singular.
fn igs_equilibrium(
    model: &DemandModel,
    elasticity: f64,
    supply: &[f64],
    cfg: &EquilibriumSolverConfig,
) -> Result<Equilibrium> {
    let n = model.n();
    if n == 2 {
        return Err(Error::UnsupportedVariant(
            "IGS equilibrium with n = 2 is degenerate (singular log-linear system); use CES".into(),
        ));
    }
    let scale = model.as_igs().expect("checked variant").scale();
    let rhs: Vec<f64> = supply
        .iter()
        .zip(scale)
        .map(|(w, c)| w.ln() - c.ln())
        .collect();
    let total: f64 = rhs.iter().sum();
    let log_prices: Vec<f64> = rhs
        .iter()
        .map(|b| -(b - total / (n as f64 - 2.0)) / (2.0 * elasticity))
        .collect();
    let mut excess = vec![0.0; n];
    let log_supply: Vec<f64> = supply.iter().map(|w| w.ln()).collect();
    log_excess(model, &log_prices, &log_supply, &mut excess);
    let residual = excess.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    if log_prices
        .iter()
        .any(|lp| *lp < cfg.domain.log_min() || *lp > cfg.domain.log_max())
    {
        return Err(Error::OutsideDomain { residual });
    }
    if residual >= cfg.tol {
        return Err(Error::NonConvergence {
            iterations: 0,
            residual,
        });
    }
    Ok(Equilibrium {
        point: PricePoint::from_log(log_prices)?,
        residual,
        iterations: 0,
    })
}

/// Per-round equilibria; each solve is warm-started from the previous round
/// and repeated supplies reuse the previous solution.
pub fn equilibrium_sequence(
    model: &DemandModel,
    schedule: &SupplySchedule,
    cfg: &EquilibriumSolverConfig,
) -> Result<Vec<Equilibrium>> {
    let mut out: Vec<Equilibrium> = Vec::with_capacity(schedule.len());
    for (idx, w) in schedule.rounds().iter().enumerate() {
        let round = idx + 1;
        let solved = match out.last() {
            Some(prev) if idx > 0 && schedule.rounds()[idx - 1] == *w => Ok(Equilibrium {
                iterations: 0,
                ..prev.clone()
            }),
            Some(prev) => tatonnement_from(model, w, cfg, Some(prev.point.log_prices())),
            None => tatonnement(model, w, cfg),
        }
        .map_err(|e| Error::Round {
            round,
            source: Box::new(e),
        })?;
        out.push(solved);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftCheck {
    /// `max_j |ln p_j^new - ln p_j^old|`.
    pub shift: f64,
    /// `|| ln w_new - ln w_old ||_1`.
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Checks that equilibrium log-prices move by at most the 1-norm of the
/// log-supply change.
pub fn equilibrium_shift_check(
    model: &DemandModel,
    w_old: &[f64],
    w_new: &[f64],
    cfg: &EquilibriumSolverConfig,
) -> Result<ShiftCheck> {
    let old = tatonnement(model, w_old, cfg)?;
    let new = tatonnement_from(model, w_new, cfg, Some(old.point.log_prices()))?;
    let shift = old
        .point
        .log_prices()
        .iter()
        .zip(new.point.log_prices())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let bound: f64 = w_old
        .iter()
        .zip(w_new)
        .map(|(a, b)| (b.ln() - a.ln()).abs())
        .sum();
    let slack = 10.0 * cfg.tol;
    Ok(ShiftCheck {
        shift,
        bound,
        slack,
        pass: shift <= bound + slack,
    })
}
