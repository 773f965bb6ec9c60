use serde::{Deserialize, Serialize};

use crate::equilibrium::{equilibrium_sequence, EquilibriumSolverConfig};
use crate::error::{Error, Result};
use crate::market::{revenue, OwnPriceCurve, SmoothingParams};
use crate::sim::Trace;

pub const DEFAULT_GRID_POINTS: usize = 10_000;

/// What the fixed-price benchmark maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Cumulative log-revenue; concave in log-price for both demand models.
    #[default]
    LogRevenue,
    /// Cumulative raw revenue, found by exhaustive scan.
    Revenue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedBenchmark {
    pub log_price: f64,
    pub price: f64,
    /// Cumulative objective value at the benchmark.
    pub value: f64,
    pub grid_index: usize,
    pub grid_points: usize,
    pub objective: Objective,
}

fn check_seller(trace: &Trace, i: usize) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if i >= trace.sellers() {
        return Err(Error::Domain(format!(
            "seller {i} out of range for {} sellers",
            trace.sellers()
        )));
    }
    Ok(())
}

struct Counterfactual {
    curves: Vec<OwnPriceCurve>,
    log_supply: Vec<f64>,
}

impl Counterfactual {
    fn new(trace: &Trace, i: usize) -> Self {
        let model = trace.model();
        let mut log_prices = vec![0.0; trace.sellers()];
        let mut curves = Vec::with_capacity(trace.len());
        let mut log_supply = Vec::with_capacity(trace.len());
        for r in trace.rounds() {
            for (slot, p) in log_prices.iter_mut().zip(&r.prices) {
                *slot = p.ln();
            }
            curves.push(model.own_price_curve(i, &log_prices));
            log_supply.push(r.supplies[i].ln());
        }
        Counterfactual { curves, log_supply }
    }

    fn cumulative(&self, q: f64, objective: Objective) -> f64 {
        let per_round = self
            .curves
            .iter()
            .zip(&self.log_supply)
            .map(|(c, lw)| q + c.log_demand(q).min(*lw));
        match objective {
            Objective::LogRevenue => per_round.sum(),
            Objective::Revenue => per_round.map(f64::exp).sum(),
        }
    }
}

/// Best fixed price in hindsight for seller `i` on a uniform log-price grid.
/// Ties go to the lowest price.
pub fn best_fixed_price(
    trace: &Trace,
    i: usize,
    grid_points: usize,
    objective: Objective,
) -> Result<FixedBenchmark> {
    check_seller(trace, i)?;
    if grid_points < 2 {
        return Err(Error::Config("benchmark grid needs at least 2 points".into()));
    }
    let grid = trace.config().domain.log_grid(grid_points);
    let cf = Counterfactual::new(trace, i);
    let f = |k: usize| cf.cumulative(grid[k], objective);

    let (mut lo, mut hi) = (0, grid_points - 1);
    if objective == Objective::LogRevenue {
        while hi - lo > 8 {
            let m1 = lo + (hi - lo) / 3;
            let m2 = hi - (hi - lo) / 3;
            if f(m1) < f(m2) {
                lo = m1 + 1;
            } else {
                hi = m2;
            }
        }
    }
    let mut best = lo;
    let mut best_value = f(lo);
    for k in lo + 1..=hi {
        let v = f(k);
        if v > best_value {
            best = k;
            best_value = v;
        }
    }
    Ok(FixedBenchmark {
        log_price: grid[best],
        price: grid[best].exp(),
        value: best_value,
        grid_index: best,
        grid_points,
        objective,
    })
}

fn discount_factor(sp: Option<&SmoothingParams>) -> Result<f64> {
    match sp {
        None => Ok(1.0),
        Some(sp) => {
            let d = sp.discount();
            if !(0.0..1.0).contains(&d) {
                return Err(Error::DegenerateDiscount(d));
            }
            Ok(1.0 - d)
        }
    }
}

fn regret_curve(
    trace: &Trace,
    i: usize,
    benchmark: impl Fn(usize) -> f64,
    factor: f64,
) -> Result<Vec<f64>> {
    let model = trace.model();
    let mut total = 0.0;
    let mut out = Vec::with_capacity(trace.len());
    let mut prices = vec![0.0; trace.sellers()];
    for (k, r) in trace.rounds().iter().enumerate() {
        prices.copy_from_slice(&r.prices);
        prices[i] = benchmark(k).exp();
        let x = model.demand_of(i, &prices)?;
        let bench = revenue(prices[i], x, r.supplies[i]);
        total += factor * bench - r.revenues[i];
        out.push(total);
    }
    Ok(out)
}

/// Per-round counterfactual revenue of seller `i` at a fixed log-price.
pub fn benchmark_revenues(trace: &Trace, i: usize, log_price: f64) -> Result<Vec<f64>> {
    check_seller(trace, i)?;
    let model = trace.model();
    let mut prices = vec![0.0; trace.sellers()];
    trace
        .rounds()
        .iter()
        .map(|r| {
            prices.copy_from_slice(&r.prices);
            prices[i] = log_price.exp();
            Ok(revenue(prices[i], model.demand_of(i, &prices)?, r.supplies[i]))
        })
        .collect()
}

/// Cumulative regret in revenue units against a fixed log-price.
pub fn static_regret(trace: &Trace, i: usize, benchmark_log_price: f64) -> Result<Vec<f64>> {
    check_seller(trace, i)?;
    regret_curve(trace, i, |_| benchmark_log_price, 1.0)
}

/// As [`static_regret`] with the benchmark revenue discounted by `1 - eps * R`.
pub fn approx_regret(
    trace: &Trace,
    i: usize,
    benchmark_log_price: f64,
    sp: &SmoothingParams,
) -> Result<Vec<f64>> {
    check_seller(trace, i)?;
    let factor = discount_factor(Some(sp))?;
    regret_curve(trace, i, |_| benchmark_log_price, factor)
}

/// Cumulative regret against a per-round log-price sequence. Without smoothing
/// parameters the benchmark is undiscounted.
pub fn dynamic_regret(
    trace: &Trace,
    i: usize,
    benchmark_log_prices: &[f64],
    sp: Option<&SmoothingParams>,
) -> Result<Vec<f64>> {
    check_seller(trace, i)?;
    if benchmark_log_prices.len() != trace.len() {
        return Err(Error::LengthMismatch {
            expected: trace.len(),
            actual: benchmark_log_prices.len(),
        });
    }
    let factor = discount_factor(sp)?;
    regret_curve(trace, i, |k| benchmark_log_prices[k], factor)
}

/// Equilibrium log-prices of every seller for every round of the trace's supply
/// schedule: `result[t][i]`.
pub fn equilibrium_benchmark(
    trace: &Trace,
    cfg: &EquilibriumSolverConfig,
) -> Result<Vec<Vec<f64>>> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let schedule = trace.supply_schedule()?;
    Ok(equilibrium_sequence(trace.model(), &schedule, cfg)?
        .into_iter()
        .map(|e| e.point.log_prices().to_vec())
        .collect())
}

/// Column `i` of a per-round matrix.
pub fn column(rows: &[Vec<f64>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i]).collect()
}
