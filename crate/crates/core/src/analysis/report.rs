use std::io::Write;

use serde::{Deserialize, Serialize};

use super::fit::ScalingFit;
use super::properties::CheckOutcome;
use super::regret::{
    approx_regret, best_fixed_price, column, dynamic_regret, equilibrium_benchmark,
    static_regret, FixedBenchmark, Objective, DEFAULT_GRID_POINTS,
};
use crate::error::Result;
use crate::sim::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    FixedPrice,
    EquilibriumSequence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub grid_points: usize,
    pub objective: Objective,
    /// Also compute dynamic regret against the per-round equilibrium.
    pub dynamic: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            grid_points: DEFAULT_GRID_POINTS,
            objective: Objective::LogRevenue,
            dynamic: true,
        }
    }
}

/// Regret curves of one seller.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub seller: usize,
    pub benchmark: FixedBenchmark,
    /// Per-round equilibrium log-prices of this seller, when computed.
    pub equilibrium: Option<Vec<f64>>,
    pub regret: Vec<f64>,
    pub approx_regret: Option<Vec<f64>>,
    pub dynamic_regret: Option<Vec<f64>>,
    /// Why the dynamic benchmark is missing, if it was requested.
    pub dynamic_note: Option<String>,
    pub fit: Option<ScalingFit>,
    pub checks: Vec<CheckOutcome>,
    /// Squared log-price diameter used as `D` in the RVU constants.
    pub rvu_diameter_sq: f64,
}

/// Compact record of a report for the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub seller: usize,
    pub benchmark_kind: BenchmarkKind,
    pub benchmark_price: f64,
    pub benchmark_objective: Objective,
    pub benchmark_value: f64,
    pub horizon: usize,
    pub regret: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx_regret: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic_regret: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic_note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<ScalingFit>,
    pub checks: Vec<CheckOutcome>,
    pub rvu_diameter_sq: f64,
}

/// Builds the regret report of seller `i`. Dynamic regret is undiscounted when
/// the scenario has no smoothing parameters.
pub fn build_report(trace: &Trace, i: usize, opts: &ReportOptions) -> Result<RegretReport> {
    let config = trace.config();
    let benchmark = best_fixed_price(trace, i, opts.grid_points, opts.objective)?;
    let regret = static_regret(trace, i, benchmark.log_price)?;
    let sp = config.smoothing.as_ref();
    let approx = match sp {
        Some(sp) => Some(approx_regret(trace, i, benchmark.log_price, sp)?),
        None => None,
    };
    let (equilibrium, dynamic, dynamic_note) = if opts.dynamic {
        match equilibrium_benchmark(trace, &config.equilibrium) {
            Ok(path) => {
                let path = column(&path, i);
                let d = dynamic_regret(trace, i, &path, sp)?;
                (Some(path), Some(d), None)
            }
            Err(e) => (None, None, Some(e.to_string())),
        }
    } else {
        (None, None, None)
    };
    Ok(RegretReport {
        seller: i,
        benchmark,
        equilibrium,
        regret,
        approx_regret: approx,
        dynamic_regret: dynamic,
        dynamic_note,
        fit: None,
        checks: Vec::new(),
        rvu_diameter_sq: config.domain.log_diameter().powi(2),
    })
}

impl RegretReport {
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            seller: self.seller,
            benchmark_kind: BenchmarkKind::FixedPrice,
            benchmark_price: self.benchmark.price,
            benchmark_objective: self.benchmark.objective,
            benchmark_value: self.benchmark.value,
            horizon: self.regret.len(),
            regret: self.regret.last().copied().unwrap_or(0.0),
            approx_regret: self.approx_regret.as_ref().and_then(|c| c.last().copied()),
            dynamic_regret: self.dynamic_regret.as_ref().and_then(|c| c.last().copied()),
            dynamic_note: self.dynamic_note.clone(),
            fit: self.fit,
            checks: self.checks.clone(),
            rvu_diameter_sq: self.rvu_diameter_sq,
        }
    }

    /// Per-round CSV. Optional curves are left blank when absent.
    pub fn write_csv<W: Write>(&self, trace: &Trace, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "t",
            "price",
            "demand",
            "revenue",
            "gradient",
            "benchmark",
            "regret",
            "approx_regret",
            "dynamic_regret",
        ])?;
        let opt = |c: &Option<Vec<f64>>, k: usize| {
            c.as_ref().map(|c| c[k].to_string()).unwrap_or_default()
        };
        let i = self.seller;
        for (k, r) in trace.rounds().iter().enumerate() {
            w.write_record([
                r.t.to_string(),
                r.prices[i].to_string(),
                r.demands[i].to_string(),
                r.revenues[i].to_string(),
                r.gradients[i].to_string(),
                self.benchmark.price.to_string(),
                self.regret[k].to_string(),
                opt(&self.approx_regret, k),
                opt(&self.dynamic_regret, k),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
