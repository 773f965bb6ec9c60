//! Benchmarks, regret curves, trace property checks and scaling fits.

mod fit;
mod properties;
mod regret;
mod report;

pub use fit::{fit_scaling_exponent, ScalingFit};
pub use properties::{
    consistency_check, drvu_check, equilibrium_shift_trace_check, lipschitz_check, run_checks,
    rvu_check, smoothing_cost_check, stability_check, worst_case_comparator, CheckKind,
    CheckOutcome, DrvuConstants, PropertyVerdict, RvuConstants, BOUND_SLACK, CONSISTENCY_TOL,
};
pub use regret::{
    approx_regret, benchmark_revenues, best_fixed_price, column, dynamic_regret,
    equilibrium_benchmark, static_regret, FixedBenchmark, Objective, DEFAULT_GRID_POINTS,
};
pub use report::{build_report, BenchmarkKind, RegretReport, ReportOptions, ReportSummary};
