use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::regret::{column, equilibrium_benchmark};
use crate::equilibrium::{equilibrium_shift_check, EquilibriumSolverConfig};
use crate::error::{Error, Result};
use crate::learners::{Algorithm, StepSchedule};
use crate::market::{smoothed_gradient, PriceDomain, SmoothedCurve, SmoothingParams};
use crate::sim::Trace;

/// Relative slack on the Lipschitz and smoothing-cost bounds.
pub const BOUND_SLACK: f64 = 1e-3;
/// Threshold on the revenue self-consistency error.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// Outcome of one inequality check: pass iff `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    /// Smallest uniform factor on the positive constants that would make the
    /// check pass (DRVU only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_inflation: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl PropertyVerdict {
    fn new(lhs: f64, rhs: f64) -> Self {
        PropertyVerdict {
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs,
            required_inflation: None,
            detail: String::new(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RvuConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl RvuConstants {
    /// Constants for a fixed step `eta`, with `D` the squared log-price diameter.
    pub fn theoretical(algorithm: Algorithm, eta: f64, domain: &PriceDomain) -> Result<Self> {
        let d = domain.log_diameter().powi(2);
        let gamma = match algorithm {
            Algorithm::Oftrl => 1.0 / (4.0 * eta),
            Algorithm::Omd => 1.0 / (8.0 * eta),
            Algorithm::Ogd => {
                return Err(Error::UnsupportedVariant(
                    "RVU constants are only defined for OMD and OFTRL".into(),
                ))
            }
        };
        Ok(RvuConstants {
            alpha: d / eta,
            beta: eta,
            gamma,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrvuConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
}

impl DrvuConstants {
    /// OMD constants: `alpha = D1 / eta` with `D1 = sup (x - y0)^2 / 2`,
    /// `rho = D2 / eta` with `D2` the diameter, `beta = eta`, `gamma = 1 / (8 eta)`.
    pub fn omd(eta: f64, domain: &PriceDomain, initial_log_price: f64) -> Self {
        let reach = (initial_log_price - domain.log_min())
            .abs()
            .max((domain.log_max() - initial_log_price).abs());
        DrvuConstants {
            alpha: 0.5 * reach * reach / eta,
            beta: eta,
            gamma: 1.0 / (8.0 * eta),
            rho: domain.log_diameter() / eta,
        }
    }

    pub fn rvu(&self) -> RvuConstants {
        RvuConstants {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
        }
    }
}

fn seller_series(trace: &Trace, i: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if i >= trace.sellers() {
        return Err(Error::Domain(format!("seller {i} out of range")));
    }
    let q = trace.log_prices(i);
    let u = trace.gradients(i);
    if let Some(t) = u.iter().position(|g| !g.is_finite()) {
        return Err(Error::Feedback {
            round: t + 1,
            message: "missing or non-finite gradient in trace".into(),
        });
    }
    Ok((q, u))
}

/// `sum |u_t - u_{t-1}|^2` with `u_0 = 0`.
fn utility_variation(u: &[f64]) -> f64 {
    let mut prev = 0.0;
    u.iter()
        .map(|&g| {
            let d = g - prev;
            prev = g;
            d * d
        })
        .sum()
}

fn squared_path(q: &[f64]) -> f64 {
    q.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
}

fn path_length(q: &[f64]) -> f64 {
    q.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// The comparator in the domain that maximizes `sum (p* - p_t) u_t`.
pub fn worst_case_comparator(trace: &Trace, i: usize) -> f64 {
    let total: f64 = trace.gradients(i).iter().sum();
    let d = &trace.config().domain;
    if total >= 0.0 {
        d.log_max()
    } else {
        d.log_min()
    }
}

/// Checks `sum (p* - p_t) u_t <= alpha + beta sum |u_t - u_{t-1}|^2 - gamma sum |p_t - p_{t-1}|^2`
/// in log-prices, for seller `i` against the fixed comparator `comparator`.
pub fn rvu_check(
    trace: &Trace,
    i: usize,
    c: &RvuConstants,
    comparator: f64,
) -> Result<PropertyVerdict> {
    let (q, u) = seller_series(trace, i)?;
    let lhs: f64 = q.iter().zip(&u).map(|(p, g)| (comparator - p) * g).sum();
    let rhs = c.alpha + c.beta * utility_variation(&u) - c.gamma * squared_path(&q);
    Ok(PropertyVerdict::new(lhs, rhs))
}

/// Dynamic version of [`rvu_check`] against a per-round comparator path, with
/// the extra `rho * sum |p*_t - p*_{t-1}|` term.
pub fn drvu_check(
    trace: &Trace,
    i: usize,
    c: &DrvuConstants,
    comparators: &[f64],
) -> Result<PropertyVerdict> {
    let (q, u) = seller_series(trace, i)?;
    if comparators.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: q.len(),
            actual: comparators.len(),
        });
    }
    let lhs: f64 = comparators
        .iter()
        .zip(&q)
        .zip(&u)
        .map(|((b, p), g)| (b - p) * g)
        .sum();
    let positive = c.alpha + c.beta * utility_variation(&u) + c.rho * path_length(comparators);
    let damping = c.gamma * squared_path(&q);
    let mut v = PropertyVerdict::new(lhs, positive - damping);
    let needed = if positive > 0.0 {
        (lhs + damping) / positive
    } else {
        f64::INFINITY
    };
    v.required_inflation = Some(if v.pass { 1.0 } else { needed.max(1.0) });
    Ok(v)
}

/// Per-step movement bound implied by the update rule, checked on every round.
/// `lhs` is the largest excess of a move over its bound (`<= 0` passes).
pub fn stability_check(
    trace: &Trace,
    i: usize,
    algorithm: Algorithm,
    schedule: StepSchedule,
    domain: &PriceDomain,
) -> Result<PropertyVerdict> {
    let (q, u) = seller_series(trace, i)?;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_round = 0;
    let mut cumulative = 0.0;
    let mut max_g = 0.0_f64;
    let mut loose_worst = f64::NEG_INFINITY;
    for t in 1..q.len() {
        let g = u[t - 1];
        let g_prev = if t >= 2 { u[t - 2] } else { 0.0 };
        let eta = schedule.rate(t);
        let eta_next = schedule.rate(t + 1);
        max_g = max_g.max(g.abs());
        let bound = match algorithm {
            Algorithm::Ogd => eta * g.abs(),
            Algorithm::Omd => eta * g.abs() + (eta_next * g - eta * g_prev).abs(),
            Algorithm::Oftrl => {
                let before = eta * (cumulative + g_prev);
                cumulative += g;
                let after = eta_next * (cumulative - g + 2.0 * g);
                (after - before).abs()
            }
        };
        let step = (q[t] - q[t - 1]).abs();
        let excess = step - bound - 1e-12 * (1.0 + domain.log_diameter());
        if excess > worst {
            worst = excess;
            worst_round = t + 1;
        }
        if let (Algorithm::Oftrl, Some(eta)) = (algorithm, schedule.fixed_rate()) {
            loose_worst = loose_worst.max(step - 2.0 * eta * max_g);
        }
    }
    if q.len() < 2 {
        worst = 0.0;
    }
    let mut v = PropertyVerdict::new(worst.max(f64::MIN), 0.0);
    let mut detail = format!("worst round {worst_round}");
    if loose_worst.is_finite() {
        detail.push_str(&format!(
            "; 2*eta*max|g| form {}",
            if loose_worst <= 1e-12 { "holds" } else { "violated" }
        ));
    }
    v = v.with_detail(detail);
    Ok(v)
}

/// Checks `|delta_t - delta_{t-1}| <= L * ||p_t - p_{t-1}||_1 * (1 + BOUND_SLACK)` on
/// consecutive rounds, with both smoothed gradients recomputed from the stored
/// demands against the later round's supply. `lhs` is the largest observed ratio.
pub fn lipschitz_check(
    trace: &Trace,
    i: usize,
    elasticity: f64,
    sp: &SmoothingParams,
) -> Result<PropertyVerdict> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let l = sp.lipschitz(elasticity);
    let rounds = trace.rounds();
    let mut worst_ratio = 0.0_f64;
    let mut failures = 0usize;
    for t in 1..rounds.len() {
        let w = rounds[t].supplies[i];
        let before = smoothed_gradient(rounds[t - 1].demands[i], w, elasticity, sp)?;
        let after = smoothed_gradient(rounds[t].demands[i], w, elasticity, sp)?;
        let dp: f64 = rounds[t]
            .prices
            .iter()
            .zip(&rounds[t - 1].prices)
            .map(|(a, b)| (a.ln() - b.ln()).abs())
            .sum();
        let dd = (after - before).abs();
        if dd > l * dp * (1.0 + BOUND_SLACK) {
            failures += 1;
        }
        if dp > 0.0 {
            worst_ratio = worst_ratio.max(dd / dp);
        } else if dd > 0.0 {
            worst_ratio = f64::INFINITY;
        }
    }
    let mut v = PropertyVerdict::new(worst_ratio, l * (1.0 + BOUND_SLACK));
    v.pass = failures == 0;
    Ok(v.with_detail(format!(
        "{} round pairs, {failures} failures",
        rounds.len() - 1
    )))
}

/// Checks `0 <= r - r_sm <= eps * r` at the played price on up to `samples`
/// evenly spaced rounds. Rounds whose smoothed curve cannot be anchored are
/// skipped and counted. `lhs` is the largest gap.
pub fn smoothing_cost_check(
    trace: &Trace,
    i: usize,
    elasticity: f64,
    sp: &SmoothingParams,
    samples: usize,
    quadrature_points: usize,
) -> Result<PropertyVerdict> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let model = trace.model();
    let domain = trace.config().domain;
    let band = sp.band();
    let tol = band * BOUND_SLACK;
    let n = trace.len();
    let step = (n as f64 / samples.max(1) as f64).max(1.0);
    let mut picked: Vec<usize> = (0..samples.max(1))
        .map(|k| ((k as f64 * step) as usize).min(n - 1))
        .collect();
    picked.dedup();
    let (mut max_gap, mut min_gap) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut skipped = 0usize;
    for &k in &picked {
        let r = &trace.rounds()[k];
        let logs: Vec<f64> = r.prices.iter().map(|p| p.ln()).collect();
        let curve = match SmoothedCurve::build(
            model,
            &logs,
            i,
            r.supplies[i],
            elasticity,
            sp,
            &domain,
            quadrature_points,
        ) {
            Ok(c) => c,
            Err(Error::Anchoring(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let q = logs[i].clamp(domain.log_min(), domain.log_max());
        let gap = curve.actual(q) - curve.eval(q)?;
        max_gap = max_gap.max(gap);
        min_gap = min_gap.min(gap);
    }
    if max_gap == f64::NEG_INFINITY {
        return Err(Error::InsufficientData(
            "no round admits an anchored smoothed curve".into(),
        ));
    }
    let mut v = PropertyVerdict::new(max_gap, band + tol);
    v.pass = max_gap <= band + tol && min_gap >= -tol;
    Ok(v.with_detail(format!(
        "min gap {min_gap:.3e}, {} rounds, {skipped} skipped",
        picked.len() - skipped
    )))
}

/// Equilibrium shift bound on consecutive supply changes in the trace, on at
/// most `samples` changes. `lhs` is the largest `shift - bound`.
pub fn equilibrium_shift_trace_check(
    trace: &Trace,
    cfg: &EquilibriumSolverConfig,
    samples: usize,
) -> Result<PropertyVerdict> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let rounds = trace.rounds();
    let changes: Vec<usize> = (1..rounds.len())
        .filter(|&t| rounds[t].supplies != rounds[t - 1].supplies)
        .collect();
    if changes.is_empty() {
        return Ok(PropertyVerdict::new(0.0, 0.0).with_detail("supply never changes"));
    }
    let stride = (changes.len() / samples.max(1)).max(1);
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    let mut checked = 0;
    for &t in changes.iter().step_by(stride) {
        let c = equilibrium_shift_check(
            trace.model(),
            &rounds[t - 1].supplies,
            &rounds[t].supplies,
            cfg,
        )?;
        checked += 1;
        worst = worst.max(c.shift - c.bound);
        if !c.pass {
            failures += 1;
        }
    }
    let mut v = PropertyVerdict::new(worst, 10.0 * cfg.tol);
    v.pass = failures == 0;
    Ok(v.with_detail(format!("{checked} supply changes, {failures} failures")))
}

/// Largest relative error between stored and recomputed demands and revenues.
pub fn consistency_check(trace: &Trace) -> Result<PropertyVerdict> {
    Ok(PropertyVerdict::new(trace.consistency_error()?, CONSISTENCY_TOL))
}

/// Selectable trace checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Consistency,
    Rvu,
    Drvu,
    SmoothingCost,
    Lipschitz,
    Stability,
    EquilibriumShift,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Consistency,
        CheckKind::Rvu,
        CheckKind::Drvu,
        CheckKind::SmoothingCost,
        CheckKind::Lipschitz,
        CheckKind::Stability,
        CheckKind::EquilibriumShift,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Consistency => "consistency",
            CheckKind::Rvu => "rvu",
            CheckKind::Drvu => "drvu",
            CheckKind::SmoothingCost => "smoothing-cost",
            CheckKind::Lipschitz => "lipschitz",
            CheckKind::Stability => "stability",
            CheckKind::EquilibriumShift => "equilibrium-shift",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown check '{s}'; expected one of {}",
                    CheckKind::ALL.map(|k| k.name()).join(", ")
                ))
            })
    }
}

/// One row of a check table; `verdict` is `None` when the check does not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: CheckKind,
    pub seller: Option<usize>,
    pub verdict: Option<PropertyVerdict>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl CheckOutcome {
    fn skipped(check: CheckKind, seller: Option<usize>, note: impl Into<String>) -> Self {
        CheckOutcome {
            check,
            seller,
            verdict: None,
            note: note.into(),
        }
    }

    fn done(check: CheckKind, seller: Option<usize>, verdict: PropertyVerdict) -> Self {
        CheckOutcome {
            check,
            seller,
            verdict: Some(verdict),
            note: String::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.as_ref().is_none_or(|v| v.pass)
    }
}

/// Runs the selected checks (all when `selection` is empty) on every seller
/// where they apply. Consistency always runs.
pub fn run_checks(trace: &Trace, selection: &[CheckKind]) -> Result<Vec<CheckOutcome>> {
    let config = trace.config();
    let wanted = |k: CheckKind| selection.is_empty() || selection.contains(&k);
    let mut out = vec![CheckOutcome::done(
        CheckKind::Consistency,
        None,
        consistency_check(trace)?,
    )];
    if trace.is_empty() {
        return Ok(out);
    }
    let elasticity = config.feedback_elasticity();
    let mut eq_path: Option<Result<Vec<Vec<f64>>>> = None;
    for i in 0..trace.sellers() {
        let seller = &config.sellers[i];
        let schedule = config.step_schedule(i)?;
        let eta = schedule.fixed_rate();
        let optimistic_eta = eta.filter(|_| seller.learner != Algorithm::Ogd);
        if wanted(CheckKind::Rvu) {
            out.push(match optimistic_eta {
                Some(eta) => {
                    let c = RvuConstants::theoretical(seller.learner, eta, &config.domain)?;
                    let p = worst_case_comparator(trace, i);
                    CheckOutcome::done(CheckKind::Rvu, Some(i), rvu_check(trace, i, &c, p)?)
                }
                None => CheckOutcome::skipped(
                    CheckKind::Rvu,
                    Some(i),
                    "needs OMD or OFTRL with a fixed step",
                ),
            });
        }
        if wanted(CheckKind::Drvu) {
            let applicable = seller.learner == Algorithm::Omd && eta.is_some();
            out.push(if !applicable {
                CheckOutcome::skipped(CheckKind::Drvu, Some(i), "needs OMD with a fixed step")
            } else {
                let path = eq_path
                    .get_or_insert_with(|| equilibrium_benchmark(trace, &config.equilibrium));
                match path {
                    Ok(path) => {
                        let eta = eta.unwrap_or_default();
                        let y0 = trace.rounds()[0].prices[i].ln();
                        let c = DrvuConstants::omd(eta, &config.domain, y0);
                        let v = drvu_check(trace, i, &c, &column(path, i))?;
                        CheckOutcome::done(CheckKind::Drvu, Some(i), v)
                    }
                    Err(e) => CheckOutcome::skipped(
                        CheckKind::Drvu,
                        Some(i),
                        format!("equilibrium benchmark unavailable: {e}"),
                    ),
                }
            });
        }
        if wanted(CheckKind::SmoothingCost) {
            out.push(match (&config.smoothing, config.model.is_igs()) {
                (Some(sp), true) if sp.band() > 0.0 => CheckOutcome::done(
                    CheckKind::SmoothingCost,
                    Some(i),
                    smoothing_cost_check(trace, i, elasticity, sp, 200, 20_000)?,
                ),
                _ => CheckOutcome::skipped(
                    CheckKind::SmoothingCost,
                    Some(i),
                    "needs the IGS model and smoothing parameters",
                ),
            });
        }
        if wanted(CheckKind::Lipschitz) {
            out.push(match &config.smoothing {
                Some(sp) if sp.band() > 0.0 => CheckOutcome::done(
                    CheckKind::Lipschitz,
                    Some(i),
                    lipschitz_check(trace, i, elasticity, sp)?,
                ),
                _ => CheckOutcome::skipped(
                    CheckKind::Lipschitz,
                    Some(i),
                    "needs smoothing parameters",
                ),
            });
        }
        if wanted(CheckKind::Stability) {
            out.push(CheckOutcome::done(
                CheckKind::Stability,
                Some(i),
                stability_check(trace, i, seller.learner, schedule, &config.domain)?,
            ));
        }
    }
    if wanted(CheckKind::EquilibriumShift) {
        out.push(
            match equilibrium_shift_trace_check(trace, &config.equilibrium, 200) {
                Ok(v) => CheckOutcome::done(CheckKind::EquilibriumShift, None, v),
                Err(Error::UnsupportedVariant(msg)) => {
                    CheckOutcome::skipped(CheckKind::EquilibriumShift, None, msg)
                }
                Err(e) => return Err(e),
            },
        );
    }
    Ok(out)
}
