//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use pricing_core::analysis::{
    approx_regret, best_fixed_price, column, drvu_check, dynamic_regret, equilibrium_benchmark,
    fit_scaling_exponent, rvu_check, static_regret, worst_case_comparator, DrvuConstants,
    Objective, RvuConstants, DEFAULT_GRID_POINTS,
};
use pricing_core::equilibrium::{tatonnement, tatonnement_from, EquilibriumSolverConfig};
use pricing_core::learners::Algorithm;
use pricing_core::market::{
    smoothed_gradient, DemandModel, PriceDomain, SmoothedCurve, SmoothingParams,
    DEFAULT_QUADRATURE_POINTS,
};
use pricing_core::sim::{run_scenario, ScenarioConfig, Trace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const CES_MODEL: &str = r#"{"kind":"ces","budget":2.0,"weights":[1,1],"rho":0.6}"#;
const STATIC: &str = r#"{"kind":"static","level":1.0}"#;
const INV_SQRT: &str = r#"{"kind":"inverse_sqrt"}"#;
const FIXED: &str = r#"{"kind":"fixed_horizon"}"#;

fn seller(learner: &str, feedback: &str, step: &str, supply: &str) -> String {
    format!(r#"{{"learner":"{learner}","feedback":"{feedback}","step":{step},"supply":{supply}}}"#)
}

fn scenario(horizon: usize, epsilon: f64, seed: u64, jitter: f64, sellers: [&str; 2]) -> ScenarioConfig {
    let text = format!(
        r#"{{"model":{CES_MODEL},"horizon":{horizon},"seed":{seed},"initial_jitter":{jitter},
            "smoothing":{{"epsilon":{epsilon},"r_lower":1.0,"r_upper":1.0}},
            "sellers":[{},{}]}}"#,
        sellers[0], sellers[1]
    );
    ScenarioConfig::from_json(&text).expect("scenario parses")
}

fn log_sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt()
}

fn ces_demand(budget: f64, a: &[f64], sigma: f64, p: &[f64]) -> Vec<f64> {
    let denom: f64 = a
        .iter()
        .zip(p)
        .map(|(a, p)| a.powf(sigma) * p.powf(1.0 - sigma))
        .sum();
    a.iter()
        .zip(p)
        .map(|(a, p)| budget * a.powf(sigma) * p.powf(-sigma) / denom)
        .collect()
}

fn ces_equilibrium(budget: f64, a: &[f64], sigma: f64, w: &[f64]) -> Vec<f64> {
    let k = budget
        / a.iter()
            .zip(w)
            .map(|(a, w)| a * w.powf(1.0 - 1.0 / sigma))
            .sum::<f64>();
    a.iter().zip(w).map(|(a, w)| k * a * w.powf(-1.0 / sigma)).collect()
}

struct CesInstance {
    budget: f64,
    weights: Vec<f64>,
    rho: f64,
}

impl CesInstance {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let n = rng.gen_range(2..=6);
        CesInstance {
            budget: rng.gen_range(0.5..5.0),
            weights: (0..n).map(|_| rng.gen_range(0.5..2.0)).collect(),
            rho: rng.gen_range(0.1..0.9),
        }
    }

    fn sigma(&self) -> f64 {
        1.0 / (1.0 - self.rho)
    }

    fn model(&self) -> DemandModel {
        DemandModel::ces(self.budget, self.weights.clone(), self.rho).unwrap()
    }
}

fn c1() -> Outcome {
    let start = Instant::now();
    let ogd = seller("ogd", "adjusted", INV_SQRT, STATIC);
    let mut points = Vec::new();
    for t in [1_000, 10_000, 100_000] {
        let trace = run_scenario(&scenario(t, 0.05, 0, 0.0, [&ogd, &ogd])).unwrap();
        let b = best_fixed_price(&trace, 0, DEFAULT_GRID_POINTS, Objective::LogRevenue).unwrap();
        let r = *static_regret(&trace, 0, b.log_price).unwrap().last().unwrap();
        points.push((t as f64, r));
    }
    let fit = fit_scaling_exponent(&points).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        (0.30..=0.60).contains(&fit.exponent) && fit.r_squared >= 0.9 && secs < 60.0,
        format!(
            "exponent {:.3}, r2 {:.3}, regrets {:?}, {secs:.1}s",
            fit.exponent,
            fit.r_squared,
            points.iter().map(|p| format!("{:.2}", p.1)).collect::<Vec<_>>()
        ),
    )
}

const HORIZONS: [usize; 3] = [1_000, 10_000, 100_000];

fn optimistic_traces(alg: &str) -> Vec<Trace> {
    let s = seller(alg, "smoothed", FIXED, STATIC);
    HORIZONS
        .iter()
        .map(|&t| run_scenario(&scenario(t, 0.05, 0, 0.0, [&s, &s])).unwrap())
        .collect()
}

/// Each normalized value may exceed the running minimum of the earlier ones by
/// at most 20% of that minimum's magnitude.
fn non_increasing_within(values: &[f64], band: f64) -> bool {
    let mut running = values[0];
    for &v in &values[1..] {
        if v > running + band * running.abs() {
            return false;
        }
        running = running.min(v);
    }
    true
}

fn c2(traces: &[(String, Vec<Trace>)]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (alg, runs) in traces {
        let normalized: Vec<f64> = runs
            .iter()
            .map(|trace| {
                let sp = trace.config().smoothing.unwrap();
                let b = best_fixed_price(trace, 0, DEFAULT_GRID_POINTS, Objective::LogRevenue)
                    .unwrap();
                let a = *approx_regret(trace, 0, b.log_price, &sp).unwrap().last().unwrap();
                a / (trace.len() as f64).powf(0.25)
            })
            .collect();
        pass &= non_increasing_within(&normalized, 0.2);
        detail.push(format!(
            "{alg} {:?}",
            normalized.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>()
        ));
    }
    outcome(pass, format!("approx_regret/T^0.25: {}", detail.join("; ")))
}

fn c3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let e = 2.5;
    let model = DemandModel::igs(vec![1.0, 1.0], e).unwrap();
    let sp = SmoothingParams::new((10.0_f64 / 9.0).ln(), 1.0, 1.0).unwrap();
    let band = sp.band();
    let domain = PriceDomain::default();
    let tol = band * 1e-3;
    let (mut failures, mut lo, mut hi) = (0, f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..1_000 {
        let opponent = rng.gen_range(0.1_f64.ln()..10.0_f64.ln());
        let own = rng.gen_range(domain.log_min()..domain.log_max());
        let curve = SmoothedCurve::build(
            &model,
            &[own, opponent],
            0,
            1.0,
            e,
            &sp,
            &domain,
            DEFAULT_QUADRATURE_POINTS,
        )
        .unwrap();
        let actual = own + (model.log_demand(0, &[own, opponent]).unwrap()).min(0.0);
        let gap = actual - curve.eval(own).unwrap();
        lo = lo.min(gap);
        hi = hi.max(gap);
        if !(gap >= -tol && gap <= band + tol) {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("gap range [{lo:.3e}, {hi:.5}] vs eps*r {band:.5}, {failures} failures"),
    )
}

fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let e = 2.5;
    let scale = [1.0_f64, 1.0];
    let sp = SmoothingParams::new((10.0_f64 / 9.0).ln(), 1.0, 1.0).unwrap();
    let l = e * e / sp.band();
    let log_demand = |q: &[f64]| scale[0].ln() - e * q[0] + e * q[1];
    let mut failures = 0;
    let mut worst = 0.0_f64;
    for k in 0..1_000 {
        let spread = if k % 2 == 0 { 0.3 } else { 2.0 };
        let p: Vec<f64> = (0..2).map(|_| rng.gen_range(-spread..spread)).collect();
        let step = if k % 4 < 2 { 0.02 } else { 1.0 };
        let p2: Vec<f64> = p.iter().map(|x| x + rng.gen_range(-step..step)).collect();
        let d1 = smoothed_gradient(log_demand(&p).exp(), 1.0, e, &sp).unwrap();
        let d2 = smoothed_gradient(log_demand(&p2).exp(), 1.0, e, &sp).unwrap();
        let dp: f64 = p.iter().zip(&p2).map(|(a, b)| (a - b).abs()).sum();
        let dd = (d1 - d2).abs();
        if dp > 0.0 {
            worst = worst.max(dd / dp);
        }
        if dd > l * dp * (1.0 + 1e-3) {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("max |dδ|/|dp|_1 {worst:.3} vs L {l:.3}, {failures} failures"),
    )
}

fn c5(traces: &[(String, Vec<Trace>)]) -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut min_slack = f64::INFINITY;
    for (alg, runs) in traces {
        let algorithm = if alg == "oftrl" {
            Algorithm::Oftrl
        } else {
            Algorithm::Omd
        };
        for trace in runs {
            for i in 0..trace.sellers() {
                let eta = trace.config().step_schedule(i).unwrap().fixed_rate().unwrap();
                let c = RvuConstants::theoretical(algorithm, eta, &trace.config().domain).unwrap();
                let b = best_fixed_price(trace, i, DEFAULT_GRID_POINTS, Objective::LogRevenue)
                    .unwrap();
                for comparator in [worst_case_comparator(trace, i), b.log_price] {
                    let v = rvu_check(trace, i, &c, comparator).unwrap();
                    checked += 1;
                    min_slack = min_slack.min(v.slack);
                    if !v.pass {
                        failures.push(format!("{alg} T={} seller {i}", trace.len()));
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{checked} checks, min slack {min_slack:.1}, failures {:?}",
            failures
        ),
    )
}

fn c6() -> Outcome {
    let walk = r#"{"kind":"random_walk","start":1.0,"step_cap":0.01}"#;
    let omd = seller("omd", "smoothed", FIXED, walk);
    let mut worst_inflation = 1.0_f64;
    let mut failures = Vec::new();
    let mut checked = 0;
    for seed in 0..10 {
        let config = scenario(10_000, 0.05, seed, 0.0, [&omd, &omd]);
        let trace = run_scenario(&config).unwrap();
        let path = equilibrium_benchmark(&trace, &config.equilibrium).unwrap();
        for i in 0..2 {
            let eta = config.step_schedule(i).unwrap().fixed_rate().unwrap();
            let y0 = trace.rounds()[0].prices[i].ln();
            let c = DrvuConstants::omd(eta, &config.domain, y0);
            let v = drvu_check(&trace, i, &c, &column(&path, i)).unwrap();
            checked += 1;
            let inflation = v.required_inflation.unwrap();
            worst_inflation = worst_inflation.max(inflation);
            if !v.pass {
                failures.push(format!("seed {seed} seller {i} needs x{inflation:.3}"));
            }
        }
    }
    outcome(
        failures.is_empty() || worst_inflation < 2.0,
        format!(
            "{checked} traces, worst required inflation {worst_inflation:.3}, failures {:?}",
            failures
        ),
    )
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..1_000 {
        let inst = CesInstance::random(&mut rng);
        let model = inst.model();
        let p: Vec<f64> = (0..inst.weights.len())
            .map(|_| rng.gen_range(0.01_f64.ln()..100.0_f64.ln()).exp())
            .collect();
        let lambda = rng.gen_range(0.1_f64.ln()..10.0_f64.ln()).exp();
        let scaled: Vec<f64> = p.iter().map(|x| x * lambda).collect();
        let x = model.demand(&p).unwrap();
        let xs = model.demand(&scaled).unwrap();
        let direct = ces_demand(inst.budget, &inst.weights, inst.sigma(), &p);
        for j in 0..x.len() {
            worst = worst
                .max((xs[j] * lambda - x[j]).abs() / x[j])
                .max((x[j] - direct[j]).abs() / direct[j]);
        }
    }
    outcome(worst < 1e-9, format!("max relative error {worst:.2e}"))
}

fn c8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = EquilibriumSolverConfig {
        tol: 1e-11,
        ..EquilibriumSolverConfig::default()
    };
    let (mut worst_res, mut worst_closed, mut worst_sym) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..100 {
        let mut inst = CesInstance::random(&mut rng);
        let n = inst.weights.len();
        let symmetric = k % 5 == 0;
        let w: Vec<f64> = if symmetric {
            inst.weights = vec![1.0; n];
            vec![rng.gen_range(0.5..2.0); n]
        } else {
            (0..n).map(|_| rng.gen_range(0.5..2.0)).collect()
        };
        let eq = tatonnement(&inst.model(), &w, &cfg).unwrap();
        let p = eq.point.prices();
        let x = ces_demand(inst.budget, &inst.weights, inst.sigma(), p);
        let res = x
            .iter()
            .zip(&w)
            .fold(0.0_f64, |m, (x, w)| m.max((x.ln() - w.ln()).abs()));
        worst_res = worst_res.max(res);
        let closed = ces_equilibrium(inst.budget, &inst.weights, inst.sigma(), &w);
        for j in 0..n {
            worst_closed = worst_closed.max((p[j].ln() - closed[j].ln()).abs());
            if symmetric {
                worst_sym = worst_sym.max((p[j] - inst.budget / (n as f64 * w[j])).abs());
            }
        }
    }
    outcome(
        worst_res < 1e-8 && worst_sym < 1e-8,
        format!(
            "max residual {worst_res:.2e}, symmetric error {worst_sym:.2e}, closed-form log gap {worst_closed:.2e}"
        ),
    )
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = EquilibriumSolverConfig::default();
    let mut failures = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..1_000 {
        let inst = CesInstance::random(&mut rng);
        let model = inst.model();
        let n = inst.weights.len();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let w2: Vec<f64> = w
            .iter()
            .map(|x| x * rng.gen_range(0.5_f64.ln()..2.0_f64.ln()).exp())
            .collect();
        let old = tatonnement(&model, &w, &cfg).unwrap();
        let new = tatonnement_from(&model, &w2, &cfg, Some(old.point.log_prices())).unwrap();
        let shift = old
            .point
            .log_prices()
            .iter()
            .zip(new.point.log_prices())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let bound: f64 = w.iter().zip(&w2).map(|(a, b)| (a.ln() - b.ln()).abs()).sum();
        worst_excess = worst_excess.max(shift - bound);
        if shift > bound + 1e-7 {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("max shift - bound {worst_excess:.3e}, {failures} failures"),
    )
}

fn c10() -> Outcome {
    let eps = (10.0_f64 / 9.0).ln();
    let ogd = seller("ogd", "adjusted", INV_SQRT, STATIC);
    let omd = seller("omd", "smoothed", FIXED, STATIC);
    let t = 10_000;
    let decile = |trace: &Trace| trace.window(t - t / 10, t);
    let ogd_trace = run_scenario(&scenario(t, eps, 0, 0.0, [&ogd, &ogd])).unwrap();
    let omd_trace = run_scenario(&scenario(t, eps, 0, 0.0, [&omd, &omd])).unwrap();
    let ogd_sd = log_sd(&decile(&ogd_trace).log_prices(0));
    let omd_tail = decile(&omd_trace);
    let omd_sd = log_sd(&omd_tail.log_prices(0));
    let mean_rev = omd_tail.revenues(0).iter().sum::<f64>() / omd_tail.len() as f64;
    let best = best_fixed_price(&omd_tail, 0, DEFAULT_GRID_POINTS, Objective::Revenue).unwrap();
    let optimum = best.value / omd_tail.len() as f64;

    let mixed = run_scenario(&scenario(t, eps, 0, 0.0, [&ogd, &omd])).unwrap();
    let mixed_tail = decile(&mixed);
    let mixed_ratio = log_sd(&mixed_tail.log_prices(0)) / log_sd(&mixed_tail.log_prices(1));

    let ratio_ok = ogd_sd >= 5.0 * omd_sd;
    outcome(
        ratio_ok && mean_rev >= 0.95 * optimum,
        format!(
            "sd ogd {ogd_sd:.3e} vs omd {omd_sd:.3e}; omd revenue {mean_rev:.4} vs optimum {optimum:.4} ({:.3}); mixed-market sd ratio {mixed_ratio:.2} (informational)",
            mean_rev / optimum
        ),
    )
}

fn c11() -> Outcome {
    let t = 10_000;
    let mut means = Vec::new();
    let mut detail = Vec::new();
    for w_total in [0.0_f64, 1.0, 2.0, 4.0] {
        let end = (w_total / 2.0).exp();
        let drift = format!(r#"{{"kind":"drift","start":1.0,"end":{end}}}"#);
        let omd = seller("omd", "smoothed", FIXED, &drift);
        let mut values = Vec::new();
        for seed in 0..5 {
            let config = scenario(t, 0.05, seed, 0.5, [&omd, &omd]);
            let trace = run_scenario(&config).unwrap();
            let path = equilibrium_benchmark(&trace, &config.equilibrium).unwrap();
            let d = dynamic_regret(&trace, 0, &column(&path, 0), config.smoothing.as_ref())
                .unwrap();
            values.push(d.last().unwrap() / ((1.0 + w_total) * (t as f64).powf(0.25)));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        means.push(mean);
        detail.push(format!("W={w_total}: {mean:.2}"));
    }
    let same_sign = means.iter().all(|m| *m > 0.0) || means.iter().all(|m| *m < 0.0);
    let mags: Vec<f64> = means.iter().map(|m| m.abs()).collect();
    let spread = mags.iter().cloned().fold(0.0, f64::max)
        / mags.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        same_sign && spread < 3.0,
        format!("{}; spread x{spread:.2}", detail.join(", ")),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let optimistic: Vec<(String, Vec<Trace>)> = ["oftrl", "omd"]
        .iter()
        .map(|a| (a.to_string(), optimistic_traces(a)))
        .collect();
    let criteria: Vec<Criterion> = vec![
        ("ogd scaling", Box::new(c1)),
        ("optimistic scaling", Box::new(|| c2(&optimistic))),
        ("smoothing cost", Box::new(c3)),
        ("lipschitz bound", Box::new(c4)),
        ("rvu verification", Box::new(|| c5(&optimistic))),
        ("drvu verification", Box::new(c6)),
        ("ces homogeneity", Box::new(c7)),
        ("equilibrium solver", Box::new(c8)),
        ("equilibrium shift", Box::new(c9)),
        ("ogd vs omd replication", Box::new(c10)),
        ("dynamic regret tracking", Box::new(c11)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<24} {}  {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
