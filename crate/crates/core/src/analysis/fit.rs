use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `ln R = intercept + exponent * ln T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points used in the fit.
    pub used: usize,
    /// Points dropped because the regret was not positive.
    pub dropped: usize,
}

/// Fits the power-law exponent of regret against horizon. Needs at least three
/// positive points whose horizons span two decades.
pub fn fit_scaling_exponent(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, r)| *t > 0.0 && *r > 0.0 && r.is_finite())
        .map(|(t, r)| (t.ln(), r.ln()))
        .collect();
    let dropped = points.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points ({dropped} non-positive dropped), need at least 3",
            usable.len()
        )));
    }
    let lo = usable.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = usable.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo) / std::f64::consts::LN_10 < 2.0 - 1e-9 {
        return Err(Error::InsufficientData(format!(
            "horizons span {:.2} decades, need at least 2",
            (hi - lo) / std::f64::consts::LN_10
        )));
    }
    let m = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / m;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = usable
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(ScalingFit {
        exponent,
        intercept,
        r_squared,
        used: usable.len(),
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let pts: Vec<_> = [1e2, 1e3, 1e4].iter().map(|&t: &f64| (t, t.sqrt())).collect();
        let f = fit_scaling_exponent(&pts).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);

        let pts: Vec<_> = [1e3, 1e4, 1e5]
            .iter()
            .map(|&t: &f64| (t, 3.0 * t.powf(0.25)))
            .collect();
        let f = fit_scaling_exponent(&pts).unwrap();
        assert!((f.exponent - 0.25).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn drops_non_positive_and_needs_three() {
        let pts = [(1e2, 1.0), (1e3, -2.0), (1e4, 10.0), (1e5, 0.0)];
        assert!(matches!(
            fit_scaling_exponent(&pts),
            Err(Error::InsufficientData(_))
        ));
        let pts = [(1e2, 1.0), (1e3, -2.0), (1e4, 10.0), (1e5, 100.0)];
        let f = fit_scaling_exponent(&pts).unwrap();
        assert_eq!((f.used, f.dropped), (3, 1));
    }

    #[test]
    fn needs_two_decades() {
        let pts = [(100.0, 1.0), (300.0, 2.0), (900.0, 3.0)];
        assert!(fit_scaling_exponent(&pts).is_err());
    }
}
