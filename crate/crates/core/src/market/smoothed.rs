use super::{DemandModel, OwnPriceCurve, PriceDomain, SmoothingParams};
use crate::error::{Error, Result};

pub const DEFAULT_QUADRATURE_POINTS: usize = 20_000;

fn smoothed_from_log(log_x: f64, log_w: f64, elasticity: f64, band: f64) -> f64 {
    if log_x > log_w {
        1.0
    } else if log_x < log_w - band {
        1.0 - elasticity
    } else {
        1.0 + elasticity * (log_x - log_w) / band
    }
}

/// The log-revenue curve a smoothed-feedback learner implicitly optimizes,
/// tabulated over own log-price with the opponents' prices frozen.
///
/// The curve is the integral of the smoothed gradient, anchored at the top of
/// the price domain where demand is below the threshold. There the smoothed
/// gradient equals the true gradient `1 - E`, so the two curves coincide from
/// the anchor up to the point where demand reaches the threshold.
#[derive(Debug, Clone)]
pub struct SmoothedCurve {
    curve: OwnPriceCurve,
    log_supply: f64,
    elasticity: f64,
    band: f64,
    log_prices: Vec<f64>,
    gradients: Vec<f64>,
    smoothed: Vec<f64>,
}

impl SmoothedCurve {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        model: &DemandModel,
        log_prices: &[f64],
        i: usize,
        supply: f64,
        elasticity: f64,
        sp: &SmoothingParams,
        domain: &PriceDomain,
        points: usize,
    ) -> Result<Self> {
        let band = sp.band();
        if !(band > 0.0) {
            return Err(Error::DegenerateSmoothing(band));
        }
        if points < 2 {
            return Err(Error::Config("quadrature needs at least 2 grid points".into()));
        }
        if log_prices.len() != model.n() || i >= model.n() {
            return Err(Error::LengthMismatch {
                expected: model.n(),
                actual: log_prices.len(),
            });
        }
        if !(supply > 0.0) {
            return Err(Error::Domain(format!("supply must be positive, got {supply}")));
        }
        let curve = model.own_price_curve(i, log_prices);
        let log_supply = supply.ln();
        let grid = domain.log_grid(points);
        let top = *grid.last().expect("grid has at least 2 points");
        if curve.log_demand(top) >= log_supply - band {
            return Err(Error::Anchoring(format!(
                "demand at the highest price {:.4} does not fall below the threshold",
                top.exp()
            )));
        }
        let gradients: Vec<f64> = grid
            .iter()
            .map(|&q| smoothed_from_log(curve.log_demand(q), log_supply, elasticity, band))
            .collect();
        let mut smoothed = vec![0.0; points];
        smoothed[points - 1] = top + curve.log_demand(top).min(log_supply);
        for k in (0..points - 1).rev() {
            let h = grid[k + 1] - grid[k];
            smoothed[k] = smoothed[k + 1] - 0.5 * h * (gradients[k] + gradients[k + 1]);
        }
        Ok(SmoothedCurve {
            curve,
            log_supply,
            elasticity,
            band,
            log_prices: grid,
            gradients,
            smoothed,
        })
    }

    pub fn log_prices(&self) -> &[f64] {
        &self.log_prices
    }

    pub fn smoothed_values(&self) -> &[f64] {
        &self.smoothed
    }

    pub fn gradients(&self) -> &[f64] {
        &self.gradients
    }

    /// True log-revenue at the given own log-price.
    pub fn actual(&self, log_price: f64) -> f64 {
        log_price + self.curve.log_demand(log_price).min(self.log_supply)
    }

    pub fn gradient(&self, log_price: f64) -> f64 {
        smoothed_from_log(
            self.curve.log_demand(log_price),
            self.log_supply,
            self.elasticity,
            self.band,
        )
    }

    /// Smoothed log-revenue at an arbitrary log-price inside the grid range.
    pub fn eval(&self, log_price: f64) -> Result<f64> {
        let lo = self.log_prices[0];
        let hi = *self.log_prices.last().unwrap();
        if !(log_price >= lo && log_price <= hi) {
            return Err(Error::Domain(format!(
                "log-price {log_price} outside [{lo}, {hi}]"
            )));
        }
        let n = self.log_prices.len();
        let step = (hi - lo) / (n - 1) as f64;
        let mut k = (((log_price - lo) / step).floor() as usize).min(n - 2);
        // guard against rounding in the index computation
        while k > 0 && self.log_prices[k] > log_price {
            k -= 1;
        }
        while k + 2 < n && self.log_prices[k + 1] < log_price {
            k += 1;
        }
        let right = self.log_prices[k + 1];
        let partial = 0.5 * (right - log_price) * (self.gradient(log_price) + self.gradients[k + 1]);
        Ok(self.smoothed[k + 1] - partial)
    }
}

/// Smoothed log-revenue of seller `i` at `price`, opponents fixed at `log_prices`.
#[allow(clippy::too_many_arguments)]
pub fn smoothed_log_revenue(
    model: &DemandModel,
    price: f64,
    log_prices: &[f64],
    i: usize,
    supply: f64,
    elasticity: f64,
    sp: &SmoothingParams,
    domain: &PriceDomain,
) -> Result<f64> {
    if !(price > 0.0) {
        return Err(Error::Domain(format!("price must be positive, got {price}")));
    }
    SmoothedCurve::build(
        model,
        log_prices,
        i,
        supply,
        elasticity,
        sp,
        domain,
        DEFAULT_QUADRATURE_POINTS,
    )?
    .eval(price.ln())
}
