use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consumer-side demand oracle mapping a price vector to a demand vector.
///
/// Both variants are gross substitutes. The CES variant is the demand of a single
/// representative buyer with budget `B`; the IGS variant has constant price
/// elasticity `E` with respect to every price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub enum DemandModel {
    Ces(Ces),
    Igs(Igs),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ces {
    budget: f64,
    weights: Vec<f64>,
    rho: f64,
    sigma: f64,
    // ln(a_i^sigma), cached
    log_weight_pow: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Igs {
    scale: Vec<f64>,
    elasticity: f64,
}

/// Wire form of [`DemandModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Ces {
        budget: f64,
        weights: Vec<f64>,
        rho: f64,
    },
    Igs {
        scale: Vec<f64>,
        elasticity: f64,
    },
}

impl TryFrom<ModelSpec> for DemandModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Ces {
                budget,
                weights,
                rho,
            } => DemandModel::ces(budget, weights, rho),
            ModelSpec::Igs { scale, elasticity } => DemandModel::igs(scale, elasticity),
        }
    }
}

impl From<DemandModel> for ModelSpec {
    fn from(model: DemandModel) -> Self {
        match model {
            DemandModel::Ces(c) => ModelSpec::Ces {
                budget: c.budget,
                weights: c.weights,
                rho: c.rho,
            },
            DemandModel::Igs(g) => ModelSpec::Igs {
                scale: g.scale,
                elasticity: g.elasticity,
            },
        }
    }
}

fn check_positive(name: &str, values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::Config(format!(
            "{name}: need at least 2 goods, got {}",
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Config(format!("{name}: entries must be positive, got {v}")));
    }
    Ok(())
}

impl DemandModel {
    pub fn ces(budget: f64, weights: Vec<f64>, rho: f64) -> Result<Self> {
        check_positive("weights", &weights)?;
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::Config(format!("budget must be positive, got {budget}")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Config(format!("rho must lie in (0, 1), got {rho}")));
        }
        let sigma = 1.0 / (1.0 - rho);
        let log_weight_pow = weights.iter().map(|a| sigma * a.ln()).collect();
        Ok(DemandModel::Ces(Ces {
            budget,
            weights,
            rho,
            sigma,
            log_weight_pow,
        }))
    }

    /// CES model parametrized by the elasticity of substitution `sigma > 1`.
    pub fn ces_with_sigma(budget: f64, weights: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 1.0) {
            return Err(Error::Config(format!("sigma must exceed 1, got {sigma}")));
        }
        Self::ces(budget, weights, 1.0 - 1.0 / sigma)
    }

    pub fn igs(scale: Vec<f64>, elasticity: f64) -> Result<Self> {
        check_positive("scale", &scale)?;
        if !(elasticity.is_finite() && elasticity > 1.0) {
            return Err(Error::Config(format!(
                "elasticity must exceed 1, got {elasticity}"
            )));
        }
        Ok(DemandModel::Igs(Igs { scale, elasticity }))
    }

    pub fn n(&self) -> usize {
        match self {
            DemandModel::Ces(c) => c.weights.len(),
            DemandModel::Igs(g) => g.scale.len(),
        }
    }

    pub fn is_igs(&self) -> bool {
        matches!(self, DemandModel::Igs(_))
    }

    /// The elasticity parameter a seller would plug into gradient feedback:
    /// `E` for IGS, `sigma` for CES.
    pub fn nominal_elasticity(&self) -> f64 {
        match self {
            DemandModel::Ces(c) => c.sigma,
            DemandModel::Igs(g) => g.elasticity,
        }
    }

    fn check_prices(&self, prices: &[f64]) -> Result<()> {
        if prices.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: prices.len(),
            });
        }
        if let Some(p) = prices.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Domain(format!("prices must be positive, got {p}")));
        }
        Ok(())
    }

    pub fn demand(&self, prices: &[f64]) -> Result<Vec<f64>> {
        self.check_prices(prices)?;
        let log_prices: Vec<f64> = prices.iter().map(|p| p.ln()).collect();
        Ok((0..self.n())
            .map(|j| self.log_demand_unchecked(j, &log_prices).exp())
            .collect())
    }

    pub fn demand_of(&self, j: usize, prices: &[f64]) -> Result<f64> {
        self.check_prices(prices)?;
        let log_prices: Vec<f64> = prices.iter().map(|p| p.ln()).collect();
        Ok(self.log_demand_unchecked(j, &log_prices).exp())
    }

    /// ln x_j at the given log-prices. No validation.
    pub(crate) fn log_demand_unchecked(&self, j: usize, log_prices: &[f64]) -> f64 {
        match self {
            DemandModel::Ces(c) => {
                let s = c.sigma;
                let denom: f64 = log_prices
                    .iter()
                    .zip(&c.log_weight_pow)
                    .map(|(lp, lw)| (lw + (1.0 - s) * lp).exp())
                    .sum();
                c.budget.ln() + c.log_weight_pow[j] - s * log_prices[j] - denom.ln()
            }
            DemandModel::Igs(g) => {
                let e = g.elasticity;
                let others: f64 = log_prices
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != j)
                    .map(|(_, lp)| lp)
                    .sum();
                g.scale[j].ln() - e * log_prices[j] + e * others
            }
        }
    }

    pub fn log_demand(&self, j: usize, log_prices: &[f64]) -> Result<f64> {
        if log_prices.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: log_prices.len(),
            });
        }
        if j >= self.n() {
            return Err(Error::Config(format!("seller index {j} out of range")));
        }
        if let Some(lp) = log_prices.iter().find(|lp| !lp.is_finite()) {
            return Err(Error::Domain(format!("log-price must be finite, got {lp}")));
        }
        Ok(self.log_demand_unchecked(j, log_prices))
    }

    /// Seller `i`'s log-demand as a function of its own log-price, with the
    /// other entries of `log_prices` held fixed.
    pub fn own_price_curve(&self, i: usize, log_prices: &[f64]) -> OwnPriceCurve {
        match self {
            DemandModel::Ces(c) => {
                let s = c.sigma;
                let others: f64 = log_prices
                    .iter()
                    .zip(&c.log_weight_pow)
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, (lp, lw))| (lw + (1.0 - s) * lp).exp())
                    .sum();
                OwnPriceCurve::Ces {
                    log_numerator: c.budget.ln() + c.log_weight_pow[i],
                    log_own_weight: c.log_weight_pow[i],
                    sigma: s,
                    others,
                }
            }
            DemandModel::Igs(g) => {
                let others: f64 = log_prices
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, lp)| lp)
                    .sum();
                OwnPriceCurve::Igs {
                    offset: g.scale[i].ln() + g.elasticity * others,
                    elasticity: g.elasticity,
                }
            }
        }
    }

    pub fn as_ces(&self) -> Option<&Ces> {
        match self {
            DemandModel::Ces(c) => Some(c),
            DemandModel::Igs(_) => None,
        }
    }

    pub fn as_igs(&self) -> Option<&Igs> {
        match self {
            DemandModel::Igs(g) => Some(g),
            DemandModel::Ces(_) => None,
        }
    }
}

impl Ces {
    pub fn budget(&self) -> f64 {
        self.budget
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Igs {
    pub fn scale(&self) -> &[f64] {
        &self.scale
    }
    pub fn elasticity(&self) -> f64 {
        self.elasticity
    }
}

/// Log-demand of one seller in its own log-price, opponents frozen.
#[derive(Debug, Clone, Copy)]
pub enum OwnPriceCurve {
    Ces {
        log_numerator: f64,
        log_own_weight: f64,
        sigma: f64,
        others: f64,
    },
    Igs {
        offset: f64,
        elasticity: f64,
    },
}

impl OwnPriceCurve {
    pub fn log_demand(&self, log_price: f64) -> f64 {
        match *self {
            OwnPriceCurve::Ces {
                log_numerator,
                log_own_weight,
                sigma,
                others,
            } => {
                let own = (log_own_weight + (1.0 - sigma) * log_price).exp();
                log_numerator - sigma * log_price - (own + others).ln()
            }
            OwnPriceCurve::Igs { offset, elasticity } => offset - elasticity * log_price,
        }
    }
}

/// Central finite-difference estimate of `d ln x_j / d ln p_i`.
pub fn elasticity_fd(
    model: &DemandModel,
    point: &super::PricePoint,
    i: usize,
    j: usize,
    step: f64,
) -> Result<f64> {
    let n = model.n();
    if i >= n || j >= n {
        return Err(Error::Config(format!("index out of range: ({i}, {j}) for n = {n}")));
    }
    let base = point.log_prices();
    let up = base[i] + step;
    let down = base[i] - step;
    if !(step > 0.0) || up == base[i] || down == base[i] {
        return Err(Error::Numerical(format!(
            "finite-difference step {step:e} underflows at log-price {}",
            base[i]
        )));
    }
    let mut shifted = base.to_vec();
    shifted[i] = up;
    let hi = model.log_demand(j, &shifted)?;
    shifted[i] = down;
    let lo = model.log_demand(j, &shifted)?;
    Ok((hi - lo) / (up - down))
}
