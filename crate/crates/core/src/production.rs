//! Influence production technology and its dual cost function.
//!
//! Effort is produced from a quantity input `x` and a quality input `q` by
//! `f(x, q) = A·(x^βx + q^βq)`. With `βx < βq` the marginal product of
//! quality decays more slowly than that of quantity, so the cost-minimizing
//! mix becomes more quality-intensive as effort grows.
//!
//! The cost-minimizing bundle for a given effort lies on the expansion path
//! where `f_x / f_q = p_x / p_q`. For this family the path has the closed
//! form `q(x) = k·x^γ` with `k = (βq·p_x / (βx·p_q))^(1/(1-βq))` and
//! `γ = (1-βx)/(1-βq)`, leaving a single monotone root-find in `x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductionParams {
    /// Exponent on the quantity input.
    pub beta_x: f64,
    /// Exponent on the quality input.
    pub beta_q: f64,
    /// Multiplicative productivity `A`.
    pub scale: f64,
}

impl Default for ProductionParams {
    fn default() -> Self {
        Self {
            beta_x: 0.35,
            beta_q: 0.7,
            scale: 1.0,
        }
    }
}

impl ProductionParams {
    pub fn new(beta_x: f64, beta_q: f64, scale: f64) -> Result<Self> {
        let params = Self {
            beta_x,
            beta_q,
            scale,
        };
        params.validate()?;
        Ok(params)
    }

    /// Full invariant check, including `beta_x < beta_q`.
    pub fn validate(&self) -> Result<()> {
        self.check_form()?;
        if self.beta_x >= self.beta_q {
            return Err(Error::validation(
                "production",
                format!(
                    "beta_x ({}) must be below beta_q ({})",
                    self.beta_x, self.beta_q
                ),
            ));
        }
        Ok(())
    }

    /// Checks only what the functional form needs to be well defined. The
    /// equal-exponent boundary passes here so it can be exercised directly.
    fn check_form(&self) -> Result<()> {
        for (name, beta) in [("beta_x", self.beta_x), ("beta_q", self.beta_q)] {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::validation(
                    "production",
                    format!("{name} must lie in (0, 1), got {beta}"),
                ));
            }
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::validation(
                "production",
                format!("scale must be positive, got {}", self.scale),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPrices {
    pub px: f64,
    pub pq: f64,
    /// Activation price: a constant marginal cost per unit of effort.
    pub kappa: f64,
}

impl Default for InputPrices {
    fn default() -> Self {
        Self {
            px: 1.0,
            pq: 1.0,
            kappa: 0.0,
        }
    }
}

impl InputPrices {
    pub fn validate(&self) -> Result<()> {
        if !(self.px > 0.0 && self.px.is_finite()) || !(self.pq > 0.0 && self.pq.is_finite()) {
            return Err(Error::validation(
                "prices",
                format!("px and pq must be positive, got ({}, {})", self.px, self.pq),
            ));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::validation(
                "prices",
                format!("kappa must be non-negative, got {}", self.kappa),
            ));
        }
        Ok(())
    }

    /// Scales both input prices, leaving the activation price alone.
    pub fn scaled(&self, level: f64) -> Self {
        Self {
            px: self.px * level,
            pq: self.pq * level,
            kappa: self.kappa,
        }
    }
}

/// Sign of influence on an idea.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Strengthen,
    Weaken,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Strengthen => 1.0,
            Direction::Weaken => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputBundle {
    pub x: f64,
    pub q: f64,
    pub direction: Option<Direction>,
}

impl InputBundle {
    pub const ZERO: InputBundle = InputBundle {
        x: 0.0,
        q: 0.0,
        direction: None,
    };

    /// Money spent on the two inputs, excluding the activation price.
    pub fn expenditure(&self, prices: &InputPrices) -> f64 {
        prices.px * self.x + prices.pq * self.q
    }

    /// Quality per unit of quantity, `None` for the empty bundle.
    pub fn quality_intensity(&self) -> Option<f64> {
        (self.x > 0.0).then(|| self.q / self.x)
    }
}

fn check_effort(e: f64) -> Result<()> {
    if e >= 0.0 && e.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "effort must be finite and non-negative, got {e}"
        )))
    }
}

pub fn effort_of_inputs(x: f64, q: f64, params: &ProductionParams) -> Result<f64> {
    params.check_form()?;
    if !(x >= 0.0 && q >= 0.0) {
        return Err(Error::domain(format!(
            "inputs must be non-negative, got ({x}, {q})"
        )));
    }
    Ok(params.scale * (x.powf(params.beta_x) + q.powf(params.beta_q)))
}

/// `(f_x, f_q)`. Undefined at a zero input, where the marginal product is unbounded.
pub fn marginal_products(x: f64, q: f64, params: &ProductionParams) -> Result<(f64, f64)> {
    params.check_form()?;
    if !(x > 0.0 && q > 0.0) {
        return Err(Error::domain(format!(
            "marginal products need strictly positive inputs, got ({x}, {q})"
        )));
    }
    let fx = params.scale * params.beta_x * x.powf(params.beta_x - 1.0);
    let fq = params.scale * params.beta_q * q.powf(params.beta_q - 1.0);
    Ok((fx, fq))
}

/// Quality input on the expansion path at quantity `x`.
fn expansion_quality(x: f64, prices: &InputPrices, params: &ProductionParams) -> f64 {
    let k =
        (params.beta_q * prices.px / (params.beta_x * prices.pq)).powf(1.0 / (1.0 - params.beta_q));
    let gamma = (1.0 - params.beta_x) / (1.0 - params.beta_q);
    k * x.powf(gamma)
}

pub fn cost_min_inputs(
    e: f64,
    prices: &InputPrices,
    params: &ProductionParams,
) -> Result<InputBundle> {
    check_effort(e)?;
    params.check_form()?;
    prices.validate()?;
    if e == 0.0 {
        return Ok(InputBundle::ZERO);
    }
    let shortfall = |x: f64| {
        let q = expansion_quality(x, prices, params);
        params.scale * (x.powf(params.beta_x) + q.powf(params.beta_q)) - e
    };
    // Quantity alone reaches e at x = (e/A)^(1/βx); the quality term only adds.
    let hi = (e / params.scale).powf(1.0 / params.beta_x);
    let hi = if hi.is_finite() && shortfall(hi) >= 0.0 {
        hi
    } else {
        roots::expand_upward(shortfall, 0.0, 1.0)?
    };
    let x = roots::brent(shortfall, 0.0, hi, 0.0)?;
    Ok(InputBundle {
        x,
        q: expansion_quality(x, prices, params),
        direction: None,
    })
}

/// Dual cost `c(e)`: cheapest input spend for effort `e` plus `kappa·e`.
pub fn cost(e: f64, prices: &InputPrices, params: &ProductionParams) -> Result<f64> {
    let bundle = cost_min_inputs(e, prices, params)?;
    Ok(bundle.expenditure(prices) + prices.kappa * e)
}

/// `c'(e)` by the envelope theorem, `p_x / f_x + kappa`. At zero effort this
/// is `kappa`, the limit as `f_x` grows without bound.
pub fn marginal_cost(e: f64, prices: &InputPrices, params: &ProductionParams) -> Result<f64> {
    check_effort(e)?;
    if e == 0.0 {
        prices.validate()?;
        return Ok(prices.kappa);
    }
    let bundle = cost_min_inputs(e, prices, params)?;
    Ok(
        prices.px * bundle.x.powf(1.0 - params.beta_x) / (params.scale * params.beta_x)
            + prices.kappa,
    )
}

/// Inverse of [`marginal_cost`]: the effort at which `c'(e) = m`, or zero when
/// `m` does not exceed the activation price.
pub fn effort_at_marginal_cost(
    m: f64,
    prices: &InputPrices,
    params: &ProductionParams,
) -> Result<f64> {
    params.check_form()?;
    prices.validate()?;
    if m.is_nan() {
        return Err(Error::domain("marginal cost target is NaN"));
    }
    if m <= prices.kappa {
        return Ok(0.0);
    }
    let x = ((m - prices.kappa) * params.scale * params.beta_x / prices.px)
        .powf(1.0 / (1.0 - params.beta_x));
    let q = expansion_quality(x, prices, params);
    effort_of_inputs(x, q, params)
}

/// `q*(e) / x*(e)` along the expansion path.
pub fn quality_intensity(e: f64, prices: &InputPrices, params: &ProductionParams) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::domain(format!(
            "quality intensity needs positive effort, got {e}"
        )));
    }
    let bundle = cost_min_inputs(e, prices, params)?;
    Ok(bundle.q / bundle.x)
}
