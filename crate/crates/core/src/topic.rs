//! Ideas, the strength law, the share contest for prominence, and the
//! operator's payoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::production::{self, Direction, InputPrices, ProductionParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Idea {
    pub id: String,
    /// Marginal return to this idea's prominence.
    pub u: f64,
    /// Influence factor: strength change per unit of effort.
    pub a: f64,
    /// Base strength absent any intervention.
    pub b: f64,
}

impl Idea {
    pub fn new(id: impl Into<String>, u: f64, a: f64, b: f64) -> Self {
        Self {
            id: id.into(),
            u,
            a,
            b,
        }
    }

    fn validate(&self) -> Result<()> {
        let what = || format!("idea `{}`", self.id);
        if !(self.u >= 0.0 && self.u.is_finite()) {
            return Err(Error::validation(
                what(),
                format!("u must be >= 0, got {}", self.u),
            ));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::validation(
                what(),
                format!("a must be > 0, got {}", self.a),
            ));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::validation(
                what(),
                format!("b must be >= 0, got {}", self.b),
            ));
        }
        Ok(())
    }
}

/// A topic of competing ideas together with the influence technology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub ideas: Vec<Idea>,
    /// Weakening difficulty in `[0, 1]`; at 1 weakening is impossible.
    pub alpha: f64,
    pub prices: InputPrices,
    pub production: ProductionParams,
    /// Idea whose prominence the operator is trying to move, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal: Option<String>,
}

impl Scenario {
    pub fn new(
        ideas: Vec<Idea>,
        alpha: f64,
        prices: InputPrices,
        production: ProductionParams,
    ) -> Self {
        Self {
            ideas,
            alpha,
            prices,
            production,
            focal: None,
        }
    }

    pub fn with_focal(mut self, id: impl Into<String>) -> Self {
        self.focal = Some(id.into());
        self
    }

    pub fn len(&self) -> usize {
        self.ideas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ideas.is_empty()
    }

    pub fn base_strengths(&self) -> Vec<f64> {
        self.ideas.iter().map(|i| i.b).collect()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.ideas
            .iter()
            .position(|i| i.id == id)
            .ok_or_else(|| Error::UnknownIdea(id.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.ideas.len() < 2 {
            return Err(Error::validation(
                "scenario",
                format!("needs at least 2 ideas, got {}", self.ideas.len()),
            ));
        }
        for (k, idea) in self.ideas.iter().enumerate() {
            idea.validate()?;
            if self.ideas[..k].iter().any(|other| other.id == idea.id) {
                return Err(Error::validation(
                    "scenario",
                    format!("duplicate idea id `{}`", idea.id),
                ));
            }
        }
        if !self.ideas.iter().any(|i| i.b > 0.0) {
            return Err(Error::validation(
                "scenario",
                "at least one idea needs b > 0",
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::validation(
                "scenario",
                format!("alpha must lie in [0, 1], got {}", self.alpha),
            ));
        }
        self.prices.validate()?;
        self.production.validate()?;
        if let Some(focal) = &self.focal {
            self.index_of(focal)?;
        }
        Ok(())
    }

    pub fn cost(&self, effort: f64) -> Result<f64> {
        production::cost(effort, &self.prices, &self.production)
    }

    pub fn marginal_cost(&self, effort: f64) -> Result<f64> {
        production::marginal_cost(effort, &self.prices, &self.production)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Strengthen,
    Weaken,
    Abstain,
}

impl Action {
    pub fn direction(self) -> Option<Direction> {
        match self {
            Action::Strengthen => Some(Direction::Strengthen),
            Action::Weaken => Some(Direction::Weaken),
            Action::Abstain => None,
        }
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Action::Strengthen => "strengthen",
            Action::Weaken => "weaken",
            Action::Abstain => "abstain",
        })
    }
}

/// Strength change per unit of effort: `a(1+α)` upward, `-a(1-α)` downward.
pub fn impact_per_effort(idea: &Idea, direction: Direction, alpha: f64) -> f64 {
    let d = direction.sign();
    idea.a * (d + alpha * d * d)
}

pub fn strength_from_action(
    idea: &Idea,
    direction: Direction,
    effort: f64,
    alpha: f64,
) -> Result<f64> {
    if !(effort >= 0.0 && effort.is_finite()) {
        return Err(Error::domain(format!(
            "effort must be non-negative, got {effort}"
        )));
    }
    Ok((idea.b + impact_per_effort(idea, direction, alpha) * effort).max(0.0))
}

/// Effort needed to move `idea` from its base strength to `target`.
pub fn effort_required(idea: &Idea, target: f64, alpha: f64) -> Result<(Action, f64)> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::domain(format!(
            "target strength must be non-negative, got {target}"
        )));
    }
    if target > idea.b {
        let per = impact_per_effort(idea, Direction::Strengthen, alpha);
        Ok((Action::Strengthen, (target - idea.b) / per))
    } else if target < idea.b {
        let per = -impact_per_effort(idea, Direction::Weaken, alpha);
        if per <= 0.0 {
            return Err(Error::InfeasibleWeakening {
                id: idea.id.clone(),
            });
        }
        Ok((Action::Weaken, (idea.b - target) / per))
    } else {
        Ok((Action::Abstain, 0.0))
    }
}

fn total_strength(strengths: &[f64]) -> Result<f64> {
    if strengths.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::domain("strengths must be finite and non-negative"));
    }
    let total: f64 = strengths.iter().sum();
    if total > 0.0 {
        Ok(total)
    } else {
        Err(Error::DegenerateTopic)
    }
}

/// Share-contest prominence `z_i = s_i / Σ s_j`.
pub fn prominence(strengths: &[f64]) -> Result<Vec<f64>> {
    let total = total_strength(strengths)?;
    Ok(strengths.iter().map(|s| s / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    /// `S = Σ s_i`
    pub total: f64,
    /// `U = Σ s_i u_i`
    pub weighted: f64,
    /// `U / S`, the prominence-weighted average payoff.
    pub average: f64,
}

pub fn aggregates(strengths: &[f64], scenario: &Scenario) -> Result<Aggregates> {
    check_len(strengths, scenario)?;
    let total = total_strength(strengths)?;
    let weighted: f64 = strengths
        .iter()
        .zip(&scenario.ideas)
        .map(|(s, i)| s * i.u)
        .sum();
    Ok(Aggregates {
        total,
        weighted,
        average: weighted / total,
    })
}

/// `u_i - U/S`, computed as `Σ_j s_j (u_i - u_j) / S` so that it is exactly
/// zero whenever every payoff weight is equal.
pub fn payoff_gap(scenario: &Scenario, idx: usize, strengths: &[f64]) -> Result<f64> {
    check_len(strengths, scenario)?;
    let total = total_strength(strengths)?;
    let ui = scenario.ideas[idx].u;
    let num: f64 = strengths
        .iter()
        .zip(&scenario.ideas)
        .map(|(s, j)| s * (ui - j.u))
        .sum();
    Ok(num / total)
}

fn check_len(strengths: &[f64], scenario: &Scenario) -> Result<()> {
    if strengths.len() != scenario.len() {
        return Err(Error::validation(
            "strength profile",
            format!(
                "has {} entries for {} ideas",
                strengths.len(),
                scenario.len()
            ),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdeaEffort {
    pub action: Action,
    pub effort: f64,
}

/// `Σ u_i z_i - Σ c(e_i)` for an explicit plan. Each strength must be what
/// the strength law gives for the stated action and effort.
pub fn payoff(scenario: &Scenario, efforts: &[IdeaEffort], strengths: &[f64]) -> Result<f64> {
    check_len(strengths, scenario)?;
    if efforts.len() != strengths.len() {
        return Err(Error::validation(
            "plan",
            "efforts and strengths differ in length",
        ));
    }
    let mut total_cost = 0.0;
    for ((idea, act), &s) in scenario.ideas.iter().zip(efforts).zip(strengths) {
        let expected = match act.action.direction() {
            Some(d) => strength_from_action(idea, d, act.effort, scenario.alpha)?,
            None if act.effort == 0.0 => idea.b,
            None => {
                return Err(Error::validation(
                    "plan",
                    format!("idea `{}` abstains with effort {}", idea.id, act.effort),
                ))
            }
        };
        if (expected - s).abs() > 1e-9 * expected.abs().max(1.0) {
            return Err(Error::validation(
                "plan",
                format!(
                    "idea `{}` has strength {s} but its effort yields {expected}",
                    idea.id
                ),
            ));
        }
        total_cost += scenario.cost(act.effort)?;
    }
    let agg = aggregates(strengths, scenario)?;
    Ok(agg.average - total_cost)
}

/// The operator's objective as a function of the strength profile alone,
/// with each effort implied by the distance from base strength.
pub fn objective(scenario: &Scenario, strengths: &[f64]) -> Result<f64> {
    let agg = aggregates(strengths, scenario)?;
    let mut total_cost = 0.0;
    for (idea, &s) in scenario.ideas.iter().zip(strengths) {
        let (_, e) = effort_required(idea, s, scenario.alpha)?;
        total_cost += scenario.cost(e)?;
    }
    Ok(agg.average - total_cost)
}
