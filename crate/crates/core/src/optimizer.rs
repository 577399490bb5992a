//! Optimal influence plans for a general topic.
//!
//! The objective `U/S - Σ c(e_i)` is a ratio and is not concave in the
//! strength profile, so the solver combines three pieces:
//!
//! 1. A damped fixed point on `(S, U)`. Holding the aggregates fixed, each
//!    idea's problem is a linear benefit minus a convex cost, whose unique
//!    solution follows from inverting `c'`.
//! 2. A derivative-free coordinate search that polishes each fixed point and
//!    escapes saddles.
//! 3. Multiple starts (base, elimination corners, seeded random), keeping
//!    the best payoff.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::production::{self, InputBundle};
use crate::topic::{self, Action, Idea, IdeaEffort, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Fraction of each fixed-point step taken, in `(0, 1]`.
    pub damping: f64,
    pub max_iterations: usize,
    /// Convergence threshold on the largest strength change in a sweep.
    pub tolerance: f64,
    /// Randomized starts in addition to the base profile and elimination corners.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iterations: 10_000,
            tolerance: 1e-9,
            restarts: 8,
            seed: 42,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::validation(
                "solver",
                format!("damping must lie in (0, 1], got {}", self.damping),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::validation(
                "solver",
                format!("tolerance must be positive, got {}", self.tolerance),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation(
                "solver",
                "max_iterations must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Goal {
    Promote,
    Demote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Direct,
    Indirect,
}

/// One cell of the promotion/demotion by direct/indirect tactics matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quadrant {
    pub goal: Goal,
    pub mechanism: Mechanism,
}

impl std::fmt::Display for Quadrant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let goal = match self.goal {
            Goal::Promote => "promote",
            Goal::Demote => "demote",
        };
        let mechanism = match self.mechanism {
            Mechanism::Direct => "direct",
            Mechanism::Indirect => "indirect",
        };
        write!(f, "{goal}-{mechanism}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeaPlan {
    pub id: String,
    pub action: Action,
    pub strength: f64,
    pub effort: f64,
    pub inputs: InputBundle,
    pub cost: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Fixed-point sweeps used by the selected start.
    pub iterations: usize,
    /// Largest undamped strength change in the final sweep.
    pub step_residual: f64,
    /// Largest first-order-condition residual over acting interior ideas.
    pub foc_residual: f64,
    pub starts: usize,
    pub converged_starts: usize,
    /// Index of the start that produced the plan (0 is the base profile).
    pub selected_start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub ideas: Vec<IdeaPlan>,
    /// `S`
    pub total_strength: f64,
    /// `U`
    pub weighted_payoff: f64,
    /// `U / S`
    pub average_payoff: f64,
    pub payoff: f64,
    pub quadrants: BTreeSet<Quadrant>,
    pub diagnostics: Diagnostics,
}

impl Plan {
    pub fn strengths(&self) -> Vec<f64> {
        self.ideas.iter().map(|i| i.strength).collect()
    }

    pub fn total_cost(&self) -> f64 {
        self.ideas.iter().map(|i| i.cost).sum()
    }

    /// Builds a plan from a strength profile, deriving actions, efforts,
    /// inputs and aggregates. Quadrants are filled when the scenario names a focal idea.
    pub fn from_strengths(
        scenario: &Scenario,
        strengths: &[f64],
        diagnostics: Diagnostics,
    ) -> Result<Plan> {
        let agg = topic::aggregates(strengths, scenario)?;
        let z = topic::prominence(strengths)?;
        let mut ideas = Vec::with_capacity(strengths.len());
        let mut efforts = Vec::with_capacity(strengths.len());
        for ((idea, &s), zi) in scenario.ideas.iter().zip(strengths).zip(z) {
            let (action, effort) = topic::effort_required(idea, s, scenario.alpha)?;
            efforts.push(IdeaEffort { action, effort });
            ideas.push(IdeaPlan {
                id: idea.id.clone(),
                action,
                strength: s,
                effort,
                inputs: InputBundle::ZERO,
                cost: scenario.cost(effort)?,
                prominence: zi,
            });
        }
        let payoff = topic::payoff(scenario, &efforts, strengths)?;
        let mut plan = Plan {
            ideas,
            total_strength: agg.total,
            weighted_payoff: agg.weighted,
            average_payoff: agg.average,
            payoff,
            quadrants: BTreeSet::new(),
            diagnostics,
        };
        plan = plan_inputs(plan, scenario)?;
        plan.diagnostics.foc_residual = max_foc_residual(scenario, strengths)?;
        if let Some(focal) = &scenario.focal {
            plan.quadrants = tactic_quadrant(&plan, focal, scenario)?;
        }
        Ok(plan)
    }
}

/// Decides whether `idea` is worth influencing given aggregates `S` and `U`.
pub fn classify(idea: &Idea, total: f64, weighted: f64, scenario: &Scenario) -> Result<Action> {
    if !(total > 0.0) {
        return Err(Error::DegenerateTopic);
    }
    classify_gap(idea, rounded_gap(idea.u, weighted / total), total, scenario)
}

/// `u - U/S` with differences at rounding level treated as an exact tie.
fn rounded_gap(u: f64, average: f64) -> f64 {
    let gap = u - average;
    if gap.abs() <= 8.0 * f64::EPSILON * u.abs().max(average.abs()) {
        0.0
    } else {
        gap
    }
}

fn classify_gap(idea: &Idea, gap: f64, total: f64, scenario: &Scenario) -> Result<Action> {
    if !(total > 0.0) {
        return Err(Error::DegenerateTopic);
    }
    let alpha = scenario.alpha;
    let floor = scenario.marginal_cost(0.0)?;
    if gap > total / (idea.a * (1.0 + alpha)) * floor {
        Ok(Action::Strengthen)
    } else if alpha < 1.0 && -gap > total / (idea.a * (1.0 - alpha)) * floor {
        Ok(Action::Weaken)
    } else {
        Ok(Action::Abstain)
    }
}

/// Optimal strength for `idea` holding `S` and `U` fixed.
pub fn solve_idea(idea: &Idea, total: f64, weighted: f64, scenario: &Scenario) -> Result<f64> {
    if !(total > 0.0) {
        return Err(Error::DegenerateTopic);
    }
    solve_idea_gap(idea, rounded_gap(idea.u, weighted / total), total, scenario)
}

fn solve_idea_gap(idea: &Idea, gap: f64, total: f64, scenario: &Scenario) -> Result<f64> {
    let alpha = scenario.alpha;
    match classify_gap(idea, gap, total, scenario)? {
        Action::Abstain => Ok(idea.b),
        Action::Strengthen => {
            let per = idea.a * (1.0 + alpha);
            let e = production::effort_at_marginal_cost(
                gap * per / total,
                &scenario.prices,
                &scenario.production,
            )?;
            Ok(idea.b + per * e)
        }
        Action::Weaken => {
            let per = idea.a * (1.0 - alpha);
            let target = -gap * per / total;
            // Corner: the marginal benefit still exceeds c' at full elimination.
            if target > scenario.marginal_cost(idea.b / per)? {
                return Ok(0.0);
            }
            let e = production::effort_at_marginal_cost(
                target,
                &scenario.prices,
                &scenario.production,
            )?;
            Ok((idea.b - per * e).max(0.0))
        }
    }
}

/// Residual of the first-order condition for idea `idx` at profile
/// `strengths`. Zero for abstaining ideas and for ideas at the zero corner
/// whose corner condition holds.
pub fn foc_residual(scenario: &Scenario, idx: usize, strengths: &[f64]) -> Result<f64> {
    let idea = &scenario.ideas[idx];
    let s = strengths[idx];
    let total: f64 = strengths.iter().sum();
    let gap = topic::payoff_gap(scenario, idx, strengths)?;
    let alpha = scenario.alpha;
    let (action, e) = topic::effort_required(idea, s, alpha)?;
    let res = match action {
        Action::Abstain => 0.0,
        Action::Strengthen => gap - total / (idea.a * (1.0 + alpha)) * scenario.marginal_cost(e)?,
        Action::Weaken => {
            let r = -gap - total / (idea.a * (1.0 - alpha)) * scenario.marginal_cost(e)?;
            if s == 0.0 {
                r.min(0.0)
            } else {
                r
            }
        }
    };
    Ok(res.abs())
}

fn max_foc_residual(scenario: &Scenario, strengths: &[f64]) -> Result<f64> {
    (0..strengths.len()).try_fold(0.0f64, |m, i| {
        Ok(m.max(foc_residual(scenario, i, strengths)?))
    })
}

/// One undamped sweep of the fixed-point map.
fn best_response(scenario: &Scenario, strengths: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = strengths.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateTopic);
    }
    scenario
        .ideas
        .iter()
        .enumerate()
        .map(|(i, idea)| {
            let gap = topic::payoff_gap(scenario, i, strengths)?;
            solve_idea_gap(idea, gap, total, scenario)
        })
        .collect()
}

#[derive(Debug, Clone)]
struct FixedPoint {
    strengths: Vec<f64>,
    iterations: usize,
    step: f64,
}

fn fixed_point(scenario: &Scenario, start: &[f64], config: &SolverConfig) -> Result<FixedPoint> {
    // Jacobi updates overshoot when many ideas respond to the same `S`, so
    // the damping is halved whenever the step stops shrinking.
    const STALL_LIMIT: usize = 25;
    const MIN_DAMPING: f64 = 1.0 / 1024.0;
    let mut s = start.to_vec();
    let mut step = f64::INFINITY;
    let mut damping = config.damping;
    let mut best_step = f64::INFINITY;
    let mut stalled = 0;
    for it in 1..=config.max_iterations {
        let target = best_response(scenario, &s)?;
        step = s
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if step < config.tolerance {
            return Ok(FixedPoint {
                strengths: target,
                iterations: it,
                step,
            });
        }
        if step < 0.99 * best_step {
            best_step = step;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                damping = (damping * 0.5).max(MIN_DAMPING);
                best_step = step;
                stalled = 0;
            }
        }
        for (si, ti) in s.iter_mut().zip(&target) {
            *si += damping * (ti - *si);
        }
    }
    Err(Error::NonConvergence {
        context: "fixed-point iteration".into(),
        iterations: config.max_iterations,
        residual: step,
        best: Some(s),
    })
}

fn lower_bounds(scenario: &Scenario) -> Vec<f64> {
    scenario
        .ideas
        .iter()
        .map(|i| if scenario.alpha < 1.0 { 0.0 } else { i.b })
        .collect()
}

const REFINE_MIN_STEP: f64 = 1e-11;
const REFINE_MAX_EVALS: usize = 50_000;

fn improves(candidate: f64, incumbent: f64) -> bool {
    candidate > incumbent + 1e-14 * incumbent.abs().max(1.0)
}

/// Coordinate search on the objective with shrinking steps, projected onto
/// the feasible strengths. Only strict improvements are accepted.
fn refine_strengths(scenario: &Scenario, start: &[f64]) -> (Vec<f64>, f64) {
    let lower = lower_bounds(scenario);
    let mut s: Vec<f64> = start.iter().zip(&lower).map(|(v, lo)| v.max(*lo)).collect();
    let mut best = match topic::objective(scenario, &s) {
        Ok(v) => v,
        Err(_) => return (start.to_vec(), f64::NEG_INFINITY),
    };
    let mut step = 0.05 * s.iter().cloned().fold(1.0, f64::max);
    let mut evals = 0;
    while step > REFINE_MIN_STEP && evals < REFINE_MAX_EVALS {
        let mut improved = false;
        for i in 0..s.len() {
            for dir in [1.0, -1.0] {
                let mut t = step;
                let mut moved = false;
                loop {
                    let cand = (s[i] + dir * t).max(lower[i]);
                    if cand == s[i] {
                        break;
                    }
                    let old = s[i];
                    s[i] = cand;
                    evals += 1;
                    match topic::objective(scenario, &s) {
                        Ok(v) if improves(v, best) => {
                            best = v;
                            moved = true;
                            t *= 2.0;
                        }
                        _ => {
                            s[i] = old;
                            break;
                        }
                    }
                }
                if moved {
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (s, best)
}

/// Local derivative-free polish of a plan. Never lowers the payoff; falls
/// back to the input plan if the polished profile cannot be evaluated.
pub fn refine_direct(scenario: &Scenario, plan: &Plan) -> Result<Plan> {
    let (s, value) = refine_strengths(scenario, &plan.strengths());
    if value > plan.payoff {
        if let Ok(refined) = Plan::from_strengths(scenario, &s, plan.diagnostics) {
            if refined.payoff >= plan.payoff {
                return Ok(refined);
            }
        }
    }
    Ok(plan.clone())
}

/// Fills each idea's cost-minimizing inputs from its effort.
pub fn plan_inputs(mut plan: Plan, scenario: &Scenario) -> Result<Plan> {
    for ip in &mut plan.ideas {
        let mut bundle =
            production::cost_min_inputs(ip.effort, &scenario.prices, &scenario.production)?;
        bundle.direction = ip.action.direction();
        ip.inputs = bundle;
    }
    Ok(plan)
}

/// Tactics-matrix cells touched by `plan` for the idea `focal_id`.
pub fn tactic_quadrant(
    plan: &Plan,
    focal_id: &str,
    scenario: &Scenario,
) -> Result<BTreeSet<Quadrant>> {
    let focal = scenario.index_of(focal_id)?;
    let gap = topic::payoff_gap(scenario, focal, &scenario.base_strengths())?;
    let goal = if gap > 0.0 {
        Goal::Promote
    } else {
        Goal::Demote
    };
    let mut cells = BTreeSet::new();
    for (i, ip) in plan.ideas.iter().enumerate() {
        if ip.action == Action::Abstain {
            continue;
        }
        let mechanism = if i == focal {
            Mechanism::Direct
        } else {
            Mechanism::Indirect
        };
        cells.insert(Quadrant { goal, mechanism });
    }
    Ok(cells)
}

fn starting_points(scenario: &Scenario, config: &SolverConfig) -> Vec<Vec<f64>> {
    let base = scenario.base_strengths();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts = vec![base.clone()];
    // Eliminating several ideas at once can pay where eliminating any one
    // does not, and local moves from the base profile never find it. Seed
    // each corner that zeroes every idea below a payoff level.
    if scenario.alpha < 1.0 {
        let mut levels: Vec<f64> = scenario.ideas.iter().map(|i| i.u).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        for &level in levels.iter().skip(1) {
            let corner = scenario
                .ideas
                .iter()
                .map(|i| if i.u < level { 0.0 } else { i.b })
                .collect();
            starts.push(corner);
        }
    }
    for _ in 0..config.restarts {
        let s: Vec<f64> = base
            .iter()
            .map(|b| rng.gen_range(0.0..=2.0 * b + 1.0))
            .collect();
        starts.push(s);
    }
    starts
}

struct Candidate {
    strengths: Vec<f64>,
    value: f64,
    iterations: usize,
    step: f64,
}

/// Fixed point, then polish; if the polish moved away from the fixed point
/// (a saddle), re-enter the fixed point from there.
fn polish(scenario: &Scenario, fp: FixedPoint, config: &SolverConfig) -> Result<Candidate> {
    let mut current = Candidate {
        value: topic::objective(scenario, &fp.strengths)?,
        strengths: fp.strengths,
        iterations: fp.iterations,
        step: fp.step,
    };
    for _ in 0..8 {
        let (refined, value) = refine_strengths(scenario, &current.strengths);
        if !(value > current.value) {
            break;
        }
        let moved = refined
            .iter()
            .zip(&current.strengths)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if moved <= 1e-7 {
            current.strengths = refined;
            current.value = value;
            break;
        }
        match fixed_point(scenario, &refined, config) {
            Ok(next) => {
                let next_value = topic::objective(scenario, &next.strengths)?;
                current = if next_value >= value {
                    Candidate {
                        strengths: next.strengths,
                        value: next_value,
                        iterations: current.iterations + next.iterations,
                        step: next.step,
                    }
                } else {
                    Candidate {
                        strengths: refined,
                        value,
                        ..current
                    }
                };
            }
            Err(_) => {
                current.strengths = refined;
                current.value = value;
                break;
            }
        }
    }
    Ok(current)
}

/// Resets strengths left within rounding distance of their base value, so
/// that ideas with a vanishing gap report Abstain rather than a trace of
/// effort. A reset is kept unless it costs more than rounding noise.
fn snap_to_base(scenario: &Scenario, mut strengths: Vec<f64>) -> Result<Vec<f64>> {
    const SNAP: f64 = 1e-7;
    let mut value = topic::objective(scenario, &strengths)?;
    for (i, idea) in scenario.ideas.iter().enumerate() {
        let s = strengths[i];
        if s == idea.b || (s - idea.b).abs() > SNAP * idea.b.max(1.0) {
            continue;
        }
        strengths[i] = idea.b;
        let snapped = topic::objective(scenario, &strengths)?;
        if !improves(value, snapped) {
            value = snapped;
        } else {
            strengths[i] = s;
        }
    }
    Ok(strengths)
}

/// Solves for the optimal influence plan.
pub fn solve_profile(scenario: &Scenario, config: &SolverConfig) -> Result<Plan> {
    scenario.validate()?;
    config.validate()?;
    let starts = starting_points(scenario, config);
    let outcomes: Vec<Result<Candidate>> = starts
        .par_iter()
        .map(|start| {
            let fp = fixed_point(scenario, start, config)?;
            polish(scenario, fp, config)
        })
        .collect();

    let mut best: Option<(usize, Candidate)> = None;
    let mut converged = 0;
    let mut last_failure = None;
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(c) => {
                converged += 1;
                if best.as_ref().is_none_or(|(_, b)| c.value > b.value) {
                    best = Some((k, c));
                }
            }
            Err(e @ Error::NonConvergence { .. }) => {
                last_failure.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    let Some((selected, cand)) = best else {
        return Err(last_failure.unwrap_or(Error::NonConvergence {
            context: "solve_profile".into(),
            iterations: config.max_iterations,
            residual: f64::NAN,
            best: None,
        }));
    };
    let strengths = snap_to_base(scenario, cand.strengths)?;
    let diagnostics = Diagnostics {
        iterations: cand.iterations,
        step_residual: cand.step,
        foc_residual: 0.0,
        starts: starts.len(),
        converged_starts: converged,
        selected_start: selected,
    };
    Plan::from_strengths(scenario, &strengths, diagnostics)
}
