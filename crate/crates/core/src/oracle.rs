//! Brute-force checks for both layers of the optimization.
//!
//! [`input_grid_cost_check`] scans the input plane directly through the
//! production function, independent of the expansion-path root-find.
//! [`grid_payoff_search`] enumerates strength profiles exhaustively.
//! [`stationarity_check`] audits a plan by finite differences of the objective.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::Plan;
use crate::production::{self, InputBundle, InputPrices, ProductionParams};
use crate::topic::{self, Scenario};

pub const MAX_CELLS: u128 = 100_000_000;
pub const MAX_IDEAS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// One strength axis per idea.
    pub axes: Vec<Axis>,
    /// Points per side of the input-plane grid.
    pub input_resolution: usize,
    /// Payoff difference below which two grid optima count as tied.
    pub tie_tolerance: f64,
}

impl GridSpec {
    /// `[0, 3·max(b) + 3]` on every axis, with step 0.01, 0.05 or 0.1 for
    /// two, three or four ideas.
    pub fn default_for(scenario: &Scenario) -> Result<GridSpec> {
        let step = match scenario.len() {
            0..=2 => 0.01,
            3 => 0.05,
            4 => 0.1,
            n => {
                return Err(Error::validation(
                    "oracle grid",
                    format!("exhaustive search supports at most {MAX_IDEAS} ideas, got {n}"),
                ))
            }
        };
        Ok(Self::uniform(scenario, step))
    }

    pub fn uniform(scenario: &Scenario, step: f64) -> GridSpec {
        let max_b = scenario.ideas.iter().map(|i| i.b).fold(0.0, f64::max);
        let axis = Axis {
            lo: 0.0,
            hi: 3.0 * max_b + 3.0,
            step,
        };
        GridSpec {
            axes: vec![axis; scenario.len()],
            input_resolution: 200,
            tie_tolerance: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.axes {
            if !(a.lo >= 0.0 && a.step > 0.0 && a.hi > a.lo && a.hi.is_finite()) {
                return Err(Error::validation(
                    "oracle grid",
                    format!("axis [{}, {}] step {} is invalid", a.lo, a.hi, a.step),
                ));
            }
        }
        if self.input_resolution < 50 {
            return Err(Error::validation(
                "oracle grid",
                format!(
                    "input resolution must be at least 50, got {}",
                    self.input_resolution
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOptimum {
    pub strengths: Vec<f64>,
    pub payoff: f64,
    pub cells: u64,
}

/// Axis points for one idea: the uniform grid plus the base strength, minus
/// anything unreachable when weakening is impossible.
fn axis_points(axis: &Axis, b: f64, alpha: f64) -> Vec<f64> {
    let count = ((axis.hi - axis.lo) / axis.step + 1e-9).floor() as usize + 1;
    let mut pts: Vec<f64> = (0..count).map(|k| axis.lo + k as f64 * axis.step).collect();
    if b >= axis.lo && b <= axis.hi && !pts.iter().any(|p| (p - b).abs() < 1e-12) {
        let at = pts.partition_point(|p| *p < b);
        pts.insert(at, b);
    }
    if alpha >= 1.0 {
        pts.retain(|p| *p >= b);
    }
    pts
}

/// Exhaustive search of the objective over the strength grid. The first
/// maximum in row-major scan order wins.
pub fn grid_payoff_search(scenario: &Scenario, grid: &GridSpec) -> Result<GridOptimum> {
    scenario.validate()?;
    grid.validate()?;
    let n = scenario.len();
    if n > MAX_IDEAS {
        return Err(Error::validation(
            "oracle grid",
            format!("exhaustive search supports at most {MAX_IDEAS} ideas, got {n}"),
        ));
    }
    if grid.axes.len() != n {
        return Err(Error::validation(
            "oracle grid",
            "one axis per idea is required",
        ));
    }

    struct AxisTable {
        s: Vec<f64>,
        us: Vec<f64>,
        cost: Vec<f64>,
    }
    let mut tables = Vec::with_capacity(n);
    let mut cells: u128 = 1;
    for (idea, axis) in scenario.ideas.iter().zip(&grid.axes) {
        let s = axis_points(axis, idea.b, scenario.alpha);
        cells *= s.len() as u128;
        if cells > MAX_CELLS {
            // keep multiplying so the error reports the full size
            let rest: u128 = scenario
                .ideas
                .iter()
                .zip(&grid.axes)
                .skip(tables.len() + 1)
                .map(|(i, a)| axis_points(a, i.b, scenario.alpha).len() as u128)
                .product();
            return Err(Error::GridTooLarge {
                cells: cells * rest,
                limit: MAX_CELLS,
            });
        }
        let cost = s
            .iter()
            .map(|&v| {
                let (_, e) = topic::effort_required(idea, v, scenario.alpha)?;
                scenario.cost(e)
            })
            .collect::<Result<Vec<_>>>()?;
        let us = s.iter().map(|v| v * idea.u).collect();
        tables.push(AxisTable { s, us, cost });
    }

    let inner: u64 = tables[1..].iter().map(|t| t.s.len() as u64).product();
    let best = (0..tables[0].s.len())
        .into_par_iter()
        .map(|i0| {
            let mut idx = vec![0usize; n];
            idx[0] = i0;
            let mut best: Option<(f64, u64)> = None;
            for k in 0..inner {
                let (mut s_sum, mut u_sum, mut c_sum) = (0.0, 0.0, 0.0);
                for (t, &j) in tables.iter().zip(&idx) {
                    s_sum += t.s[j];
                    u_sum += t.us[j];
                    c_sum += t.cost[j];
                }
                if s_sum > 0.0 {
                    let v = u_sum / s_sum - c_sum;
                    if best.is_none_or(|(bv, _)| v > bv) {
                        best = Some((v, i0 as u64 * inner + k));
                    }
                }
                // odometer over axes 1..n, last axis fastest
                for d in (1..n).rev() {
                    idx[d] += 1;
                    if idx[d] < tables[d].s.len() {
                        break;
                    }
                    idx[d] = 0;
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => {
                    if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                        Some(y)
                    } else {
                        Some(x)
                    }
                }
                (x, None) => x,
                (None, y) => y,
            },
        );
    let (payoff, flat) = best.ok_or(Error::DegenerateTopic)?;

    let mut strengths = vec![0.0; n];
    let mut rem = flat;
    for d in (0..n).rev() {
        let len = tables[d].s.len() as u64;
        strengths[d] = tables[d].s[(rem % len) as usize];
        rem /= len;
    }
    Ok(GridOptimum {
        strengths,
        payoff,
        cells: cells as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum CostCheck {
    Pass,
    /// A grid bundle reaches the effort for less than the claimed bundle.
    Cheaper {
        witness: InputBundle,
        witness_expenditure: f64,
        claimed_expenditure: f64,
    },
    /// The claimed bundle does not even produce the effort.
    Infeasible {
        claimed: InputBundle,
        produced: f64,
    },
}

impl CostCheck {
    pub fn passed(&self) -> bool {
        matches!(self, CostCheck::Pass)
    }
}

/// Scans `[0, 4x*] × [0, 4q*]` for a bundle producing at least `e` more
/// cheaply than the cost-minimizing one.
pub fn input_grid_cost_check(
    e: f64,
    prices: &InputPrices,
    params: &ProductionParams,
    resolution: usize,
) -> Result<CostCheck> {
    if !(e > 0.0) {
        return Err(Error::domain(format!(
            "cost check needs positive effort, got {e}"
        )));
    }
    let claimed = production::cost_min_inputs(e, prices, params)?;
    check_claimed_bundle(e, &claimed, prices, params, resolution)
}

/// As [`input_grid_cost_check`] but against an arbitrary claimed bundle.
pub fn check_claimed_bundle(
    e: f64,
    claimed: &InputBundle,
    prices: &InputPrices,
    params: &ProductionParams,
    resolution: usize,
) -> Result<CostCheck> {
    if resolution < 2 {
        return Err(Error::domain(
            "input grid needs at least two points per side",
        ));
    }
    let produced = production::effort_of_inputs(claimed.x, claimed.q, params)?;
    if produced < e * (1.0 - 1e-9) {
        return Ok(CostCheck::Infeasible {
            claimed: *claimed,
            produced,
        });
    }
    let claimed_expenditure = claimed.expenditure(prices);
    let last = (resolution - 1) as f64;
    for i in 0..resolution {
        let x = 4.0 * claimed.x * i as f64 / last;
        for j in 0..resolution {
            let q = 4.0 * claimed.q * j as f64 / last;
            let bundle = InputBundle {
                x,
                q,
                direction: None,
            };
            let spend = bundle.expenditure(prices);
            if spend < claimed_expenditure - 1e-6
                && production::effort_of_inputs(x, q, params)? >= e
            {
                return Ok(CostCheck::Cheaper {
                    witness: bundle,
                    witness_expenditure: spend,
                    claimed_expenditure,
                });
            }
        }
    }
    Ok(CostCheck::Pass)
}

const FD_STEP: f64 = 1e-5;

/// Largest violation of first-order optimality over the plan's coordinates.
///
/// Interior coordinates use a central difference of the objective. At the
/// kinks (zero strength, or base strength where the effort changes
/// direction) the one-sided slopes must point back into the kink, and the
/// residual is how far they fail to.
pub fn stationarity_check(scenario: &Scenario, plan: &Plan) -> Result<f64> {
    let s0 = plan.strengths();
    let phi = |s: &[f64]| topic::objective(scenario, s);
    let base = phi(&s0)?;
    let mut worst = 0.0f64;
    for (i, idea) in scenario.ideas.iter().enumerate() {
        let at = |v: f64| -> Result<f64> {
            let mut s = s0.clone();
            s[i] = v;
            phi(&s)
        };
        let si = s0[i];
        let can_weaken = scenario.alpha < 1.0;
        // Steps are one unit of FD_STEP effort, so weak impacts do not
        // inflate the truncation error.
        let up = FD_STEP * idea.a * (1.0 + scenario.alpha);
        let down = FD_STEP * idea.a * (1.0 - scenario.alpha);
        let residual = if (si - idea.b).abs() <= 1e-12 {
            let forward = (at(si + up)? - base) / up;
            let mut r = forward.max(0.0);
            if can_weaken && si >= down {
                let backward = (base - at(si - down)?) / down;
                r = r.max(-backward);
            }
            r
        } else if si <= 1e-12 {
            let forward = (at(si + FD_STEP)? - base) / FD_STEP;
            forward.max(0.0)
        } else {
            let step = if si > idea.b { up } else { down };
            let h = step.min(0.5 * (si - idea.b).abs()).min(0.5 * si);
            ((at(si + h)? - at(si - h)?) / (2.0 * h)).abs()
        };
        worst = worst.max(residual);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{solve_profile, Diagnostics, SolverConfig};
    use crate::topic::Idea;

    fn scenario(us: &[f64], alpha: f64) -> Scenario {
        let ideas = us
            .iter()
            .enumerate()
            .map(|(k, &u)| Idea::new(format!("i{k}"), u, 1.0, 1.0))
            .collect();
        Scenario::new(
            ideas,
            alpha,
            InputPrices::default(),
            ProductionParams::default(),
        )
    }

    #[test]
    fn equal_payoffs_pick_base_profile() {
        let sc = scenario(&[0.5, 0.5], 0.0);
        let opt = grid_payoff_search(&sc, &GridSpec::uniform(&sc, 0.05)).unwrap();
        assert_eq!(opt.strengths, vec![1.0, 1.0]);
        assert_eq!(opt.payoff, 0.5);
    }

    #[test]
    fn single_cell_grid_returns_base_payoff() {
        let mut sc = scenario(&[1.0, 0.0], 0.3);
        sc.ideas[0].b = 1.3;
        let grid = GridSpec {
            axes: sc
                .ideas
                .iter()
                .map(|i| Axis {
                    lo: i.b,
                    hi: i.b + 0.05,
                    step: 0.1,
                })
                .collect(),
            input_resolution: 50,
            tie_tolerance: 1e-9,
        };
        let opt = grid_payoff_search(&sc, &grid).unwrap();
        assert_eq!(opt.cells, 1);
        assert_eq!(opt.strengths, vec![1.3, 1.0]);
        assert_eq!(opt.payoff, 1.3 / 2.3);
    }

    #[test]
    fn solver_matches_two_idea_oracle() {
        let sc = scenario(&[1.0, 0.0], 0.0);
        let grid = GridSpec::default_for(&sc).unwrap();
        let opt = grid_payoff_search(&sc, &grid).unwrap();
        let plan = solve_profile(&sc, &SolverConfig::default()).unwrap();
        assert!(
            plan.payoff >= opt.payoff - 1e-3,
            "{} vs {}",
            plan.payoff,
            opt.payoff
        );
        // the oracle is a discretization of the same objective
        assert!(plan.payoff <= opt.payoff + 1e-3);
    }

    #[test]
    fn oversize_and_too_many_ideas_are_refused() {
        let sc = scenario(&[1.0, 0.0, 0.0, 0.0], 0.0);
        assert!(matches!(
            grid_payoff_search(&sc, &GridSpec::uniform(&sc, 0.001)),
            Err(Error::GridTooLarge { .. })
        ));
        let sc = scenario(&[1.0, 0.0, 0.0, 0.0, 0.0], 0.0);
        assert!(GridSpec::default_for(&sc).is_err());
        assert!(grid_payoff_search(&sc, &GridSpec::uniform(&sc, 0.5)).is_err());
    }

    #[test]
    fn alpha_one_excludes_weakening_cells() {
        let sc = scenario(&[1.0, 0.0], 1.0);
        let opt = grid_payoff_search(&sc, &GridSpec::uniform(&sc, 0.02)).unwrap();
        assert!(opt.strengths[1] >= 1.0);
    }

    #[test]
    fn halving_step_does_not_lose_payoff() {
        let sc = scenario(&[1.0, 0.0, 0.2], 0.25);
        let coarse = grid_payoff_search(&sc, &GridSpec::uniform(&sc, 0.1)).unwrap();
        let fine = grid_payoff_search(&sc, &GridSpec::uniform(&sc, 0.05)).unwrap();
        assert!(fine.payoff >= coarse.payoff - 1e-9);
    }

    #[test]
    fn symmetric_cost_check_passes() {
        let p = ProductionParams {
            beta_x: 0.5,
            beta_q: 0.5,
            scale: 1.0,
        };
        let check = input_grid_cost_check(2.0, &InputPrices::default(), &p, 200).unwrap();
        assert!(check.passed());
    }

    #[test]
    fn perturbed_optimum_fails_with_witness() {
        let p = ProductionParams::default();
        let pr = InputPrices::default();
        let e = 2.0;
        let opt = production::cost_min_inputs(e, &pr, &p).unwrap();
        let claim = InputBundle {
            x: opt.x * 1.5,
            q: opt.q / 2.0,
            direction: None,
        };
        match check_claimed_bundle(e, &claim, &pr, &p, 200).unwrap() {
            CostCheck::Cheaper {
                witness,
                witness_expenditure,
                claimed_expenditure,
            } => {
                assert!(witness_expenditure < claimed_expenditure);
                assert!(production::effort_of_inputs(witness.x, witness.q, &p).unwrap() >= e);
            }
            CostCheck::Infeasible { produced, .. } => assert!(produced < e),
            CostCheck::Pass => panic!("perturbed bundle passed"),
        }
    }

    #[test]
    fn stationarity_of_solver_output_and_perturbation() {
        let sc = scenario(&[1.0, 0.0, 0.3], 0.2);
        let plan = solve_profile(&sc, &SolverConfig::default()).unwrap();
        let r = stationarity_check(&sc, &plan).unwrap();
        assert!(r < 1e-5, "{r}");

        let mut s = plan.strengths();
        s[0] += 0.1;
        let perturbed = Plan::from_strengths(&sc, &s, Diagnostics::default()).unwrap();
        assert!(stationarity_check(&sc, &perturbed).unwrap() > 1e-3);
    }

    #[test]
    fn all_abstain_optimum_has_zero_residual() {
        let sc = scenario(&[0.7, 0.7, 0.7], 0.5);
        let plan = solve_profile(&sc, &SolverConfig::default()).unwrap();
        assert_eq!(stationarity_check(&sc, &plan).unwrap(), 0.0);
    }
}
