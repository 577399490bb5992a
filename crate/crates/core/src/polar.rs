//! The two polar situations: pure promotion and pure demotion of one focal
//! idea against `N - 1` symmetric alternatives, all starting at strength 1.
//!
//! In promotion the focal idea pays 1 and the alternatives 0; the operator
//! may strengthen the focal idea (direct) and weaken the alternatives
//! (indirect). Demotion flips the payoffs; the operator may weaken the focal
//! idea (direct) and strengthen the alternatives (indirect).
//!
//! The solver works on the reduced pair `(s_f, s_a)` by block coordinate
//! iteration. A strengthening block has a monotone first-order condition and
//! is solved by one root-find. A weakening block has a convex benefit, so it
//! is maximized over `[0, 1]` by comparing every first-order root against
//! both end points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{self, SolverConfig};
use crate::production::{self, InputBundle, InputPrices, ProductionParams};
use crate::roots;
use crate::topic::{Idea, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarCase {
    Promotion,
    Demotion,
}

impl PolarCase {
    pub fn name(self) -> &'static str {
        match self {
            PolarCase::Promotion => "promotion",
            PolarCase::Demotion => "demotion",
        }
    }

    /// Payoff weights `(u_focal, u_alternative)`.
    fn weights(self) -> (f64, f64) {
        match self {
            PolarCase::Promotion => (1.0, 0.0),
            PolarCase::Demotion => (0.0, 1.0),
        }
    }
}

impl std::fmt::Display for PolarCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarParams {
    /// Number of ideas, focal included.
    pub n: usize,
    /// Influence factor of the focal idea.
    pub a1: f64,
    /// Common influence factor of the alternatives.
    pub a: f64,
    pub alpha: f64,
    pub prices: InputPrices,
    pub production: ProductionParams,
}

impl Default for PolarParams {
    fn default() -> Self {
        Self {
            n: 4,
            a1: 1.0,
            a: 1.0,
            alpha: 0.3,
            prices: InputPrices::default(),
            production: ProductionParams::default(),
        }
    }
}

pub const FOCAL_ID: &str = "focal";

impl PolarParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::validation(
                "polar params",
                format!(
                    "need at least two alternatives (n >= 3), got n = {}",
                    self.n
                ),
            ));
        }
        for (name, v) in [("a1", self.a1), ("a", self.a)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(
                    "polar params",
                    format!("{name} must be positive, got {v}"),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::validation(
                "polar params",
                format!("alpha must lie in [0, 1], got {}", self.alpha),
            ));
        }
        self.prices.validate()?;
        self.production.validate()
    }

    fn alternatives(&self) -> f64 {
        (self.n - 1) as f64
    }

    /// The full `n`-idea topic this polar case stands for. The focal idea
    /// comes first and is named [`FOCAL_ID`].
    pub fn to_scenario(&self, case: PolarCase) -> Scenario {
        let (uf, ua) = case.weights();
        let mut ideas = vec![Idea::new(FOCAL_ID, uf, self.a1, 1.0)];
        ideas.extend((1..self.n).map(|k| Idea::new(format!("alt{k}"), ua, self.a, 1.0)));
        Scenario::new(ideas, self.alpha, self.prices, self.production).with_focal(FOCAL_ID)
    }

    fn cost(&self, e: f64) -> Result<f64> {
        production::cost(e, &self.prices, &self.production)
    }

    fn marginal_cost(&self, e: f64) -> Result<f64> {
        production::marginal_cost(e, &self.prices, &self.production)
    }
}

/// Left-hand sides of the participation conditions, each to be compared with
/// `c'(0)`. Direct is the focal mechanism, indirect the alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Participation {
    pub direct: f64,
    pub indirect: f64,
    /// `c'(0)`
    pub activation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarSolution {
    pub case: PolarCase,
    pub params: PolarParams,
    /// Focal strength.
    pub s_f: f64,
    /// Common strength of every alternative.
    pub s_a: f64,
    pub active_focal: bool,
    pub active_alts: bool,
    /// Effort on the focal idea.
    pub e_f: f64,
    /// Effort on each alternative.
    pub e_a: f64,
    pub inputs_f: InputBundle,
    pub inputs_a: InputBundle,
    pub z_f: f64,
    pub z_a: f64,
    pub payoff: f64,
    pub participation: Participation,
    /// First-order residual of the focal block, zero when inactive.
    pub residual_f: f64,
    pub residual_a: f64,
    pub iterations: usize,
}

impl PolarSolution {
    pub fn quality_f(&self) -> Option<f64> {
        self.inputs_f.quality_intensity()
    }

    pub fn quality_a(&self) -> Option<f64> {
        self.inputs_a.quality_intensity()
    }

    /// Share of total effort spent on the focal idea, `None` with no effort at all.
    pub fn direct_share(&self) -> Option<f64> {
        let total = self.e_f + self.params.alternatives() * self.e_a;
        (total > 0.0).then(|| self.e_f / total)
    }
}

/// Which way a block moves from the base strength of 1.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Move {
    Up,
    Down,
}

/// A mechanism's geometry: the per-effort strength impact and direction.
#[derive(Debug, Clone, Copy)]
struct Block {
    movement: Move,
    impact: f64,
}

impl Block {
    fn effort(&self, s: f64) -> f64 {
        if self.impact == 0.0 {
            // only reachable at alpha = 1, where the block is pinned at 1
            return 0.0;
        }
        match self.movement {
            Move::Up => (s - 1.0) / self.impact,
            Move::Down => (1.0 - s) / self.impact,
        }
    }
}

struct Reduced<'a> {
    case: PolarCase,
    p: &'a PolarParams,
    focal: Block,
    alts: Block,
}

impl<'a> Reduced<'a> {
    fn new(case: PolarCase, p: &'a PolarParams) -> Self {
        let up = |a: f64| Block {
            movement: Move::Up,
            impact: a * (1.0 + p.alpha),
        };
        let down = |a: f64| Block {
            movement: Move::Down,
            impact: a * (1.0 - p.alpha),
        };
        let (focal, alts) = match case {
            PolarCase::Promotion => (up(p.a1), down(p.a)),
            PolarCase::Demotion => (down(p.a1), up(p.a)),
        };
        Self {
            case,
            p,
            focal,
            alts,
        }
    }

    fn objective(&self, s_f: f64, s_a: f64) -> Result<f64> {
        let m = self.p.alternatives();
        let (uf, ua) = self.case.weights();
        let total = s_f + m * s_a;
        if !(total > 0.0) {
            return Err(Error::DegenerateTopic);
        }
        let share = (uf * s_f + m * ua * s_a) / total;
        Ok(
            share
                - self.p.cost(self.focal.effort(s_f))?
                - m * self.p.cost(self.alts.effort(s_a))?,
        )
    }

    /// Marginal benefit per unit of focal strength in the block's direction,
    /// converted to effort units, minus `c'`. Positive means moving further pays.
    fn focal_slope(&self, s_f: f64, s_a: f64) -> Result<f64> {
        let m = self.p.alternatives();
        let total = s_f + m * s_a;
        let benefit = m * s_a / (total * total) * self.focal.impact;
        Ok(benefit - self.p.marginal_cost(self.focal.effort(s_f))?)
    }

    fn alts_slope(&self, s_f: f64, s_a: f64) -> Result<f64> {
        let m = self.p.alternatives();
        let total = s_f + m * s_a;
        let benefit = s_f / (total * total) * self.alts.impact;
        Ok(benefit - self.p.marginal_cost(self.alts.effort(s_a))?)
    }

    /// Best response of one block with the other held fixed.
    fn best_response(
        &self,
        block: Block,
        slope: &dyn Fn(f64) -> Result<f64>,
        value: &dyn Fn(f64) -> Result<f64>,
    ) -> Result<f64> {
        if block.impact <= 0.0 {
            return Ok(1.0);
        }
        match block.movement {
            Move::Up => {
                if slope(1.0)? <= 0.0 {
                    return Ok(1.0);
                }
                let g = |s: f64| slope(s).unwrap_or(f64::NAN);
                let hi = roots::expand_upward(g, 1.0, 2.0)?;
                roots::brent(g, 1.0, hi, 0.0)
            }
            Move::Down => {
                // Candidates: status quo, elimination, and every interior root.
                const PIECES: usize = 64;
                let mut candidates = vec![1.0, 0.0];
                let g = |s: f64| slope(s).unwrap_or(f64::NAN);
                let grid: Vec<f64> = (0..=PIECES).map(|k| k as f64 / PIECES as f64).collect();
                let vals: Vec<f64> = grid.iter().map(|&s| g(s)).collect();
                for k in 0..PIECES {
                    let (l, r) = (vals[k], vals[k + 1]);
                    if l == 0.0 {
                        candidates.push(grid[k]);
                    } else if l.signum() != r.signum() && r != 0.0 {
                        candidates.push(roots::brent(g, grid[k], grid[k + 1], 0.0)?);
                    }
                }
                let mut best = (1.0, value(1.0)?);
                for &c in &candidates[1..] {
                    let v = value(c)?;
                    if v > best.1 {
                        best = (c, v);
                    }
                }
                Ok(best.0)
            }
        }
    }

    fn respond_focal(&self, s_a: f64) -> Result<f64> {
        self.best_response(self.focal, &|s| self.focal_slope(s, s_a), &|s| {
            self.objective(s, s_a)
        })
    }

    fn respond_alts(&self, s_f: f64) -> Result<f64> {
        self.best_response(self.alts, &|s| self.alts_slope(s_f, s), &|s| {
            self.objective(s_f, s)
        })
    }

    /// First-order residual for a block. At the zero corner the slope may
    /// still favor further weakening; only a slope pointing back up counts.
    fn residual(&self, block: Block, s: f64, slope: f64) -> f64 {
        if s == 1.0 {
            0.0
        } else if s == 0.0 && block.movement == Move::Down {
            (-slope).max(0.0)
        } else {
            slope.abs()
        }
    }

    fn participation(&self, s_f: f64, s_a: f64) -> Result<Participation> {
        let m = self.p.alternatives();
        // Direct: tested at focal strength 1 against the solved alternatives.
        let direct = m * s_a / (1.0 + m * s_a).powi(2) * self.focal.impact;
        let indirect = match self.case {
            PolarCase::Promotion => s_f / (s_f + m * s_a).powi(2) * self.alts.impact,
            // Tested at alternative strength 1, the status quo of that mechanism.
            PolarCase::Demotion => s_f / (s_f + m).powi(2) * self.alts.impact,
        };
        Ok(Participation {
            direct,
            indirect,
            activation: self.p.marginal_cost(0.0)?,
        })
    }
}

/// Solves one polar case.
pub fn polar_solve(
    case: PolarCase,
    params: &PolarParams,
    config: &SolverConfig,
) -> Result<PolarSolution> {
    params.validate()?;
    config.validate()?;
    let red = Reduced::new(case, params);
    // Eliminating the weakened block outright can beat the local optimum
    // reached from the base profile, so the block iteration also starts
    // from that corner. Ties keep the base-profile solution.
    let mut starts = vec![(1.0, 1.0)];
    if params.alpha < 1.0 {
        starts.push(match case {
            PolarCase::Promotion => (1.0, 0.0),
            PolarCase::Demotion => (0.0, 1.0),
        });
    }
    let mut best: Option<PolarSolution> = None;
    let mut failure = None;
    for start in starts {
        match iterate(&red, start, config) {
            Ok(sol) => {
                if best.as_ref().is_none_or(|b| sol.payoff > b.payoff) {
                    best = Some(sol);
                }
            }
            Err(e @ Error::NonConvergence { .. }) => {
                failure.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    match (best, failure) {
        (Some(sol), _) => Ok(sol),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("at least one start runs"),
    }
}

/// Damped block Gauss-Seidel from one starting point.
fn iterate(red: &Reduced, start: (f64, f64), config: &SolverConfig) -> Result<PolarSolution> {
    let (mut s_f, mut s_a) = start;
    let mut step = f64::INFINITY;
    for it in 1..=config.max_iterations {
        let bf = red.respond_focal(s_a)?;
        let next_f = s_f + config.damping * (bf - s_f);
        let ba = red.respond_alts(next_f)?;
        step = (bf - s_f).abs().max((ba - s_a).abs());
        if step < config.tolerance {
            // settle on exact best responses so inactive blocks sit at 1
            let s_f = red.respond_focal(ba)?;
            let s_a = red.respond_alts(s_f)?;
            return finish(red, s_f, s_a, it);
        }
        s_f = next_f;
        s_a += config.damping * (ba - s_a);
    }
    Err(Error::NonConvergence {
        context: format!("{} block iteration", red.case),
        iterations: config.max_iterations,
        residual: step,
        best: Some(vec![s_f, s_a]),
    })
}

pub fn promo_solve(params: &PolarParams, config: &SolverConfig) -> Result<PolarSolution> {
    polar_solve(PolarCase::Promotion, params, config)
}

pub fn demo_solve(params: &PolarParams, config: &SolverConfig) -> Result<PolarSolution> {
    polar_solve(PolarCase::Demotion, params, config)
}

fn finish(red: &Reduced, s_f: f64, s_a: f64, iterations: usize) -> Result<PolarSolution> {
    let p = red.p;
    let e_f = red.focal.effort(s_f);
    let e_a = red.alts.effort(s_a);
    let mut inputs_f = production::cost_min_inputs(e_f, &p.prices, &p.production)?;
    let mut inputs_a = production::cost_min_inputs(e_a, &p.prices, &p.production)?;
    let dir = |b: Block, e: f64| {
        (e > 0.0).then_some(match b.movement {
            Move::Up => production::Direction::Strengthen,
            Move::Down => production::Direction::Weaken,
        })
    };
    inputs_f.direction = dir(red.focal, e_f);
    inputs_a.direction = dir(red.alts, e_a);
    let total = s_f + p.alternatives() * s_a;
    Ok(PolarSolution {
        case: red.case,
        params: *p,
        s_f,
        s_a,
        active_focal: s_f != 1.0,
        active_alts: s_a != 1.0,
        e_f,
        e_a,
        inputs_f,
        inputs_a,
        z_f: s_f / total,
        z_a: s_a / total,
        payoff: red.objective(s_f, s_a)?,
        participation: red.participation(s_f, s_a)?,
        residual_f: red.residual(red.focal, s_f, red.focal_slope(s_f, s_a)?),
        residual_a: red.residual(red.alts, s_a, red.alts_slope(s_f, s_a)?),
        iterations,
    })
}

/// The four mechanisms compared across the polar cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContrastMechanism {
    PromoFocal,
    PromoAlt,
    DemoFocal,
    DemoAlt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastRow {
    pub mechanism: ContrastMechanism,
    /// Effort per idea influenced.
    pub effort: f64,
    pub quality_intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub promotion: PolarSolution,
    pub demotion: PolarSolution,
    /// Only mechanisms that are active appear.
    pub rows: Vec<ContrastRow>,
    pub all_active: bool,
    /// Promotion-focal effort is at least every active demotion effort, and
    /// promotion-alternative effort at most every active demotion effort.
    pub effort_order_holds: bool,
    /// The same ordering applied to quality intensities.
    pub quality_order_holds: bool,
}

impl ContrastReport {
    pub fn row(&self, mechanism: ContrastMechanism) -> Option<&ContrastRow> {
        self.rows.iter().find(|r| r.mechanism == mechanism)
    }
}

/// Runs both polar cases on one technology (`a1 = a`) and ranks the efforts.
pub fn contrast_table(params: &PolarParams, config: &SolverConfig) -> Result<ContrastReport> {
    if params.a1 != params.a {
        return Err(Error::validation(
            "contrast",
            format!("needs a1 = a, got a1 = {} and a = {}", params.a1, params.a),
        ));
    }
    let promotion = promo_solve(params, config)?;
    let demotion = demo_solve(params, config)?;
    let mut rows = Vec::new();
    let mut push = |mechanism, active: bool, effort: f64, inputs: &InputBundle| {
        if active {
            rows.push(ContrastRow {
                mechanism,
                effort,
                quality_intensity: inputs.quality_intensity().unwrap_or(0.0),
            });
        }
    };
    push(
        ContrastMechanism::PromoFocal,
        promotion.active_focal,
        promotion.e_f,
        &promotion.inputs_f,
    );
    push(
        ContrastMechanism::PromoAlt,
        promotion.active_alts,
        promotion.e_a,
        &promotion.inputs_a,
    );
    push(
        ContrastMechanism::DemoFocal,
        demotion.active_focal,
        demotion.e_f,
        &demotion.inputs_f,
    );
    push(
        ContrastMechanism::DemoAlt,
        demotion.active_alts,
        demotion.e_a,
        &demotion.inputs_a,
    );

    let ordered = |key: &dyn Fn(&ContrastRow) -> f64| {
        let demo: Vec<f64> = rows
            .iter()
            .filter(|r| {
                matches!(
                    r.mechanism,
                    ContrastMechanism::DemoFocal | ContrastMechanism::DemoAlt
                )
            })
            .map(key)
            .collect();
        let top_ok = rows
            .iter()
            .find(|r| r.mechanism == ContrastMechanism::PromoFocal)
            .is_none_or(|r| demo.iter().all(|d| key(r) >= *d));
        let bottom_ok = rows
            .iter()
            .find(|r| r.mechanism == ContrastMechanism::PromoAlt)
            .is_none_or(|r| demo.iter().all(|d| key(r) <= *d));
        top_ok && bottom_ok
    };
    let effort_order_holds = ordered(&|r| r.effort);
    let quality_order_holds = ordered(&|r| r.quality_intensity);
    Ok(ContrastReport {
        all_active: rows.len() == 4,
        rows,
        promotion,
        demotion,
        effort_order_holds,
        quality_order_holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// Number of ideas.
    N,
    /// Focal influence factor relative to the alternatives, `a1 / a`.
    Ratio,
    Alpha,
    Kappa,
    /// Multiplier on both input prices.
    Price,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::N => "n",
            SweepParam::Ratio => "ratio",
            SweepParam::Alpha => "alpha",
            SweepParam::Kappa => "kappa",
            SweepParam::Price => "price",
        }
    }

    fn apply(self, base: &PolarParams, params: &mut PolarParams, value: f64) -> Result<()> {
        match self {
            SweepParam::N => {
                if value.fract() != 0.0 || value < 3.0 {
                    return Err(Error::validation(
                        "sweep",
                        format!("n must be an integer >= 3, got {value}"),
                    ));
                }
                params.n = value as usize;
            }
            SweepParam::Ratio => params.a1 = value * base.a,
            SweepParam::Alpha => params.alpha = value,
            SweepParam::Kappa => params.prices.kappa = value,
            SweepParam::Price => {
                let kappa = params.prices.kappa;
                params.prices = base.prices.scaled(value);
                params.prices.kappa = kappa;
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for SweepParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub case: PolarCase,
    pub base: PolarParams,
    pub first: SweepAxis,
    pub second: Option<SweepAxis>,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param1: SweepParam,
    pub value1: f64,
    pub param2: Option<SweepParam>,
    pub value2: Option<f64>,
    pub solution: PolarSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityFlag {
    pub claim: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub case: PolarCase,
    pub rows: Vec<SweepRow>,
    pub monotonicity: Vec<MonotonicityFlag>,
}

impl SweepTable {
    pub fn flag(&self, claim: &str) -> Option<bool> {
        self.monotonicity
            .iter()
            .find(|f| f.claim == claim)
            .map(|f| f.holds)
    }
}

pub const CLAIM_ALT_EFFORT_IN_N: &str = "per-alternative effort nonincreasing in n";
pub const CLAIM_WEAKENING_IN_ALPHA: &str = "weakening effort nonincreasing in alpha";
pub const CLAIM_DIRECT_SHARE_IN_RATIO: &str = "direct share nondecreasing in a1/a";

/// Solves a polar case at every grid point. The first axis is the outer loop.
pub fn sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.base.validate()?;
    let axes: Vec<&SweepAxis> = std::iter::once(&spec.first)
        .chain(spec.second.as_ref())
        .collect();
    for axis in &axes {
        if axis.values.is_empty() {
            return Err(Error::validation(
                "sweep",
                format!("grid for `{}` is empty", axis.param),
            ));
        }
        if axis.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(
                "sweep",
                format!("grid for `{}` has a non-finite value", axis.param),
            ));
        }
    }
    if axes.len() == 2 && axes[0].param == axes[1].param {
        return Err(Error::validation(
            "sweep",
            "the two swept parameters must differ",
        ));
    }

    let inner: Vec<Option<f64>> = match &spec.second {
        Some(axis) => axis.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let points: Vec<(f64, Option<f64>)> = spec
        .first
        .values
        .iter()
        .flat_map(|&v1| inner.iter().map(move |&v2| (v1, v2)))
        .collect();

    let rows = points
        .par_iter()
        .map(|&(v1, v2)| {
            let mut params = spec.base;
            spec.first.param.apply(&spec.base, &mut params, v1)?;
            if let (Some(axis), Some(v2)) = (&spec.second, v2) {
                axis.param.apply(&spec.base, &mut params, v2)?;
            }
            let solution = polar_solve(spec.case, &params, &spec.solver)?;
            Ok(SweepRow {
                param1: spec.first.param,
                value1: v1,
                param2: spec.second.as_ref().map(|a| a.param),
                value2: v2,
                solution,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut monotonicity = Vec::new();
    let weakening = |s: &PolarSolution| match s.case {
        PolarCase::Promotion => s.e_a,
        PolarCase::Demotion => s.e_f,
    };
    for (which, axis) in axes.iter().enumerate() {
        let check = |key: &dyn Fn(&PolarSolution) -> Option<f64>, increasing: bool| {
            monotone_along(&rows, which, key, increasing)
        };
        match axis.param {
            SweepParam::N => monotonicity.push(MonotonicityFlag {
                claim: CLAIM_ALT_EFFORT_IN_N.into(),
                holds: check(&|s| Some(s.e_a), false),
            }),
            SweepParam::Alpha => monotonicity.push(MonotonicityFlag {
                claim: CLAIM_WEAKENING_IN_ALPHA.into(),
                holds: check(&|s| Some(weakening(s)), false),
            }),
            SweepParam::Ratio => monotonicity.push(MonotonicityFlag {
                claim: CLAIM_DIRECT_SHARE_IN_RATIO.into(),
                holds: check(&|s| s.direct_share(), true),
            }),
            SweepParam::Kappa | SweepParam::Price => {}
        }
    }
    Ok(SweepTable {
        case: spec.case,
        rows,
        monotonicity,
    })
}

/// Checks that `key` moves in one direction along axis `which` (0 or 1)
/// within each slice of the other axis, in increasing order of the swept
/// value. Points where `key` is undefined are skipped.
fn monotone_along(
    rows: &[SweepRow],
    which: usize,
    key: &dyn Fn(&PolarSolution) -> Option<f64>,
    increasing: bool,
) -> bool {
    let this = |r: &SweepRow| {
        if which == 0 {
            r.value1
        } else {
            r.value2.unwrap_or(0.0)
        }
    };
    let other = |r: &SweepRow| if which == 0 { r.value2 } else { Some(r.value1) };
    // (other axis value, points along this axis)
    type Slice = (Option<f64>, Vec<(f64, f64)>);
    let mut slices: Vec<Slice> = Vec::new();
    for r in rows {
        let Some(k) = key(&r.solution) else { continue };
        let o = other(r);
        match slices.iter_mut().find(|(so, _)| *so == o) {
            Some((_, pts)) => pts.push((this(r), k)),
            None => slices.push((o, vec![(this(r), k)])),
        }
    }
    slices.into_iter().all(|(_, mut pts)| {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.windows(2).all(|w| {
            let slack = 1e-9 * w[0].1.abs().max(w[1].1.abs()).max(1e-12);
            if increasing {
                w[1].1 >= w[0].1 - slack
            } else {
                w[1].1 <= w[0].1 + slack
            }
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeReport {
    pub id: String,
    pub a: f64,
    pub active: bool,
    pub effort: f64,
    pub quality_intensity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityReport {
    /// Alternatives sorted by ascending influence factor.
    pub alternatives: Vec<AlternativeReport>,
    /// Every active alternative is at least as easy to influence as every inactive one.
    pub active_is_upper_set: bool,
    pub effort_nondecreasing_in_a: bool,
    pub quality_nondecreasing_in_a: bool,
}

/// Solves a topic whose alternatives differ in influence factor and checks
/// that effort goes first, and most, to the easiest alternatives.
pub fn heterogeneous_alternatives(
    scenario: &Scenario,
    focal_id: &str,
    config: &SolverConfig,
) -> Result<HeterogeneityReport> {
    let focal = scenario.index_of(focal_id)?;
    let plan = optimizer::solve_profile(scenario, config)?;
    let mut alternatives: Vec<AlternativeReport> = scenario
        .ideas
        .iter()
        .zip(&plan.ideas)
        .enumerate()
        .filter(|(i, _)| *i != focal)
        .map(|(_, (idea, ip))| AlternativeReport {
            id: idea.id.clone(),
            a: idea.a,
            active: ip.effort > 0.0,
            effort: ip.effort,
            quality_intensity: ip.inputs.quality_intensity(),
        })
        .collect();
    alternatives.sort_by(|l, r| l.a.total_cmp(&r.a));

    let min_active = alternatives
        .iter()
        .filter(|r| r.active)
        .map(|r| r.a)
        .fold(f64::INFINITY, f64::min);
    let max_inactive = alternatives
        .iter()
        .filter(|r| !r.active)
        .map(|r| r.a)
        .fold(f64::NEG_INFINITY, f64::max);
    let active: Vec<&AlternativeReport> = alternatives.iter().filter(|r| r.active).collect();
    let nondecreasing = |key: &dyn Fn(&AlternativeReport) -> f64| {
        active
            .windows(2)
            .all(|w| key(w[1]) >= key(w[0]) * (1.0 - 1e-9))
    };
    Ok(HeterogeneityReport {
        active_is_upper_set: min_active >= max_inactive,
        effort_nondecreasing_in_a: nondecreasing(&|r| r.effort),
        quality_nondecreasing_in_a: nondecreasing(&|r| r.quality_intensity.unwrap_or(0.0)),
        alternatives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topic;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn params(n: usize, alpha: f64, kappa: f64) -> PolarParams {
        let mut p = PolarParams {
            n,
            alpha,
            ..Default::default()
        };
        p.prices.kappa = kappa;
        p
    }

    /// Objective of the expanded topic at a symmetric profile.
    fn full_objective(p: &PolarParams, case: PolarCase, s_f: f64, s_a: f64) -> f64 {
        let sc = p.to_scenario(case);
        let mut s = vec![s_a; p.n];
        s[0] = s_f;
        topic::objective(&sc, &s).unwrap()
    }

    #[test]
    fn eliminating_alternatives_beats_interior_optimum() {
        let p = PolarParams {
            n: 5,
            a1: 1.6470359912721435,
            a: 1.6673002762965106,
            alpha: 0.06747854479287918,
            prices: InputPrices {
                px: 0.8320320398492678,
                pq: 0.9446351858164745,
                kappa: 0.0,
            },
            ..Default::default()
        };
        let sol = promo_solve(&p, &cfg()).unwrap();
        assert_eq!((sol.s_f, sol.s_a), (1.0, 0.0));
        let interior = full_objective(
            &p,
            PolarCase::Promotion,
            1.5743564653979745,
            0.6550012616975277,
        );
        assert!(sol.payoff > interior);
    }

    #[test]
    fn large_activation_price_leaves_status_quo() {
        for case in [PolarCase::Promotion, PolarCase::Demotion] {
            let sol = polar_solve(case, &params(4, 0.3, 10.0), &cfg()).unwrap();
            assert_eq!((sol.s_f, sol.s_a), (1.0, 1.0));
            assert!(!sol.active_focal && !sol.active_alts);
            assert_eq!(sol.e_f + sol.e_a, 0.0);
        }
    }

    #[test]
    fn alpha_one_blocks_weakening() {
        let promo = promo_solve(&params(4, 1.0, 0.0), &cfg()).unwrap();
        assert!(promo.active_focal && !promo.active_alts);
        assert_eq!(promo.s_a, 1.0);
        let demo = demo_solve(&params(4, 1.0, 0.0), &cfg()).unwrap();
        assert!(!demo.active_focal && demo.active_alts);
        assert!(demo.s_a > 1.0);
    }

    #[test]
    fn promotion_favors_the_focal_idea() {
        let p = params(4, 0.3, 0.0);
        let sol = promo_solve(&p, &cfg()).unwrap();
        assert!(sol.s_f > 1.0 && sol.s_a < 1.0);
        assert!(sol.e_f > sol.e_a);
        // no symmetric finite-difference move improves the expanded objective
        let base = full_objective(&p, PolarCase::Promotion, sol.s_f, sol.s_a);
        let h = 1e-5;
        for (df, da) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let v = full_objective(&p, PolarCase::Promotion, sol.s_f + df, sol.s_a + da);
            assert!(v <= base + 1e-12, "({df},{da}) improves by {}", v - base);
        }
        assert!((sol.payoff - base).abs() < 1e-14);
    }

    #[test]
    fn demotion_at_zero_alpha_leans_direct() {
        let sol = demo_solve(&params(4, 0.0, 0.0), &cfg()).unwrap();
        assert!(sol.active_focal && sol.active_alts);
        assert!(sol.e_f > sol.e_a);
        assert!(sol.s_f < 1.0 && sol.s_a > 1.0);
    }

    #[test]
    fn matches_general_optimizer() {
        for (n, alpha, kappa) in [(3, 0.2, 0.0), (4, 0.5, 0.01), (5, 0.0, 0.0), (6, 0.9, 0.02)] {
            let p = params(n, alpha, kappa);
            for case in [PolarCase::Promotion, PolarCase::Demotion] {
                let sol = polar_solve(case, &p, &cfg()).unwrap();
                let plan = optimizer::solve_profile(&p.to_scenario(case), &cfg()).unwrap();
                let s = plan.strengths();
                assert!(
                    (s[0] - sol.s_f).abs() < 1e-6,
                    "{case} {n} {alpha}: {s:?} vs {}",
                    sol.s_f
                );
                for &si in &s[1..] {
                    assert!(
                        (si - sol.s_a).abs() < 1e-6,
                        "{case} {n} {alpha}: {s:?} vs {}",
                        sol.s_a
                    );
                }
            }
        }
    }

    #[test]
    fn participation_is_sound() {
        for alpha in [0.0, 0.3, 0.7, 1.0] {
            for kappa in [0.0, 0.03, 0.08, 0.2] {
                for case in [PolarCase::Promotion, PolarCase::Demotion] {
                    let sol = polar_solve(case, &params(4, alpha, kappa), &cfg()).unwrap();
                    let part = sol.participation;
                    if !sol.active_focal {
                        assert!(part.direct <= part.activation);
                    } else {
                        assert!(sol.residual_f < 1e-8);
                    }
                    if !sol.active_alts {
                        assert!(
                            part.indirect <= part.activation
                                || alpha == 1.0 && case == PolarCase::Promotion
                        );
                    } else {
                        assert!(sol.residual_a < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn contrast_examples() {
        let r = contrast_table(&params(4, 0.5, 0.0), &cfg()).unwrap();
        assert!(r.all_active);
        assert!(r.effort_order_holds && r.quality_order_holds);

        let r = contrast_table(&params(4, 1.0, 0.0), &cfg()).unwrap();
        assert!(r.row(ContrastMechanism::PromoAlt).is_none());
        assert!(r.row(ContrastMechanism::DemoFocal).is_none());
        assert!(r.row(ContrastMechanism::PromoFocal).is_some());

        let r = contrast_table(&params(4, 0.5, 100.0), &cfg()).unwrap();
        assert!(r.rows.is_empty());

        let mut p = params(4, 0.5, 0.0);
        p.a1 = 2.0;
        assert!(matches!(
            contrast_table(&p, &cfg()),
            Err(Error::Validation { .. })
        ));
    }

    fn axis(param: SweepParam, values: &[f64]) -> SweepAxis {
        SweepAxis {
            param,
            values: values.to_vec(),
        }
    }

    #[test]
    fn sweep_over_n_is_monotone() {
        let spec = SweepSpec {
            case: PolarCase::Promotion,
            base: params(4, 0.3, 0.0),
            first: axis(SweepParam::N, &[3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]),
            second: None,
            solver: cfg(),
        };
        let table = sweep(&spec).unwrap();
        assert_eq!(table.rows.len(), 8);
        assert_eq!(table.flag(CLAIM_ALT_EFFORT_IN_N), Some(true));
        assert!(table.rows.iter().all(|r| r.solution.active_alts));
    }

    #[test]
    fn sweep_alpha_to_one_stops_weakening() {
        let spec = SweepSpec {
            case: PolarCase::Promotion,
            base: params(4, 0.3, 0.0),
            first: axis(SweepParam::Alpha, &[0.0, 0.25, 0.5, 0.75, 1.0]),
            second: None,
            solver: cfg(),
        };
        let table = sweep(&spec).unwrap();
        assert_eq!(table.flag(CLAIM_WEAKENING_IN_ALPHA), Some(true));
        assert!(!table.rows.last().unwrap().solution.active_alts);
    }

    #[test]
    fn demotion_direct_share_grows_with_ratio() {
        let spec = SweepSpec {
            case: PolarCase::Demotion,
            base: params(4, 0.3, 0.0),
            first: axis(SweepParam::Ratio, &[0.25, 1.0, 4.0]),
            second: None,
            solver: cfg(),
        };
        let table = sweep(&spec).unwrap();
        let shares: Vec<f64> = table
            .rows
            .iter()
            .map(|r| r.solution.direct_share().unwrap())
            .collect();
        assert!(shares.windows(2).all(|w| w[1] > w[0]), "{shares:?}");
        assert_eq!(table.flag(CLAIM_DIRECT_SHARE_IN_RATIO), Some(true));
    }

    #[test]
    fn sweep_rows_follow_grid_order() {
        let spec = SweepSpec {
            case: PolarCase::Demotion,
            base: params(4, 0.3, 0.0),
            first: axis(SweepParam::Kappa, &[0.0, 0.01]),
            second: Some(axis(SweepParam::Price, &[1.0, 2.0, 3.0])),
            solver: cfg(),
        };
        let table = sweep(&spec).unwrap();
        let keys: Vec<(f64, f64)> = table
            .rows
            .iter()
            .map(|r| (r.value1, r.value2.unwrap()))
            .collect();
        assert_eq!(
            keys,
            vec![
                (0.0, 1.0),
                (0.0, 2.0),
                (0.0, 3.0),
                (0.01, 1.0),
                (0.01, 2.0),
                (0.01, 3.0)
            ]
        );
        assert_eq!(table.rows[4].solution.params.prices.px, 2.0);
        assert_eq!(table.rows[4].solution.params.prices.kappa, 0.01);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let mut spec = SweepSpec {
            case: PolarCase::Promotion,
            base: params(4, 0.3, 0.0),
            first: axis(SweepParam::N, &[]),
            second: None,
            solver: cfg(),
        };
        assert!(matches!(sweep(&spec), Err(Error::Validation { .. })));
        spec.first = axis(SweepParam::N, &[3.5]);
        assert!(matches!(sweep(&spec), Err(Error::Validation { .. })));
        spec.first = axis(SweepParam::Alpha, &[0.5]);
        spec.second = Some(axis(SweepParam::Alpha, &[0.5]));
        assert!(matches!(sweep(&spec), Err(Error::Validation { .. })));
    }

    fn demotion_scenario(alt_a: &[f64], alpha: f64, kappa: f64) -> Scenario {
        let mut ideas = vec![Idea::new("focal", 0.0, 1.0, 1.0)];
        ideas.extend(
            alt_a
                .iter()
                .enumerate()
                .map(|(k, &a)| Idea::new(format!("alt{k}"), 1.0, a, 1.0)),
        );
        let prices = InputPrices {
            kappa,
            ..Default::default()
        };
        Scenario::new(ideas, alpha, prices, ProductionParams::default())
    }

    #[test]
    fn easier_alternative_goes_first() {
        // At the base profile alternative j is strengthened iff
        // a_j (1 + alpha) / 9 > kappa and the focal idea weakened iff
        // 2 (1 - alpha) / 9 > kappa. With alpha = 0.3 the thresholds are
        // 0.289 (a = 2), 0.0144 (a = 0.1) and 0.156 (focal).
        let sc = demotion_scenario(&[2.0, 0.1], 0.3, 0.17);
        let r = heterogeneous_alternatives(&sc, "focal", &cfg()).unwrap();
        let active: Vec<&str> = r
            .alternatives
            .iter()
            .filter(|a| a.active)
            .map(|a| a.id.as_str())
            .collect();
        assert_eq!(active, vec!["alt0"]);
        assert!(r.active_is_upper_set);
    }

    #[test]
    fn effort_rises_with_influence_factor() {
        let sc = demotion_scenario(&[0.5, 1.0, 1.5, 2.0], 0.3, 0.0);
        let r = heterogeneous_alternatives(&sc, "focal", &cfg()).unwrap();
        assert!(r.alternatives.iter().all(|a| a.active));
        assert!(r.effort_nondecreasing_in_a && r.quality_nondecreasing_in_a);
        let efforts: Vec<f64> = r.alternatives.iter().map(|a| a.effort).collect();
        assert!(efforts.windows(2).all(|w| w[1] > w[0]), "{efforts:?}");
    }

    #[test]
    fn equal_alternatives_get_equal_effort() {
        let sc = demotion_scenario(&[1.0, 1.0, 1.0], 0.3, 0.0);
        let r = heterogeneous_alternatives(&sc, "focal", &cfg()).unwrap();
        let e0 = r.alternatives[0].effort;
        assert!(r.alternatives.iter().all(|a| (a.effort - e0).abs() < 1e-8));
    }

    #[test]
    fn rejects_too_few_alternatives() {
        assert!(matches!(
            promo_solve(&params(2, 0.3, 0.0), &cfg()),
            Err(Error::Validation { .. })
        ));
    }
}
