//! Scenario and sweep files, both TOML with unknown keys rejected.

use std::path::Path;

use cio_core::optimizer::SolverConfig;
use cio_core::polar::{PolarCase, PolarParams, SweepAxis, SweepParam, SweepSpec};
use cio_core::{Idea, InputPrices, ProductionParams, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub ideas: Vec<Idea>,
    pub alpha: f64,
    pub prices: InputPrices,
    pub production: ProductionParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal: Option<String>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| CliError::Validation(format!("{origin}: {}", e.message())))
}

fn check_finite(values: impl IntoIterator<Item = (String, f64)>) -> Result<(), CliError> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(CliError::Validation(format!(
                "`{name}` must be finite, got {v}"
            )));
        }
    }
    Ok(())
}

fn technology_values(prices: &InputPrices, production: &ProductionParams) -> Vec<(String, f64)> {
    vec![
        ("prices.px".into(), prices.px),
        ("prices.pq".into(), prices.pq),
        ("prices.kappa".into(), prices.kappa),
        ("production.beta_x".into(), production.beta_x),
        ("production.beta_q".into(), production.beta_q),
        ("production.scale".into(), production.scale),
    ]
}

impl ScenarioFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        parse(text, origin)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }

    /// The validated scenario and solver settings, with `seed` overriding
    /// the file's seed when given.
    pub fn resolve(&self, seed: Option<u64>) -> Result<(Scenario, SolverConfig), CliError> {
        let mut values = vec![("alpha".to_string(), self.alpha)];
        for idea in &self.ideas {
            for (field, v) in [("u", idea.u), ("a", idea.a), ("b", idea.b)] {
                values.push((format!("ideas.{}.{field}", idea.id), v));
            }
        }
        values.extend(technology_values(&self.prices, &self.production));
        let mut config = self.solver.unwrap_or_default();
        values.push(("solver.damping".into(), config.damping));
        values.push(("solver.tolerance".into(), config.tolerance));
        check_finite(values)?;
        if let Some(seed) = seed {
            config.seed = seed;
        }
        config.validate()?;
        let mut scenario =
            Scenario::new(self.ideas.clone(), self.alpha, self.prices, self.production);
        scenario.focal = self.focal.clone();
        scenario.validate()?;
        Ok((scenario, config))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub param1: SweepParam,
    pub values1: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param2: Option<SweepParam>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values2: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub case: PolarCase,
    pub base: PolarParams,
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
}

impl SweepFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        parse(text, origin)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?, &path.display().to_string())
    }

    pub fn resolve(&self, seed: Option<u64>) -> Result<SweepSpec, CliError> {
        let mut values = vec![
            ("base.a1".to_string(), self.base.a1),
            ("base.a".to_string(), self.base.a),
            ("base.alpha".to_string(), self.base.alpha),
        ];
        values.extend(
            technology_values(&self.base.prices, &self.base.production)
                .into_iter()
                .map(|(k, v)| (format!("base.{k}"), v)),
        );
        check_finite(values)?;
        let second = match (&self.grid.param2, &self.grid.values2) {
            (Some(param), Some(values)) => Some(SweepAxis {
                param: *param,
                values: values.clone(),
            }),
            (None, None) => None,
            (Some(_), None) => {
                return Err(CliError::Validation(
                    "grid: `param2` given without `values2`".into(),
                ))
            }
            (None, Some(_)) => {
                return Err(CliError::Validation(
                    "grid: `values2` given without `param2`".into(),
                ))
            }
        };
        let mut solver = self.solver.unwrap_or_default();
        if let Some(seed) = seed {
            solver.seed = seed;
        }
        Ok(SweepSpec {
            case: self.case,
            base: self.base,
            first: SweepAxis {
                param: self.grid.param1,
                values: self.grid.values1.clone(),
            },
            second,
            solver,
        })
    }
}
