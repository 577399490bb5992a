//! Four built-in scenarios, one per cell of the promotion/demotion by
//! direct/indirect tactics matrix. The numbers are stylized: they are
//! chosen so each plan lands in its cell, not estimated from any case.

use cio_core::optimizer::{Goal, Mechanism, Quadrant};
use cio_core::{Idea, InputPrices, ProductionParams};

use crate::error::CliError;
use crate::files::ScenarioFile;

pub struct Preset {
    pub name: &'static str,
    pub alias: &'static str,
    pub quadrant: Quadrant,
    pub summary: &'static str,
    build: fn() -> ScenarioFile,
}

impl Preset {
    pub fn file(&self) -> ScenarioFile {
        (self.build)()
    }
}

fn topic(
    focal_u: f64,
    focal_a: f64,
    alt_u: f64,
    alt_a: f64,
    alts: usize,
    alpha: f64,
    kappa: f64,
) -> ScenarioFile {
    let mut ideas = vec![Idea::new("focal", focal_u, focal_a, 1.0)];
    ideas.extend((1..=alts).map(|k| Idea::new(format!("alt{k}"), alt_u, alt_a, 1.0)));
    ScenarioFile {
        ideas,
        alpha,
        prices: InputPrices {
            px: 1.0,
            pq: 1.0,
            kappa,
        },
        production: ProductionParams::default(),
        solver: None,
        focal: Some("focal".into()),
    }
}

pub const PRESETS: [Preset; 4] = [
    Preset {
        name: "promote-direct",
        alias: "ira2016",
        quadrant: Quadrant {
            goal: Goal::Promote,
            mechanism: Mechanism::Direct,
        },
        summary:
            "a favored idea that is easy to strengthen among alternatives that resist weakening",
        build: || topic(1.0, 3.0, 0.0, 0.5, 3, 0.5, 0.05),
    },
    Preset {
        name: "promote-indirect",
        alias: "ua2022",
        quadrant: Quadrant {
            goal: Goal::Promote,
            mechanism: Mechanism::Indirect,
        },
        summary: "a favored idea that barely moves, with alternatives that are easy to undermine",
        build: || topic(1.0, 0.2, 0.0, 2.0, 3, 0.2, 0.06),
    },
    Preset {
        name: "demote-direct",
        alias: "genocidegames",
        quadrant: Quadrant {
            goal: Goal::Demote,
            mechanism: Mechanism::Direct,
        },
        summary: "a narrow disfavored idea that is easy to weaken, alternatives hard to move",
        build: || topic(0.0, 3.0, 1.0, 0.3, 3, 0.1, 0.05),
    },
    Preset {
        name: "demote-indirect",
        alias: "yanreport",
        quadrant: Quadrant {
            goal: Goal::Demote,
            mechanism: Mechanism::Indirect,
        },
        summary: "a disfavored idea that cannot be weakened, so alternatives are amplified instead",
        build: || topic(0.0, 1.0, 1.0, 1.0, 3, 1.0, 0.0),
    },
];

pub fn lookup(name: &str) -> Result<&'static Preset, CliError> {
    let key = name.to_ascii_lowercase();
    PRESETS
        .iter()
        .find(|p| p.name == key || p.alias == key)
        .ok_or_else(|| {
            let names: Vec<String> = PRESETS
                .iter()
                .map(|p| format!("{} ({})", p.name, p.alias))
                .collect();
            CliError::Validation(format!(
                "unknown preset `{name}`; valid names: {}",
                names.join(", ")
            ))
        })
}
