//! Solvers for an economic model of coordinated influence operations.
//!
//! An operator spends on quantity and quality inputs to strengthen or weaken
//! competing ideas in a topic, and is paid according to the resulting
//! prominence shares. The crate computes cost-minimizing input mixes, the
//! optimal plan over ideas, polar promotion/demotion solutions and their
//! comparative statics, and brute-force oracles to check all of them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod optimizer;
pub mod oracle;
pub mod polar;
pub mod production;
pub mod roots;
pub mod topic;

pub use error::{Error, Result};
pub use optimizer::{solve_profile, Plan, SolverConfig};
pub use production::{InputBundle, InputPrices, ProductionParams};
pub use topic::{Action, Idea, Scenario};
