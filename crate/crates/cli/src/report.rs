//! Text, CSV and JSON renderings. Every number printed is first rounded to
//! 12 significant digits, so re-reading an output reproduces it exactly.

use std::fmt::Write as _;

use chrono::{SecondsFormat, Utc};
use cio_core::optimizer::{Plan, SolverConfig};
use cio_core::oracle::GridOptimum;
use cio_core::polar::SweepTable;
use cio_core::Scenario;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SWEEP_FORMAT_LINE: &str = "# cio sweep csv v1";
pub const SWEEP_HEADER: &str =
    "case,param1,value1,param2,value2,s_f,s_a,e_f,e_a,qx_f,qx_a,z_f,payoff,active_f,active_a";
pub const PLAN_FORMAT_LINE: &str = "# cio plan csv v1";
pub const PLAN_HEADER: &str = "id,action,strength,effort,x,q,cost,prominence";

/// `x` rounded to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn num(x: f64) -> String {
    format!("{:?}", sig12(x))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(mut out: String, w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory csv writer");
    out.push_str(std::str::from_utf8(&bytes).expect("csv output is utf-8"));
    out
}

pub fn digest(scenario: &Scenario, config: &SolverConfig) -> String {
    let canonical = serde_json::to_vec(&(scenario, config)).expect("scenario serializes");
    Sha256::digest(&canonical)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn plan_text(scenario: &Scenario, plan: &Plan, stationarity: Option<f64>) -> String {
    let mut out = String::new();
    let cols = ["id", "action", "s*", "effort", "x", "q", "cost", "z"];
    let mut rows: Vec<Vec<String>> = vec![cols.iter().map(|c| c.to_string()).collect()];
    for ip in &plan.ideas {
        rows.push(vec![
            ip.id.clone(),
            ip.action.to_string(),
            num(ip.strength),
            num(ip.effort),
            num(ip.inputs.x),
            num(ip.inputs.q),
            num(ip.cost),
            num(ip.prominence),
        ]);
    }
    let widths: Vec<usize> = (0..cols.len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "S      {}", num(plan.total_strength)).unwrap();
    writeln!(out, "U      {}", num(plan.weighted_payoff)).unwrap();
    writeln!(out, "U/S    {}", num(plan.average_payoff)).unwrap();
    writeln!(out, "payoff {}", num(plan.payoff)).unwrap();
    match &scenario.focal {
        Some(focal) => {
            let cells: Vec<String> = plan.quadrants.iter().map(|q| q.to_string()).collect();
            let cells = if cells.is_empty() {
                "none".to_string()
            } else {
                cells.join(", ")
            };
            writeln!(out, "quadrants (focal `{focal}`): {cells}").unwrap();
        }
        None => writeln!(out, "quadrants: no focal idea set").unwrap(),
    }
    if let Some(r) = stationarity {
        writeln!(out, "stationarity residual {}", num(r)).unwrap();
    }
    out
}

pub fn plan_csv(plan: &Plan, stationarity: Option<f64>) -> String {
    let mut w = csv_writer();
    w.write_record(PLAN_HEADER.split(',')).unwrap();
    for ip in &plan.ideas {
        w.write_record([
            ip.id.clone(),
            ip.action.to_string(),
            num(ip.strength),
            num(ip.effort),
            num(ip.inputs.x),
            num(ip.inputs.q),
            num(ip.cost),
            num(ip.prominence),
        ])
        .unwrap();
    }
    let mut out = finish_csv(format!("{PLAN_FORMAT_LINE}\n"), w);
    writeln!(
        out,
        "# S={} U={} U/S={} payoff={}",
        num(plan.total_strength),
        num(plan.weighted_payoff),
        num(plan.average_payoff),
        num(plan.payoff)
    )
    .unwrap();
    if let Some(r) = stationarity {
        writeln!(out, "# stationarity={}", num(r)).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeaRecord {
    pub id: String,
    pub action: String,
    pub strength: f64,
    pub effort: f64,
    pub x: f64,
    pub q: f64,
    pub cost: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub format_version: u32,
    /// SHA-256 of the canonical scenario and solver settings.
    pub digest: String,
    pub timestamp: String,
    pub solver: SolverConfig,
    pub focal: Option<String>,
    pub total_strength: f64,
    pub weighted_payoff: f64,
    pub average_payoff: f64,
    pub payoff: f64,
    pub quadrants: Vec<String>,
    pub ideas: Vec<IdeaRecord>,
    pub iterations: usize,
    pub step_residual: f64,
    pub foc_residual: f64,
    pub starts: usize,
    pub converged_starts: usize,
    pub selected_start: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationarity_residual: Option<f64>,
}

impl RunRecord {
    pub fn new(
        scenario: &Scenario,
        config: &SolverConfig,
        plan: &Plan,
        stationarity: Option<f64>,
    ) -> Self {
        let d = &plan.diagnostics;
        Self {
            format_version: 1,
            digest: digest(scenario, config),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            solver: *config,
            focal: scenario.focal.clone(),
            total_strength: sig12(plan.total_strength),
            weighted_payoff: sig12(plan.weighted_payoff),
            average_payoff: sig12(plan.average_payoff),
            payoff: sig12(plan.payoff),
            quadrants: plan.quadrants.iter().map(|q| q.to_string()).collect(),
            ideas: plan
                .ideas
                .iter()
                .map(|ip| IdeaRecord {
                    id: ip.id.clone(),
                    action: ip.action.to_string(),
                    strength: sig12(ip.strength),
                    effort: sig12(ip.effort),
                    x: sig12(ip.inputs.x),
                    q: sig12(ip.inputs.q),
                    cost: sig12(ip.cost),
                    prominence: sig12(ip.prominence),
                })
                .collect(),
            iterations: d.iterations,
            step_residual: sig12(d.step_residual),
            foc_residual: sig12(d.foc_residual),
            starts: d.starts,
            converged_starts: d.converged_starts,
            selected_start: d.selected_start,
            stationarity_residual: stationarity.map(sig12),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run record serializes");
        s.push('\n');
        s
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut w = csv_writer();
    w.write_record(SWEEP_HEADER.split(',')).unwrap();
    for row in &table.rows {
        let s = &row.solution;
        w.write_record([
            table.case.to_string(),
            row.param1.to_string(),
            num(row.value1),
            row.param2.map(|p| p.to_string()).unwrap_or_default(),
            opt_num(row.value2),
            num(s.s_f),
            num(s.s_a),
            num(s.e_f),
            num(s.e_a),
            opt_num(s.quality_f()),
            opt_num(s.quality_a()),
            num(s.z_f),
            num(s.payoff),
            s.active_focal.to_string(),
            s.active_alts.to_string(),
        ])
        .unwrap();
    }
    finish_csv(format!("{SWEEP_FORMAT_LINE}\n"), w)
}

pub fn monotonicity_summary(table: &SweepTable) -> String {
    let mut out = String::new();
    if table.monotonicity.is_empty() {
        writeln!(out, "monotonicity: no claims apply to the swept parameters").unwrap();
    }
    for flag in &table.monotonicity {
        writeln!(
            out,
            "monotonicity: {}: {}",
            flag.claim,
            if flag.holds { "holds" } else { "VIOLATED" }
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub solver_payoff: f64,
    pub oracle_payoff: f64,
    /// Oracle payoff minus solver payoff.
    pub gap: f64,
    pub oracle_cells: u64,
    pub oracle_strengths: Vec<f64>,
    pub stationarity_residual: f64,
    pub passed: bool,
}

pub const ORACLE_GATE: f64 = 1e-3;

impl CheckRecord {
    pub fn new(plan: &Plan, oracle: &GridOptimum, stationarity: f64) -> Self {
        let gap = oracle.payoff - plan.payoff;
        Self {
            solver_payoff: sig12(plan.payoff),
            oracle_payoff: sig12(oracle.payoff),
            gap: sig12(gap),
            oracle_cells: oracle.cells,
            oracle_strengths: oracle.strengths.iter().copied().map(sig12).collect(),
            stationarity_residual: sig12(stationarity),
            passed: plan.payoff >= oracle.payoff - ORACLE_GATE,
        }
    }

    pub fn text(&self) -> String {
        format!(
            "solver payoff  {}\noracle payoff  {} ({} cells)\ngap            {}\nstationarity   {}\n{}\n",
            num(self.solver_payoff),
            num(self.oracle_payoff),
            self.oracle_cells,
            num(self.gap),
            num(self.stationarity_residual),
            if self.passed { "PASS" } else { "FAIL: solver falls short of the grid oracle" },
        )
    }

    pub fn csv(&self) -> String {
        format!(
            "solver_payoff,oracle_payoff,gap,oracle_cells,stationarity,passed\n{},{},{},{},{},{}\n",
            num(self.solver_payoff),
            num(self.oracle_payoff),
            num(self.gap),
            self.oracle_cells,
            num(self.stationarity_residual),
            self.passed
        )
    }
}
