use std::path::Path;
use std::process::Command;

use cio_cli::report::{RunRecord, SWEEP_FORMAT_LINE, SWEEP_HEADER};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cio(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cio"))
        .args(args)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn scenario(us: &[f64], alpha: f64, extra: &str) -> String {
    let mut s = format!("alpha = {alpha}\n{extra}\n");
    for (k, u) in us.iter().enumerate() {
        s += &format!("[[ideas]]\nid = \"i{k}\"\nu = {u}\na = 1.0\nb = 1.0\n\n");
    }
    s + "[prices]\npx = 1.0\npq = 1.0\nkappa = 0.0\n\n[production]\nbeta_x = 0.35\nbeta_q = 0.7\nscale = 1.0\n"
}

const SWEEP_BASE: &str = r#"
[base]
n = 4
a1 = 1.0
a = 1.0
alpha = 0.3
prices = { px = 1.0, pq = 1.0, kappa = 0.0 }
production = { beta_x = 0.35, beta_q = 0.7, scale = 1.0 }
"#;

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn equal_payoffs_abstain_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "eq.toml", &scenario(&[0.4, 0.4, 0.4], 0.3, ""));
    let run = cio(&["solve", &path, "--format", "csv"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows: Vec<&str> = run
        .stdout
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("abstain")));
    assert!(run.stdout.contains("payoff=0.4"), "{}", run.stdout);
}

#[test]
fn missing_field_exits_two_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let text = scenario(&[1.0, 0.0], 0.3, "").replace("alpha = 0.3\n", "");
    let path = write(dir.path(), "bad.toml", &text);
    let run = cio(&["solve", &path]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("alpha"), "{}", run.stderr);
}

#[test]
fn unreadable_file_exits_two() {
    assert_eq!(cio(&["solve", "/nonexistent/scenario.toml"]).code, 2);
}

#[test]
fn nonconvergence_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        scenario(&[1.0, 0.0, 0.3], 0.3, "") + "\n[solver]\nmax_iterations = 1\nrestarts = 0\n";
    let path = write(dir.path(), "slow.toml", &text);
    assert_eq!(cio(&["solve", &path]).code, 3);
}

#[test]
fn preset_check_reports_small_residual() {
    let run = cio(&["preset", "promote-direct", "--check"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("stylized"));
    assert!(run.stdout.contains("promote-direct"));
    let line = run
        .stdout
        .lines()
        .find(|l| l.starts_with("stationarity residual"))
        .unwrap();
    let r: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(r < 1e-5);
}

#[test]
fn unknown_preset_lists_names() {
    let run = cio(&["preset", "nope"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("yanreport"));
}

#[test]
fn json_record_round_trips() {
    let run = cio(&["preset", "demote-direct", "--format", "json", "--check"]);
    assert_eq!(run.code, 0);
    let record: RunRecord = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(record.to_json(), run.stdout);
    assert_eq!(record.quadrants, vec!["demote-direct"]);
    assert_eq!(record.digest.len(), 64);
    assert!(record.stationarity_residual.is_some());
}

#[test]
fn n_sweep_writes_monotone_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("case = \"promotion\"\n{SWEEP_BASE}\n[grid]\nparam1 = \"n\"\nvalues1 = [3, 4, 5, 6, 7, 8, 9, 10]\n");
    let path = write(dir.path(), "n.toml", &text);
    let out = dir.path().join("n.csv");
    let run = cio(&["sweep", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.is_empty());
    assert!(run
        .stderr
        .contains("per-alternative effort nonincreasing in n: holds"));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SWEEP_FORMAT_LINE));
    assert_eq!(lines.next(), Some(SWEEP_HEADER));
    let e_a: Vec<f64> = csv_rows(&csv)
        .iter()
        .map(|r| r[8].parse().unwrap())
        .collect();
    assert_eq!(e_a.len(), 8);
    assert!(e_a.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn alpha_one_row_has_no_weakening() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("case = \"promotion\"\n{SWEEP_BASE}\n[grid]\nparam1 = \"alpha\"\nvalues1 = [0.5, 1.0]\nparam2 = \"kappa\"\nvalues2 = [0.0]\n");
    let path = write(dir.path(), "a.toml", &text);
    let run = cio(&["sweep", &path]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = csv_rows(&run.stdout);
    assert_eq!(rows[0][14], "true");
    assert_eq!(rows[1][14], "false");
    assert_eq!(rows[1][3], "kappa");
}

#[test]
fn empty_grid_exits_two_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("case = \"demotion\"\n{SWEEP_BASE}\n[grid]\nparam1 = \"n\"\nvalues1 = []\n");
    let path = write(dir.path(), "e.toml", &text);
    let out = dir.path().join("e.csv");
    let run = cio(&["sweep", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(!out.exists());
}

#[test]
fn sweep_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("case = \"demotion\"\n{SWEEP_BASE}\n[grid]\nparam1 = \"ratio\"\nvalues1 = [0.25, 1, 4]\nparam2 = \"price\"\nvalues2 = [1, 2]\n");
    let path = write(dir.path(), "r.toml", &text);
    let first = cio(&["sweep", &path]);
    assert_eq!(first.code, 0);
    assert_eq!(cio(&["sweep", &path]).stdout, first.stdout);
}

#[test]
fn check_gates_small_topics() {
    let dir = tempfile::tempdir().unwrap();
    let two = write(dir.path(), "two.toml", &scenario(&[1.0, 0.0], 0.3, ""));
    let run = cio(&["check", &two]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    assert!(run.stdout.contains("PASS"));

    let five = write(
        dir.path(),
        "five.toml",
        &scenario(&[1.0, 0.0, 0.2, 0.4, 0.6], 0.3, ""),
    );
    assert_eq!(cio(&["check", &five]).code, 2);
}

#[test]
fn seed_flag_is_recorded() {
    let run = cio(&["preset", "ira2016", "--format", "json", "--seed", "7"]);
    let record: RunRecord = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(record.solver.seed, 7);
}
