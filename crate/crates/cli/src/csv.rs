//! Deterministic CSV output.
//!
//! One fixed header, absent fields as empty strings, floats printed as
//! their shortest round-trip decimal, rows sorted by (T, K, learner).
//! Identical inputs produce byte-identical files.

use std::path::Path;

use regretsim::harness::{ExperimentConfig, LearnerSpec, RegretSummary};

use crate::config::{CliError, CliResult};

pub const CSV_HEADER: &str = "setting,learner,adversary,K,T,eps_or_dist,eta,theta,seed_count,\
                              mean_regret,stderr,theoretical_bound,fitted_exponent";

/// One output row of a run or sweep.
#[derive(Clone, Debug)]
pub struct CsvRow {
    pub setting: String,
    pub learner: String,
    pub adversary: String,
    pub actions: usize,
    pub horizon: usize,
    pub eps_or_dist: String,
    pub eta: Option<f64>,
    pub theta: Option<f64>,
    pub seed_count: usize,
    pub mean_regret: f64,
    pub stderr: f64,
    pub theoretical_bound: Option<f64>,
    pub fitted_exponent: Option<f64>,
}

impl CsvRow {
    pub fn new(cfg: &ExperimentConfig, learner: LearnerSpec, summary: &RegretSummary) -> Self {
        CsvRow {
            setting: cfg.setting.label(),
            learner: learner.label(),
            adversary: cfg.adversary.label().to_string(),
            actions: cfg.actions,
            horizon: cfg.horizon,
            eps_or_dist: cfg.noise.label(),
            eta: matches!(learner, LearnerSpec::Ews(_)).then_some(cfg.eta),
            theta: cfg.theta,
            seed_count: cfg.seeds.len(),
            mean_regret: summary.mean_regret,
            stderr: summary.stderr,
            theoretical_bound: summary.theoretical_bound,
            fitted_exponent: None,
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render(rows: &[CsvRow]) -> String {
    let mut sorted: Vec<&CsvRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.horizon, a.actions, &a.learner).cmp(&(b.horizon, b.actions, &b.learner))
    });
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.setting,
            r.learner,
            r.adversary,
            r.actions,
            r.horizon,
            r.eps_or_dist,
            fmt_opt(r.eta),
            fmt_opt(r.theta),
            r.seed_count,
            r.mean_regret,
            r.stderr,
            fmt_opt(r.theoretical_bound),
            fmt_opt(r.fitted_exponent),
        ));
    }
    out
}

pub fn emit_csv(rows: &[CsvRow], path: &Path) -> CliResult<()> {
    if rows.is_empty() {
        return Err(CliError::Config("no rows to write".to_string()));
    }
    std::fs::write(path, render(rows))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
