//! Experiment front-end: run and sweep configured episodes, verify the
//! oracle invariant grids, and print theorem bounds.
//!
//! Exit codes: 0 on success, 1 when a check or run fails, 2 on config
//! errors.

mod config;
mod csv;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use regretsim::harness::{
    fit_scaling_exponent, replicate, replicate_panel, theoretical_bound, ExperimentConfig,
};

use config::{apply_overrides, build, load_raw, parse_config, CliError, CliResult};
use csv::{emit_csv, CsvRow};

#[derive(Parser)]
#[command(
    name = "regretsim",
    about = "Noisy-feedback online-learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// Path to the config file.
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
        /// Write summary rows as CSV.
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
        /// Override config values (key=value, repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run the config across a horizon grid and fit the scaling exponent.
    Sweep {
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
        /// Grid specification, e.g. `T=10000,30000,100000`.
        #[arg(long = "grid", value_name = "T=V1,V2,...")]
        grid: String,
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run the oracle invariant checks and report pass/fail per check.
    Verify,
    /// Print the theorem bound and tuned parameters for a config.
    Bounds {
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Run { config, out, set } => cmd_run(&config, out.as_deref(), &set),
        Command::Sweep {
            config,
            grid,
            out,
            set,
        } => cmd_sweep(&config, &grid, out.as_deref(), &set),
        Command::Verify => cmd_verify(),
        Command::Bounds { config, set } => cmd_bounds(&config, &set),
    }
}

fn run_rows(cfg: &ExperimentConfig, panel: bool) -> CliResult<Vec<CsvRow>> {
    let warn = |learner: &str, violations: usize| {
        if violations > 0 {
            eprintln!(
                "warning: {learner} violated the update hypothesis (-eta * estimate <= 1) on \
                 {violations} rounds; the weights-inequality certificate does not cover this run"
            );
        }
    };
    if panel {
        let results = replicate_panel(cfg).map_err(|e| CliError::Check(e.to_string()))?;
        Ok(results
            .into_iter()
            .map(|(spec, summary)| {
                warn(&spec.label(), summary.hypothesis_violations);
                CsvRow::new(cfg, spec, &summary)
            })
            .collect())
    } else {
        let summary = replicate(cfg).map_err(|e| CliError::Check(e.to_string()))?;
        warn(&cfg.learner.label(), summary.hypothesis_violations);
        Ok(vec![CsvRow::new(cfg, cfg.learner, &summary)])
    }
}

fn print_summary(cfg: &ExperimentConfig, rows: &[CsvRow]) {
    println!(
        "setting {}  K={} T={}  noise={}  adversary={}",
        cfg.setting.label(),
        cfg.actions,
        cfg.horizon,
        cfg.noise.label(),
        cfg.adversary.label()
    );
    println!(
        "eta = {} ({}), theta = {} ({}), seeds = {}",
        cfg.eta,
        cfg.eta_source,
        cfg.theta
            .map(|t| t.to_string())
            .unwrap_or_else(|| "-".to_string()),
        cfg.theta_source,
        cfg.seeds.len()
    );
    if let Some(bound) = theoretical_bound(cfg) {
        println!("bound = {} ({})", bound.value, bound.source);
        if !bound.hypothesis_ok {
            eprintln!(
                "warning: the config violates the hypotheses of {}; the bound value is \
                 reported anyway",
                bound.source
            );
        }
    }
    for row in rows {
        let bound_note = row
            .theoretical_bound
            .map(|b| format!("  bound {b:.4}"))
            .unwrap_or_default();
        let exp_note = row
            .fitted_exponent
            .map(|s| format!("  exponent {s:.4}"))
            .unwrap_or_default();
        println!(
            "  T={:>9} K={:>3} {:<22} mean regret {:>14.6} +- {:<12.6}{}{}",
            row.horizon,
            row.actions,
            row.learner,
            row.mean_regret,
            row.stderr,
            bound_note,
            exp_note
        );
    }
}

fn cmd_run(path: &std::path::Path, out: Option<&std::path::Path>, set: &[String]) -> CliResult<()> {
    let parsed = parse_config(path, set)?;
    let rows = run_rows(&parsed.config, parsed.panel)?;
    print_summary(&parsed.config, &rows);
    if parsed.panel {
        let min = rows
            .iter()
            .map(|r| r.mean_regret)
            .fold(f64::INFINITY, f64::min);
        println!("  minimum mean regret across learners: {min}");
    }
    if let Some(out) = out {
        emit_csv(&rows, out)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn parse_grid(grid: &str) -> CliResult<Vec<usize>> {
    let (name, values) = grid
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("grid `{grid}` is not of the form T=v1,v2,...")))?;
    if !name.trim().eq_ignore_ascii_case("t") {
        return Err(CliError::Config(format!(
            "only horizon grids are supported (T=...), got `{name}`"
        )));
    }
    let mut out = Vec::new();
    for tok in values.split(',') {
        let v: usize = tok
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("grid value `{tok}` is not an integer")))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::Config("grid has no values".to_string()));
    }
    Ok(out)
}

fn cmd_sweep(
    path: &std::path::Path,
    grid: &str,
    out: Option<&std::path::Path>,
    set: &[String],
) -> CliResult<()> {
    let horizons = parse_grid(grid)?;
    let mut raw = load_raw(path)?;
    apply_overrides(&mut raw, set)?;

    // Resolve the config per grid point so tuned defaults track T.
    let mut rows: Vec<CsvRow> = Vec::new();
    let mut panel_any = false;
    let mut means: std::collections::BTreeMap<String, Vec<(f64, f64)>> = Default::default();
    let mut last_cfg: Option<ExperimentConfig> = None;
    for &t in &horizons {
        let mut point = raw.clone();
        point.insert("t".to_string(), toml::Value::Integer(t as i64));
        let parsed = build(&point)?;
        panel_any |= parsed.panel;
        let point_rows = run_rows(&parsed.config, parsed.panel)?;
        for row in &point_rows {
            means
                .entry(row.learner.clone())
                .or_default()
                .push((t as f64, row.mean_regret));
        }
        rows.extend(point_rows);
        last_cfg = Some(parsed.config);
    }

    // Per-learner exponent over the grid, attached to every row of that
    // learner when the fit is possible.
    for (learner, points) in &means {
        if let Ok(fit) = fit_scaling_exponent(points) {
            for row in rows.iter_mut().filter(|r| &r.learner == learner) {
                row.fitted_exponent = Some(fit.slope);
            }
            println!(
                "{learner}: fitted exponent {:.4} (r2 = {:.6}, {} excluded)",
                fit.slope, fit.r2, fit.excluded
            );
        } else {
            eprintln!("warning: no exponent fit for {learner} (need >= 4 positive grid points)");
        }
    }

    if let Some(cfg) = &last_cfg {
        print_summary(cfg, &rows);
        if panel_any {
            println!("(panel sweep: one row per learner per grid point)");
        }
    }
    if let Some(out) = out {
        emit_csv(&rows, out)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_verify() -> CliResult<()> {
    let results = verify::verify_suite();
    let mut all_pass = true;
    for r in &results {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", r.name, r.detail);
        all_pass &= r.pass;
    }
    if all_pass {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        Err(CliError::Check(
            "one or more verification checks failed".to_string(),
        ))
    }
}

fn cmd_bounds(path: &std::path::Path, set: &[String]) -> CliResult<()> {
    let parsed = parse_config(path, set)?;
    let cfg = &parsed.config;
    println!(
        "setting {}  K={} T={}  noise={}",
        cfg.setting.label(),
        cfg.actions,
        cfg.horizon,
        cfg.noise.label()
    );
    println!("eta = {} ({})", cfg.eta, cfg.eta_source);
    if let Some(theta) = cfg.theta {
        println!("theta = {} ({})", theta, cfg.theta_source);
    }
    match theoretical_bound(cfg) {
        Some(bound) => {
            println!("bound = {} ({})", bound.value, bound.source);
            if !bound.hypothesis_ok {
                eprintln!(
                    "warning: config violates the hypotheses of {}",
                    bound.source
                );
            }
        }
        None => println!("bound = none (no sub-linear guarantee in this setting)"),
    }
    Ok(())
}
