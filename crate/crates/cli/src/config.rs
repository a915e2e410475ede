//! Flat key-value experiment configs (a TOML-compatible subset).
//!
//! Keys are scalars or one flat array (`seeds`); nested tables are
//! rejected, unknown keys are rejected by name, and every default that
//! gets filled in records which rule supplied it. Command-line
//! `--set key=value` overrides beat file values.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use regretsim::adversaries::{
    bandit_gap_beta, bandit_var_noise_defaults, gap_delta, var_noise_full_info_theta, AdversaryKind,
};
use regretsim::harness::{EstimatorFamily, ExperimentConfig, LearnerSpec};
use regretsim::learners::{default_eta, default_theta};
use regretsim::noise::{MarginalDist, NoiseModel};
use regretsim::rng::episode_seed;
use regretsim::sim::{FeedbackMode, LossMatrix, NoiseRegime, Setting};

/// CLI-level error with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad config or arguments (exit code 2).
    Config(String),
    /// A run or verification check failed (exit code 1).
    Check(String),
    /// Filesystem problem (exit code 1).
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Check(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<regretsim::Error> for CliError {
    fn from(e: regretsim::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

const KNOWN_KEYS: &[&str] = &[
    "setting",
    "known_noise",
    "k",
    "t",
    "noise",
    "eps",
    "lambda",
    "alpha",
    "learner",
    "estimator",
    "eta",
    "theta",
    "adversary",
    "losses",
    "delta",
    "beta",
    "adv_theta",
    "gap",
    "gamma",
    "root_seed",
    "seed_count",
    "seeds",
];

/// Raw key-value view of a config file plus overrides.
pub type RawConfig = BTreeMap<String, toml::Value>;

/// A built experiment: the resolved config plus whether the run should
/// expand into the full learner panel.
#[derive(Clone, Debug)]
pub struct ParsedExperiment {
    pub config: ExperimentConfig,
    /// True when `learner = "all"`.
    pub panel: bool,
}

pub fn load_raw(path: &Path) -> CliResult<RawConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (key, value) in table {
        if matches!(value, toml::Value::Table(_)) {
            return Err(CliError::Config(format!(
                "key `{key}`: nested tables are not part of the config format"
            )));
        }
        map.insert(key, value);
    }
    Ok(map)
}

/// Apply `key=value` overrides; values parse as TOML scalars and fall back
/// to strings.
pub fn apply_overrides(raw: &mut RawConfig, overrides: &[String]) -> CliResult<()> {
    for item in overrides {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            CliError::Config(format!("override `{item}` is not of the form key=value"))
        })?;
        let key = key.trim();
        let value = value.trim();
        let parsed = format!("x = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("x"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        raw.insert(key.to_string(), parsed);
    }
    Ok(())
}

pub fn parse_config(path: &Path, overrides: &[String]) -> CliResult<ParsedExperiment> {
    let mut raw = load_raw(path)?;
    apply_overrides(&mut raw, overrides)?;
    build(&raw)
}

// ---------------------------------------------------------------------------
// Typed accessors
// ---------------------------------------------------------------------------

fn get_str(raw: &RawConfig, key: &str) -> CliResult<Option<String>> {
    match raw.get(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(CliError::Config(format!(
            "key `{key}` must be a string, got `{other}`"
        ))),
    }
}

fn get_f64(raw: &RawConfig, key: &str) -> CliResult<Option<f64>> {
    match raw.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(f)) => Ok(Some(*f)),
        Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(other) => Err(CliError::Config(format!(
            "key `{key}` must be a number, got `{other}`"
        ))),
    }
}

fn get_usize(raw: &RawConfig, key: &str) -> CliResult<Option<usize>> {
    match raw.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
        Some(other) => Err(CliError::Config(format!(
            "key `{key}` must be a nonnegative integer, got `{other}`"
        ))),
    }
}

fn get_u64(raw: &RawConfig, key: &str) -> CliResult<Option<u64>> {
    match raw.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
        Some(other) => Err(CliError::Config(format!(
            "key `{key}` must be a nonnegative integer, got `{other}`"
        ))),
    }
}

fn get_bool(raw: &RawConfig, key: &str) -> CliResult<Option<bool>> {
    match raw.get(key) {
        None => Ok(None),
        Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
        Some(other) => Err(CliError::Config(format!(
            "key `{key}` must be a boolean, got `{other}`"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Building
// ---------------------------------------------------------------------------

pub fn build(raw: &RawConfig) -> CliResult<ParsedExperiment> {
    for key in raw.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
    }

    let setting_str = get_str(raw, "setting")?
        .ok_or_else(|| CliError::Config("missing required key `setting`".to_string()))?;
    let (feedback, regime) = match setting_str.as_str() {
        "full-const" => (FeedbackMode::Full, NoiseRegime::Constant),
        "full-var" => (FeedbackMode::Full, NoiseRegime::Variable),
        "bandit-const" => (FeedbackMode::Bandit, NoiseRegime::Constant),
        "bandit-var" => (FeedbackMode::Bandit, NoiseRegime::Variable),
        other => {
            return Err(CliError::Config(format!(
                "key `setting` must be one of full-const, full-var, bandit-const, bandit-var; \
                 got `{other}`"
            )))
        }
    };
    let known_noise = get_bool(raw, "known_noise")?.unwrap_or(true);
    let setting = Setting::new(feedback, regime, known_noise);

    let actions = get_usize(raw, "k")?
        .ok_or_else(|| CliError::Config("missing required key `k`".to_string()))?;
    let horizon = get_usize(raw, "t")?
        .ok_or_else(|| CliError::Config("missing required key `t`".to_string()))?;

    // Noise model.
    let eps = get_f64(raw, "eps")?;
    let noise_str = get_str(raw, "noise")?.unwrap_or_else(|| {
        match regime {
            NoiseRegime::Constant => "constant",
            NoiseRegime::Variable => "uniform",
        }
        .to_string()
    });
    let noise = match noise_str.as_str() {
        "constant" => {
            let eps = eps.ok_or_else(|| {
                CliError::Config("constant noise needs key `eps` in [0, 1]".to_string())
            })?;
            NoiseModel::Constant { eps }
        }
        "uniform" => NoiseModel::IidMarginal {
            dist: MarginalDist::Uniform01,
        },
        "shared-uniform" => NoiseModel::SharedUniform,
        "trunc-exp" => {
            let lambda = get_f64(raw, "lambda")?.ok_or_else(|| {
                CliError::Config("trunc-exp noise needs key `lambda` > 0".to_string())
            })?;
            NoiseModel::IidMarginal {
                dist: MarginalDist::TruncExp { lambda },
            }
        }
        "power" => {
            let alpha = get_f64(raw, "alpha")?
                .ok_or_else(|| CliError::Config("power noise needs key `alpha` > 0".to_string()))?;
            NoiseModel::IidMarginal {
                dist: MarginalDist::PowerCdf { alpha },
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "key `noise` must be one of constant, uniform, shared-uniform, trunc-exp, power; \
                 got `{other}`"
            )))
        }
    };
    let marginal = match &noise {
        NoiseModel::IidMarginal { dist } => Some(dist.clone()),
        NoiseModel::SharedUniform => Some(MarginalDist::Uniform01),
        NoiseModel::Constant { .. } => None,
    };

    // Learner and estimator.
    let learner_str = get_str(raw, "learner")?.unwrap_or_else(|| "ews".to_string());
    let estimator_str = get_str(raw, "estimator")?;
    let default_family = match (feedback, regime, known_noise) {
        (FeedbackMode::Full, NoiseRegime::Constant, true) => EstimatorFamily::UnbiasedConstant,
        (FeedbackMode::Full, NoiseRegime::Constant, false) => EstimatorFamily::Raw,
        (FeedbackMode::Full, NoiseRegime::Variable, true) => EstimatorFamily::ThresholdFull,
        (FeedbackMode::Full, NoiseRegime::Variable, false) => EstimatorFamily::Raw,
        (FeedbackMode::Bandit, NoiseRegime::Constant, _) => EstimatorFamily::BanditImportance,
        (FeedbackMode::Bandit, NoiseRegime::Variable, true) => EstimatorFamily::Exp3Threshold,
        (FeedbackMode::Bandit, NoiseRegime::Variable, false) => EstimatorFamily::BanditImportance,
    };
    let family = match estimator_str.as_deref() {
        None => default_family,
        Some("unbiased") => EstimatorFamily::UnbiasedConstant,
        Some("raw") => EstimatorFamily::Raw,
        Some("threshold") => EstimatorFamily::ThresholdFull,
        Some("bandit-importance") => EstimatorFamily::BanditImportance,
        Some("exp3-threshold") => EstimatorFamily::Exp3Threshold,
        Some(other) => {
            return Err(CliError::Config(format!(
                "key `estimator` must be one of unbiased, raw, threshold, bandit-importance, \
                 exp3-threshold; got `{other}`"
            )))
        }
    };
    let (learner, panel) = match learner_str.as_str() {
        "ews" => (LearnerSpec::Ews(family), false),
        "follow-noisy-leader" => (LearnerSpec::FollowNoisyLeader, false),
        "uniform-random" => (LearnerSpec::UniformRandom, false),
        "all" => (LearnerSpec::Ews(family), true),
        other => {
            return Err(CliError::Config(format!(
                "key `learner` must be one of ews, follow-noisy-leader, uniform-random, all; \
                 got `{other}`"
            )))
        }
    };

    // eta / theta, explicit beating theorem defaults.
    let ews_selected = matches!(learner, LearnerSpec::Ews(_)) || panel;
    let (eta, eta_source) = match get_f64(raw, "eta")? {
        Some(e) => (e, "explicit"),
        None => match default_eta(&setting, marginal.as_ref(), eps, horizon, actions) {
            Ok(tuned) => (tuned.value, tuned.source),
            Err(e) if ews_selected => {
                return Err(CliError::Config(format!("key `eta`: {e}")));
            }
            // Rate is unused by non-weights learners.
            Err(_) => (1.0, "unused"),
        },
    };
    let (theta, theta_source) = match get_f64(raw, "theta")? {
        Some(th) => (Some(th), "explicit"),
        None => {
            if family.has_threshold() && ews_selected {
                match default_theta(&setting, marginal.as_ref(), horizon, actions)
                    .map_err(|e| CliError::Config(format!("key `theta`: {e}")))?
                {
                    Some(tuned) => (Some(tuned.value), tuned.source),
                    None => (None, "none"),
                }
            } else {
                (None, "none")
            }
        }
    };
    if let Some(th) = theta {
        if !(th > 0.0 && th < 1.0) {
            return Err(CliError::Config(format!(
                "theta must lie in (0, 1) after defaulting, got {th}"
            )));
        }
    }

    let gamma = get_f64(raw, "gamma")?.unwrap_or(1.0);
    let gamma_ok = gamma.is_finite() && gamma > 0.0;
    if !gamma_ok {
        return Err(CliError::Config(format!(
            "key `gamma` must be positive, got {gamma}"
        )));
    }

    // Adversary.
    let adversary_str = get_str(raw, "adversary")?
        .ok_or_else(|| CliError::Config("missing required key `adversary`".to_string()))?;
    let adversary = match adversary_str.as_str() {
        "fixed" => {
            let text = get_str(raw, "losses")?.ok_or_else(|| {
                CliError::Config(
                    "fixed adversary needs key `losses` (whitespace-separated binary rows)"
                        .to_string(),
                )
            })?;
            AdversaryKind::FixedSequence {
                losses: parse_loss_rows(&text)?,
            }
        }
        "stochastic-gap" => {
            let delta = match get_f64(raw, "delta")? {
                Some(d) => d,
                None => {
                    let eps = eps.ok_or_else(|| {
                        CliError::Config(
                            "stochastic-gap's default delta needs `eps`; set `delta` explicitly \
                             otherwise"
                                .to_string(),
                        )
                    })?;
                    gap_delta(eps, horizon, actions).map_err(CliError::from)?
                }
            };
            AdversaryKind::StochasticGap { delta }
        }
        "var-noise-full-info" => {
            let theta_adv = match get_f64(raw, "adv_theta")? {
                Some(v) => v,
                None => var_noise_full_info_theta(horizon, actions),
            };
            let gap = get_f64(raw, "gap")?.unwrap_or(1.0 / 6.0);
            AdversaryKind::VariableNoiseFullInfo {
                theta: theta_adv,
                gap,
            }
        }
        "unknown-noise-indist" => AdversaryKind::UnknownNoiseIndist,
        "bandit-gap" => {
            let beta = match get_f64(raw, "beta")? {
                Some(b) => b,
                None => {
                    let eps = eps.ok_or_else(|| {
                        CliError::Config(
                            "bandit-gap's default beta needs `eps`; set `beta` explicitly \
                             otherwise"
                                .to_string(),
                        )
                    })?;
                    bandit_gap_beta(gamma, eps, horizon, actions).map_err(CliError::from)?
                }
            };
            AdversaryKind::BanditGap { beta }
        }
        "bandit-var-noise" => {
            let (dt, db) =
                bandit_var_noise_defaults(gamma, horizon, actions).map_err(CliError::from)?;
            let theta_adv = get_f64(raw, "adv_theta")?.unwrap_or(dt);
            let beta = get_f64(raw, "beta")?.unwrap_or(db);
            AdversaryKind::BanditVariableNoise {
                theta: theta_adv,
                beta,
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "key `adversary` must be one of fixed, stochastic-gap, var-noise-full-info, \
                 unknown-noise-indist, bandit-gap, bandit-var-noise; got `{other}`"
            )))
        }
    };

    // Seeds.
    let seeds = match (raw.get("seeds"), get_usize(raw, "seed_count")?) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "keys `seeds` and `seed_count` are mutually exclusive".to_string(),
            ))
        }
        (Some(toml::Value::Array(items)), None) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    toml::Value::Integer(i) if *i >= 0 => out.push(*i as u64),
                    other => {
                        return Err(CliError::Config(format!(
                            "key `seeds` must hold nonnegative integers, got `{other}`"
                        )))
                    }
                }
            }
            out
        }
        (Some(other), None) => {
            return Err(CliError::Config(format!(
                "key `seeds` must be an array, got `{other}`"
            )))
        }
        (None, count) => {
            let root = get_u64(raw, "root_seed")?.unwrap_or(0);
            let n = count.unwrap_or(1);
            (0..n as u64).map(|i| episode_seed(root, i)).collect()
        }
    };

    let config = ExperimentConfig {
        setting,
        actions,
        horizon,
        noise,
        learner,
        adversary,
        eta,
        eta_source,
        theta,
        theta_source,
        gamma,
        seeds,
    };
    config.validate().map_err(CliError::from)?;
    Ok(ParsedExperiment { config, panel })
}

fn parse_loss_rows(text: &str) -> CliResult<LossMatrix> {
    let mut rows = Vec::new();
    for token in text.split_whitespace() {
        let row: Vec<u8> = token
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(CliError::Config(format!(
                    "key `losses`: rows must be 0/1 strings, got `{other}`"
                ))),
            })
            .collect::<CliResult<_>>()?;
        rows.push(row);
    }
    LossMatrix::from_rows(&rows).map_err(CliError::from)
}
