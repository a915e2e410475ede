//! Episode runner, multi-seed replication, theorem bounds, and
//! scaling-exponent fits.
//!
//! `replicate` is a pure function of `(config, seeds)`: episodes run in
//! parallel but results are joined in seed order, so scheduling cannot
//! change any output.

use rayon::prelude::*;

use crate::adversaries::{Adversary, AdversaryKind};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::learners::{default_theta, Learner};
use crate::noise::{MarginalDist, NoiseModel};
use crate::rng::Streams;
use crate::sim::{run_round, ActionIndex, FeedbackMode, NoiseRegime, RegretTrace, Setting};

/// Which learner an experiment runs, without resolved parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LearnerSpec {
    Ews(EstimatorFamily),
    FollowNoisyLeader,
    UniformRandom,
}

/// Estimator family; numeric parameters (`p`, `theta`) are resolved from
/// the experiment config when the learner is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorFamily {
    UnbiasedConstant,
    Raw,
    ThresholdFull,
    BanditImportance,
    Exp3Threshold,
}

impl EstimatorFamily {
    pub fn is_bandit(&self) -> bool {
        matches!(
            self,
            EstimatorFamily::BanditImportance | EstimatorFamily::Exp3Threshold
        )
    }

    pub fn needs_known_noise(&self) -> bool {
        matches!(
            self,
            EstimatorFamily::UnbiasedConstant
                | EstimatorFamily::ThresholdFull
                | EstimatorFamily::Exp3Threshold
        )
    }

    pub fn has_threshold(&self) -> bool {
        matches!(
            self,
            EstimatorFamily::ThresholdFull | EstimatorFamily::Exp3Threshold
        )
    }
}

impl LearnerSpec {
    pub fn label(&self) -> String {
        match self {
            LearnerSpec::Ews(f) => format!(
                "ews-{}",
                match f {
                    EstimatorFamily::UnbiasedConstant => "unbiased",
                    EstimatorFamily::Raw => "raw",
                    EstimatorFamily::ThresholdFull => "threshold",
                    EstimatorFamily::BanditImportance => "bandit-importance",
                    EstimatorFamily::Exp3Threshold => "exp3-threshold",
                }
            ),
            LearnerSpec::FollowNoisyLeader => "follow-noisy-leader".to_string(),
            LearnerSpec::UniformRandom => "uniform-random".to_string(),
        }
    }
}

/// A fully resolved experiment: every default has been filled in.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub setting: Setting,
    pub actions: usize,
    pub horizon: usize,
    pub noise: NoiseModel,
    pub learner: LearnerSpec,
    pub adversary: AdversaryKind,
    /// Learning rate for exponential-weights learners.
    pub eta: f64,
    /// Which tuning rule supplied the rate, or "explicit".
    pub eta_source: &'static str,
    /// Estimator threshold, present exactly when the estimator has one.
    pub theta: Option<f64>,
    pub theta_source: &'static str,
    /// Scale of the unspecified absolute constant in the bandit
    /// lower-bound constructions.
    pub gamma: f64,
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    /// Cross-field validation: setting/noise-model/estimator/adversary
    /// compatibility plus parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if self.actions < 2 {
            return Err(Error::Config(format!(
                "k must be at least 2, got {}",
                self.actions
            )));
        }
        if self.horizon < 1 {
            return Err(Error::Config("t must be at least 1".to_string()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("need at least one seed".to_string()));
        }
        self.noise.validate()?;

        let variable_model = self.noise.is_variable();
        match self.setting.regime {
            NoiseRegime::Constant if variable_model => {
                return Err(Error::Config(
                    "constant-noise settings require `noise = constant`".to_string(),
                ))
            }
            NoiseRegime::Variable if !variable_model => {
                return Err(Error::Config(
                    "variable-noise settings require a variable noise model".to_string(),
                ))
            }
            _ => {}
        }

        if let LearnerSpec::Ews(family) = self.learner {
            if family.is_bandit() != (self.setting.feedback == FeedbackMode::Bandit) {
                return Err(Error::Config(format!(
                    "estimator `{}` does not match feedback mode `{:?}`",
                    self.learner.label(),
                    self.setting.feedback
                )));
            }
            if family.needs_known_noise() && !self.setting.known_noise {
                return Err(Error::Config(format!(
                    "estimator `{}` needs the noise parameters but the setting hides them \
                     (key `known_noise`)",
                    self.learner.label()
                )));
            }
            if family == EstimatorFamily::UnbiasedConstant
                && self.setting.regime != NoiseRegime::Constant
            {
                return Err(Error::Config(
                    "the fixed-p unbiased estimator applies to constant noise only".to_string(),
                ));
            }
            if family.has_threshold() {
                match self.theta {
                    Some(th) if th > 0.0 && th < 1.0 => {}
                    Some(th) => {
                        return Err(Error::Config(format!("theta must lie in (0, 1), got {th}")))
                    }
                    None => {
                        return Err(Error::Config(
                            "threshold estimators need `theta`".to_string(),
                        ))
                    }
                }
            }
            if !(self.eta > 0.0 && self.eta.is_finite()) {
                return Err(Error::Config(format!(
                    "eta must be a positive finite real, got {}",
                    self.eta
                )));
            }
        }

        self.adversary.validate(self.actions)?;
        if self.adversary.needs_shared_noise() && self.noise != NoiseModel::SharedUniform {
            return Err(Error::Config(format!(
                "adversary `{}` conditions on a round-level shared noise value; \
                 use `noise = shared-uniform`",
                self.adversary.label()
            )));
        }
        if self.adversary == AdversaryKind::UnknownNoiseIndist {
            let uniform_marginal = matches!(
                self.noise,
                NoiseModel::SharedUniform
                    | NoiseModel::IidMarginal {
                        dist: MarginalDist::Uniform01
                    }
            );
            if !uniform_marginal {
                return Err(Error::Config(
                    "the indistinguishable construction needs uniform noise marginals".to_string(),
                ));
            }
        }
        if let AdversaryKind::FixedSequence { losses } = &self.adversary {
            if losses.horizon() < self.horizon {
                return Err(Error::Config(format!(
                    "fixed loss sequence has {} rounds but t = {}",
                    losses.horizon(),
                    self.horizon
                )));
            }
        }
        Ok(())
    }

    /// Same experiment with a different learner; eta/theta resolution is
    /// kept, so panels compare learners under one parameterization.
    pub fn with_learner(&self, learner: LearnerSpec) -> ExperimentConfig {
        ExperimentConfig {
            learner,
            ..self.clone()
        }
    }

    /// The constant noise level, when the model has one.
    pub fn constant_eps(&self) -> Option<f64> {
        match self.noise {
            NoiseModel::Constant { eps } => Some(eps),
            _ => None,
        }
    }

    /// Build the configured learner instance.
    pub fn build_learner(&self) -> Result<Learner> {
        build_learner_spec(self, self.learner)
    }
}

fn build_learner_spec(cfg: &ExperimentConfig, spec: LearnerSpec) -> Result<Learner> {
    match spec {
        LearnerSpec::Ews(family) => {
            let kind = match family {
                EstimatorFamily::UnbiasedConstant => {
                    let eps = cfg.constant_eps().ok_or_else(|| {
                        Error::Config("the unbiased estimator needs a constant eps".to_string())
                    })?;
                    EstimatorKind::UnbiasedConstant {
                        p: (1.0 - eps) / 2.0,
                    }
                }
                EstimatorFamily::Raw => EstimatorKind::Raw,
                EstimatorFamily::ThresholdFull => EstimatorKind::ThresholdFull {
                    theta: cfg.theta.ok_or_else(|| {
                        Error::Config("threshold estimators need `theta`".to_string())
                    })?,
                },
                EstimatorFamily::BanditImportance => EstimatorKind::BanditImportance,
                EstimatorFamily::Exp3Threshold => EstimatorKind::Exp3Threshold {
                    theta: cfg.theta.ok_or_else(|| {
                        Error::Config("threshold estimators need `theta`".to_string())
                    })?,
                },
            };
            Learner::ews(cfg.actions, kind, cfg.eta)
        }
        LearnerSpec::FollowNoisyLeader => Ok(Learner::follow_noisy_leader(cfg.actions)),
        LearnerSpec::UniformRandom => Ok(Learner::uniform_random(cfg.actions)),
    }
}

/// Learners that can legally run under the config's setting. Used when an
/// experiment quantifies over "any algorithm".
pub fn applicable_learners(cfg: &ExperimentConfig) -> Vec<LearnerSpec> {
    let mut out = Vec::new();
    let s = cfg.setting;
    match s.feedback {
        FeedbackMode::Full => {
            if s.known_noise && s.regime == NoiseRegime::Constant {
                out.push(LearnerSpec::Ews(EstimatorFamily::UnbiasedConstant));
            }
            if s.known_noise && s.regime == NoiseRegime::Variable {
                out.push(LearnerSpec::Ews(EstimatorFamily::ThresholdFull));
            }
            out.push(LearnerSpec::Ews(EstimatorFamily::Raw));
        }
        FeedbackMode::Bandit => {
            if s.known_noise && s.regime == NoiseRegime::Variable {
                out.push(LearnerSpec::Ews(EstimatorFamily::Exp3Threshold));
            }
            out.push(LearnerSpec::Ews(EstimatorFamily::BanditImportance));
        }
    }
    out.push(LearnerSpec::FollowNoisyLeader);
    out.push(LearnerSpec::UniformRandom);
    out
}

// ---------------------------------------------------------------------------
// Episodes
// ---------------------------------------------------------------------------

/// Outcome of one episode.
#[derive(Clone, Debug)]
pub struct EpisodeResult {
    /// `sum_t q_t . l_t - min_k L_k` on realized losses.
    pub pseudo_regret: f64,
    /// `sum_t l_{I_t,t} - min_k L_k` on the sampled actions (diagnostic).
    pub realized_regret: f64,
    /// `sum_t q_t . l_t - L_{planted}` when the adversary plants a best
    /// action (the quantity the lower-bound constructions control).
    pub regret_vs_planted: Option<f64>,
    /// Post-episode margin of the weights inequality for weights learners.
    /// Only meaningful when `hypothesis_violations` is zero.
    pub weights_margin: Option<f64>,
    /// Rounds on which `-eta * estimate` exceeded 1.
    pub hypothesis_violations: usize,
    /// Cumulative pseudo-regret per prefix; empty unless requested.
    pub trace: RegretTrace,
}

fn episode(cfg: &ExperimentConfig, seed: u64, want_trace: bool) -> Result<EpisodeResult> {
    let k = cfg.actions;
    let mut streams = Streams::for_episode(seed);
    let mut adversary = Adversary::new(cfg.adversary.clone(), k, &mut streams.adversary)?;
    let mut learner = cfg.build_learner()?;

    let mut on_loss = 0.0f64;
    let mut sampled_loss = 0u64;
    let mut cum = vec![0u64; k];
    let mut per_round = if want_trace {
        Vec::with_capacity(cfg.horizon)
    } else {
        Vec::new()
    };

    for t in 0..cfg.horizon {
        let rec = run_round(
            t,
            &mut learner,
            &mut adversary,
            &cfg.noise,
            cfg.setting,
            &mut streams,
        )?;
        for ((&l, &qi), c) in rec.true_loss.iter().zip(&rec.q).zip(&mut cum) {
            *c += u64::from(l);
            on_loss += qi * f64::from(l);
        }
        sampled_loss += u64::from(rec.true_loss[rec.played.0]);
        if want_trace {
            let best = *cum.iter().min().expect("k >= 2");
            per_round.push(on_loss - best as f64);
        }
    }

    let mut best_idx = 0usize;
    for i in 1..k {
        if cum[i] < cum[best_idx] {
            best_idx = i;
        }
    }
    let best = cum[best_idx] as f64;
    let regret_vs_planted = adversary
        .planted_best()
        .ok()
        .map(|ActionIndex(star)| on_loss - cum[star] as f64);

    Ok(EpisodeResult {
        pseudo_regret: on_loss - best,
        realized_regret: sampled_loss as f64 - best,
        regret_vs_planted,
        weights_margin: learner.weights_inequality_margin(),
        hypothesis_violations: learner.hypothesis_violations().0,
        trace: RegretTrace {
            per_round,
            best_action: ActionIndex(best_idx),
        },
    })
}

/// Run one episode and keep its full regret trace.
pub fn run_episode(cfg: &ExperimentConfig, seed: u64) -> Result<EpisodeResult> {
    cfg.validate()?;
    episode(cfg, seed, true)
}

// ---------------------------------------------------------------------------
// Replication
// ---------------------------------------------------------------------------

/// Aggregated regret across the config's seeds.
#[derive(Clone, Debug)]
pub struct RegretSummary {
    pub mean_regret: f64,
    pub stderr: f64,
    /// Minimum mean regret across a learner panel, when one was run.
    pub min_over_learners: Option<f64>,
    pub theoretical_bound: Option<f64>,
    pub per_seed: Vec<f64>,
    /// Total update-hypothesis violations over all episodes (diagnostic).
    pub hypothesis_violations: usize,
}

fn summarize(per_seed: Vec<f64>, violations: usize, bound: Option<f64>) -> RegretSummary {
    let n = per_seed.len() as f64;
    let mean = per_seed.iter().sum::<f64>() / n;
    let stderr = if per_seed.len() < 2 {
        0.0
    } else {
        let var = per_seed
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    };
    RegretSummary {
        mean_regret: mean,
        stderr,
        min_over_learners: None,
        theoretical_bound: bound,
        per_seed,
        hypothesis_violations: violations,
    }
}

/// Run every seed of the config and aggregate. Episodes run in parallel;
/// the aggregation is joined in seed order.
pub fn replicate(cfg: &ExperimentConfig) -> Result<RegretSummary> {
    cfg.validate()?;
    let results: Vec<(f64, usize)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| episode(cfg, seed, false).map(|r| (r.pseudo_regret, r.hypothesis_violations)))
        .collect::<Result<_>>()?;
    let violations = results.iter().map(|r| r.1).sum();
    let per_seed = results.into_iter().map(|r| r.0).collect();
    Ok(summarize(
        per_seed,
        violations,
        theoretical_bound(cfg).map(|b| b.value),
    ))
}

/// Run the config against every applicable learner; each summary carries
/// the panel minimum.
pub fn replicate_panel(cfg: &ExperimentConfig) -> Result<Vec<(LearnerSpec, RegretSummary)>> {
    let mut rows = Vec::new();
    for spec in applicable_learners(cfg) {
        let sub = cfg.with_learner(spec);
        rows.push((spec, replicate(&sub)?));
    }
    let min = rows
        .iter()
        .map(|(_, s)| s.mean_regret)
        .fold(f64::INFINITY, f64::min);
    for (_, s) in &mut rows {
        s.min_over_learners = Some(min);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Theorem bounds
// ---------------------------------------------------------------------------

/// A regret upper bound sourced from a theorem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremBound {
    pub value: f64,
    pub source: &'static str,
    /// False when the config violates the theorem's stated hypotheses
    /// (reported as a warning, never silently dropped).
    pub hypothesis_ok: bool,
}

/// The regret upper bound applying to the config's setting, if the setting
/// has one. Unknown variable noise is a linear-regret regime and yields
/// `None`.
pub fn theoretical_bound(cfg: &ExperimentConfig) -> Option<TheoremBound> {
    let t = cfg.horizon as f64;
    let k = cfg.actions as f64;
    let lk = k.ln();
    match (
        cfg.setting.feedback,
        cfg.setting.regime,
        cfg.setting.known_noise,
    ) {
        (FeedbackMode::Full, NoiseRegime::Constant, known) => {
            let eps = cfg.constant_eps().filter(|e| *e > 0.0)?;
            Some(TheoremBound {
                value: 2.0 / eps * (t * lk).sqrt(),
                source: if known {
                    "full-const-known"
                } else {
                    "full-const-unknown"
                },
                hypothesis_ok: t >= 0.25 * lk,
            })
        }
        (FeedbackMode::Bandit, NoiseRegime::Constant, _) => {
            let eps = cfg.constant_eps().filter(|e| *e > 0.0)?;
            Some(TheoremBound {
                value: 2.0 / eps * (t * k * lk).sqrt(),
                source: "bandit-const",
                hypothesis_ok: true,
            })
        }
        (FeedbackMode::Full, NoiseRegime::Variable, true) => match &cfg.noise {
            NoiseModel::SharedUniform
            | NoiseModel::IidMarginal {
                dist: MarginalDist::Uniform01,
            } => Some(TheoremBound {
                value: 3.0 * t.powf(2.0 / 3.0) * lk.powf(1.0 / 3.0),
                source: "full-var-uniform",
                hypothesis_ok: true,
            }),
            NoiseModel::IidMarginal {
                dist: MarginalDist::TruncExp { lambda },
            } => Some(TheoremBound {
                value: 3.0 * lambda * t.powf(2.0 / 3.0) * lk.powf(1.0 / 3.0),
                source: "full-var-trunc-exp",
                hypothesis_ok: true,
            }),
            NoiseModel::IidMarginal {
                dist: MarginalDist::PowerCdf { alpha },
            } => {
                // Explicit pre-asymptotic form: 2 sqrt(T ln K) / theta +
                // theta^alpha T at its tuned theta.
                let theta = default_theta(
                    &cfg.setting,
                    Some(&MarginalDist::PowerCdf { alpha: *alpha }),
                    cfg.horizon,
                    cfg.actions,
                )
                .ok()
                .flatten()?
                .value;
                Some(TheoremBound {
                    value: 2.0 * (t * lk).sqrt() / theta + theta.powf(*alpha) * t,
                    source: "full-var-power",
                    hypothesis_ok: theta < 1.0,
                })
            }
            NoiseModel::Constant { .. } => None,
        },
        (FeedbackMode::Bandit, NoiseRegime::Variable, true) => match &cfg.noise {
            NoiseModel::SharedUniform
            | NoiseModel::IidMarginal {
                dist: MarginalDist::Uniform01,
            } => Some(TheoremBound {
                value: 3.0 * t.powf(2.0 / 3.0) * k.powf(1.0 / 3.0) * lk.powf(1.0 / 3.0),
                source: "bandit-var-uniform",
                hypothesis_ok: true,
            }),
            _ => None,
        },
        // No sub-linear guarantee exists without observing variable noise.
        (_, NoiseRegime::Variable, false) => None,
    }
}

// ---------------------------------------------------------------------------
// Scaling-exponent fit
// ---------------------------------------------------------------------------

/// Ordinary least squares on `(ln T, ln mean_regret)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Grid points dropped because their mean regret was not positive.
    pub excluded: usize,
}

pub fn fit_scaling_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 4 {
        return Err(Error::Config(format!(
            "exponent fits need at least 4 grid points, got {}",
            points.len()
        )));
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, r)| *t > 0.0 && *r > 0.0)
        .map(|&(t, r)| (t.ln(), r.ln()))
        .collect();
    let excluded = points.len() - usable.len();
    if usable.len() < 2 {
        return Err(Error::Config(
            "fewer than 2 grid points with positive mean regret".to_string(),
        ));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = usable.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 = usable
        .iter()
        .map(|p| {
            let e = p.1 - (intercept + slope * p.0);
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(ExponentFit {
        slope,
        intercept,
        r2,
        excluded,
    })
}
