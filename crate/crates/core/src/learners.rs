//! The exponential-weights engine and the non-weights baselines.
//!
//! Weights live in the log domain: `log_w_i <- log_w_i - eta * est_i`, and
//! the action distribution is the softmax of `log_w` with max subtraction.
//! Multi-million-round horizons would underflow raw weight products.
//!
//! Baselines (`FollowNoisyLeader`, `UniformRandom`) exist because the
//! lower-bound experiments quantify over "any algorithm": the harness runs
//! each adversary against every applicable learner and reports the minimum
//! observed regret.

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::noise::MarginalDist;
use crate::sim::{
    ActionIndex, FeedbackMode, FeedbackVector, NoiseParamsRound, NoiseRegime, Setting,
};

// ---------------------------------------------------------------------------
// Exponential-weights state
// ---------------------------------------------------------------------------

/// Log-domain weight vector with its learning rate.
#[derive(Clone, Debug)]
pub struct EwsState {
    log_w: Vec<f64>,
    eta: f64,
    round: usize,
}

impl EwsState {
    pub fn new(actions: usize, eta: f64) -> Result<Self> {
        if actions < 2 {
            return Err(Error::Config(format!(
                "need at least 2 actions, got {actions}"
            )));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!(
                "eta must be a positive finite real, got {eta}"
            )));
        }
        Ok(EwsState {
            log_w: vec![0.0; actions],
            eta,
            round: 0,
        })
    }

    pub fn actions(&self) -> usize {
        self.log_w.len()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_w
    }

    /// Softmax of the log weights. Sums to 1 within 1e-12 and every entry
    /// is strictly positive in the regimes the harness constructs.
    pub fn distribution(&self) -> Vec<f64> {
        softmax(&self.log_w)
    }

    /// Apply one round of estimates. Errors if any estimate violates the
    /// update hypothesis `-eta * est <= 1`.
    pub fn update(&mut self, estimates: &[f64]) -> Result<()> {
        if estimates.len() != self.log_w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.log_w.len(),
                got: estimates.len(),
            });
        }
        for (i, &e) in estimates.iter().enumerate() {
            if -self.eta * e > 1.0 {
                return Err(Error::HypothesisFailed(format!(
                    "-eta * estimate = {} > 1 at action {i} (eta = {}, estimate = {e})",
                    -self.eta * e,
                    self.eta
                )));
            }
        }
        self.apply(estimates);
        Ok(())
    }

    /// Apply estimates without the hypothesis check. The update itself is
    /// well-defined for any finite estimates; only the regret guarantee
    /// needs the hypothesis.
    pub fn update_unchecked(&mut self, estimates: &[f64]) {
        debug_assert_eq!(estimates.len(), self.log_w.len());
        self.apply(estimates);
    }

    fn apply(&mut self, estimates: &[f64]) {
        for (w, &e) in self.log_w.iter_mut().zip(estimates) {
            *w -= self.eta * e;
        }
        self.round += 1;
    }
}

/// Numerically stable softmax.
pub(crate) fn softmax(log_w: &[f64]) -> Vec<f64> {
    let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut q: Vec<f64> = log_w.iter().map(|&w| (w - m).exp()).collect();
    let sum: f64 = q.iter().sum();
    for x in &mut q {
        *x /= sum;
    }
    q
}

// ---------------------------------------------------------------------------
// Learners
// ---------------------------------------------------------------------------

/// A learner instance with its mutable state.
#[derive(Clone, Debug)]
pub enum Learner {
    Ews {
        estimator: EstimatorKind,
        state: EwsState,
        /// Running terms of the weights inequality, kept so any episode can
        /// be certified after the fact: `sum_t q_t . est_t`,
        /// `sum_t sum_i q_i est_i^2`, and per-action `sum_t est_{k,t}`.
        hat_on: f64,
        hat_sq: f64,
        hat_cum: Vec<f64>,
        /// Rounds where some `-eta * estimate` exceeded 1. The thresholded
        /// bandit estimator can produce these when an action's probability
        /// drifts low; the episode continues and the count is reported,
        /// but the inequality certificate no longer applies.
        hypothesis_violations: usize,
        first_violation: Option<String>,
    },
    /// Plays the argmin of cumulative observed feedback, ties broken by
    /// lowest index. Deterministic given the feedback history.
    FollowNoisyLeader {
        cum_feedback: Vec<f64>,
        actions: usize,
    },
    UniformRandom {
        actions: usize,
    },
}

impl Learner {
    pub fn ews(actions: usize, estimator: EstimatorKind, eta: f64) -> Result<Self> {
        estimator.validate()?;
        Ok(Learner::Ews {
            estimator,
            state: EwsState::new(actions, eta)?,
            hat_on: 0.0,
            hat_sq: 0.0,
            hat_cum: vec![0.0; actions],
            hypothesis_violations: 0,
            first_violation: None,
        })
    }

    pub fn follow_noisy_leader(actions: usize) -> Self {
        Learner::FollowNoisyLeader {
            cum_feedback: vec![0.0; actions],
            actions,
        }
    }

    pub fn uniform_random(actions: usize) -> Self {
        Learner::UniformRandom { actions }
    }

    pub fn actions(&self) -> usize {
        match self {
            Learner::Ews { state, .. } => state.actions(),
            Learner::FollowNoisyLeader { actions, .. } => *actions,
            Learner::UniformRandom { actions } => *actions,
        }
    }

    /// The action distribution for the current round. Built-in learners do
    /// not condition on the current noise levels, but the observed noise is
    /// part of the selection interface by protocol.
    pub fn distribution(&self, _observed_noise: Option<&NoiseParamsRound>) -> Vec<f64> {
        match self {
            Learner::Ews { state, .. } => state.distribution(),
            Learner::FollowNoisyLeader {
                cum_feedback,
                actions,
            } => {
                let mut q = vec![0.0; *actions];
                q[crate::sim::argmin_f64(cum_feedback)] = 1.0;
                q
            }
            Learner::UniformRandom { actions } => vec![1.0 / *actions as f64; *actions],
        }
    }

    /// Consume the round's feedback. Returns the loss estimates actually
    /// applied (zeros for learners that do not estimate).
    pub fn update(
        &mut self,
        feedback: &FeedbackVector,
        q: &[f64],
        played: ActionIndex,
        observed_noise: Option<&NoiseParamsRound>,
    ) -> Result<Vec<f64>> {
        match self {
            Learner::Ews {
                estimator,
                state,
                hat_on,
                hat_sq,
                hat_cum,
                hypothesis_violations,
                first_violation,
            } => {
                let k = state.actions();
                let mut estimates = Vec::with_capacity(k);
                for (i, &q_i) in q.iter().enumerate() {
                    let e = estimator.estimate(
                        feedback.get(i),
                        observed_noise.map(|n| n.eps()[i]),
                        q_i,
                        played.0 == i,
                    )?;
                    estimates.push(e);
                }
                match state.update(&estimates) {
                    Ok(()) => {}
                    Err(Error::HypothesisFailed(msg)) => {
                        *hypothesis_violations += 1;
                        if first_violation.is_none() {
                            *first_violation = Some(format!(
                                "estimator `{}` with eta = {} broke the update hypothesis: {msg}",
                                estimator.label(),
                                state.eta()
                            ));
                        }
                        state.update_unchecked(&estimates);
                    }
                    Err(other) => return Err(other),
                }
                for i in 0..k {
                    *hat_on += q[i] * estimates[i];
                    *hat_sq += q[i] * estimates[i] * estimates[i];
                    hat_cum[i] += estimates[i];
                }
                Ok(estimates)
            }
            Learner::FollowNoisyLeader {
                cum_feedback,
                actions,
            } => {
                for (i, cum) in cum_feedback.iter_mut().enumerate() {
                    if let Some(c) = feedback.get(i) {
                        *cum += f64::from(c);
                    }
                }
                Ok(vec![0.0; *actions])
            }
            Learner::UniformRandom { actions } => Ok(vec![0.0; *actions]),
        }
    }

    /// `ln K / eta + eta * sum q est^2 - (sum q.est - min_k sum est_k)` for
    /// the rounds seen so far; nonnegative (up to round-off) whenever the
    /// update hypothesis held on every round. `None` for non-weights
    /// learners.
    pub fn weights_inequality_margin(&self) -> Option<f64> {
        match self {
            Learner::Ews {
                state,
                hat_on,
                hat_sq,
                hat_cum,
                ..
            } => {
                let best = hat_cum.iter().copied().fold(f64::INFINITY, f64::min);
                let lhs = hat_on - best;
                let rhs = (state.actions() as f64).ln() / state.eta() + state.eta() * hat_sq;
                Some(rhs - lhs)
            }
            _ => None,
        }
    }

    /// How many rounds violated `-eta * estimate <= 1`, with the first
    /// offender's description.
    pub fn hypothesis_violations(&self) -> (usize, Option<&str>) {
        match self {
            Learner::Ews {
                hypothesis_violations,
                first_violation,
                ..
            } => (*hypothesis_violations, first_violation.as_deref()),
            _ => (0, None),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Learner::Ews { estimator, .. } => format!("ews-{}", estimator.label()),
            Learner::FollowNoisyLeader { .. } => "follow-noisy-leader".to_string(),
            Learner::UniformRandom { .. } => "uniform-random".to_string(),
        }
    }
}

// ---------------------------------------------------------------------------
// Theorem-sourced parameter defaults
// ---------------------------------------------------------------------------

/// Where a default learning rate or threshold came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TunedValue {
    pub value: f64,
    pub source: &'static str,
}

fn ln_k(actions: usize) -> f64 {
    (actions as f64).ln()
}

/// The theorem-tuned learning rate for a setting. Constant-noise settings
/// need `eps`; variable-noise settings key on the marginal. Unknown
/// variable noise has no sub-linear guarantee, so no default exists and the
/// rate must be supplied explicitly.
pub fn default_eta(
    setting: &Setting,
    dist: Option<&MarginalDist>,
    eps: Option<f64>,
    horizon: usize,
    actions: usize,
) -> Result<TunedValue> {
    if horizon < 2 || actions < 2 {
        return Err(Error::Config(format!(
            "defaults need T >= 2 and K >= 2, got T={horizon}, K={actions}"
        )));
    }
    let t = horizon as f64;
    let k = actions as f64;
    let lk = ln_k(actions);
    match (setting.feedback, setting.regime) {
        (FeedbackMode::Full, NoiseRegime::Constant) => {
            let eps = require_positive_eps(eps)?;
            let source = if setting.known_noise {
                "full-const-known"
            } else {
                "full-const-unknown"
            };
            Ok(TunedValue {
                value: eps * (lk / t).sqrt(),
                source,
            })
        }
        (FeedbackMode::Bandit, NoiseRegime::Constant) => {
            let eps = require_positive_eps(eps)?;
            Ok(TunedValue {
                value: eps * (lk / (t * k)).sqrt(),
                source: "bandit-const",
            })
        }
        (FeedbackMode::Full, NoiseRegime::Variable) if setting.known_noise => match dist {
            None | Some(MarginalDist::Uniform01) => Ok(TunedValue {
                value: (lk / t).powf(2.0 / 3.0),
                source: "full-var-uniform",
            }),
            Some(MarginalDist::TruncExp { lambda }) => {
                // eta = sqrt(ln K / (T g(theta))) with g bounded by lambda/theta.
                let theta = default_theta(setting, dist, horizon, actions)?
                    .expect("threshold setting")
                    .value;
                Ok(TunedValue {
                    value: (theta * lk / (t * lambda)).sqrt(),
                    source: "full-var-trunc-exp",
                })
            }
            Some(MarginalDist::PowerCdf { .. }) => {
                // g bounded by 1/theta^2 gives eta = theta sqrt(ln K / T).
                let theta = default_theta(setting, dist, horizon, actions)?
                    .expect("threshold setting")
                    .value;
                Ok(TunedValue {
                    value: theta * (lk / t).sqrt(),
                    source: "full-var-power",
                })
            }
        },
        (FeedbackMode::Bandit, NoiseRegime::Variable) if setting.known_noise => Ok(TunedValue {
            value: lk.powf(2.0 / 3.0) / (k.powf(1.0 / 3.0) * t.powf(2.0 / 3.0)),
            source: "bandit-var-uniform",
        }),
        _ => Err(Error::Config(format!(
            "no theorem default for eta in setting `{}`; set eta explicitly",
            setting.label()
        ))),
    }
}

/// The theorem-tuned estimator threshold, `None` for settings whose
/// estimator has no threshold.
pub fn default_theta(
    setting: &Setting,
    dist: Option<&MarginalDist>,
    horizon: usize,
    actions: usize,
) -> Result<Option<TunedValue>> {
    if horizon < 2 || actions < 2 {
        return Err(Error::Config(format!(
            "defaults need T >= 2 and K >= 2, got T={horizon}, K={actions}"
        )));
    }
    let t = horizon as f64;
    let k = actions as f64;
    let lk = ln_k(actions);
    if setting.regime != NoiseRegime::Variable || !setting.known_noise {
        return Ok(None);
    }
    let tuned = match setting.feedback {
        FeedbackMode::Full => match dist {
            None | Some(MarginalDist::Uniform01) => TunedValue {
                value: (lk / t).powf(1.0 / 3.0),
                source: "full-var-uniform",
            },
            Some(MarginalDist::TruncExp { lambda }) => TunedValue {
                value: (lk / t).powf(1.0 / 3.0) / lambda,
                source: "full-var-trunc-exp",
            },
            Some(MarginalDist::PowerCdf { alpha }) => TunedValue {
                value: (2.0 / alpha).powf(1.0 / (1.0 + alpha))
                    * (lk / t).powf(1.0 / (2.0 * (1.0 + alpha))),
                source: "full-var-power",
            },
        },
        FeedbackMode::Bandit => TunedValue {
            value: k.powf(1.0 / 3.0) * lk.powf(1.0 / 3.0) / t.powf(1.0 / 3.0),
            source: "bandit-var-uniform",
        },
    };
    Ok(Some(tuned))
}

fn require_positive_eps(eps: Option<f64>) -> Result<f64> {
    match eps {
        Some(e) if e > 0.0 && e <= 1.0 => Ok(e),
        Some(e) => Err(Error::Config(format!(
            "constant-noise defaults need eps in (0, 1], got {e}"
        ))),
        None => Err(Error::Config(
            "constant-noise defaults need the noise level eps".to_string(),
        )),
    }
}
