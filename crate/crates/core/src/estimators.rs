//! Loss estimators plugged into the exponential-weights update.
//!
//! Each estimator turns an observed feedback bit into a loss estimate:
//!
//! * `UnbiasedConstant`: `(c - p) / (1 - 2p)` for a fixed flip probability
//!   `p < 1/2`; exactly unbiased for the true loss.
//! * `Raw`: the feedback bit itself; biased, with expectation `|l - p|`.
//! * `ThresholdFull`: the unbiased form evaluated with the round's realized
//!   noise, zeroed on rounds too noisy to invert (`eps < theta`).
//! * `BanditImportance`: `c / q_i` for the played action, zero elsewhere.
//! * `Exp3Threshold`: the bandit importance weighting combined with the
//!   unbiased inversion and the noise threshold.

use crate::error::{Error, Result};

/// Which estimate function the learner uses, with its fixed parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimatorKind {
    UnbiasedConstant { p: f64 },
    Raw,
    ThresholdFull { theta: f64 },
    BanditImportance,
    Exp3Threshold { theta: f64 },
}

/// `(c - p) / (1 - 2p)`; values lie in `{-(1-eps)/(2 eps), (1+eps)/(2 eps)}`.
pub fn est_unbiased_constant(c: u8, p: f64) -> f64 {
    debug_assert!((0.0..0.5).contains(&p));
    (f64::from(c) - p) / (1.0 - 2.0 * p)
}

/// The feedback bit used directly as the estimate.
pub fn est_raw(c: u8) -> f64 {
    f64::from(c)
}

/// Unbiased inversion with the realized noise, gated off below the
/// threshold. The comparison is strict, so `eps == theta` is kept and a
/// constant noise level equal to the threshold degenerates to the unbiased
/// estimator.
pub fn est_threshold_full(c: u8, eps: f64, theta: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&eps));
    debug_assert!(theta > 0.0 && theta < 1.0);
    if eps < theta {
        return 0.0;
    }
    let p = (1.0 - eps) / 2.0;
    (f64::from(c) - p) / (1.0 - 2.0 * p)
}

/// Importance-weighted feedback: `c / q_i` when played, zero otherwise.
pub fn est_bandit_importance(c: u8, q_i: f64, played: bool) -> f64 {
    if !played {
        return 0.0;
    }
    debug_assert!(q_i > 0.0 && q_i <= 1.0);
    f64::from(c) / q_i
}

/// Importance-weighted unbiased inversion, gated off below the threshold.
pub fn est_exp3_threshold(c: u8, eps: f64, theta: f64, q_i: f64, played: bool) -> f64 {
    if !played || eps < theta {
        return 0.0;
    }
    debug_assert!(q_i > 0.0 && q_i <= 1.0);
    let p = (1.0 - eps) / 2.0;
    (f64::from(c) - p) / ((1.0 - 2.0 * p) * q_i)
}

impl EstimatorKind {
    /// Parameter ranges: `p` strictly below 1/2 (a flip probability of 1/2
    /// carries no information), thresholds strictly inside (0, 1).
    pub fn validate(&self) -> Result<()> {
        match *self {
            EstimatorKind::UnbiasedConstant { p } => {
                if !(0.0..0.5).contains(&p) {
                    return Err(Error::Domain {
                        op: "est_unbiased_constant",
                        detail: format!(
                            "flip probability must lie in [0, 1/2), got p = {p} (p = 1/2 divides by zero)"
                        ),
                    });
                }
            }
            EstimatorKind::ThresholdFull { theta } | EstimatorKind::Exp3Threshold { theta } => {
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(Error::Config(format!(
                        "threshold theta must lie in (0, 1), got {theta}"
                    )));
                }
            }
            EstimatorKind::Raw | EstimatorKind::BanditImportance => {}
        }
        Ok(())
    }

    /// True if the estimate needs the round's realized noise levels.
    pub fn needs_noise(&self) -> bool {
        matches!(
            self,
            EstimatorKind::ThresholdFull { .. } | EstimatorKind::Exp3Threshold { .. }
        )
    }

    /// True for estimators that consume bandit feedback.
    pub fn is_bandit(&self) -> bool {
        matches!(
            self,
            EstimatorKind::BanditImportance | EstimatorKind::Exp3Threshold { .. }
        )
    }

    /// Estimate the loss of action `i` from the round's observables.
    /// `c` is the feedback bit if observed, `eps` the realized noise level
    /// if the setting reveals it.
    pub fn estimate(&self, c: Option<u8>, eps: Option<f64>, q_i: f64, played: bool) -> Result<f64> {
        let need_c = || {
            c.ok_or(Error::Config(
                "estimator expected a feedback bit that was not delivered".to_string(),
            ))
        };
        let need_eps = || {
            eps.ok_or(Error::Config(
                "estimator needs the realized noise level but the setting hides it".to_string(),
            ))
        };
        Ok(match *self {
            EstimatorKind::UnbiasedConstant { p } => est_unbiased_constant(need_c()?, p),
            EstimatorKind::Raw => est_raw(need_c()?),
            EstimatorKind::ThresholdFull { theta } => {
                est_threshold_full(need_c()?, need_eps()?, theta)
            }
            EstimatorKind::BanditImportance => {
                if played {
                    est_bandit_importance(need_c()?, q_i, true)
                } else {
                    0.0
                }
            }
            EstimatorKind::Exp3Threshold { theta } => {
                if played {
                    est_exp3_threshold(need_c()?, need_eps()?, theta, q_i, true)
                } else {
                    0.0
                }
            }
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::UnbiasedConstant { .. } => "unbiased",
            EstimatorKind::Raw => "raw",
            EstimatorKind::ThresholdFull { .. } => "threshold",
            EstimatorKind::BanditImportance => "bandit-importance",
            EstimatorKind::Exp3Threshold { .. } => "exp3-threshold",
        }
    }
}
