//! Loss-assignment strategies: fixed sequences and the stochastic
//! lower-bound constructions.
//!
//! Each stochastic variant plants a uniformly drawn best action at
//! construction time. The noise-adaptive variants read the realized noise
//! of the round before fixing losses; they draw losses from the adversary
//! stream, which is independent of the noise stream, so conditioning on the
//! realized noise is legitimate.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sim::{ActionIndex, LossMatrix, NoiseParamsRound};

/// Gap used by the constant-noise full-information construction:
/// `min{ (1 / 6 eps) sqrt(ln K / T), 1/2 }`.
pub fn gap_delta(eps: f64, horizon: usize, actions: usize) -> Result<f64> {
    let eps_ok = eps.is_finite() && eps > 0.0;
    if !eps_ok {
        return Err(Error::Domain {
            op: "gap_delta",
            detail: format!("eps must be positive, got {eps}"),
        });
    }
    let formula = (1.0 / (6.0 * eps)) * ((actions as f64).ln() / horizon as f64).sqrt();
    Ok(formula.min(0.5))
}

/// Gap used by the constant-noise bandit construction:
/// `min{ (sqrt(gamma) / eps) sqrt(K / T), 1 }`.
pub fn bandit_gap_beta(gamma: f64, eps: f64, horizon: usize, actions: usize) -> Result<f64> {
    let eps_ok = eps.is_finite() && eps > 0.0;
    if !eps_ok {
        return Err(Error::Domain {
            op: "bandit_gap_beta",
            detail: format!("eps must be positive, got {eps}"),
        });
    }
    check_gamma(gamma)?;
    let formula = (gamma.sqrt() / eps) * (actions as f64 / horizon as f64).sqrt();
    Ok(formula.min(1.0))
}

fn check_gamma(gamma: f64) -> Result<()> {
    let ok = gamma.is_finite() && gamma > 0.0;
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "gamma must be positive, got {gamma}"
        )))
    }
}

/// Default `(theta, beta)` of the variable-noise bandit construction:
/// `theta = (K/T)^(1/3)` and `beta = sqrt(gamma) (K/T)^(1/6)` clamped to
/// 1/2 so the planted Bernoulli mean `1/2 - beta` stays valid.
pub fn bandit_var_noise_defaults(gamma: f64, horizon: usize, actions: usize) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    let ratio = actions as f64 / horizon as f64;
    let theta = ratio.powf(1.0 / 3.0);
    let beta = (gamma.sqrt() * ratio.powf(1.0 / 6.0)).min(0.5);
    Ok((theta, beta))
}

/// Default threshold of the variable-noise full-information construction:
/// `(ln K / T)^(1/3)`.
pub fn var_noise_full_info_theta(horizon: usize, actions: usize) -> f64 {
    ((actions as f64).ln() / horizon as f64).powf(1.0 / 3.0)
}

/// Strategy selector with resolved numeric parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum AdversaryKind {
    /// Replays a fixed binary loss table.
    FixedSequence { losses: LossMatrix },
    /// Planted action draws `B(1/2 - delta)`, every other `B(1/2)`.
    StochasticGap { delta: f64 },
    /// All-zero losses on rounds whose shared noise level is at least
    /// `theta`; otherwise planted `B(1/2 - gap)`, others `B(1/2)`.
    VariableNoiseFullInfo { theta: f64, gap: f64 },
    /// Two actions made indistinguishable through the channel: the planted
    /// action draws `B(1/4)`; the other takes loss 0 exactly when its flip
    /// probability is below 1/4, else 1. Both feedback streams are
    /// `B(3/8)` while the true means differ by T/4.
    UnknownNoiseIndist,
    /// Planted action draws `B((1 - beta)/2)`, every other `B(1/2)`.
    BanditGap { beta: f64 },
    /// All-zero losses on rounds whose shared noise level is at least
    /// `theta`; otherwise planted `B(1/2 - beta)`, others `B(1/2)`.
    BanditVariableNoise { theta: f64, beta: f64 },
}

impl AdversaryKind {
    /// True for variants that must observe the realized noise before
    /// assigning losses.
    pub fn needs_noise(&self) -> bool {
        matches!(
            self,
            AdversaryKind::VariableNoiseFullInfo { .. }
                | AdversaryKind::UnknownNoiseIndist
                | AdversaryKind::BanditVariableNoise { .. }
        )
    }

    /// True for variants that condition on a round-level noise value shared
    /// by all actions.
    pub fn needs_shared_noise(&self) -> bool {
        matches!(
            self,
            AdversaryKind::VariableNoiseFullInfo { .. } | AdversaryKind::BanditVariableNoise { .. }
        )
    }

    pub fn validate(&self, actions: usize) -> Result<()> {
        match self {
            AdversaryKind::FixedSequence { losses } => {
                if losses.actions() != actions {
                    return Err(Error::DimensionMismatch {
                        expected: actions,
                        got: losses.actions(),
                    });
                }
            }
            AdversaryKind::StochasticGap { delta } => {
                if !(*delta > 0.0 && *delta <= 0.5) {
                    return Err(Error::Config(format!(
                        "stochastic-gap delta must lie in (0, 1/2], got {delta}"
                    )));
                }
            }
            AdversaryKind::VariableNoiseFullInfo { theta, gap } => {
                if !(*theta > 0.0 && *theta < 1.0) {
                    return Err(Error::Config(format!(
                        "adversary theta must lie in (0, 1), got {theta}"
                    )));
                }
                if !(*gap > 0.0 && *gap <= 0.5) {
                    return Err(Error::Config(format!(
                        "adversary gap must lie in (0, 1/2], got {gap}"
                    )));
                }
            }
            AdversaryKind::UnknownNoiseIndist => {
                if actions != 2 {
                    return Err(Error::Config(format!(
                        "the indistinguishable construction is defined for K = 2, got K = {actions}"
                    )));
                }
            }
            AdversaryKind::BanditGap { beta } => {
                if !(*beta > 0.0 && *beta <= 1.0) {
                    return Err(Error::Config(format!(
                        "bandit-gap beta must lie in (0, 1], got {beta}"
                    )));
                }
            }
            AdversaryKind::BanditVariableNoise { theta, beta } => {
                if !(*theta > 0.0 && *theta < 1.0) {
                    return Err(Error::Config(format!(
                        "adversary theta must lie in (0, 1), got {theta}"
                    )));
                }
                if !(*beta > 0.0 && *beta <= 0.5) {
                    return Err(Error::Config(format!(
                        "variable-noise beta must lie in (0, 1/2], got {beta}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match self {
            AdversaryKind::FixedSequence { .. } => "fixed",
            AdversaryKind::StochasticGap { .. } => "stochastic-gap",
            AdversaryKind::VariableNoiseFullInfo { .. } => "var-noise-full-info",
            AdversaryKind::UnknownNoiseIndist => "unknown-noise-indist",
            AdversaryKind::BanditGap { .. } => "bandit-gap",
            AdversaryKind::BanditVariableNoise { .. } => "bandit-var-noise",
        }
    }
}

/// One adversary instance bound to an episode.
#[derive(Clone, Debug)]
pub struct Adversary {
    kind: AdversaryKind,
    actions: usize,
    planted: Option<ActionIndex>,
}

impl Adversary {
    /// Validates parameters and, for the planted variants, draws the best
    /// action uniformly from the adversary stream.
    pub fn new(kind: AdversaryKind, actions: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if actions < 2 {
            return Err(Error::Config(format!(
                "need at least 2 actions, got {actions}"
            )));
        }
        kind.validate(actions)?;
        let planted = match kind {
            AdversaryKind::FixedSequence { .. } => None,
            _ => Some(ActionIndex(rng.random_range(0..actions))),
        };
        Ok(Adversary {
            kind,
            actions,
            planted,
        })
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn kind(&self) -> &AdversaryKind {
        &self.kind
    }

    pub fn needs_noise(&self) -> bool {
        self.kind.needs_noise()
    }

    /// The planted best action, fixed at construction.
    pub fn planted_best(&self) -> Result<ActionIndex> {
        self.planted.ok_or(Error::NotApplicable(
            "fixed-sequence adversaries plant no best action",
        ))
    }

    /// The loss vector of round `t`.
    pub fn assign_losses(
        &mut self,
        t: usize,
        realized_noise: Option<&NoiseParamsRound>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<u8>> {
        if self.kind.needs_noise() && realized_noise.is_none() {
            return Err(Error::Config(format!(
                "adversary `{}` must observe the realized noise before assigning losses",
                self.kind.label()
            )));
        }
        let k = self.actions;
        let bern = |rng: &mut ChaCha8Rng, p: f64| u8::from(rng.random::<f64>() < p);
        Ok(match &self.kind {
            AdversaryKind::FixedSequence { losses } => {
                if t >= losses.horizon() {
                    return Err(Error::Config(format!(
                        "fixed sequence has {} rounds but round {t} was requested",
                        losses.horizon()
                    )));
                }
                losses.row(t).to_vec()
            }
            AdversaryKind::StochasticGap { delta } => {
                let star = self.planted.expect("planted at construction").0;
                (0..k)
                    .map(|i| bern(rng, if i == star { 0.5 - delta } else { 0.5 }))
                    .collect()
            }
            AdversaryKind::VariableNoiseFullInfo { theta, gap } => {
                let eps_t = realized_noise.expect("checked above").eps()[0];
                if eps_t >= *theta {
                    vec![0; k]
                } else {
                    let star = self.planted.expect("planted at construction").0;
                    (0..k)
                        .map(|i| bern(rng, if i == star { 0.5 - gap } else { 0.5 }))
                        .collect()
                }
            }
            AdversaryKind::UnknownNoiseIndist => {
                let noise = realized_noise.expect("checked above");
                let star = self.planted.expect("planted at construction").0;
                let worse = 1 - star;
                let mut losses = vec![0u8; 2];
                losses[star] = bern(rng, 0.25);
                losses[worse] = u8::from(noise.p(worse) >= 0.25);
                losses
            }
            AdversaryKind::BanditGap { beta } => {
                let star = self.planted.expect("planted at construction").0;
                (0..k)
                    .map(|i| bern(rng, if i == star { (1.0 - beta) / 2.0 } else { 0.5 }))
                    .collect()
            }
            AdversaryKind::BanditVariableNoise { theta, beta } => {
                let eps_t = realized_noise.expect("checked above").eps()[0];
                if eps_t >= *theta {
                    vec![0; k]
                } else {
                    let star = self.planted.expect("planted at construction").0;
                    (0..k)
                        .map(|i| bern(rng, if i == star { 0.5 - beta } else { 0.5 }))
                        .collect()
                }
            }
        })
    }
}
