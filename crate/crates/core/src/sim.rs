//! Domain types, the round protocol, and pseudo-regret accounting.
//!
//! One round runs in a fixed order: (1) the noise vector is realized,
//! (2) the adversary fixes the loss vector (noise-adaptive adversaries may
//! read the realized noise), (3) the learner observes the noise levels if
//! the setting reveals them, (4) the learner emits its action distribution
//! and samples an action, (5) feedback is corrupted and delivered according
//! to the feedback mode, (6) the learner updates.

use rand::Rng;

use crate::adversaries::Adversary;
use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::noise::{corrupt, sample_noise_round, NoiseModel};
use crate::rng::Streams;

/// Index of an action in `[0, K)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionIndex(pub usize);

/// Whether the learner sees all feedback bits or only the played one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeedbackMode {
    Full,
    Bandit,
}

/// Whether the noise level is fixed or redrawn every round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseRegime {
    Constant,
    Variable,
}

/// One of the four feedback/noise settings, plus whether the learner
/// observes the realized noise levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Setting {
    pub feedback: FeedbackMode,
    pub regime: NoiseRegime,
    pub known_noise: bool,
}

impl Setting {
    pub fn new(feedback: FeedbackMode, regime: NoiseRegime, known_noise: bool) -> Self {
        Setting {
            feedback,
            regime,
            known_noise,
        }
    }

    pub fn label(&self) -> String {
        let fb = match self.feedback {
            FeedbackMode::Full => "full",
            FeedbackMode::Bandit => "bandit",
        };
        let rg = match self.regime {
            NoiseRegime::Constant => "const",
            NoiseRegime::Variable => "var",
        };
        let kn = if self.known_noise { "known" } else { "unknown" };
        format!("{fb}-{rg}-{kn}")
    }
}

// ---------------------------------------------------------------------------
// Loss matrix
// ---------------------------------------------------------------------------

/// A `T x K` table of binary losses, row-major by round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LossMatrix {
    horizon: usize,
    actions: usize,
    entries: Vec<u8>,
}

impl LossMatrix {
    pub fn new(horizon: usize, actions: usize, entries: Vec<u8>) -> Result<Self> {
        if horizon == 0 || actions == 0 {
            return Err(Error::Config(format!(
                "loss matrix needs positive dimensions, got T={horizon}, K={actions}"
            )));
        }
        if entries.len() != horizon * actions {
            return Err(Error::DimensionMismatch {
                expected: horizon * actions,
                got: entries.len(),
            });
        }
        if let Some(bad) = entries.iter().find(|&&e| e > 1) {
            return Err(Error::Config(format!(
                "loss entries must be 0 or 1, got {bad}"
            )));
        }
        Ok(LossMatrix {
            horizon,
            actions,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let horizon = rows.len();
        let actions = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != actions) {
            return Err(Error::Config("loss rows have unequal lengths".to_string()));
        }
        LossMatrix::new(horizon, actions, rows.concat())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn loss(&self, t: usize, i: usize) -> u8 {
        self.entries[t * self.actions + i]
    }

    pub fn row(&self, t: usize) -> &[u8] {
        &self.entries[t * self.actions..(t + 1) * self.actions]
    }
}

// ---------------------------------------------------------------------------
// Per-round noise and feedback
// ---------------------------------------------------------------------------

/// The realized noise levels of one round. Flip probabilities are derived,
/// `p_i = (1 - eps_i) / 2`, never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseParamsRound {
    eps: Vec<f64>,
}

impl NoiseParamsRound {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if let Some(bad) = eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::Domain {
                op: "NoiseParamsRound::new",
                detail: format!("noise level {bad} outside [0, 1]"),
            });
        }
        Ok(NoiseParamsRound { eps })
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// Flip probability of action `i`, in [0, 1/2].
    pub fn p(&self, i: usize) -> f64 {
        (1.0 - self.eps[i]) / 2.0
    }
}

/// Feedback delivered to the learner for one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeedbackVector {
    values: Vec<Option<u8>>,
    mode: FeedbackMode,
}

impl FeedbackVector {
    pub fn full(values: Vec<u8>) -> Self {
        FeedbackVector {
            values: values.into_iter().map(Some).collect(),
            mode: FeedbackMode::Full,
        }
    }

    pub fn bandit(actions: usize, played: ActionIndex, value: u8) -> Self {
        let mut values = vec![None; actions];
        values[played.0] = Some(value);
        FeedbackVector {
            values,
            mode: FeedbackMode::Bandit,
        }
    }

    pub fn mode(&self) -> FeedbackMode {
        self.mode
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn present_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

/// Everything observable about one executed round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub noise: NoiseParamsRound,
    pub q: Vec<f64>,
    pub played: ActionIndex,
    pub feedback: FeedbackVector,
    pub estimates: Vec<f64>,
    pub true_loss: Vec<u8>,
}

/// Cumulative pseudo-regret per prefix of one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretTrace {
    /// `per_round[t]` is the pseudo-regret of the prefix ending at round `t`.
    pub per_round: Vec<f64>,
    /// Action realizing the final minimum cumulative loss (ties broken by
    /// lowest index).
    pub best_action: ActionIndex,
}

// ---------------------------------------------------------------------------
// Pseudo-regret
// ---------------------------------------------------------------------------

/// Argmin over cumulative losses, ties broken by lowest index.
pub(crate) fn argmin_f64(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// `sum_t q_t . l_t - min_k sum_t l_{k,t}` for a full loss table and the
/// learner's per-round action distributions.
pub fn pseudo_regret(losses: &LossMatrix, q_seq: &[Vec<f64>]) -> Result<f64> {
    if q_seq.len() != losses.horizon() {
        return Err(Error::DimensionMismatch {
            expected: losses.horizon(),
            got: q_seq.len(),
        });
    }
    let k = losses.actions();
    let mut on_loss = 0.0;
    let mut cum = vec![0.0f64; k];
    for (t, q) in q_seq.iter().enumerate() {
        if q.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: q.len(),
            });
        }
        let row = losses.row(t);
        for i in 0..k {
            let l = f64::from(row[i]);
            on_loss += q[i] * l;
            cum[i] += l;
        }
    }
    Ok(on_loss - cum[argmin_f64(&cum)])
}

// ---------------------------------------------------------------------------
// Round protocol
// ---------------------------------------------------------------------------

/// Sample an index from a probability vector with a single uniform draw.
pub(crate) fn sample_index(q: &[f64], rng: &mut rand_chacha::ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &qi) in q.iter().enumerate() {
        acc += qi;
        if u < acc {
            return i;
        }
    }
    q.len() - 1
}

/// Execute one round of the protocol, mutating the learner and adversary.
pub fn run_round(
    t: usize,
    learner: &mut Learner,
    adversary: &mut Adversary,
    noise_model: &NoiseModel,
    setting: Setting,
    streams: &mut Streams,
) -> Result<RoundRecord> {
    let k = learner.actions();
    if adversary.actions() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: adversary.actions(),
        });
    }

    // (1) realize noise
    let noise = sample_noise_round(noise_model, k, &mut streams.noise);

    // (2) adversary fixes losses; noise-adaptive variants read the realization
    let true_loss = adversary.assign_losses(t, Some(&noise), &mut streams.adversary)?;

    // (3)-(4) learner sees the noise only in known-noise settings, then acts
    let observed = if setting.known_noise {
        Some(&noise)
    } else {
        None
    };
    let q = learner.distribution(observed);
    debug_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    debug_assert!(q.iter().all(|&x| x >= 0.0));
    let played = ActionIndex(sample_index(&q, &mut streams.learner));
    debug_assert!(q[played.0] > 0.0);

    // (5) corrupt and deliver; the channel always draws K flips so the noise
    // stream advances identically in both feedback modes
    let mut corrupted = Vec::with_capacity(k);
    for (&l, &e) in true_loss.iter().zip(noise.eps()) {
        corrupted.push(corrupt(l, e, &mut streams.noise));
    }
    let feedback = match setting.feedback {
        FeedbackMode::Full => FeedbackVector::full(corrupted),
        FeedbackMode::Bandit => FeedbackVector::bandit(k, played, corrupted[played.0]),
    };

    // (6) learner update
    let estimates = learner.update(&feedback, &q, played, observed)?;

    Ok(RoundRecord {
        t,
        noise,
        q,
        played,
        feedback,
        estimates,
        true_loss,
    })
}
