//! Independent brute-force and quadrature verifiers.
//!
//! Everything here certifies the simulation from the outside: estimator
//! moments by exhaustive outcome enumeration, the exponential-weights
//! inequality by replaying its recursion from raw estimate sequences,
//! `g(theta)` by adaptive quadrature, tiny instances by summing over every
//! feedback history, and the binomial-minimum concentration claim by Monte
//! Carlo. The replay below deliberately re-derives the weights recursion
//! instead of calling into `learners`, so it stays a second route.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::learners::Learner;
use crate::noise::MarginalDist;
use crate::sim::{ActionIndex, FeedbackVector, LossMatrix, NoiseParamsRound};

/// First two moments of a loss estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
}

/// Exact moments over the feedback bit `c in {loss, 1-loss}` with weights
/// `(1+eps)/2` and `(1-eps)/2`.
fn enumerate_feedback<F: Fn(u8) -> f64>(estimate: F, loss: u8, eps: f64) -> Moments {
    let keep = (1.0 + eps) / 2.0;
    let flip = (1.0 - eps) / 2.0;
    let outcomes = [(loss, keep), (1 - loss, flip)];
    let mut mean = 0.0;
    let mut second = 0.0;
    for (c, w) in outcomes {
        let e = estimate(c);
        mean += w * e;
        second += w * e * e;
    }
    Moments {
        mean,
        second_moment: second,
    }
}

/// Exact moments additionally enumerating the play event with probability
/// `q_i`; unplayed actions contribute the estimate at `played = false`.
fn enumerate_feedback_and_play<F: Fn(u8, bool) -> f64>(
    estimate: F,
    loss: u8,
    eps: f64,
    q_i: f64,
) -> Moments {
    let played = enumerate_feedback(|c| estimate(c, true), loss, eps);
    let idle = estimate(0, false);
    Moments {
        mean: q_i * played.mean + (1.0 - q_i) * idle,
        second_moment: q_i * played.second_moment + (1.0 - q_i) * idle * idle,
    }
}

/// Exact mean and second moment of an estimator at fixed true loss and
/// noise level, by exhaustive enumeration of the feedback (and, for bandit
/// estimators, play) outcomes. Bandit estimators require `q_i`.
pub fn enumerate_estimator_moments(
    kind: &EstimatorKind,
    loss: u8,
    eps: f64,
    q_i: Option<f64>,
) -> Result<Moments> {
    if loss > 1 {
        return Err(Error::Domain {
            op: "enumerate_estimator_moments",
            detail: format!("loss must be 0 or 1, got {loss}"),
        });
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain {
            op: "enumerate_estimator_moments",
            detail: format!("eps must lie in [0, 1], got {eps}"),
        });
    }
    kind.validate()?;
    match *kind {
        EstimatorKind::UnbiasedConstant { p } => Ok(enumerate_feedback(
            |c| crate::estimators::est_unbiased_constant(c, p),
            loss,
            eps,
        )),
        EstimatorKind::Raw => Ok(enumerate_feedback(crate::estimators::est_raw, loss, eps)),
        EstimatorKind::ThresholdFull { theta } => Ok(enumerate_feedback(
            |c| crate::estimators::est_threshold_full(c, eps, theta),
            loss,
            eps,
        )),
        EstimatorKind::BanditImportance => {
            let q = require_q(q_i)?;
            Ok(enumerate_feedback_and_play(
                |c, played| crate::estimators::est_bandit_importance(c, q, played),
                loss,
                eps,
                q,
            ))
        }
        EstimatorKind::Exp3Threshold { theta } => {
            let q = require_q(q_i)?;
            Ok(enumerate_feedback_and_play(
                |c, played| crate::estimators::est_exp3_threshold(c, eps, theta, q, played),
                loss,
                eps,
                q,
            ))
        }
    }
}

fn require_q(q_i: Option<f64>) -> Result<f64> {
    match q_i {
        Some(q) if q > 0.0 && q <= 1.0 => Ok(q),
        Some(q) => Err(Error::Domain {
            op: "enumerate_estimator_moments",
            detail: format!("q_i must lie in (0, 1], got {q}"),
        }),
        None => Err(Error::Config(
            "bandit estimators need the play probability q_i".to_string(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Weights-inequality replay
// ---------------------------------------------------------------------------

/// Replay the exponential-weights recursion on a raw estimate table and
/// return `RHS - LHS` of the deterministic inequality
/// `sum_t q_t . est_t - min_k sum_t est_{k,t} <= ln K / eta + eta sum_t sum_i q_i est_i^2`.
///
/// Inputs violating the hypothesis `-eta * est <= 1` are rejected with a
/// hypothesis error, which is distinct from a negative margin (that would
/// be a bug in the recursion itself).
pub fn check_ews_inequality(estimates: &[Vec<f64>], eta: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Config(
            "need at least one round of estimates".to_string(),
        ));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Config(format!(
            "eta must be a positive finite real, got {eta}"
        )));
    }
    let k = estimates[0].len();
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 actions, got {k}")));
    }
    for row in estimates {
        if row.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: row.len(),
            });
        }
        for &e in row {
            if -eta * e > 1.0 {
                return Err(Error::HypothesisFailed(format!(
                    "-eta * estimate = {} exceeds 1",
                    -eta * e
                )));
            }
        }
    }

    // Self-contained replay: q_t from the cumulative estimate sums.
    let mut cum = vec![0.0f64; k];
    let mut on = 0.0;
    let mut on_sq = 0.0;
    for row in estimates {
        let m = cum.iter().copied().fold(f64::INFINITY, f64::min);
        let mut q: Vec<f64> = cum.iter().map(|&s| (-eta * (s - m)).exp()).collect();
        let z: f64 = q.iter().sum();
        for x in &mut q {
            *x /= z;
        }
        for i in 0..k {
            on += q[i] * row[i];
            on_sq += q[i] * row[i] * row[i];
            cum[i] += row[i];
        }
    }
    let best = cum.iter().copied().fold(f64::INFINITY, f64::min);
    let lhs = on - best;
    let rhs = (k as f64).ln() / eta + eta * on_sq;
    Ok(rhs - lhs)
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

// The recursion carries its cached endpoint evaluations.
#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
        + adaptive_simpson(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    adaptive_simpson(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// `g(theta) = E[eps^-2 1{eps >= theta}] = int_theta^1 eps^-2 dF(eps)` by
/// adaptive quadrature, absolute tolerance 1e-8. The truncated-exponential
/// density is integrated analytically as an integrand, not sampled.
pub fn quadrature_g(dist: &MarginalDist, theta: f64) -> Result<f64> {
    dist.validate()?;
    let theta_ok = theta.is_finite() && theta > 0.0;
    if !theta_ok {
        return Err(Error::Domain {
            op: "quadrature_g",
            detail: format!("the integral diverges as theta -> 0; got theta = {theta}"),
        });
    }
    if theta > 1.0 {
        return Err(Error::Domain {
            op: "quadrature_g",
            detail: format!("theta must lie in (0, 1], got {theta}"),
        });
    }
    let d = dist.clone();
    let f = move |x: f64| d.density(x) / (x * x);
    Ok(integrate(&f, theta, 1.0, 1e-9))
}

// ---------------------------------------------------------------------------
// Exhaustive tiny-instance expectation
// ---------------------------------------------------------------------------

/// Exact expected pseudo-regret of a full-information, constant-noise,
/// two-action episode with deterministic losses, by summing over all
/// feedback histories weighted by their channel probabilities. The
/// learner's distribution is a deterministic function of the feedback
/// history, so no action sampling enters the expectation.
pub fn exact_expected_pseudo_regret(
    losses: &LossMatrix,
    eps: f64,
    learner: &Learner,
) -> Result<f64> {
    let k = losses.actions();
    let t_max = losses.horizon();
    if k != 2 {
        return Err(Error::InstanceTooLarge(format!(
            "exhaustive enumeration supports K = 2, got K = {k}"
        )));
    }
    if t_max > 6 {
        return Err(Error::InstanceTooLarge(format!(
            "exhaustive enumeration supports T <= 6, got T = {t_max}"
        )));
    }
    if learner.actions() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: learner.actions(),
        });
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain {
            op: "exact_expected_pseudo_regret",
            detail: format!("eps must lie in [0, 1], got {eps}"),
        });
    }
    if let Learner::Ews { estimator, .. } = learner {
        if estimator.is_bandit() {
            return Err(Error::Config(
                "exhaustive enumeration covers full-information estimators only".to_string(),
            ));
        }
    }

    let p = (1.0 - eps) / 2.0;
    let noise = NoiseParamsRound::new(vec![eps; k])?;
    let mut expected_on_loss = 0.0;
    // Depth-first over feedback histories; `prob` is the probability of the
    // history that produced `state`.
    let mut stack: Vec<(usize, f64, Learner)> = vec![(0, 1.0, learner.clone())];
    while let Some((t, prob, state)) = stack.pop() {
        if t == t_max {
            continue;
        }
        let q = state.distribution(Some(&noise));
        let row = losses.row(t);
        let on: f64 = (0..k).map(|i| q[i] * f64::from(row[i])).sum();
        expected_on_loss += prob * on;
        for c0 in 0..=1u8 {
            for c1 in 0..=1u8 {
                let c = [c0, c1];
                let mut pc = 1.0;
                for i in 0..k {
                    pc *= if c[i] == row[i] { 1.0 - p } else { p };
                }
                if pc == 0.0 {
                    continue;
                }
                let mut next = state.clone();
                next.update(
                    &FeedbackVector::full(c.to_vec()),
                    &q,
                    ActionIndex(0),
                    Some(&noise),
                )?;
                stack.push((t + 1, prob * pc, next));
            }
        }
    }

    let mut cum = [0u32; 2];
    for t in 0..t_max {
        for (c, &l) in cum.iter_mut().zip(losses.row(t)) {
            *c += u32::from(l);
        }
    }
    Ok(expected_on_loss - f64::from(cum[0].min(cum[1])))
}

// ---------------------------------------------------------------------------
// Binomial-minimum concentration
// ---------------------------------------------------------------------------

/// Empirical frequency over `reps` trials of the event
/// `min of (K-1) iid Binomial(n, p) <= n p - sqrt(p n ln K / 9)`.
pub fn binomial_min_check(
    n: u64,
    p: f64,
    actions: usize,
    reps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::Domain {
            op: "binomial_min_check",
            detail: format!("p must lie in (0, 1), got {p}"),
        });
    }
    if actions < 2 || n == 0 || reps == 0 {
        return Err(Error::Config(format!(
            "need K >= 2, n >= 1, reps >= 1; got K={actions}, n={n}, reps={reps}"
        )));
    }
    let threshold = n as f64 * p - (p / 9.0 * n as f64 * (actions as f64).ln()).sqrt();
    let binom = Binomial::new(n, p).map_err(|e| Error::Domain {
        op: "binomial_min_check",
        detail: e.to_string(),
    })?;
    let mut hits = 0usize;
    for _ in 0..reps {
        for _ in 0..actions - 1 {
            if (binom.sample(rng) as f64) <= threshold {
                hits += 1;
                break;
            }
        }
    }
    Ok(hits as f64 / reps as f64)
}
