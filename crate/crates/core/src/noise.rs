//! Noise models and the binary corruption channel.
//!
//! A feedback bit is the true loss xored with a Bernoulli flip: for noise
//! level `eps` in [0, 1] the flip probability is `p = (1 - eps) / 2`, so
//! `eps = 1` is a clean channel and `eps = 0` is pure noise. Noise levels
//! are either a constant, drawn i.i.d. per action from a marginal
//! distribution, or drawn once per round and shared by every action.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sim::NoiseParamsRound;

/// Marginal distribution of a per-action noise level on [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub enum MarginalDist {
    /// Uniform on [0, 1].
    Uniform01,
    /// Truncated exponential with density `lambda e^{-lambda x} / (1 - e^{-lambda})` on (0, 1).
    TruncExp { lambda: f64 },
    /// CDF `F(x) = x^alpha` on [0, 1].
    PowerCdf { alpha: f64 },
}

impl MarginalDist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MarginalDist::Uniform01 => Ok(()),
            MarginalDist::TruncExp { lambda } if lambda > 0.0 && lambda.is_finite() => Ok(()),
            MarginalDist::TruncExp { lambda } => Err(Error::Config(format!(
                "trunc-exp lambda must be a positive finite real, got {lambda}"
            ))),
            MarginalDist::PowerCdf { alpha } if alpha > 0.0 && alpha.is_finite() => Ok(()),
            MarginalDist::PowerCdf { alpha } => Err(Error::Config(format!(
                "power-cdf alpha must be a positive finite real, got {alpha}"
            ))),
        }
    }

    /// Cumulative distribution function, exact closed form.
    pub fn cdf(&self, x: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&x));
        match *self {
            MarginalDist::Uniform01 => x,
            MarginalDist::TruncExp { lambda } => {
                (1.0 - (-lambda * x).exp()) / (1.0 - (-lambda).exp())
            }
            MarginalDist::PowerCdf { alpha } => x.powf(alpha),
        }
    }

    /// Density on (0, 1).
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            MarginalDist::Uniform01 => 1.0,
            MarginalDist::TruncExp { lambda } => {
                lambda * (-lambda * x).exp() / (1.0 - (-lambda).exp())
            }
            MarginalDist::PowerCdf { alpha } => alpha * x.powf(alpha - 1.0),
        }
    }

    /// Inverse-CDF sampling; no rejection loop for any variant.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        match *self {
            MarginalDist::Uniform01 => u,
            // x = -ln(1 - u (1 - e^{-lambda})) / lambda
            MarginalDist::TruncExp { lambda } => -(1.0 - u * (1.0 - (-lambda).exp())).ln() / lambda,
            MarginalDist::PowerCdf { alpha } => u.powf(1.0 / alpha),
        }
    }

    /// Closed-form upper bound on `g(theta) = E[eps^-2 1{eps >= theta}]`,
    /// the second-moment weight of the thresholded estimator. The exact
    /// value is computed by `oracle::quadrature_g`.
    ///
    /// For the truncated exponential this is
    /// `lambda (1/theta - 1) / (1 - e^-lambda)`, from bounding the
    /// exponential factor of the density by 1. The simpler `lambda/theta`
    /// form drops the normalizer `1/(1 - e^-lambda) >= 1` and only holds
    /// for `theta` above roughly `e^-lambda`.
    pub fn g_upper_bound(&self, theta: f64) -> Result<f64> {
        let theta_ok = theta.is_finite() && theta > 0.0;
        if !theta_ok {
            return Err(Error::Domain {
                op: "g_upper_bound",
                detail: format!("g diverges as theta -> 0; got theta = {theta}"),
            });
        }
        Ok(match *self {
            MarginalDist::Uniform01 => 1.0 / theta,
            MarginalDist::TruncExp { lambda } => {
                lambda * (1.0 / theta - 1.0) / (1.0 - (-lambda).exp())
            }
            MarginalDist::PowerCdf { .. } => 1.0 / (theta * theta),
        })
    }

    /// Short stable label used in CSV output.
    pub fn label(&self) -> String {
        match *self {
            MarginalDist::Uniform01 => "uniform".to_string(),
            MarginalDist::TruncExp { lambda } => format!("trunc-exp({lambda})"),
            MarginalDist::PowerCdf { alpha } => format!("power({alpha})"),
        }
    }
}

/// How the per-round noise levels are generated.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseModel {
    /// One fixed level for every action and round.
    Constant { eps: f64 },
    /// Independent per-action draws from a marginal each round.
    IidMarginal { dist: MarginalDist },
    /// One uniform draw per round, copied to every action.
    SharedUniform,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Constant { eps } => {
                if (0.0..=1.0).contains(eps) {
                    Ok(())
                } else {
                    Err(Error::Config(format!("eps must lie in [0, 1], got {eps}")))
                }
            }
            NoiseModel::IidMarginal { dist } => dist.validate(),
            NoiseModel::SharedUniform => Ok(()),
        }
    }

    /// True when the level varies from round to round.
    pub fn is_variable(&self) -> bool {
        !matches!(self, NoiseModel::Constant { .. })
    }

    pub fn label(&self) -> String {
        match self {
            NoiseModel::Constant { eps } => format!("{eps}"),
            NoiseModel::IidMarginal { dist } => dist.label(),
            NoiseModel::SharedUniform => "shared-uniform".to_string(),
        }
    }
}

/// Realize the noise vector for one round.
pub fn sample_noise_round(
    model: &NoiseModel,
    actions: usize,
    rng: &mut ChaCha8Rng,
) -> NoiseParamsRound {
    debug_assert!(actions >= 1);
    let eps = match model {
        NoiseModel::Constant { eps } => vec![*eps; actions],
        NoiseModel::IidMarginal { dist } => (0..actions).map(|_| dist.sample(rng)).collect(),
        NoiseModel::SharedUniform => {
            let e: f64 = rng.random();
            vec![e; actions]
        }
    };
    NoiseParamsRound::new(eps).expect("sampled noise levels lie in [0, 1]")
}

/// Corrupt one loss bit: returns `loss ^ Bernoulli((1 - eps) / 2)`.
pub fn corrupt(loss: u8, eps: f64, rng: &mut ChaCha8Rng) -> u8 {
    debug_assert!(loss <= 1);
    debug_assert!((0.0..=1.0).contains(&eps));
    let p = (1.0 - eps) / 2.0;
    let flip = rng.random::<f64>() < p;
    loss ^ u8::from(flip)
}
