use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use statrs::function::gamma::gamma;

use super::RngStream;
use crate::error::{Error, Result};

/// Univariate laws used for coordinates and noise.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarLaw {
    /// `P(|Z| ≥ t) = exp(−t^α)` with an independent fair sign.
    SymmetricWeibull { alpha: f64 },
    /// `W − E W` with `P(W ≥ t) = exp(−t^α)`; skewed, mean zero.
    CenteredWeibull { alpha: f64 },
    Gaussian { sigma: f64 },
    /// Not mean zero; intended for norm checks only.
    Exponential { rate: f64 },
    /// Symmetrized Pareto: `±scale·U^{−1/shape}`; moments exist strictly below `shape`.
    Pareto { shape: f64, scale: f64 },
    StudentT { dof: f64 },
    Constant(f64),
    Scaled { law: Box<ScalarLaw>, factor: f64 },
}

/// Uniform on `(0, 1]`.
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// `±(−log u)^{1/α}`, the inverse-transform map behind [`ScalarLaw::SymmetricWeibull`].
pub fn symmetric_weibull_from_uniform(alpha: f64, u: f64, positive: bool) -> f64 {
    let mag = weibull_magnitude(alpha, -u.ln());
    if positive { mag } else { -mag }
}

fn weibull_magnitude(alpha: f64, e: f64) -> f64 {
    let inv = 1.0 / alpha;
    if inv == 1.0 {
        e
    } else if inv == 2.0 {
        e * e
    } else if inv == 0.5 {
        e.sqrt()
    } else {
        e.powf(inv)
    }
}

/// `E W` for `W = E^{1/α}`, `E ~ Exp(1)`.
fn weibull_mean(alpha: f64) -> f64 {
    if alpha == 1.0 {
        1.0
    } else {
        gamma(1.0 + 1.0 / alpha)
    }
}

impl ScalarLaw {
    pub fn scaled(self, factor: f64) -> Self {
        ScalarLaw::Scaled { law: Box::new(self), factor }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Argument(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            ScalarLaw::SymmetricWeibull { alpha } | ScalarLaw::CenteredWeibull { alpha } => positive("alpha", *alpha),
            ScalarLaw::Gaussian { sigma } => {
                if sigma.is_finite() && *sigma >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Argument(format!("sigma must be nonnegative, got {sigma}")))
                }
            }
            ScalarLaw::Exponential { rate } => positive("rate", *rate),
            ScalarLaw::Pareto { shape, scale } => positive("shape", *shape).and(positive("scale", *scale)),
            ScalarLaw::StudentT { dof } => positive("dof", *dof),
            ScalarLaw::Constant(c) => {
                if c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Argument("constant must be finite".into()))
                }
            }
            ScalarLaw::Scaled { law, factor } => {
                if !factor.is_finite() {
                    return Err(Error::Argument("scale factor must be finite".into()));
                }
                law.validate()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ScalarLaw::SymmetricWeibull { alpha } => {
                let mag = weibull_magnitude(*alpha, -open_uniform(rng).ln());
                if rng.random::<bool>() { mag } else { -mag }
            }
            ScalarLaw::CenteredWeibull { alpha } => {
                weibull_magnitude(*alpha, -open_uniform(rng).ln()) - weibull_mean(*alpha)
            }
            ScalarLaw::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            },
            ScalarLaw::Exponential { rate } => -open_uniform(rng).ln() / rate,
            ScalarLaw::Pareto { shape, scale } => {
                let mag = scale * open_uniform(rng).powf(-1.0 / shape);
                if rng.random::<bool>() { mag } else { -mag }
            }
            ScalarLaw::StudentT { dof } => rand_distr::StudentT::new(*dof).expect("validated dof").sample(rng),
            ScalarLaw::Constant(c) => *c,
            ScalarLaw::Scaled { law, factor } => factor * law.sample(rng),
        }
    }

    /// Quantile function; used by the Gaussian copula.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            ScalarLaw::SymmetricWeibull { alpha } => {
                if u < 0.5 {
                    -weibull_magnitude(*alpha, -(2.0 * u).ln())
                } else {
                    weibull_magnitude(*alpha, -(2.0 * (1.0 - u)).ln())
                }
            }
            ScalarLaw::CenteredWeibull { alpha } => {
                weibull_magnitude(*alpha, -(-u).ln_1p()) - weibull_mean(*alpha)
            }
            ScalarLaw::Gaussian { sigma } => sigma * Normal::standard().inverse_cdf(u),
            ScalarLaw::Exponential { rate } => -(-u).ln_1p() / rate,
            ScalarLaw::Pareto { shape, scale } => {
                if u < 0.5 {
                    -scale * (2.0 * u).powf(-1.0 / shape)
                } else {
                    scale * (2.0 * (1.0 - u)).powf(-1.0 / shape)
                }
            }
            ScalarLaw::StudentT { dof } => StudentsT::new(0.0, 1.0, *dof).expect("validated dof").inverse_cdf(u),
            ScalarLaw::Constant(c) => *c,
            ScalarLaw::Scaled { law, factor } => factor * law.quantile(u),
        }
    }

    /// `quantile(1 − s)`, accurate for small survival probabilities `s`.
    pub fn upper_quantile(&self, s: f64) -> f64 {
        match self {
            ScalarLaw::CenteredWeibull { alpha } => weibull_magnitude(*alpha, -s.ln()) - weibull_mean(*alpha),
            ScalarLaw::Exponential { rate } => -s.ln() / rate,
            ScalarLaw::Constant(c) => *c,
            ScalarLaw::Scaled { law, factor } => factor * law.upper_quantile(s),
            symmetric => -symmetric.quantile(s),
        }
    }

    /// `quantile(Φ(z))` without rounding `Φ(z)` to 1 in the upper tail.
    pub fn from_standard_normal(&self, z: f64) -> f64 {
        let phi = Normal::standard();
        if z <= 0.0 {
            self.quantile(phi.cdf(z).max(f64::MIN_POSITIVE))
        } else {
            self.upper_quantile(phi.cdf(-z).max(f64::MIN_POSITIVE))
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match self {
            ScalarLaw::Exponential { rate } => Some(1.0 / rate),
            ScalarLaw::Constant(c) => Some(*c),
            ScalarLaw::Pareto { shape, .. } if *shape <= 1.0 => None,
            ScalarLaw::StudentT { dof } if *dof <= 1.0 => None,
            ScalarLaw::Scaled { law, factor } => law.mean().map(|m| factor * m),
            _ => Some(0.0),
        }
    }

    /// `E Z²` when finite.
    pub fn second_moment(&self) -> Option<f64> {
        match self {
            ScalarLaw::SymmetricWeibull { alpha } => Some(gamma(1.0 + 2.0 / alpha)),
            ScalarLaw::CenteredWeibull { alpha } => {
                Some(gamma(1.0 + 2.0 / alpha) - gamma(1.0 + 1.0 / alpha).powi(2))
            }
            ScalarLaw::Gaussian { sigma } => Some(sigma * sigma),
            ScalarLaw::Exponential { rate } => Some(2.0 / (rate * rate)),
            ScalarLaw::Pareto { shape, scale } => (*shape > 2.0).then(|| scale * scale * shape / (shape - 2.0)),
            ScalarLaw::StudentT { dof } => (*dof > 2.0).then(|| dof / (dof - 2.0)),
            ScalarLaw::Constant(c) => Some(c * c),
            ScalarLaw::Scaled { law, factor } => law.second_moment().map(|m| factor * factor * m),
        }
    }

    pub fn variance(&self) -> Option<f64> {
        Some(self.second_moment()? - self.mean()?.powi(2))
    }

    /// `E Z⁴` when finite and known in closed form.
    pub fn fourth_moment(&self) -> Option<f64> {
        match self {
            ScalarLaw::SymmetricWeibull { alpha } => Some(gamma(1.0 + 4.0 / alpha)),
            ScalarLaw::Gaussian { sigma } => Some(3.0 * sigma.powi(4)),
            ScalarLaw::Constant(c) => Some(c.powi(4)),
            ScalarLaw::Pareto { shape, scale } => (*shape > 4.0).then(|| scale.powi(4) * shape / (shape - 4.0)),
            ScalarLaw::Scaled { law, factor } => law.fourth_moment().map(|m| factor.powi(4) * m),
            _ => None,
        }
    }

    /// Exact `ψ_α` norm when known in closed form.
    pub fn psi_norm(&self, alpha: f64) -> Option<f64> {
        match self {
            ScalarLaw::SymmetricWeibull { alpha: a } if *a == alpha => Some(2f64.powf(1.0 / alpha)),
            ScalarLaw::Exponential { rate } if alpha == 1.0 => Some(2.0 / rate),
            ScalarLaw::Gaussian { sigma } if alpha == 2.0 => Some(sigma * (8.0f64 / 3.0).sqrt()),
            ScalarLaw::Constant(c) => Some(c.abs() / std::f64::consts::LN_2.powf(1.0 / alpha)),
            ScalarLaw::Scaled { law, factor } => law.psi_norm(alpha).map(|v| factor.abs() * v),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            ScalarLaw::Constant(_) => true,
            ScalarLaw::Gaussian { sigma } => *sigma == 0.0,
            ScalarLaw::Scaled { law, factor } => *factor == 0.0 || law.is_constant(),
            _ => false,
        }
    }
}

/// First draw of the stream.
pub fn draw_scalar(law: &ScalarLaw, stream: &RngStream) -> Result<f64> {
    law.validate()?;
    Ok(law.sample(&mut stream.rng()))
}

/// `m` consecutive draws from one stream.
pub fn draw_many(law: &ScalarLaw, m: usize, stream: &RngStream) -> Result<Vec<f64>> {
    law.validate()?;
    let mut rng = stream.rng();
    Ok((0..m).map(|_| law.sample(&mut rng)).collect())
}
