use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{RngStream, ScalarLaw};
use crate::error::{Error, Result};
use crate::linalg;

/// Generative families for `p`-dimensional rows.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorLaw {
    /// Independent coordinates with a common law.
    IidCoordinates { law: ScalarLaw, p: usize },
    /// Equicorrelated standard Gaussians (`corr = rho`, `0 ≤ rho < 1`) pushed
    /// through `Φ` and the marginal quantile function. Controls marginals only.
    GaussianCopula { rho: f64, marginal: ScalarLaw, p: usize },
    /// One draw repeated in every coordinate: marginally nice, jointly `√p` worse.
    IdenticalCoordinates { law: ScalarLaw, p: usize },
    /// `F·ε` with `ε` iid from `law`; `p = F.nrows()`.
    LinearMap { factor: DMatrix<f64>, law: ScalarLaw },
}

impl VectorLaw {
    pub fn p(&self) -> usize {
        match self {
            VectorLaw::IidCoordinates { p, .. }
            | VectorLaw::GaussianCopula { p, .. }
            | VectorLaw::IdenticalCoordinates { p, .. } => *p,
            VectorLaw::LinearMap { factor, .. } => factor.nrows(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p() == 0 {
            return Err(Error::Argument("vector law needs p >= 1".into()));
        }
        match self {
            VectorLaw::IidCoordinates { law, .. } | VectorLaw::IdenticalCoordinates { law, .. } => law.validate(),
            VectorLaw::GaussianCopula { rho, marginal, .. } => {
                if !(0.0..1.0).contains(rho) {
                    return Err(Error::Argument(format!("copula correlation must lie in [0, 1), got {rho}")));
                }
                marginal.validate()
            }
            VectorLaw::LinearMap { factor, law } => {
                if factor.ncols() == 0 || factor.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Argument("linear map factor must be non-empty and finite".into()));
                }
                law.validate()
            }
        }
    }

    /// Fill `row` with one draw.
    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R, row: &mut [f64], scratch: &mut Vec<f64>) {
        match self {
            VectorLaw::IidCoordinates { law, .. } => row.iter_mut().for_each(|x| *x = law.sample(rng)),
            VectorLaw::IdenticalCoordinates { law, .. } => {
                let v = law.sample(rng);
                row.iter_mut().for_each(|x| *x = v);
            }
            VectorLaw::GaussianCopula { rho, marginal, .. } => {
                let common: f64 = StandardNormal.sample(rng);
                let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
                for x in row.iter_mut() {
                    let w: f64 = StandardNormal.sample(rng);
                    let z = a * common + b * w;
                    *x = match marginal {
                        ScalarLaw::Gaussian { sigma } => sigma * z,
                        m => m.from_standard_normal(z),
                    };
                }
            }
            VectorLaw::LinearMap { factor, law } => {
                scratch.clear();
                scratch.extend((0..factor.ncols()).map(|_| law.sample(rng)));
                for (i, x) in row.iter_mut().enumerate() {
                    *x = (0..factor.ncols()).map(|j| factor[(i, j)] * scratch[j]).sum();
                }
            }
        }
    }

    /// Law of a single coordinate, when all coordinates share one.
    pub fn coordinate_law(&self) -> Option<&ScalarLaw> {
        match self {
            VectorLaw::IidCoordinates { law, .. } | VectorLaw::IdenticalCoordinates { law, .. } => Some(law),
            VectorLaw::GaussianCopula { marginal, .. } => Some(marginal),
            VectorLaw::LinearMap { .. } => None,
        }
    }

    /// `ψ_α` norm of a single coordinate when known analytically.
    pub fn marginal_psi_norm(&self, alpha: f64) -> Option<f64> {
        self.coordinate_law()?.psi_norm(alpha)
    }

    /// Population `E XXᵀ` when every entry is available.
    pub fn population_gram(&self) -> Option<DMatrix<f64>> {
        let p = self.p();
        match self {
            VectorLaw::IidCoordinates { law, .. } => {
                let (m2, mu) = (law.second_moment()?, law.mean()?);
                Some(DMatrix::from_fn(p, p, |i, j| if i == j { m2 } else { mu * mu }))
            }
            VectorLaw::IdenticalCoordinates { law, .. } => Some(DMatrix::from_element(p, p, law.second_moment()?)),
            VectorLaw::GaussianCopula { rho, marginal, .. } => {
                let m2 = marginal.second_moment()?;
                let off = copula_cross_moment(*rho, marginal)?;
                Some(DMatrix::from_fn(p, p, |i, j| if i == j { m2 } else { off }))
            }
            VectorLaw::LinearMap { factor, law } => {
                let (var, mu) = (law.variance()?, law.mean()?);
                let r = factor.ncols();
                let inner = DMatrix::from_fn(r, r, |i, j| mu * mu + if i == j { var } else { 0.0 });
                Some(factor * inner * factor.transpose())
            }
        }
    }

    /// Population mean vector when available.
    pub fn population_mean(&self) -> Option<Vec<f64>> {
        match self {
            VectorLaw::LinearMap { factor, law } => {
                let mu = law.mean()?;
                Some((0..factor.nrows()).map(|i| mu * factor.row(i).sum()).collect())
            }
            other => Some(vec![other.coordinate_law()?.mean()?; other.p()]),
        }
    }

    /// Population covariance `E XXᵀ − μμᵀ`.
    pub fn population_cov(&self) -> Option<DMatrix<f64>> {
        let g = self.population_gram()?;
        let mu = nalgebra::DVector::from_vec(self.population_mean()?);
        Some(g - &mu * mu.transpose())
    }

    /// `max_j E X(j)²`.
    pub fn gamma(&self) -> Option<f64> {
        let g = self.population_gram()?;
        Some(g.diagonal().max())
    }

    pub fn is_mean_zero(&self) -> bool {
        self.population_mean().is_some_and(|m| m.iter().all(|v| *v == 0.0))
    }
}

/// `E[q(Φ(Z₁)) q(Φ(Z₂))]` for standard Gaussians with correlation `rho`.
fn copula_cross_moment(rho: f64, marginal: &ScalarLaw) -> Option<f64> {
    if let ScalarLaw::Gaussian { sigma } = marginal {
        return Some(sigma * sigma * rho);
    }
    let mu = marginal.mean()?;
    if rho == 0.0 {
        return Some(mu * mu);
    }
    marginal.second_moment()?;
    let q = |z: f64| marginal.from_standard_normal(z);
    let (x, w) = linalg::gauss_hermite(96);
    let s2 = std::f64::consts::SQRT_2;
    let c = (1.0 - rho * rho).sqrt();
    let mut total = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let z1 = s2 * xi;
        let q1 = q(z1);
        for (yj, wj) in x.iter().zip(&w) {
            total += wi * wj * q1 * q(rho * z1 + c * s2 * yj);
        }
    }
    Some(total / std::f64::consts::PI)
}

/// An `n × p` sample together with the law that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    pub values: DMatrix<f64>,
    pub law: Option<VectorLaw>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("data matrix has non-finite entries".into()));
        }
        Ok(Self { values, law: None })
    }

    pub fn from_rows(n: usize, p: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != n * p {
            return Err(Error::Dimension(format!("{} values for a {n}x{p} matrix", row_major.len())));
        }
        Self::new(DMatrix::from_row_slice(n, p, row_major))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.values.as_slice()[j * n..(j + 1) * n]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }
}

/// `n` independent rows from `law`, all taken from one stream.
pub fn draw_matrix(law: &VectorLaw, n: usize, stream: &RngStream) -> Result<DataMatrix> {
    law.validate()?;
    if n == 0 {
        return Err(Error::Argument("draw_matrix needs n >= 1".into()));
    }
    let p = law.p();
    let mut rng = stream.rng();
    let mut buf = vec![0.0; n * p];
    let mut scratch = Vec::new();
    for row in buf.chunks_mut(p) {
        law.sample_row(&mut rng, row, &mut scratch);
    }
    Ok(DataMatrix { values: DMatrix::from_row_slice(n, p, &buf), law: Some(law.clone()) })
}
