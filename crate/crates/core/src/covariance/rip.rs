use itertools::Itertools;
use nalgebra::DMatrix;

use super::net::QuarterNet;
use crate::error::{ensure, Error, Result};
use crate::linalg;

/// Largest number of supports `rip_exact` will enumerate by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RipMethod {
    Exact,
    QuarterNet,
}

/// `max_{‖θ‖₀ ≤ k, ‖θ‖₂ = 1} |θᵀDθ|`, exactly or from a net.
#[derive(Debug, Clone, PartialEq)]
pub struct RipResult {
    pub value: f64,
    pub k: usize,
    pub method: RipMethod,
    pub supports_evaluated: usize,
    pub net_size: usize,
    /// Net built from every support (always true for `Exact`).
    pub exhaustive: bool,
}

impl RipResult {
    /// Certified upper bound on the exact value: the value itself for
    /// `Exact`, twice the net maximum for an exhaustive net, `None` otherwise.
    pub fn certified_upper(&self) -> Option<f64> {
        match (self.method, self.exhaustive) {
            (RipMethod::Exact, _) => Some(self.value),
            (RipMethod::QuarterNet, true) => Some(2.0 * self.value),
            _ => None,
        }
    }
}

fn principal(d: &DMatrix<f64>, s: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(s.len(), s.len(), |a, b| d[(s[a], s[b])])
}

fn spectral_small(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)].abs(),
        2 => {
            let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            let mid = 0.5 * (a + c);
            let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            (mid + rad).abs().max((mid - rad).abs())
        }
        _ => m.clone().symmetric_eigenvalues().iter().fold(0.0f64, |x, v| x.max(v.abs())),
    }
}

/// Exact sparse operator norm by enumerating all size-`k` supports.
pub fn rip_exact(d: &DMatrix<f64>, k: usize) -> Result<RipResult> {
    rip_exact_with_cap(d, k, DEFAULT_ENUMERATION_CAP)
}

pub fn rip_exact_with_cap(d: &DMatrix<f64>, k: usize, cap: usize) -> Result<RipResult> {
    linalg::check_symmetric(d)?;
    let p = d.nrows();
    ensure(k >= 1 && k <= p, || format!("need 1 <= k <= p, got k={k}, p={p}"))?;
    let count = (0..k).fold(1.0, |acc, i| acc * (p - i) as f64 / (i + 1) as f64);
    if count > cap as f64 {
        return Err(Error::Capacity(format!(
            "{count:.0} supports exceed the enumeration cap {cap}; use rip_net"
        )));
    }
    let sym = linalg::symmetrize(d);
    let mut value = 0.0f64;
    let mut evaluated = 0usize;
    for s in (0..p).combinations(k) {
        value = value.max(spectral_small(&principal(&sym, &s)));
        evaluated += 1;
    }
    Ok(RipResult { value, k, method: RipMethod::Exact, supports_evaluated: evaluated, net_size: 0, exhaustive: true })
}

/// `max_{θ ∈ net} |θᵀDθ|`.
pub fn rip_net(d: &DMatrix<f64>, k: usize, net: &QuarterNet) -> Result<RipResult> {
    linalg::check_symmetric(d)?;
    if net.p != d.nrows() || net.k != k {
        return Err(Error::Dimension(format!(
            "net is for (k={}, p={}), asked for (k={k}, p={})",
            net.k,
            net.p,
            d.nrows()
        )));
    }
    let mut value = 0.0f64;
    for s in &net.supports {
        let sub = principal(d, s);
        for v in &net.sphere {
            let mut q = 0.0;
            for a in 0..k {
                let mut row = 0.0;
                for b in 0..k {
                    row += sub[(a, b)] * v[b];
                }
                q += v[a] * row;
            }
            value = value.max(q.abs());
        }
    }
    Ok(RipResult {
        value,
        k,
        method: RipMethod::QuarterNet,
        supports_evaluated: net.supports.len(),
        net_size: net.len(),
        exhaustive: net.exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::quarter_net;
    use crate::samplers::RngStream;

    #[test]
    fn exact_examples() {
        let d = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.2]);
        assert_eq!(rip_exact(&d, 1).unwrap().value, 0.5);
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((rip_exact(&d, 2).unwrap().value - 1.0).abs() < 1e-15);
        assert_eq!(rip_exact(&d, 1).unwrap().value, 0.0);
        assert!(matches!(rip_exact_with_cap(&DMatrix::identity(30, 30), 5, 1000), Err(Error::Capacity(_))));
    }

    #[test]
    fn net_examples() {
        let net = quarter_net(2, 5, 100, &RngStream::new(0, 0)).unwrap();
        assert_eq!(rip_net(&DMatrix::zeros(5, 5), 2, &net).unwrap().value, 0.0);
        assert!((rip_net(&DMatrix::identity(5, 5), 2, &net).unwrap().value - 1.0).abs() < 1e-12);
    }
}
