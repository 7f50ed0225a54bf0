use itertools::Itertools;
use rand::seq::index;

use crate::error::{ensure, Result};
use crate::samplers::RngStream;

/// Covering radius of the sparse-sphere net.
const QUARTER: f64 = 0.25;

/// Candidate fractions of the radius budget spent on the polar angle.
const SPLITS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Polar levels needed so every angle is within `arcsin(a/2)·2` of a level.
fn polar_levels(a: f64) -> usize {
    let step = 4.0 * (a / 2.0).asin();
    (std::f64::consts::PI / step).ceil() as usize
}

fn best_split(d: usize, eps: f64) -> (usize, f64) {
    if d == 2 {
        return (sphere_net_size(2, eps), 1.0);
    }
    SPLITS
        .iter()
        .map(|&f| (split_size(d, eps, f), f))
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .expect("non-empty split grid")
}

fn split_size(d: usize, eps: f64, frac: f64) -> usize {
    let (a, b) = (eps * frac, eps * (1.0 - frac));
    let m = polar_levels(a);
    (0..=m)
        .map(|j| {
            let s = (j as f64 * std::f64::consts::PI / m as f64).sin();
            if j == 0 || j == m { 1 } else { sphere_net_size(d - 1, b / s) }
        })
        .sum()
}

/// Size of [`sphere_net`] without building it.
pub fn sphere_net_size(d: usize, eps: f64) -> usize {
    if eps >= 2.0 {
        return 1;
    }
    match d {
        1 => 2,
        2 => {
            let m = polar_levels(eps);
            2 + 2 * (m - 1)
        }
        _ => best_split(d, eps).0,
    }
}

/// Deterministic `eps`-net of the unit sphere in `R^d` (Euclidean distance),
/// built as a recursive polar mesh: `x = (cos φ, sin φ·y)` with `φ` on a grid
/// and `y` from a net of the lower sphere scaled to the level's radius.
pub fn sphere_net(d: usize, eps: f64) -> Vec<Vec<f64>> {
    assert!(d >= 1, "sphere dimension must be positive");
    if eps >= 2.0 {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        return vec![e];
    }
    if d == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let (_, frac) = best_split(d, eps);
    let (a, b) = if d == 2 { (eps, 0.0) } else { (eps * frac, eps * (1.0 - frac)) };
    let m = polar_levels(a);
    let mut out = Vec::new();
    for j in 0..=m {
        let phi = j as f64 * std::f64::consts::PI / m as f64;
        let (c, s) = (phi.cos(), phi.sin());
        if j == 0 || j == m {
            let mut v = vec![0.0; d];
            v[0] = if j == 0 { 1.0 } else { -1.0 };
            out.push(v);
            continue;
        }
        let inner = if d == 2 { vec![vec![1.0], vec![-1.0]] } else { sphere_net(d - 1, b / s) };
        for y in inner {
            let mut v = Vec::with_capacity(d);
            v.push(c);
            v.extend(y.iter().map(|t| s * t));
            out.push(v);
        }
    }
    out
}

/// A `k`-sparse unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NetVector {
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl NetVector {
    pub fn to_dense(&self, p: usize) -> Vec<f64> {
        let mut v = vec![0.0; p];
        for (&j, &x) in self.support.iter().zip(&self.values) {
            v[j] = x;
        }
        v
    }
}

/// A 1/4-net of the `k`-sparse unit sphere of `R^p`, stored as the sphere
/// mesh crossed with a list of supports.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarterNet {
    pub k: usize,
    pub p: usize,
    pub sphere: Vec<Vec<f64>>,
    pub supports: Vec<Vec<usize>>,
    /// Every size-`k` support is present.
    pub exhaustive: bool,
}

impl QuarterNet {
    pub fn len(&self) -> usize {
        self.sphere.len() * self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = NetVector> + '_ {
        self.supports.iter().flat_map(move |s| {
            self.sphere.iter().map(move |v| NetVector { support: s.clone(), values: v.clone() })
        })
    }
}

fn binomial(p: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (p - i) as f64 / (i + 1) as f64)
}

/// Build the net. With more than `cap` supports, `cap` distinct supports are
/// sampled from `stream` and `exhaustive` is false.
pub fn quarter_net(k: usize, p: usize, cap: usize, stream: &RngStream) -> Result<QuarterNet> {
    ensure(k >= 1 && k <= p, || format!("need 1 <= k <= p, got k={k}, p={p}"))?;
    ensure(cap >= 1, || "support cap must be positive".into())?;
    let sphere = sphere_net(k, QUARTER);
    let total = binomial(p, k);
    let (supports, exhaustive) = if total <= cap as f64 {
        ((0..p).combinations(k).collect(), true)
    } else {
        let mut rng = stream.rng();
        let mut seen = std::collections::BTreeSet::new();
        while seen.len() < cap {
            let mut s = index::sample(&mut rng, p, k).into_vec();
            s.sort_unstable();
            seen.insert(s);
        }
        (seen.into_iter().collect(), false)
    };
    Ok(QuarterNet { k, p, sphere, supports, exhaustive })
}
