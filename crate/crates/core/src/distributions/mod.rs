//! Finite-support distributions, exact lightness oracles and samplers.

mod instances;
mod sampler;

pub use instances::{
    gaussian_inlier_moment, gaussian_outlier_moment, make_inlier_light_instance, make_inlier_light_instance_with_scale,
    two_point_outlier_distribution, INLIER_INSTANCE_E2_VARIANCE,
};
pub use sampler::{sample, sample_1d, sample_2d, Family, SamplerSpec, TWO_POINT_OUTLIER_SHARE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::{dot, norm, Real};

const PROB_SUM_TOL: f64 = 1e-12;
const OUTLIER_PROBE_SEED: u64 = 0x0071_7e57;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct DiscreteDistribution<T> {
    pub dimension: usize,
    pub support: Vec<Vec<T>>,
    pub probs: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Moments<T> {
    pub mean: Vec<T>,
    pub covariance: Vec<Vec<T>>,
    /// Largest eigenvalue of the covariance.
    pub sigma_sq_bound: T,
}

impl<T: Real> DiscreteDistribution<T> {
    pub fn new(support: Vec<Vec<T>>, probs: Vec<T>) -> Result<Self> {
        let dimension = support.first().map(Vec::len).ok_or(Error::EmptyInput)?;
        let d = Self { dimension, support, probs };
        d.validate()?;
        Ok(d)
    }

    pub fn point_mass(p: Vec<T>) -> Self {
        Self { dimension: p.len(), support: vec![p], probs: vec![T::one()] }
    }

    pub fn from_json(text: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let d: Self = serde_json::from_str(text).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        if self.dimension == 0 {
            return bad("dimension must be at least 1".into());
        }
        if self.support.is_empty() || self.support.len() != self.probs.len() {
            return bad(format!("{} support points but {} probabilities", self.support.len(), self.probs.len()));
        }
        if let Some(p) = self.support.iter().find(|p| p.len() != self.dimension || p.iter().any(|x| !x.is_finite())) {
            return bad(format!("support point {p:?} is not a finite {}-vector", self.dimension));
        }
        if self.probs.iter().any(|&p| !(p >= T::zero())) {
            return bad("probabilities must be nonnegative".into());
        }
        let total: f64 = self.probs.iter().map(|p| p.to_f64_lossy()).sum();
        let tol = PROB_SUM_TOL.max(T::epsilon().to_f64_lossy() * 4.0 * self.probs.len() as f64);
        if (total - 1.0).abs() > tol {
            return bad(format!("probabilities sum to {total}"));
        }
        Ok(())
    }

    pub fn mean(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.dimension];
        for (x, &p) in self.support.iter().zip(&self.probs) {
            m.iter_mut().zip(x).for_each(|(mi, &xi)| *mi = *mi + p * xi);
        }
        m
    }

    pub fn moments(&self) -> Moments<T> {
        let mean = self.mean();
        let d = self.dimension;
        let mut cov = vec![vec![T::zero(); d]; d];
        for (x, &p) in self.support.iter().zip(&self.probs) {
            for i in 0..d {
                let zi = x[i] - mean[i];
                for j in 0..d {
                    cov[i][j] = cov[i][j] + p * zi * (x[j] - mean[j]);
                }
            }
        }
        let sigma_sq_bound = largest_eigenvalue(&cov);
        Moments { mean, covariance: cov, sigma_sq_bound }
    }

    /// Law of `<direction, x>`.
    pub fn marginal(&self, direction: &[T]) -> Self {
        Self {
            dimension: 1,
            support: self.support.iter().map(|x| vec![dot(x, direction)]).collect(),
            probs: self.probs.clone(),
        }
    }

    /// Law of `x - shift`.
    pub fn shifted(&self, shift: &[T]) -> Self {
        Self {
            dimension: self.dimension,
            support: self.support.iter().map(|x| x.iter().zip(shift).map(|(&a, &b)| a - b).collect()).collect(),
            probs: self.probs.clone(),
        }
    }
}

/// Largest eigenvalue of a symmetric PSD matrix: closed form for `d <= 2`,
/// cyclic Jacobi sweeps otherwise.
pub fn largest_eigenvalue<T: Real>(m: &[Vec<T>]) -> T {
    let d = m.len();
    match d {
        0 => T::zero(),
        1 => m[0][0],
        2 => {
            let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
            let half = (a - c) / T::lit(2.0);
            (a + c) / T::lit(2.0) + (half * half + b * b).sqrt()
        }
        _ => {
            let mut a: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|x| x.to_f64_lossy()).collect()).collect();
            for _ in 0..100 {
                let off: f64 = (0..d)
                    .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
                    .map(|(i, j)| a[i][j] * a[i][j])
                    .sum();
                let diag: f64 = (0..d).map(|i| a[i][i] * a[i][i]).sum();
                if off <= 1e-30 * diag.max(1e-300) {
                    break;
                }
                for p in 0..d {
                    for q in p + 1..d {
                        if a[p][q] == 0.0 {
                            continue;
                        }
                        let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                        let t = if theta == 0.0 { 1.0 } else { t };
                        let c = 1.0 / (t * t + 1.0).sqrt();
                        let s = t * c;
                        for k in 0..d {
                            let (akp, akq) = (a[k][p], a[k][q]);
                            a[k][p] = c * akp - s * akq;
                            a[k][q] = s * akp + c * akq;
                        }
                        for k in 0..d {
                            let (apk, aqk) = (a[p][k], a[q][k]);
                            a[p][k] = c * apk - s * aqk;
                            a[q][k] = s * apk + c * aqk;
                        }
                    }
                }
            }
            T::lit((0..d).map(|i| a[i][i]).fold(f64::NEG_INFINITY, f64::max))
        }
    }
}

/// `E[(x - mu)² 1{|x - mu| <= beta T}]` for a 1D law.
pub fn inlier_moment<T: Real>(dist: &DiscreteDistribution<T>, beta: T, t: T) -> T {
    assert_eq!(dist.dimension, 1, "inlier moment is defined for 1D laws");
    let mu = dist.mean()[0];
    let cut = beta * t;
    dist.support
        .iter()
        .zip(&dist.probs)
        .filter(|(x, _)| (x[0] - mu).abs() <= cut)
        .map(|(x, &p)| p * (x[0] - mu) * (x[0] - mu))
        .sum()
}

/// `E[(x - mu)² 1{|x - mu| >= beta T}]` for a 1D law.
pub fn outlier_moment_1d<T: Real>(dist: &DiscreteDistribution<T>, beta: T, t: T) -> T {
    assert_eq!(dist.dimension, 1, "outlier moment is defined for 1D laws");
    let mu = dist.mean()[0];
    directional_outlier_moment(&centered(dist, &[mu]), &[T::one()], beta * t)
}

/// (beta, L)-inlier-light: `E[(x-mu)² 1{|x-mu| <= beta T}] < (1-L) sigma²`.
pub fn is_inlier_light<T: Real>(dist: &DiscreteDistribution<T>, beta: T, l: T, t: T, sigma: T) -> bool {
    inlier_moment(dist, beta, t) < (T::one() - l) * sigma * sigma
}

fn centered<T: Real>(dist: &DiscreteDistribution<T>, mean: &[T]) -> Vec<(Vec<T>, T)> {
    dist.support
        .iter()
        .zip(&dist.probs)
        .map(|(x, &p)| (x.iter().zip(mean).map(|(&a, &b)| a - b).collect(), p))
        .collect()
}

fn directional_outlier_moment<T: Real>(z: &[(Vec<T>, T)], w: &[T], cut: T) -> T {
    z.iter()
        .map(|(zi, p)| {
            let s = dot(zi, w);
            if s.abs() >= cut {
                *p * s * s
            } else {
                T::zero()
            }
        })
        .sum()
}

fn quadratic_form_max_on_arc<T: Real>(a: T, b: T, c: T, lo: T, hi: T) -> T {
    // Q(t) = a cos² t + 2 b sin t cos t + c sin² t.
    let q = |t: T| {
        let (s, co) = t.sin_cos();
        a * co * co + T::lit(2.0) * b * s * co + c * s * s
    };
    let mut best = q(lo).max(q(hi));
    let half = (a - c) / T::lit(2.0);
    let mut peak = b.atan2(half) / T::lit(2.0);
    while peak < lo {
        peak = peak + T::PI();
    }
    if peak <= hi {
        best = best.max((a + c) / T::lit(2.0) + (half * half + b * b).sqrt());
    }
    best
}

/// Supremum over unit `w` of `E[<x-mu,w>² 1{|<x-mu,w>| >= cut}]`: exact arc
/// enumeration in 2D, exact in 1D, sampled directions plus support
/// directions otherwise.
pub fn max_outlier_moment<T: Real>(dist: &DiscreteDistribution<T>, cut: T, direction_samples: usize) -> T {
    let z = centered(dist, &dist.mean());
    match dist.dimension {
        1 => directional_outlier_moment(&z, &[T::one()], cut),
        2 => max_outlier_moment_2d(&z, cut),
        d => {
            use rand_distr::{Distribution, StandardNormal};
            let mut rng = rng_from_seed(OUTLIER_PROBE_SEED);
            let mut best = T::zero();
            let mut probe = |w: &[T]| best = best.max(directional_outlier_moment(&z, w, cut));
            for (zi, _) in &z {
                let n = norm(zi);
                if n > T::zero() {
                    probe(&zi.iter().map(|&x| x / n).collect::<Vec<_>>());
                }
            }
            for _ in 0..direction_samples {
                let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                let n = norm(&v);
                probe(&v.iter().map(|x| T::lit(x / n)).collect::<Vec<_>>());
            }
            best
        }
    }
}

fn max_outlier_moment_2d<T: Real>(z: &[(Vec<T>, T)], cut: T) -> T {
    let pi = T::PI();
    let wrap = |mut t: T| {
        while t < T::zero() {
            t = t + pi;
        }
        while t >= pi {
            t = t - pi;
        }
        t
    };
    let mut cuts = vec![T::zero(), pi];
    for (zi, _) in z {
        let r = norm(zi);
        if r > T::zero() && r >= cut {
            let phi = zi[1].atan2(zi[0]);
            let a = (cut / r).min(T::one()).acos();
            cuts.push(wrap(phi + a));
            cuts.push(wrap(phi - a));
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
    cuts.dedup();
    let mut best = T::zero();
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let mid = (lo + hi) / T::lit(2.0);
        let w = [mid.cos(), mid.sin()];
        let (mut a, mut b, mut c) = (T::zero(), T::zero(), T::zero());
        for (zi, p) in z {
            if dot(zi, &w).abs() >= cut {
                a = a + *p * zi[0] * zi[0];
                b = b + *p * zi[0] * zi[1];
                c = c + *p * zi[1] * zi[1];
            }
        }
        best = best.max(quadratic_form_max_on_arc(a, b, c, lo, hi));
    }
    for &t in &cuts {
        best = best.max(directional_outlier_moment(z, &[t.cos(), t.sin()], cut));
    }
    best
}

/// (beta, L)-outlier-light in every direction.
pub fn is_outlier_light<T: Real>(
    dist: &DiscreteDistribution<T>,
    beta: T,
    l: T,
    t: T,
    sigma: T,
    direction_samples: usize,
) -> bool {
    max_outlier_moment(dist, beta * t, direction_samples) < l * sigma * sigma
}
