//! Empirical inlier-light / outlier-light tests and the oracle checks of
//! their supporting implications.

use serde::Serialize;

use crate::distributions::{
    gaussian_inlier_moment, gaussian_outlier_moment, is_inlier_light, is_outlier_light, DiscreteDistribution,
};
use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

/// Direction samples used by the oracle for `d >= 3`; 2D is exact.
pub const ORACLE_DIRECTION_SAMPLES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Lightness {
    InlierLight,
    OutlierLight,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LightnessVerdict<T> {
    pub label: Lightness,
    /// `B = (1/n) sum (x_i - mu0)² 1{|x_i - mu0| <= 2 beta T}`.
    pub statistic: T,
    /// `(1 - 2L) sigma²`.
    pub threshold: T,
}

impl<T: Real> LightnessVerdict<T> {
    pub fn is_inlier_light(&self) -> bool {
        self.label == Lightness::InlierLight
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome2D {
    /// Coordinate axis `e_j`, zero-based.
    Direction(usize),
    Bottom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict2D<T> {
    pub outcome: Outcome2D,
    pub per_axis: [LightnessVerdict<T>; 2],
}

pub fn test_lightness_1d<T: Real>(samples: &[T], mu0: T, t: T, beta: T, l: T, sigma: T) -> LightnessVerdict<T> {
    let window = T::lit(2.0) * beta * t;
    let total = samples.iter().map(|&x| x - mu0).filter(|z| z.abs() <= window).fold(T::zero(), |acc, z| acc + z * z);
    let statistic = if samples.is_empty() { T::zero() } else { total / T::from_usize_lossy(samples.len()) };
    let threshold = (T::one() - T::lit(2.0) * l) * sigma * sigma;
    let label = if statistic <= threshold { Lightness::InlierLight } else { Lightness::OutlierLight };
    LightnessVerdict { label, statistic, threshold }
}

/// Runs the 1D test on both coordinates; the first inlier-light axis wins.
pub fn test_lightness_2d<T: Real>(
    samples: &[[T; 2]],
    mu0_e1: T,
    mu0_e2: T,
    t: T,
    beta: T,
    l: T,
    sigma: T,
) -> Verdict2D<T> {
    let axis = |j: usize, mu0: T| {
        let xs: Vec<T> = samples.iter().map(|x| x[j]).collect();
        test_lightness_1d(&xs, mu0, t, beta, l, sigma)
    };
    let per_axis = [axis(0, mu0_e1), axis(1, mu0_e2)];
    let outcome =
        per_axis.iter().position(LightnessVerdict::is_inlier_light).map_or(Outcome2D::Bottom, Outcome2D::Direction);
    Verdict2D { outcome, per_axis }
}

fn check_pair<T: Real>(a: &[T; 2], b: &[T; 2]) -> Result<()> {
    let c = dot(a, b).abs();
    if c > T::lit(0.75) {
        return Err(Error::HypothesisViolated(format!("|<v_j, v_k>| = {c} exceeds 3/4")));
    }
    Ok(())
}

/// If both `<v_j, x>` are (beta, L)-outlier-light, checks that `x` is
/// (4 beta, 4L)-outlier-light in every direction. Returns whether the
/// implication held (vacuously true when its premise fails).
pub fn lift_outlier_lightness_check<T: Real>(
    dist: &DiscreteDistribution<T>,
    v1: [T; 2],
    v2: [T; 2],
    beta: T,
    l: T,
    t: T,
    sigma: T,
) -> Result<bool> {
    check_pair(&v1, &v2)?;
    let light = |v: &[T; 2]| is_outlier_light(&dist.marginal(v), beta, l, t, sigma, 0);
    if !(light(&v1) && light(&v2)) {
        return Ok(true);
    }
    let four = T::lit(4.0);
    Ok(is_outlier_light(dist, four * beta, four * l, t, sigma, ORACLE_DIRECTION_SAMPLES))
}

/// If `<e, x>` is (beta, L)-inlier-light and the three directions are
/// pairwise `|<v_j, v_k>| <= 3/4`, checks that some `<v_j, x>` is
/// (beta/8, L/8)-inlier-light. Vacuously true when the premise fails.
pub fn triangle_inlier_check<T: Real>(
    dist: &DiscreteDistribution<T>,
    e: [T; 2],
    frame: [[T; 2]; 3],
    beta: T,
    l: T,
    t: T,
    sigma: T,
) -> Result<bool> {
    for (j, k) in [(0, 1), (0, 2), (1, 2)] {
        check_pair(&frame[j], &frame[k])?;
    }
    if !is_inlier_light(&dist.marginal(&e), beta, l, t, sigma) {
        return Ok(true);
    }
    let eight = T::lit(8.0);
    Ok(frame.iter().any(|v| is_inlier_light(&dist.marginal(v), beta / eight, l / eight, t, sigma)))
}

/// Generating law a verdict is scored against.
#[derive(Clone, Copy, Debug)]
pub enum Population<'a, T> {
    Discrete(&'a DiscreteDistribution<T>),
    IsotropicGaussian { sigma: T },
}

/// `Direction(e_j)` agrees when the `e_j` marginal is (beta, L)-inlier-light;
/// `Bottom` agrees when the law is (16 beta, 16 L)-outlier-light.
pub fn verdict_matches_oracle<T: Real>(
    outcome: Outcome2D,
    pop: Population<'_, T>,
    beta: T,
    l: T,
    t: T,
    sigma: T,
) -> bool {
    let sixteen = T::lit(16.0);
    let s2 = sigma * sigma;
    match (outcome, pop) {
        (Outcome2D::Direction(j), Population::Discrete(d)) => {
            let mut e = vec![T::zero(); d.dimension];
            e[j] = T::one();
            is_inlier_light(&d.marginal(&e), beta, l, t, sigma)
        }
        (Outcome2D::Bottom, Population::Discrete(d)) => {
            is_outlier_light(d, sixteen * beta, sixteen * l, t, sigma, ORACLE_DIRECTION_SAMPLES)
        }
        (Outcome2D::Direction(_), Population::IsotropicGaussian { sigma: s }) => {
            T::lit(gaussian_inlier_moment(s.to_f64_lossy(), (beta * t).to_f64_lossy())) < (T::one() - l) * s2
        }
        (Outcome2D::Bottom, Population::IsotropicGaussian { sigma: s }) => {
            T::lit(gaussian_outlier_moment(s.to_f64_lossy(), (sixteen * beta * t).to_f64_lossy())) < sixteen * l * s2
        }
    }
}
