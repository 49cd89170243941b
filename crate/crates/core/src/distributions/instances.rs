use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{is_inlier_light, DiscreteDistribution};

/// Variance of the independent `e2` coordinate, in units of `sigma²`.
pub const INLIER_INSTANCE_E2_VARIANCE: f64 = 0.5;
/// Share of `sigma²` carried by the far atoms along `e1`.
const FAR_SHARE: f64 = 0.75;

fn scale_t<T: Real>(n: usize, delta: T, sigma: T) -> T {
    sigma * (T::from_usize_lossy(n) / (T::lit(2.0) * (T::lit(2.0) / delta).ln())).sqrt()
}

/// Inlier-light 2D instance with far atoms at `±(1+beta)/2 · T · e1`.
pub fn make_inlier_light_instance<T: Real>(
    beta: T,
    l: T,
    n: usize,
    delta: T,
    sigma: T,
) -> Result<DiscreteDistribution<T>> {
    make_inlier_light_instance_with_scale(beta, l, n, delta, sigma, (T::one() + beta) / T::lit(2.0))
}

/// Mass `p` at `±c T e1` with `p (cT)² = 0.75 sigma²`, a near-origin pair
/// carrying `0.25 sigma²`, and an independent `±sigma/sqrt 2` coordinate on
/// `e2`. `T = sigma sqrt(n / (2 ln(2/delta)))`.
pub fn make_inlier_light_instance_with_scale<T: Real>(
    beta: T,
    l: T,
    n: usize,
    delta: T,
    sigma: T,
    c: T,
) -> Result<DiscreteDistribution<T>> {
    if !(beta > T::zero() && beta < T::one()) {
        return Err(Error::InvalidBeta(beta.to_f64_lossy()));
    }
    if !(c > beta && c < T::one()) {
        return Err(Error::InvalidParameter(format!("scale c={c} must lie in (beta, 1)")));
    }
    if !(sigma > T::zero() && delta > T::zero() && delta < T::one() && n > 0) {
        return Err(Error::InvalidParameter("need sigma > 0, delta in (0,1), n >= 1".into()));
    }
    let t = scale_t(n, delta, sigma);
    let far = c * t;
    let s2 = sigma * sigma;
    let p = T::lit(FAR_SHARE) * s2 / (far * far);
    if p >= T::one() {
        return Err(Error::Infeasible(format!("far mass {p} does not fit; increase n")));
    }
    let near = (T::lit(1.0 - FAR_SHARE) * s2 / (T::one() - p)).sqrt();
    let half = T::lit(0.5);
    let e1 = [(far, p * half), (-far, p * half), (near, (T::one() - p) * half), (-near, (T::one() - p) * half)];
    let b = sigma * T::lit(INLIER_INSTANCE_E2_VARIANCE).sqrt();
    let mut support = Vec::with_capacity(8);
    let mut probs = Vec::with_capacity(8);
    for &(x, px) in &e1 {
        for y in [b, -b] {
            support.push(vec![x, y]);
            probs.push(px * half);
        }
    }
    let dist = DiscreteDistribution::new(support, probs)?;
    let two_l = T::lit(2.0) * l;
    if !is_inlier_light(&dist.marginal(&[T::one(), T::zero()]), beta, two_l, t, sigma) {
        return Err(Error::Infeasible(format!("e1 marginal is not ({beta}, {two_l})-inlier-light")));
    }
    Ok(dist)
}

/// 1D law: `±m` with total mass `share sigma² / m²`, remaining mass on a
/// symmetric pair so the variance is exactly `sigma²`.
pub fn two_point_outlier_distribution<T: Real>(m: T, sigma: T, share: T) -> Result<DiscreteDistribution<T>> {
    if !(m > T::zero() && sigma > T::zero() && share >= T::zero() && share <= T::one()) {
        return Err(Error::InvalidParameter("need m, sigma > 0 and share in [0, 1]".into()));
    }
    let s2 = sigma * sigma;
    let p = share * s2 / (m * m);
    if p > T::one() {
        return Err(Error::Infeasible(format!("outlier mass {p} exceeds 1")));
    }
    let half = T::lit(0.5);
    if p == T::one() {
        return DiscreteDistribution::new(vec![vec![m], vec![-m]], vec![half, half]);
    }
    let bulk = ((T::one() - share) * s2 / (T::one() - p)).sqrt();
    let q = (T::one() - p) * half;
    DiscreteDistribution::new(vec![vec![m], vec![-m], vec![bulk], vec![-bulk]], vec![p * half, p * half, q, q])
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E[x² 1{|x| <= a}]` for `x ~ N(0, s²)`.
pub fn gaussian_inlier_moment(s: f64, a: f64) -> f64 {
    let z = a / s;
    s * s * (erf(z / std::f64::consts::SQRT_2) - 2.0 * z * std_normal_pdf(z))
}

/// `E[x² 1{|x| >= a}]` for `x ~ N(0, s²)`.
pub fn gaussian_outlier_moment(s: f64, a: f64) -> f64 {
    s * s - gaussian_inlier_moment(s, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::is_outlier_light;

    #[test]
    fn construction_example() {
        let d = make_inlier_light_instance(0.125f64, 0.0625, 100_000, 0.01, 1.0).unwrap();
        let m = d.moments();
        assert!(m.mean.iter().all(|x| x.abs() < 1e-12));
        assert!((m.covariance[0][0] - 1.0).abs() < 1e-12);
        assert!((m.covariance[1][1] - INLIER_INSTANCE_E2_VARIANCE).abs() < 1e-12);
        let t = (100_000.0 / (2.0 * 200f64.ln())).sqrt();
        let e1 = d.marginal(&[1.0, 0.0]);
        assert!(is_inlier_light(&e1, 0.125, 0.0625, t, 1.0));
        assert!(!is_outlier_light(&e1, 0.125, 0.0625, t, 1.0, 0));
    }

    #[test]
    fn rejects_small_scale() {
        assert!(make_inlier_light_instance_with_scale(0.125, 0.0625, 100_000, 0.01, 1.0, 0.1).is_err());
        assert!(matches!(make_inlier_light_instance(0.125, 0.0625, 1, 0.01, 1.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn two_point_example_is_inlier_light() {
        let t = 50.0f64;
        let d = two_point_outlier_distribution(2.0 * t, 1.0, 0.6).unwrap();
        assert!((d.moments().covariance[0][0] - 1.0).abs() < 1e-12);
        assert!(is_inlier_light(&d, 0.1, 0.5, t, 1.0));
    }

    #[test]
    fn gaussian_moments() {
        assert!((gaussian_inlier_moment(1.0, 50.0) - 1.0).abs() < 1e-12);
        assert!(gaussian_inlier_moment(2.0, 0.0).abs() < 1e-15);
        // Known value: E[x² 1{|x|<=1}] = erf(1/sqrt2) - 2 phi(1).
        assert!((gaussian_inlier_moment(1.0, 1.0) - 0.198_748_043_098_799).abs() < 1e-9);
    }
}
