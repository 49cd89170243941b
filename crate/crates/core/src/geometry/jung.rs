use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::{dist, dot, jung_constant, norm, Real};

use super::min_enclosing_ball;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JungReport<T> {
    pub radius: T,
    pub diameter: T,
    /// `JUNG_d * diameter / 2`.
    pub bound: T,
    pub holds: bool,
}

pub fn diameter<T: Real, P: AsRef<[T]>>(points: &[P]) -> T {
    let mut best = T::zero();
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max(dist(p.as_ref(), q.as_ref()));
        }
    }
    best
}

/// Checks `radius <= sqrt(2d/(d+1)) * diameter / 2`.
pub fn check_jung_inequality<T: Real, P: AsRef<[T]>>(points: &[P]) -> Result<JungReport<T>> {
    let ball = min_enclosing_ball::<T, P>(points)?;
    let d = ball.center.len();
    let diam = diameter(points);
    let bound = jung_constant::<T>(d) * diam / T::lit(2.0);
    let tol = T::lit(1e-12) * (T::one() + diam);
    Ok(JungReport { radius: ball.radius, diameter: diam, holds: ball.radius <= bound + tol, bound })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneralizedJungReport<T> {
    pub i: usize,
    pub j: usize,
    pub r_i: T,
    pub r_j_hat: T,
    /// `sqrt(i (j+1) / (j (i+1)))`.
    pub factor: T,
    pub tolerance: T,
    pub passed: bool,
}

fn random_frame(d: usize, k: usize, rng: &mut impl rand::Rng) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(k);
    while frame.len() < k {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        for f in &frame {
            let c = dot(&v, f);
            v.iter_mut().zip(f).for_each(|(x, y)| *x -= c * y);
        }
        let n = norm(&v);
        if n > 1e-9 {
            v.iter_mut().for_each(|x| *x /= n);
            frame.push(v);
        }
    }
    frame
}

fn projected_radius(points: &[Vec<f64>], frame: &[Vec<f64>]) -> f64 {
    let proj: Vec<Vec<f64>> = points.iter().map(|p| frame.iter().map(|f| dot(p, f)).collect()).collect();
    if frame.len() == 1 {
        let (lo, hi) = proj.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
        return (hi - lo) / 2.0;
    }
    min_enclosing_ball::<f64, _>(&proj).expect("nonempty projection").radius
}

fn max_projected_radius(points: &[Vec<f64>], k: usize, samples: usize, seed: u64) -> f64 {
    let d = points[0].len();
    if k == d {
        return min_enclosing_ball::<f64, _>(points).expect("nonempty").radius;
    }
    if d == 2 && k == 1 {
        // Dense angular sweep over half a turn.
        return (0..samples.max(1))
            .map(|s| {
                let a = std::f64::consts::PI * s as f64 / samples.max(1) as f64;
                projected_radius(points, &[vec![a.cos(), a.sin()]])
            })
            .fold(0.0, f64::max);
    }
    let mut rng = rng_from_seed(seed);
    (0..samples.max(1)).map(|_| projected_radius(points, &random_frame(d, k, &mut rng))).fold(0.0, f64::max)
}

/// Compares the largest `i`-dimensional projected radius with the largest
/// sampled `j`-dimensional one: `R_i <= factor * R_j + 0.01 R_i`.
pub fn check_generalized_jung<T: Real, P: AsRef<[T]>>(
    points: &[P],
    i: usize,
    j: usize,
    projection_samples: usize,
    seed: u64,
) -> Result<GeneralizedJungReport<T>> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let d = first.as_ref().len();
    if !(1 <= j && j <= i && i <= d) {
        return Err(Error::InvalidDims { i, j, d });
    }
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.as_ref().iter().map(|x| x.to_f64_lossy()).collect()).collect();
    if pts.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidDimension { expected: d, got: pts.iter().map(Vec::len).find(|&l| l != d).unwrap() });
    }
    let r_i = max_projected_radius(&pts, i, projection_samples, seed);
    let r_j = if j == i { r_i } else { max_projected_radius(&pts, j, projection_samples, seed ^ 0x9e37) };
    let factor = ((i * (j + 1)) as f64 / (j * (i + 1)) as f64).sqrt();
    let tolerance = 0.01 * r_i;
    Ok(GeneralizedJungReport {
        i,
        j,
        r_i: T::lit(r_i),
        r_j_hat: T::lit(r_j),
        factor: T::lit(factor),
        tolerance: T::lit(tolerance),
        passed: r_i <= factor * r_j + tolerance,
    })
}
