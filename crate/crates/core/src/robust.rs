//! Simplex corruption instances and the population-limit robust bounds.

use rand::Rng;
use serde::Serialize;

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::geometry::{min_enclosing_ball, Ball};
use crate::rng::rng_from_seed;
use crate::scalar::{dist, jung_constant, norm, Real};

pub const DESCENT_STARTS: usize = 50;
pub const DESCENT_STEP: f64 = 1e-2;
pub const DESCENT_ITERS: usize = 10_000;
const DESCENT_SEED: u64 = 0x513e_c0de;
const MIN_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-12;
const GAP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexInstance<T> {
    pub d: usize,
    pub eps: T,
    pub vertices: Vec<Vec<T>>,
    /// Each vertex with mass `eps`, the origin with the rest.
    pub corrupted: DiscreteDistribution<T>,
    /// `clean[j]` flips vertex `j` to `-v_j`.
    pub clean: Vec<DiscreteDistribution<T>>,
}

impl<T: Real> SimplexInstance<T> {
    pub fn clean_means(&self) -> Vec<Vec<T>> {
        self.clean.iter().map(DiscreteDistribution::mean).collect()
    }
}

/// `d + 1` unit vectors in `R^d` summing to zero, built by recursion on `d`.
pub fn simplex_vertices<T: Real>(d: usize) -> Vec<Vec<T>> {
    assert!(d >= 1, "simplex needs d >= 1");
    if d == 1 {
        return vec![vec![T::one()], vec![-T::one()]];
    }
    let df = T::from_usize_lossy(d);
    let shrink = (T::one() - (df * df).recip()).sqrt();
    let mut out = Vec::with_capacity(d + 1);
    let mut top = vec![T::zero(); d];
    top[0] = T::one();
    out.push(top);
    for w in simplex_vertices::<T>(d - 1) {
        let mut v = Vec::with_capacity(d);
        v.push(-df.recip());
        v.extend(w.into_iter().map(|x| shrink * x));
        out.push(v);
    }
    out
}

pub fn make_simplex_instance<T: Real>(d: usize, eps: T) -> Result<SimplexInstance<T>> {
    if d == 0 {
        return Err(Error::InvalidParameter("simplex needs d >= 1".into()));
    }
    let cap = T::from_usize_lossy(d + 1).recip();
    if !(eps > T::zero() && eps <= cap) {
        return Err(Error::InvalidEps(eps.to_f64_lossy()));
    }
    let vertices = simplex_vertices::<T>(d);
    let rest = (T::one() - T::from_usize_lossy(d + 1) * eps).max(T::zero());
    let build = |flip: Option<usize>| {
        let mut support: Vec<Vec<T>> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| if Some(i) == flip { v.iter().map(|&x| -x).collect() } else { v.clone() })
            .collect();
        let mut probs = vec![eps; d + 1];
        support.push(vec![T::zero(); d]);
        probs.push(rest);
        DiscreteDistribution::new(support, probs)
    };
    let corrupted = build(None)?;
    let clean = (0..=d).map(|j| build(Some(j))).collect::<Result<Vec<_>>>()?;
    Ok(SimplexInstance { d, eps, vertices, corrupted, clean })
}

/// Half the L1 distance, merging support points that compare equal.
pub fn tv_distance<T: Real>(p: &DiscreteDistribution<T>, q: &DiscreteDistribution<T>) -> Result<T> {
    if p.dimension != q.dimension {
        return Err(Error::InvalidDimension { expected: p.dimension, got: q.dimension });
    }
    let mut atoms: Vec<(&[T], T)> = Vec::new();
    for (x, &w) in p.support.iter().zip(&p.probs) {
        match atoms.iter_mut().find(|(y, _)| *y == x.as_slice()) {
            Some(a) => a.1 = a.1 + w,
            None => atoms.push((x, w)),
        }
    }
    for (x, &w) in q.support.iter().zip(&q.probs) {
        match atoms.iter_mut().find(|(y, _)| *y == x.as_slice()) {
            Some(a) => a.1 = a.1 - w,
            None => atoms.push((x, -w)),
        }
    }
    Ok(atoms.iter().map(|a| a.1.abs()).sum::<T>() / T::lit(2.0))
}

/// `(1/(d+1)) sum_i |v_i - u|`.
pub fn simplex_mean_distance<T: Real>(vertices: &[Vec<T>], u: &[T]) -> T {
    vertices.iter().map(|v| dist(v, u)).sum::<T>() / T::from_usize_lossy(vertices.len())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Minimum<T> {
    pub value: T,
    pub argmin: Vec<T>,
}

/// Multi-start gradient descent on `u -> mean_i |v_i - u|` with seeded
/// starts in `[-2, 2]^d` scaled by the point spread.
pub fn minimize_mean_distance<T: Real>(points: &[Vec<T>], seed: u64) -> Minimum<T> {
    let d = points.first().map_or(0, Vec::len);
    let spread = points.iter().map(|p| norm(p)).fold(T::zero(), T::max).max(T::min_positive_value());
    let mut rng = rng_from_seed(seed);
    let step = T::lit(DESCENT_STEP) * spread;
    let mut best = Minimum { value: T::infinity(), argmin: vec![T::zero(); d] };
    for _ in 0..DESCENT_STARTS {
        let mut u: Vec<T> = (0..d).map(|_| T::lit(rng.gen_range(-2.0..2.0)) * spread).collect();
        let mut local = Minimum { value: simplex_mean_distance(points, &u), argmin: u.clone() };
        for _ in 0..DESCENT_ITERS {
            let mut g = vec![T::zero(); d];
            for v in points {
                let r = dist(&u, v);
                if r > T::zero() {
                    g.iter_mut().zip(&u).zip(v).for_each(|((gi, &ui), &vi)| *gi = *gi + (ui - vi) / r);
                }
            }
            let k = T::from_usize_lossy(points.len());
            u.iter_mut().zip(&g).for_each(|(ui, &gi)| *ui = *ui - step * gi / k);
            let f = simplex_mean_distance(points, &u);
            if f < local.value {
                local = Minimum { value: f, argmin: u.clone() };
            }
        }
        if local.value < best.value {
            best = local;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundReport<T> {
    pub d: usize,
    pub eps: T,
    /// `min(d, floor(1/eps - 1))`.
    pub d_restricted: usize,
    pub minimum: Minimum<T>,
    pub two_eps: T,
    /// `(d'+1)/d' · eps`.
    pub sigma_sq: T,
    /// `2 eps / sqrt(2 sigma² eps)`; equals `JUNG_{d'}`.
    pub constant: T,
    pub identity_residual: T,
    pub minimum_ok: bool,
    pub identity_ok: bool,
    /// `constant >= sqrt 2 (1 - eps)`; only meaningful when `d' < d`.
    pub restricted_floor_ok: bool,
}

impl<T> LowerBoundReport<T> {
    pub fn passed(&self) -> bool {
        self.minimum_ok && self.identity_ok && self.restricted_floor_ok
    }
}

pub fn restricted_dimension<T: Real>(d: usize, eps: T) -> usize {
    let cap = (eps.recip() - T::one() + T::lit(1e-9)).floor().to_f64_lossy().max(1.0) as usize;
    d.min(cap)
}

pub fn robust_lower_bound_check<T: Real>(d: usize, eps: T) -> Result<LowerBoundReport<T>> {
    if !(eps > T::zero() && eps <= T::lit(0.5)) {
        return Err(Error::InvalidEps(eps.to_f64_lossy()));
    }
    let dr = restricted_dimension(d, eps);
    let inst = make_simplex_instance(dr, eps)?;
    let minimum = minimize_mean_distance(&inst.clean_means(), DESCENT_SEED);
    let two = T::lit(2.0);
    let two_eps = two * eps;
    let drf = T::from_usize_lossy(dr);
    let sigma_sq = (drf + T::one()) / drf * eps;
    let rate = (two * sigma_sq * eps).sqrt();
    let identity_residual = (two_eps - jung_constant::<T>(dr) * rate).abs();
    let constant = two_eps / rate;
    Ok(LowerBoundReport {
        d,
        eps,
        d_restricted: dr,
        minimum_ok: (minimum.value - two_eps).abs() <= T::lit(MIN_TOL),
        minimum,
        two_eps,
        sigma_sq,
        constant,
        identity_ok: identity_residual <= T::lit(IDENTITY_TOL),
        identity_residual,
        restricted_floor_ok: dr == d || constant >= T::SQRT_2() * (T::one() - eps),
    })
}

pub fn robust_upper_center<T: Real, P: AsRef<[T]>>(candidate_means: &[P], d: usize) -> Result<Ball<T>> {
    if let Some(bad) = candidate_means.iter().find(|p| p.as_ref().len() != d) {
        return Err(Error::InvalidDimension { expected: d, got: bad.as_ref().len() });
    }
    min_enclosing_ball(candidate_means)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBoundReport<T> {
    pub d: usize,
    pub eps: T,
    pub center: Vec<T>,
    pub radius: T,
    /// Largest distance from the center to a candidate mean.
    pub max_error: T,
    /// `JUNG_d sqrt(2 sigma² eps) / sqrt(1 - 2 eps)`.
    pub bound: T,
    /// `JUNG_d (1 + 2 eps) sqrt(2 sigma² eps)`.
    pub relaxed_bound: T,
}

impl<T: Real> UpperBoundReport<T> {
    pub fn passed(&self) -> bool {
        let slack = T::lit(1e-12);
        self.max_error <= self.bound + slack && self.bound <= self.relaxed_bound + slack
    }
}

/// MEB center of the clean means of the simplex instance.
pub fn robust_upper_bound_check<T: Real>(d: usize, eps: T) -> Result<UpperBoundReport<T>> {
    let inst = make_simplex_instance(d, eps)?;
    let means = inst.clean_means();
    let ball = robust_upper_center(&means, d)?;
    let max_error = means.iter().map(|m| dist(m, &ball.center)).fold(T::zero(), T::max);
    let two = T::lit(2.0);
    let sigma_sq = inst.corrupted.moments().sigma_sq_bound;
    let rate = jung_constant::<T>(d) * (two * sigma_sq * eps).sqrt();
    Ok(UpperBoundReport {
        d,
        eps,
        center: ball.center,
        radius: ball.radius,
        max_error,
        bound: rate / (T::one() - two * eps).sqrt(),
        relaxed_bound: rate * (T::one() + two * eps),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanGapReport<T> {
    pub gap: T,
    pub tv: T,
    /// `tv / 2`.
    pub eps: T,
    pub sigma_sq: T,
    /// `2 sqrt(2 sigma² eps) / sqrt(1 - 2 eps)`.
    pub bound: T,
    pub holds: bool,
}

fn variance_1d<T: Real>(p: &DiscreteDistribution<T>) -> T {
    let m = p.mean()[0];
    p.support.iter().zip(&p.probs).map(|(x, &w)| w * (x[0] - m) * (x[0] - m)).sum()
}

pub fn mean_gap_bound_check<T: Real>(
    p: &DiscreteDistribution<T>,
    q: &DiscreteDistribution<T>,
) -> Result<MeanGapReport<T>> {
    if p.dimension != 1 || q.dimension != 1 {
        return Err(Error::InvalidDimension { expected: 1, got: p.dimension.max(q.dimension) });
    }
    let tv = tv_distance(p, q)?;
    if tv >= T::one() {
        return Err(Error::InvalidEps(tv.to_f64_lossy() / 2.0));
    }
    let two = T::lit(2.0);
    let eps = tv / two;
    let sigma_sq = variance_1d(p).max(variance_1d(q));
    let gap = (p.mean()[0] - q.mean()[0]).abs();
    let bound = two * (two * sigma_sq * eps).sqrt() / (T::one() - two * eps).sqrt();
    Ok(MeanGapReport { gap, tv, eps, sigma_sq, bound, holds: gap <= bound + T::lit(GAP_TOL) })
}

/// Random 1D pair: `p` on a few atoms, `q` moves a random fraction of
/// `p`'s mass onto fresh atoms.
pub fn random_gap_pair(seed: u64) -> (DiscreteDistribution<f64>, DiscreteDistribution<f64>) {
    let mut rng = rng_from_seed(seed);
    let k = rng.gen_range(1..=6);
    let support: Vec<Vec<f64>> = (0..k).map(|_| vec![rng.gen_range(-5.0..5.0)]).collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let probs: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let moved = rng.gen_range(0.0..0.45);
    let scale = rng.gen_range(0.1..20.0);
    let fresh = rng.gen_range(1..=3);
    let mut qs = support.clone();
    let mut qp: Vec<f64> = probs.iter().map(|w| w * (1.0 - moved)).collect();
    for _ in 0..fresh {
        qs.push(vec![rng.gen_range(-scale..scale)]);
        qp.push(moved / fresh as f64);
    }
    let p = DiscreteDistribution { dimension: 1, support, probs };
    let q = DiscreteDistribution { dimension: 1, support: qs, probs: qp };
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_instance() {
        let inst = make_simplex_instance(1, 0.1f64).unwrap();
        assert_eq!(inst.vertices, vec![vec![1.0], vec![-1.0]]);
        let m = inst.clean_means();
        assert!((m[0][0] + 0.2).abs() < 1e-15 && (m[1][0] - 0.2).abs() < 1e-15);
        assert!((tv_distance(&inst.corrupted, &inst.clean[0]).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn eps_cap() {
        assert!(matches!(make_simplex_instance(2, 0.4), Err(Error::InvalidEps(_))));
        assert!(make_simplex_instance(2, 1.0 / 3.0).is_ok());
    }

    #[test]
    fn restriction() {
        assert_eq!(restricted_dimension(100, 0.05), 19);
        assert_eq!(restricted_dimension(3, 0.05), 3);
        assert_eq!(restricted_dimension(5, 0.5), 1);
    }

    #[test]
    fn tv_extremes() {
        let a = DiscreteDistribution::point_mass(vec![0.0]);
        let b = DiscreteDistribution::point_mass(vec![1.0]);
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn single_candidate_center() {
        let b = robust_upper_center(&[vec![1.0, 2.0]], 2).unwrap();
        assert_eq!(b.center, vec![1.0, 2.0]);
        assert_eq!(b.radius, 0.0);
    }

    #[test]
    fn spike_gap_example() {
        let e = 0.05f64;
        let p = DiscreteDistribution::point_mass(vec![0.0]);
        let q = DiscreteDistribution::new(vec![vec![0.0], vec![1.0 / (2.0 * e).sqrt()]], vec![1.0 - 2.0 * e, 2.0 * e])
            .unwrap();
        let r = mean_gap_bound_check(&p, &q).unwrap();
        assert!((r.gap - (2.0 * e).sqrt()).abs() < 1e-12);
        assert!(r.holds);
    }
}
