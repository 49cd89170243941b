use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::{dist, Real};

use super::{ConvexRegion, Vec2};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ball<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Real> Ball<T> {
    pub fn contains(&self, p: &[T], tol: T) -> bool {
        dist(&self.center, p) <= self.radius + tol
    }
}

/// Relative accuracy target of the iterative solver used for `d > 3`.
const ITERATIVE_REL_TOL: f64 = 1e-10;
const ITERATIVE_MAX_STEPS: usize = 2_000_000;

fn validate<T: Real, P: AsRef<[T]>>(points: &[P]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let d = first.as_ref().len();
    if d == 0 {
        return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
    }
    if let Some(bad) = points.iter().find(|p| p.as_ref().len() != d) {
        return Err(Error::InvalidDimension { expected: d, got: bad.as_ref().len() });
    }
    Ok(d)
}

/// Minimum enclosing ball. Exact (up to rounding) for `d <= 3`; for larger
/// `d` an away-step Frank-Wolfe iteration whose duality gap certifies a
/// relative radius error below `1e-10`.
pub fn min_enclosing_ball<T: Real, P: AsRef<[T]>>(points: &[P]) -> Result<Ball<T>> {
    let d = validate(points)?;
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.as_ref().iter().map(|x| x.to_f64_lossy()).collect()).collect();
    let (center, radius) = if d <= 3 { welzl(&pts, d) } else { frank_wolfe(&pts) };
    Ok(Ball { center: center.into_iter().map(T::lit).collect(), radius: T::lit(radius) })
}

pub fn meb_of_region<T: Real>(region: &ConvexRegion<T>) -> Result<Ball<T>> {
    min_enclosing_ball::<T, Vec2<T>>(&region.vertices)
}

fn coord_scale(pts: &[Vec<f64>]) -> f64 {
    pts.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Circumscribed ball of affinely independent points, centered in their
/// affine hull. `None` if the points are (numerically) dependent.
fn circumball(support: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let p0 = support[0];
    let d = p0.len();
    let k = support.len() - 1;
    if k == 0 {
        return Some((p0.to_vec(), 0.0));
    }
    let q: Vec<Vec<f64>> = support[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    // Gram system G a = b / 2.
    let mut m = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            m[i][j] = q[i].iter().zip(&q[j]).map(|(x, y)| x * y).sum();
        }
        m[i][k] = 0.5 * m[i][i];
    }
    let scale = (0..k).map(|i| m[i][i]).fold(0.0f64, f64::max);
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        for row in 0..k {
            if row != col {
                let f = m[row][col] / m[col][col];
                for c in col..=k {
                    m[row][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut center = p0.to_vec();
    for i in 0..k {
        let a = m[i][k] / m[i][i];
        for (c, qi) in center.iter_mut().zip(&q[i]) {
            *c += a * qi;
        }
    }
    let r = support.iter().map(|p| dist(&center, p)).fold(0.0f64, f64::max);
    debug_assert!(center.len() == d);
    Some((center, r))
}

/// Smallest ball enclosing a handful of points, by subset enumeration.
fn tiny_meb(pts: &[&[f64]], tol: f64) -> (Vec<f64>, f64) {
    let n = pts.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 1u32..(1 << n) {
        let sub: Vec<&[f64]> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| pts[i]).collect();
        if let Some((c, r)) = circumball(&sub) {
            if best.as_ref().is_some_and(|b| b.1 <= r) {
                continue;
            }
            if pts.iter().all(|p| dist(&c, p) <= r + tol) {
                best = Some((c, r));
            }
        }
    }
    best.expect("a diametral pair always encloses collinear support")
}

fn ball_of_support(pts: &[Vec<f64>], support: &[usize], tol: f64) -> (Vec<f64>, f64) {
    let s: Vec<&[f64]> = support.iter().map(|&i| pts[i].as_slice()).collect();
    circumball(&s).unwrap_or_else(|| tiny_meb(&s, tol))
}

fn welzl(pts: &[Vec<f64>], d: usize) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.shuffle(&mut rng_from_seed(0x3eb));
    let shuffled: Vec<Vec<f64>> = order.iter().map(|&i| pts[i].clone()).collect();
    let tol = 1e-12 * (1.0 + coord_scale(pts));
    let mut support = Vec::with_capacity(d + 1);
    let (c, _) = welzl_rec(&shuffled, shuffled.len(), &mut support, d, tol);
    let r = pts.iter().map(|p| dist(&c, p)).fold(0.0f64, f64::max);
    (c, r)
}

fn welzl_rec(pts: &[Vec<f64>], n: usize, support: &mut Vec<usize>, d: usize, tol: f64) -> (Vec<f64>, f64) {
    let mut ball = if support.is_empty() { (pts[0].clone(), 0.0) } else { ball_of_support(pts, support, tol) };
    if support.len() == d + 1 {
        return ball;
    }
    for i in 0..n {
        if dist(&ball.0, &pts[i]) > ball.1 + tol {
            support.push(i);
            ball = welzl_rec(pts, i, support, d, tol);
            support.pop();
        }
    }
    ball
}

fn frank_wolfe(pts: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let n = pts.len();
    let d = pts[0].len();
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let far = |from: &[f64]| (0..n).max_by(|&a, &b| sq(&pts[a], from).total_cmp(&sq(&pts[b], from))).unwrap();
    let a = far(&pts[0]);
    let b = far(&pts[a]);
    let mut u = vec![0.0; n];
    u[a] += 0.5;
    u[b] += 0.5;
    let center_of = |u: &[f64]| {
        let mut c = vec![0.0; d];
        for (ui, p) in u.iter().zip(pts) {
            if *ui != 0.0 {
                c.iter_mut().zip(p).for_each(|(ci, x)| *ci += ui * x);
            }
        }
        c
    };
    let mut c = center_of(&u);
    for step in 0..ITERATIVE_MAX_STEPS {
        if step % 1000 == 999 {
            c = center_of(&u);
        }
        let dists: Vec<f64> = pts.iter().map(|p| sq(p, &c)).collect();
        let phi: f64 = u.iter().zip(&dists).map(|(ui, di)| ui * di).sum();
        if phi <= 0.0 {
            break;
        }
        let j = (0..n).max_by(|&a, &b| dists[a].total_cmp(&dists[b])).unwrap();
        let k = (0..n).filter(|&i| u[i] > 0.0).min_by(|&a, &b| dists[a].total_cmp(&dists[b])).unwrap();
        let up = dists[j] / phi - 1.0;
        if up <= (1.0 + ITERATIVE_REL_TOL).powi(2) - 1.0 {
            break;
        }
        let down = 1.0 - dists[k] / phi;
        if up >= down {
            let lam = up / (2.0 * (1.0 + up));
            u.iter_mut().for_each(|x| *x *= 1.0 - lam);
            u[j] += lam;
            c.iter_mut().zip(&pts[j]).for_each(|(ci, x)| *ci = (1.0 - lam) * *ci + lam * x);
        } else {
            let lam = (down / (2.0 * (1.0 - down))).min(u[k] / (1.0 - u[k]));
            u.iter_mut().for_each(|x| *x *= 1.0 + lam);
            u[k] -= lam;
            if u[k] < 1e-15 {
                u[k] = 0.0;
            }
            c.iter_mut().zip(&pts[k]).for_each(|(ci, x)| *ci = (1.0 + lam) * *ci - lam * x);
        }
    }
    let r = pts.iter().map(|p| sq(p, &c)).fold(0.0f64, f64::max).sqrt();
    (c, r)
}

/// Reference MEB by enumerating every support set of at most `d + 1`
/// points. Quartic or worse; intended for small test inputs.
pub fn brute_force_meb<T: Real, P: AsRef<[T]>>(points: &[P]) -> Result<Ball<T>> {
    let d = validate(points)?;
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.as_ref().iter().map(|x| x.to_f64_lossy()).collect()).collect();
    let tol = 1e-10 * (1.0 + coord_scale(&pts));
    let n = pts.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut idx = Vec::new();
    fn rec(start: usize, n: usize, left: usize, idx: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if !idx.is_empty() {
            f(idx);
        }
        if left == 0 {
            return;
        }
        for i in start..n {
            idx.push(i);
            rec(i + 1, n, left - 1, idx, f);
            idx.pop();
        }
    }
    rec(0, n, d + 1, &mut idx, &mut |sub: &[usize]| {
        let s: Vec<&[f64]> = sub.iter().map(|&i| pts[i].as_slice()).collect();
        if let Some((c, r)) = circumball(&s) {
            if best.as_ref().is_some_and(|b| b.1 <= r) {
                return;
            }
            if pts.iter().all(|p| dist(&c, p) <= r + tol) {
                best = Some((c, r));
            }
        }
    });
    let (c, r) = best.expect("some support set encloses every point");
    Ok(Ball { center: c.into_iter().map(T::lit).collect(), radius: T::lit(r) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_triangle() {
        let s = 3f64.sqrt();
        let pts = vec![[1.0, 0.0], [-0.5, s / 2.0], [-0.5, -s / 2.0]];
        let b = min_enclosing_ball::<f64, _>(&pts).unwrap();
        assert!((b.radius - 1.0).abs() < 1e-12);
        assert!(b.center.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn single_point_and_pair() {
        let b = min_enclosing_ball::<f64, _>(&[[2.0, 3.0]]).unwrap();
        assert_eq!(b.radius, 0.0);
        let b = min_enclosing_ball::<f64, _>(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        assert!((b.radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_and_duplicates() {
        let pts = vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [1.0, 1.0], [0.5, 0.5]];
        let b = min_enclosing_ball::<f64, _>(&pts).unwrap();
        assert!((b.radius - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_and_ragged_inputs() {
        let empty: Vec<Vec<f64>> = vec![];
        assert_eq!(min_enclosing_ball::<f64, _>(&empty), Err(Error::EmptyInput));
        let ragged = vec![vec![0.0, 1.0], vec![1.0]];
        assert!(matches!(min_enclosing_ball::<f64, _>(&ragged), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn high_dim_simplex() {
        let d = 6;
        let pts: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let b = min_enclosing_ball::<f64, _>(&pts).unwrap();
        let expect = ((d as f64 - 1.0) / d as f64).sqrt();
        assert!((b.radius - expect).abs() < 1e-9 * expect);
    }
}
