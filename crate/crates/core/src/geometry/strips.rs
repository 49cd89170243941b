use serde::Serialize;

use crate::scalar::Real;

use super::Vec2;

/// `{ w : |<direction, w> - center| <= half_width }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Strip<T> {
    pub direction: Vec2<T>,
    pub center: T,
    pub half_width: T,
}

impl<T: Real> Strip<T> {
    /// Signed amount by which `w` lies outside the strip.
    pub fn violation(&self, w: Vec2<T>) -> T {
        let proj = self.direction[0] * w[0] + self.direction[1] * w[1];
        (proj - self.center).abs() - self.half_width
    }
}

/// Convex polygon, vertices in boundary order. `bounded_by_box` is set
/// when a vertex came from the artificial bounding box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexRegion<T> {
    pub vertices: Vec<Vec2<T>>,
    pub bounded_by_box: bool,
}

impl<T: Real> ConvexRegion<T> {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Least-squares point of the strip center lines, or the origin when the
/// directions do not span the plane.
fn anchor<T: Real>(strips: &[Strip<T>]) -> Vec2<T> {
    let (mut a, mut b, mut c, mut r0, mut r1) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for s in strips {
        let [u, v] = s.direction;
        a = a + u * u;
        b = b + u * v;
        c = c + v * v;
        r0 = r0 + s.center * u;
        r1 = r1 + s.center * v;
    }
    let det = a * c - b * b;
    if det.abs() <= T::epsilon() * (a * c).max(T::min_positive_value()) * T::lit(16.0) {
        return [T::zero(), T::zero()];
    }
    [(c * r0 - b * r1) / det, (a * r1 - b * r0) / det]
}

fn clip<T: Real>(poly: &[Vec2<T>], n: Vec2<T>, bound: T) -> Vec<Vec2<T>> {
    // Keep {w : <n, w> <= bound}.
    let slack = |p: &Vec2<T>| bound - (n[0] * p[0] + n[1] * p[1]);
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (sp, sq) = (slack(&p), slack(&q));
        if sp >= T::zero() {
            out.push(p);
        }
        if (sp >= T::zero()) != (sq >= T::zero()) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn box_extent<T: Real>(strips: &[Strip<T>], at: Vec2<T>) -> T {
    let spread = strips.iter().map(|s| s.violation(at) + T::lit(2.0) * s.half_width).fold(T::zero(), T::max);
    T::lit(4.0) * spread + T::one()
}

/// Intersects the strips inside a bounding square large enough to contain
/// any bounded intersection.
pub fn intersect_strips<T: Real>(strips: &[Strip<T>]) -> ConvexRegion<T> {
    let o = anchor(strips);
    let r = box_extent(strips, o);
    let square = vec![[o[0] - r, o[1] - r], [o[0] + r, o[1] - r], [o[0] + r, o[1] + r], [o[0] - r, o[1] + r]];
    let mut poly = square.clone();
    for s in strips {
        let [u, v] = s.direction;
        poly = clip(&poly, [u, v], s.center + s.half_width);
        poly = clip(&poly, [-u, -v], -(s.center - s.half_width));
        if poly.is_empty() {
            break;
        }
    }
    let on_box = |p: &Vec2<T>| {
        let tol = r * T::lit(1e-9);
        (p[0] - o[0]).abs() >= r - tol || (p[1] - o[1]).abs() >= r - tol
    };
    let bounded_by_box = poly.iter().any(on_box);
    ConvexRegion { vertices: poly, bounded_by_box }
}

fn ternary<T: Real>(mut lo: T, mut hi: T, iters: usize, f: impl Fn(T) -> T) -> T {
    let three = T::lit(3.0);
    for _ in 0..iters {
        let m1 = lo + (hi - lo) / three;
        let m2 = hi - (hi - lo) / three;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Point minimizing the largest strip violation; used when the
/// intersection is empty. Nested ternary search over the bounding square.
pub fn min_max_violation_point<T: Real>(strips: &[Strip<T>]) -> Vec2<T> {
    const ITERS: usize = 120;
    let o = anchor(strips);
    if strips.is_empty() {
        return o;
    }
    let r = box_extent(strips, o);
    let g = |w: Vec2<T>| strips.iter().map(|s| s.violation(w)).fold(T::neg_infinity(), T::max);
    let best_y = |x: T| ternary(o[1] - r, o[1] + r, ITERS, |y| g([x, y]));
    let x = ternary(o[0] - r, o[0] + r, ITERS, |x| g([x, best_y(x)]));
    [x, best_y(x)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_rho_net;

    fn strip(angle: f64, center: f64, half_width: f64) -> Strip<f64> {
        Strip { direction: [angle.cos(), angle.sin()], center, half_width }
    }

    #[test]
    fn axis_strips_give_square() {
        let region = intersect_strips(&[strip(0.0, 1.0, 0.5), strip(std::f64::consts::FRAC_PI_2, -2.0, 0.5)]);
        assert!(!region.bounded_by_box);
        assert_eq!(region.vertices.len(), 4);
        for v in &region.vertices {
            assert!((v[0] - 1.0).abs() <= 0.5 + 1e-12);
            assert!((v[1] + 2.0).abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn disjoint_parallel_strips_are_empty() {
        let region = intersect_strips(&[strip(0.0, 0.0, 1.0), strip(0.0, 5.0, 1.0)]);
        assert!(region.is_empty());
        let w = min_max_violation_point(&[strip(0.0, 0.0, 1.0), strip(0.0, 5.0, 1.0)]);
        assert!((w[0] - 2.5).abs() < 1e-9);
    }

    #[test]
    fn single_direction_touches_box() {
        assert!(intersect_strips(&[strip(0.3, 1.0, 0.1)]).bounded_by_box);
    }

    #[test]
    fn net_strips_around_point() {
        let net = build_rho_net(0.3f64, 1000).unwrap();
        let p = [3.0, -7.0];
        let strips: Vec<_> = net
            .vectors
            .iter()
            .map(|u| Strip { direction: *u, center: u[0] * p[0] + u[1] * p[1], half_width: 0.25 })
            .collect();
        let region = intersect_strips(&strips);
        assert!(!region.bounded_by_box);
        for v in &region.vertices {
            for s in &strips {
                assert!(s.violation(*v) <= 1e-9);
            }
        }
    }
}
