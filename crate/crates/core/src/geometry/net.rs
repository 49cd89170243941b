use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::{dot, norm, Real};

use super::Vec2;

pub const DEFAULT_SUBSPACE_SEED: u64 = 0x005e_ed0f_5ab5_ace5;

/// Equally spaced unit vectors on the circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionNet<T> {
    pub vectors: Vec<Vec2<T>>,
    pub rho_requested: T,
    /// Largest distance from any unit vector to its nearest net vector.
    pub rho_effective: T,
    pub capped: bool,
}

impl<T: Real> DirectionNet<T> {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn build_rho_net<T: Real>(rho: T, cap: usize) -> Result<DirectionNet<T>> {
    if !(rho > T::zero() && rho.is_finite()) {
        return Err(Error::InvalidRho(rho.to_f64_lossy()));
    }
    if cap == 0 {
        return Err(Error::InvalidParameter("net cap must be positive".into()));
    }
    let want = (T::TAU() / rho).ceil().to_f64_lossy().max(1.0);
    let capped = want > cap as f64;
    let m = if capped { cap } else { want as usize };
    let mf = T::from_usize_lossy(m);
    let vectors = (0..m)
        .map(|k| {
            let a = T::TAU() * T::from_usize_lossy(k) / mf;
            [a.cos(), a.sin()]
        })
        .collect();
    let rho_effective = T::lit(2.0) * (T::PI() / (T::lit(2.0) * mf)).sin();
    Ok(DirectionNet { vectors, rho_requested: rho, rho_effective, capped })
}

/// Orthonormal frames `(z, w)` whose spans approximate every direction in R^d.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubspaceNet<T> {
    pub dim: usize,
    pub zeta: T,
    pub pairs: Vec<(Vec<T>, Vec<T>)>,
}

impl<T: Real> SubspaceNet<T> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `min over frames of |x - proj_W x| / |x|`.
    pub fn residual(&self, x: &[T]) -> T {
        let nx = norm(x);
        if nx == T::zero() {
            return T::zero();
        }
        self.pairs
            .iter()
            .map(|(z, w)| {
                let (a, b) = (dot(x, z), dot(x, w));
                (nx * nx - a * a - b * b).max(T::zero()).sqrt() / nx
            })
            .fold(T::infinity(), T::min)
    }
}

fn unit(d: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[k] = 1.0;
    e
}

fn complete(z: &[f64]) -> Vec<f64> {
    let k = (0..z.len()).min_by(|&a, &b| z[a].abs().total_cmp(&z[b].abs())).expect("nonempty vector");
    let mut w = unit(z.len(), k);
    let c = z[k];
    for (wi, zi) in w.iter_mut().zip(z) {
        *wi -= c * zi;
    }
    let n = norm(&w);
    w.iter_mut().for_each(|x| *x /= n);
    w
}

/// Greedy packing of the projective sphere at separation `zeta`, each
/// point completed to an orthonormal pair.
pub fn build_subspace_net<T: Real>(d: usize, zeta: T, cap: usize, seed: u64) -> Result<SubspaceNet<T>> {
    let z = zeta.to_f64_lossy();
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::InvalidZeta(z));
    }
    if d < 2 {
        return Err(Error::InvalidParameter(format!("subspace net needs d >= 2, got {d}")));
    }
    let cast = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
    if d == 2 {
        return Ok(SubspaceNet { dim: 2, zeta, pairs: vec![(cast(unit(2, 0)), cast(unit(2, 1)))] });
    }
    // A zeta-cover of the projective (d-1)-sphere has at least about
    // zeta^-(d-1) / 2 points.
    let log_lower = -((d - 1) as f64) * z.ln() - 2f64.ln();
    if log_lower > (cap as f64).ln() {
        return Err(Error::NetTooLarge { cap });
    }
    let mut rng = rng_from_seed(seed);
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut rejections = 0usize;
    while rejections < (10 * kept.len()).max(1000) {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = norm(&v);
        if n == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= n);
        // Projective distance min(|v - k|, |v + k|) > zeta  <=>  |<v,k>| < 1 - zeta²/2.
        let limit = 1.0 - z * z / 2.0;
        if kept.iter().all(|k| dot(&v, k).abs() < limit) {
            kept.push(v);
            rejections = 0;
            if kept.len() > cap {
                return Err(Error::NetTooLarge { cap });
            }
        } else {
            rejections += 1;
        }
    }
    let pairs = kept
        .into_iter()
        .map(|v| {
            let w = complete(&v);
            (cast(v), cast(w))
        })
        .collect();
    Ok(SubspaceNet { dim: d, zeta, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn net_sizes() {
        assert_eq!(build_rho_net(3.0f64, 100).unwrap().len(), 3);
        assert_eq!(build_rho_net(1e-3f64, 100_000).unwrap().len(), 6284);
        let capped = build_rho_net(1e-6f64, 20_000).unwrap();
        assert!(capped.capped);
        assert_eq!(capped.len(), 20_000);
        assert!(capped.rho_effective > 1e-6);
    }

    #[test]
    fn rejects_nonpositive_rho() {
        assert!(matches!(build_rho_net(0.0f64, 10), Err(Error::InvalidRho(_))));
        assert!(matches!(build_rho_net(-1.0f64, 10), Err(Error::InvalidRho(_))));
    }

    #[test]
    fn two_dim_subspace_net_is_identity() {
        let net = build_subspace_net(2, 0.3f64, 10, 1).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.residual(&[0.3, -4.0]), 0.0);
    }

    #[test]
    fn too_large_and_bad_zeta() {
        assert_eq!(build_subspace_net(50, 0.01f64, 100_000, 1), Err(Error::NetTooLarge { cap: 100_000 }));
        assert!(matches!(build_subspace_net(3, 1.0f64, 10, 1), Err(Error::InvalidZeta(_))));
    }

    #[test]
    fn pairs_are_orthonormal() {
        let net = build_subspace_net(4, 0.5f64, 100_000, 9).unwrap();
        for (z, w) in &net.pairs {
            assert!((norm(z) - 1.0).abs() < 1e-12);
            assert!((norm(w) - 1.0).abs() < 1e-12);
            assert!(dot(z, w).abs() < 1e-12);
        }
    }
}
