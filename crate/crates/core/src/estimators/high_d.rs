use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{build_subspace_net, DEFAULT_SUBSPACE_SEED};
use crate::psi::PsiKind;
use crate::scalar::{dot, jung_constant, Real};

use super::one_d::median_of_means;
use super::two_d::{
    heavy_tailed_estimator_2d, Estimator2DConfig, Path, DEFAULT_BETA, DEFAULT_L, DEFAULT_NET_CAP, DEFAULT_XI,
};

/// `n >= C ln(1/delta)` and `n >= C² d`.
pub const HD_SAMPLE_CONSTANT: f64 = 40.0;
const DEFAULT_ZETA: f64 = 0.2;
const DEFAULT_SUBSPACE_CAP: usize = 100_000;
const DESCENT_WINDOW: usize = 100;
const DESCENT_MIN_PROGRESS: f64 = 1e-10;
const DESCENT_MAX_STEPS: usize = 50_000;
const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct HdConfig<T> {
    pub zeta: T,
    pub subspace_cap: usize,
    pub subspace_seed: u64,
    pub beta: T,
    pub l: T,
    pub xi: T,
    pub tau: Option<T>,
    pub psi: PsiKind,
    pub net_cap: usize,
}

impl<T: Real> Default for HdConfig<T> {
    fn default() -> Self {
        Self {
            zeta: T::lit(DEFAULT_ZETA),
            subspace_cap: DEFAULT_SUBSPACE_CAP,
            subspace_seed: DEFAULT_SUBSPACE_SEED,
            beta: T::lit(DEFAULT_BETA),
            l: T::lit(DEFAULT_L),
            xi: T::lit(DEFAULT_XI),
            tau: None,
            psi: PsiKind::ClippedCubicSqrt2,
            net_cap: DEFAULT_NET_CAP,
        }
    }
}

impl<T: Real> HdConfig<T> {
    fn frame_config(&self, delta: T, sigma: T) -> Result<Estimator2DConfig<T>> {
        let mut b = Estimator2DConfig::builder(delta, sigma)
            .beta(self.beta)
            .l(self.l)
            .xi(self.xi)
            .psi(self.psi)
            .net_cap(self.net_cap);
        if let Some(t) = self.tau {
            b = b.tau(t);
        }
        b.build()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CylinderConstraint<T> {
    pub frame: (Vec<T>, Vec<T>),
    pub center2d: [T; 2],
    pub radius: T,
    pub path: Path,
}

impl<T: Real> CylinderConstraint<T> {
    /// `|w_W - center| - radius`.
    pub fn excess(&self, w: &[T]) -> T {
        self.residual(w) - self.radius
    }

    pub fn residual(&self, w: &[T]) -> T {
        let p = project_to_frame(w, &self.frame);
        ((p[0] - self.center2d[0]).powi(2) + (p[1] - self.center2d[1]).powi(2)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HdDiagnostics<T> {
    pub frame_budget: T,
    pub constraints: Vec<CylinderConstraint<T>>,
    /// `max_k (|w_W - c_k| - r_k)` at the output.
    pub objective: T,
    pub tolerance: T,
    pub feasible: bool,
    pub worst_residual: T,
    pub descent_steps: usize,
    pub inlier_frames: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateHd<T> {
    pub value: Vec<T>,
    /// `(1 - tau) JUNG_d sigma sqrt(2 ln(2/delta) / n)`.
    pub claimed_radius: T,
    pub diagnostics: HdDiagnostics<T>,
}

pub fn project_to_frame<T: Real>(x: &[T], frame: &(Vec<T>, Vec<T>)) -> [T; 2] {
    [dot(x, &frame.0), dot(x, &frame.1)]
}

fn objective<T: Real>(cons: &[CylinderConstraint<T>], w: &[T]) -> (T, usize) {
    cons.iter()
        .enumerate()
        .map(|(k, c)| (c.excess(w), k))
        .fold((T::neg_infinity(), 0), |a, b| if b.0 > a.0 { b } else { a })
}

/// Soft-max of the residuals at temperature `mu` and its gradient.
fn smoothed<T: Real>(cons: &[CylinderConstraint<T>], w: &[T], mu: T) -> (T, Vec<T>) {
    let res: Vec<([T; 2], T)> = cons
        .iter()
        .map(|c| {
            let p = project_to_frame(w, &c.frame);
            let g = [p[0] - c.center2d[0], p[1] - c.center2d[1]];
            (g, (g[0] * g[0] + g[1] * g[1]).sqrt())
        })
        .collect();
    let top = res.iter().map(|r| r.1).fold(T::neg_infinity(), T::max);
    let weights: Vec<T> = res.iter().map(|r| ((r.1 - top) / mu).exp()).collect();
    let z: T = weights.iter().copied().sum();
    let mut grad = vec![T::zero(); w.len()];
    for ((c, (g, r)), &wt) in cons.iter().zip(&res).zip(&weights) {
        if *r > T::zero() {
            let s = wt / (z * *r);
            for (i, gi) in grad.iter_mut().enumerate() {
                *gi = *gi + s * (g[0] * c.frame.0[i] + g[1] * c.frame.1[i]);
            }
        }
    }
    (top + mu * z.ln(), grad)
}

/// Gradient descent with backtracking on the soft-max, lowering the
/// temperature from `scale / 10` to `1e-6 scale`.
fn descend<T: Real>(cons: &[CylinderConstraint<T>], start: Vec<T>, scale: T) -> (Vec<T>, usize) {
    let mut w = start;
    let mut steps = 0;
    let min_progress = T::lit(DESCENT_MIN_PROGRESS) * scale;
    let mut mu = scale / T::lit(10.0);
    let floor = scale * T::lit(1e-6);
    let mut lr = scale;
    while mu >= floor && steps < DESCENT_MAX_STEPS {
        let mut history = Vec::new();
        let (mut f, mut g) = smoothed(cons, &w, mu);
        loop {
            history.push(f);
            let gn2: T = g.iter().map(|x| *x * *x).sum();
            if gn2 == T::zero() || steps >= DESCENT_MAX_STEPS {
                break;
            }
            let cand = loop {
                let trial: Vec<T> = w.iter().zip(&g).map(|(&a, &b)| a - lr * b).collect();
                let (ft, gt) = smoothed(cons, &trial, mu);
                if ft <= f - lr * gn2 / T::lit(2.0) {
                    break Some((trial, ft, gt));
                }
                lr = lr / T::lit(2.0);
                if lr < floor * T::lit(1e-6) {
                    break None;
                }
            };
            steps += 1;
            match cand {
                Some((trial, ft, gt)) => {
                    w = trial;
                    f = ft;
                    g = gt;
                    lr = lr * T::lit(2.0);
                }
                None => break,
            }
            let k = history.len();
            if k > DESCENT_WINDOW && history[k - 1 - DESCENT_WINDOW] - f < min_progress {
                break;
            }
        }
        mu = mu / T::lit(10.0);
        lr = lr.max(mu);
    }
    (w, steps)
}

/// Runs the 2D estimator on every frame of a subspace net and returns a
/// point minimizing the worst cylinder excess.
pub fn hd_estimator<T: Real, P: AsRef<[T]> + Sync>(
    samples: &[P],
    delta: T,
    sigma: T,
    cfg: &HdConfig<T>,
) -> Result<EstimateHd<T>> {
    let n = samples.len();
    let d = samples.first().ok_or(Error::EmptyInput)?.as_ref().len();
    if d < 2 {
        return Err(Error::InvalidParameter(format!("hd estimator needs d >= 2, got {d}")));
    }
    if let Some(bad) = samples.iter().find(|x| x.as_ref().len() != d) {
        return Err(Error::InvalidDimension { expected: d, got: bad.as_ref().len() });
    }
    if !(delta > T::zero() && delta < T::one() && sigma > T::zero()) {
        return Err(Error::InvalidParameter("need delta in (0, 1) and sigma > 0".into()));
    }
    let c = HD_SAMPLE_CONSTANT;
    let needed = (c * delta.recip().ln().to_f64_lossy()).max(c * c * d as f64).ceil() as usize;
    if n < needed {
        return Err(Error::TooFewSamples { needed, got: n });
    }
    let net = build_subspace_net(d, cfg.zeta, cfg.subspace_cap, cfg.subspace_seed)?;
    let frame_budget = delta / T::from_usize_lossy(net.len());
    let frame_cfg = cfg.frame_config(frame_budget, sigma)?;
    let rate = sigma * (T::lit(2.0) * (T::lit(2.0) / delta).ln() / T::from_usize_lossy(n)).sqrt();
    let radius = (T::one() - frame_cfg.tau) * jung_constant::<T>(2) * rate;
    let constraints = net
        .pairs
        .par_iter()
        .map(|frame| {
            let proj: Vec<[T; 2]> = samples.iter().map(|x| project_to_frame(x.as_ref(), frame)).collect();
            let est = heavy_tailed_estimator_2d(&proj, &frame_cfg)?;
            Ok(CylinderConstraint { frame: frame.clone(), center2d: est.value, radius, path: est.path })
        })
        .collect::<Result<Vec<_>>>()?;
    let lift = |c: &CylinderConstraint<T>| -> Vec<T> {
        (0..d).map(|i| c.center2d[0] * c.frame.0[i] + c.center2d[1] * c.frame.1[i]).collect()
    };
    let (value, steps) = if constraints.len() == 1 && d == 2 {
        // The single cylinder is a disc; its center minimizes the excess.
        (lift(&constraints[0]), 0)
    } else {
        let m = (cfg.xi * T::from_usize_lossy(n)).ceil().to_f64_lossy() as usize;
        let slice = &samples[..m.clamp(1, n)];
        let start = (0..d)
            .map(|i| median_of_means(&slice.iter().map(|x| x.as_ref()[i]).collect::<Vec<_>>(), delta))
            .collect::<Result<Vec<T>>>()?;
        let (w, steps) = descend(&constraints, start, radius);
        (w, steps)
    };
    let (f, _) = objective(&constraints, &value);
    let tolerance = T::lit(FEASIBILITY_TOL) * rate;
    let worst_residual = constraints.iter().map(|c| c.residual(&value)).fold(T::zero(), T::max);
    let inlier_frames = constraints.iter().filter(|c| c.path == Path::InlierLight).count();
    Ok(EstimateHd {
        value,
        claimed_radius: jung_constant::<T>(d) / jung_constant::<T>(2) * radius,
        diagnostics: HdDiagnostics {
            frame_budget,
            constraints,
            objective: f,
            tolerance,
            feasible: f <= tolerance,
            worst_residual,
            descent_steps: steps,
            inlier_frames,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_projection() {
        let frame = (vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]);
        assert_eq!(project_to_frame(&[0.0, 1.0, 0.0], &frame), [1.0, 0.0]);
        assert_eq!(project_to_frame(&[5.0, 0.0, 0.0], &frame), [0.0, 0.0]);
    }

    #[test]
    fn constant_samples_in_three_dims() {
        let p = vec![0.5f64, -1.0, 2.0];
        let est = hd_estimator(&vec![p.clone(); 8000], 0.05, 1.0, &HdConfig::default()).unwrap();
        assert!(est.diagnostics.feasible);
        for (a, b) in est.value.iter().zip(&p) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn sample_size_precondition() {
        let r = hd_estimator(&vec![vec![0.0; 3]; 1000], 0.05, 1.0, &HdConfig::default());
        assert!(matches!(r, Err(Error::TooFewSamples { needed: 4800, .. })));
    }
}
