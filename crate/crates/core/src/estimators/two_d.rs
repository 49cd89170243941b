use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{build_rho_net, intersect_strips, meb_of_region, min_max_violation_point, DirectionNet, Strip};
use crate::lightness::{test_lightness_1d, test_lightness_2d, Outcome2D, Verdict2D};
use crate::psi::{PsiFunction, PsiKind};
use crate::scalar::{jung_constant, Real};

use super::one_d::{catoni_local, median_of_means, min_catoni_samples, CatoniParams};

pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_L: f64 = 0.35;
pub const DEFAULT_XI: f64 = 0.05;
pub const DEFAULT_NET_CAP: usize = 20_000;
const TAU_CAP: f64 = 0.05;
/// Bisection tolerance for the eta behind the default tau.
const TAU_ETA_TOLERANCE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Path {
    #[serde(rename = "inlier-light")]
    InlierLight,
    #[serde(rename = "outlier-light")]
    OutlierLight,
}

impl Path {
    pub fn name(self) -> &'static str {
        match self {
            Path::InlierLight => "inlier-light",
            Path::OutlierLight => "outlier-light",
        }
    }
}

/// Denominator of the trimmed mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum TrimDenominator {
    /// Number of samples before trimming.
    #[default]
    AllSamples,
    Survivors,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimator2DConfig<T> {
    pub beta: T,
    pub l: T,
    pub xi: T,
    pub tau: T,
    pub delta: T,
    pub sigma: T,
    pub net: DirectionNet<T>,
    pub psi: PsiFunction<T>,
    pub alpha_inlier: T,
    pub alpha_default: T,
    pub trim_denominator: TrimDenominator,
}

#[derive(Clone, Debug)]
pub struct Config2DBuilder<T> {
    delta: T,
    sigma: T,
    beta: T,
    l: T,
    xi: T,
    tau: Option<T>,
    psi: PsiKind,
    net_cap: usize,
    trim_denominator: TrimDenominator,
}

impl<T: Real> Config2DBuilder<T> {
    pub fn beta(mut self, beta: T) -> Self {
        self.beta = beta;
        self
    }

    pub fn l(mut self, l: T) -> Self {
        self.l = l;
        self
    }

    pub fn xi(mut self, xi: T) -> Self {
        self.xi = xi;
        self
    }

    pub fn tau(mut self, tau: T) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn psi(mut self, psi: PsiKind) -> Self {
        self.psi = psi;
        self
    }

    pub fn net_cap(mut self, cap: usize) -> Self {
        self.net_cap = cap;
        self
    }

    pub fn trim_denominator(mut self, d: TrimDenominator) -> Self {
        self.trim_denominator = d;
        self
    }

    pub fn build(self) -> Result<Estimator2DConfig<T>> {
        let Self { delta, sigma, beta, l, xi, tau, psi, net_cap, trim_denominator } = self;
        let invalid = |m: String| Err(Error::InvalidParameter(m));
        if !(delta > T::zero() && delta < T::one()) {
            return invalid(format!("delta must lie in (0, 1), got {delta}"));
        }
        if !(sigma > T::zero()) {
            return invalid(format!("sigma must be positive, got {sigma}"));
        }
        if !(beta > T::zero() && beta < T::lit(1.0 / 32.0)) {
            return invalid(format!("beta must lie in (0, 1/32), got {beta}"));
        }
        if !(l > T::lit(32.0) * beta && l < T::lit(0.5)) {
            return invalid(format!("L must lie in (32 beta, 1/2), got {l}"));
        }
        if !(xi > T::zero() && xi < T::one()) {
            return Err(Error::InvalidXi(xi.to_f64_lossy()));
        }
        let psi = PsiFunction::new(psi);
        let tau = match tau {
            Some(t) => t,
            None => {
                let probe = PsiFunction::<f64>::new(psi.kind());
                let eta = probe.compute_eta_with_tolerance(beta.to_f64_lossy() / 32.0, TAU_ETA_TOLERANCE)?;
                let l32 = l.to_f64_lossy() / 32.0;
                T::lit((eta * l32 / 8.0).min(TAU_CAP)).max(T::epsilon() * T::lit(4.0))
            }
        };
        if !(tau > T::zero() && tau < T::one()) {
            return invalid(format!("tau must lie in (0, 1), got {tau}"));
        }
        let net = build_rho_net(delta.powf(xi), net_cap)?;
        Ok(Estimator2DConfig {
            beta,
            l,
            xi,
            tau,
            delta,
            sigma,
            net,
            psi,
            alpha_inlier: T::one() - tau,
            alpha_default: T::one() + xi,
            trim_denominator,
        })
    }
}

impl<T: Real> Estimator2DConfig<T> {
    pub fn builder(delta: T, sigma: T) -> Config2DBuilder<T> {
        Config2DBuilder {
            delta,
            sigma,
            beta: T::lit(DEFAULT_BETA),
            l: T::lit(DEFAULT_L),
            xi: T::lit(DEFAULT_XI),
            tau: None,
            psi: PsiKind::ClippedCubicSqrt2,
            net_cap: DEFAULT_NET_CAP,
            trim_denominator: TrimDenominator::AllSamples,
        }
    }

    /// Defaults: beta = 0.01, L = 0.35, xi = 0.05, clipped cubic psi.
    pub fn new(delta: T, sigma: T) -> Result<Self> {
        Self::builder(delta, sigma).build()
    }

    /// Same net and constants, different failure budget.
    pub fn at_delta(&self, delta: T) -> Self {
        Self { delta, ..self.clone() }
    }

    /// `sigma sqrt(2 ln(2/delta) / n)`.
    pub fn rate(&self, n: usize) -> T {
        self.sigma * (T::lit(2.0) * (T::lit(2.0) / self.delta).ln() / T::from_usize_lossy(n)).sqrt()
    }

    /// `(1 - tau) JUNG_2 sigma sqrt(2 ln(2/delta) / n)`.
    pub fn claimed_radius(&self, n: usize) -> T {
        (T::one() - self.tau) * jung_constant::<T>(2) * self.rate(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripRecord<T> {
    pub direction: [T; 2],
    pub init: T,
    pub estimate: T,
    pub statistic: T,
    pub inlier_light: bool,
    pub alpha: T,
    pub half_width: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetEntry {
    pub label: &'static str,
    pub per_call: f64,
    pub calls: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics2D<T> {
    pub verdict: Option<Verdict2D<T>>,
    pub strips: Vec<StripRecord<T>>,
    /// Failure budget of each per-direction test and local estimate.
    pub direction_budget: Option<T>,
    pub region_empty: bool,
    pub region_bounded_by_box: bool,
    pub trimmed: usize,
    pub survivors: usize,
    pub budgets: Vec<BudgetEntry>,
}

impl<T> Default for Diagnostics2D<T> {
    fn default() -> Self {
        Self {
            verdict: None,
            strips: Vec::new(),
            direction_budget: None,
            region_empty: false,
            region_bounded_by_box: false,
            trimmed: 0,
            survivors: 0,
            budgets: Vec::new(),
        }
    }
}

impl<T> Diagnostics2D<T> {
    pub fn total_budget(&self) -> f64 {
        self.budgets.iter().map(|b| b.per_call * b.calls as f64).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate2D<T> {
    pub value: [T; 2],
    pub claimed_radius: T,
    pub path: Path,
    pub diagnostics: Diagnostics2D<T>,
}

fn project<T: Real>(samples: &[[T; 2]], u: [T; 2]) -> Vec<T> {
    samples.iter().map(|x| u[0] * x[0] + u[1] * x[1]).collect()
}

/// Per-direction lightness test and local estimate, strip intersection,
/// and the center of the region's minimum enclosing ball.
pub fn inlier_light_estimator_2d<T: Real>(
    samples: &[[T; 2]],
    init_estimates: &[T],
    cfg: &Estimator2DConfig<T>,
) -> Result<Estimate2D<T>> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let m = cfg.net.len();
    if init_estimates.len() != m {
        return Err(Error::InvalidDimension { expected: m, got: init_estimates.len() });
    }
    let dir_delta = cfg.delta / (T::lit(4.0) * T::from_usize_lossy(m));
    let params = CatoniParams::new(cfg.sigma, dir_delta, n)?;
    let k32 = T::lit(32.0);
    let (beta, l) = (cfg.beta / k32, cfg.l / k32);
    let width = cfg.rate(n);
    let strips: Vec<StripRecord<T>> = cfg
        .net
        .vectors
        .par_iter()
        .zip(init_estimates.par_iter())
        .map(|(&u, &init)| {
            let xs = project(samples, u);
            let verdict = test_lightness_1d(&xs, init, params.t, beta, l, cfg.sigma);
            let est = catoni_local(&xs, init, &cfg.psi, &params);
            let inlier_light = verdict.is_inlier_light();
            let alpha = if inlier_light { cfg.alpha_inlier } else { cfg.alpha_default };
            StripRecord {
                direction: u,
                init,
                estimate: est.value,
                statistic: verdict.statistic,
                inlier_light,
                alpha,
                half_width: alpha * width,
            }
        })
        .collect();
    let geometry: Vec<Strip<T>> =
        strips.iter().map(|s| Strip { direction: s.direction, center: s.estimate, half_width: s.half_width }).collect();
    let region = intersect_strips(&geometry);
    let (value, region_empty) = if region.is_empty() {
        (min_max_violation_point(&geometry), true)
    } else {
        let ball = meb_of_region(&region)?;
        ([ball.center[0], ball.center[1]], false)
    };
    let budgets = vec![
        BudgetEntry { label: "direction-test", per_call: dir_delta.to_f64_lossy(), calls: m },
        BudgetEntry { label: "direction-estimate", per_call: dir_delta.to_f64_lossy(), calls: m },
    ];
    Ok(Estimate2D {
        value,
        claimed_radius: cfg.claimed_radius(n),
        path: Path::InlierLight,
        diagnostics: Diagnostics2D {
            strips,
            direction_budget: Some(dir_delta),
            region_empty,
            region_bounded_by_box: region.bounded_by_box,
            survivors: n,
            budgets,
            ..Diagnostics2D::default()
        },
    })
}

/// Coordinate-wise trimming at `sqrt(beta) T` around `mu0`, then the sum of
/// survivors over the original sample count.
pub fn outlier_light_estimator_2d<T: Real>(samples: &[[T; 2]], mu0: [T; 2], beta: T, t: T) -> Estimate2D<T> {
    outlier_light_estimator_2d_with(samples, mu0, beta, t, TrimDenominator::AllSamples)
}

pub fn outlier_light_estimator_2d_with<T: Real>(
    samples: &[[T; 2]],
    mu0: [T; 2],
    beta: T,
    t: T,
    denominator: TrimDenominator,
) -> Estimate2D<T> {
    let cut = beta.sqrt() * t;
    let mut sum = [T::zero(); 2];
    let mut survivors = 0usize;
    for x in samples {
        if (x[0] - mu0[0]).abs() <= cut && (x[1] - mu0[1]).abs() <= cut {
            sum[0] = sum[0] + x[0];
            sum[1] = sum[1] + x[1];
            survivors += 1;
        }
    }
    let denom = match denominator {
        TrimDenominator::AllSamples => samples.len(),
        TrimDenominator::Survivors => survivors,
    };
    let value = if denom == 0 {
        [T::zero(); 2]
    } else {
        let d = T::from_usize_lossy(denom);
        [sum[0] / d, sum[1] / d]
    };
    Estimate2D {
        value,
        claimed_radius: T::zero(),
        path: Path::OutlierLight,
        diagnostics: Diagnostics2D { trimmed: samples.len() - survivors, survivors, ..Diagnostics2D::default() },
    }
}

/// Output of the initialization and testing stage of
/// [`heavy_tailed_estimator_2d`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TesterStage<T> {
    /// Coordinate-wise median-of-means on the first `ceil(xi n)` samples.
    pub mu0: [T; 2],
    pub verdict: Verdict2D<T>,
    /// `sigma sqrt(n' / (2 ln(4 / (delta/4))))`, `n'` the tested samples.
    pub t: T,
    /// Index of the first tested sample.
    pub tail_start: usize,
    pub mom_delta: T,
}

/// Splits off two `ceil(xi n)` prefixes, initializes on the first and runs
/// the coordinate lightness test on everything after the second.
pub fn tester_stage_2d<T: Real>(samples: &[[T; 2]], cfg: &Estimator2DConfig<T>) -> Result<TesterStage<T>> {
    let n = samples.len();
    let needed = min_catoni_samples(cfg.delta, cfg.xi);
    let m = (cfg.xi * T::from_usize_lossy(n)).ceil().to_f64_lossy() as usize;
    if n < needed || 2 * m >= n {
        return Err(Error::TooFewSamples { needed: needed.max(2 * m + 1), got: n });
    }
    let four = T::lit(4.0);
    let mom_delta = cfg.delta / (four * T::from_usize_lossy(cfg.net.len() + 2));
    let first = &samples[..m];
    let mu0 = [
        median_of_means(&first.iter().map(|x| x[0]).collect::<Vec<_>>(), mom_delta)?,
        median_of_means(&first.iter().map(|x| x[1]).collect::<Vec<_>>(), mom_delta)?,
    ];
    let tail = &samples[2 * m..];
    let test_delta = cfg.delta / four;
    let t = cfg.sigma * (T::from_usize_lossy(tail.len()) / (T::lit(2.0) * (four / test_delta).ln())).sqrt();
    let verdict = test_lightness_2d(tail, mu0[0], mu0[1], t, cfg.beta, cfg.l, cfg.sigma);
    Ok(TesterStage { mu0, verdict, t, tail_start: 2 * m, mom_delta })
}

/// Median-of-means initialization, a lightness test on the coordinate
/// axes, then the inlier-light or outlier-light estimator.
pub fn heavy_tailed_estimator_2d<T: Real>(samples: &[[T; 2]], cfg: &Estimator2DConfig<T>) -> Result<Estimate2D<T>> {
    let n = samples.len();
    let stage = tester_stage_2d(samples, cfg)?;
    let m = stage.tail_start / 2;
    let u = cfg.net.len();
    let four = T::lit(4.0);
    let second = &samples[m..2 * m];
    let tail = &samples[stage.tail_start..];
    let inits = cfg
        .net
        .vectors
        .par_iter()
        .map(|&v| median_of_means(&project(second, v), stage.mom_delta))
        .collect::<Result<Vec<T>>>()?;
    let n_tail = T::from_usize_lossy(tail.len());
    let mut budgets = vec![
        BudgetEntry { label: "mom-init", per_call: stage.mom_delta.to_f64_lossy(), calls: u + 2 },
        BudgetEntry { label: "lightness-test-2d", per_call: (cfg.delta / four).to_f64_lossy(), calls: 1 },
    ];
    let mut est = match stage.verdict.outcome {
        Outcome2D::Direction(_) => {
            let inner = cfg.delta / T::lit(8.0);
            budgets.push(BudgetEntry { label: "inlier-light-path", per_call: inner.to_f64_lossy(), calls: 1 });
            inlier_light_estimator_2d(tail, &inits, &cfg.at_delta(inner))?
        }
        Outcome2D::Bottom => {
            let outer = cfg.delta / four;
            budgets.push(BudgetEntry { label: "outlier-light-path", per_call: outer.to_f64_lossy(), calls: 1 });
            let t_out = cfg.sigma * (n_tail / (T::lit(2.0) * (T::lit(2.0) / outer).ln())).sqrt();
            outlier_light_estimator_2d_with(tail, stage.mu0, cfg.beta, t_out, cfg.trim_denominator)
        }
    };
    est.claimed_radius = cfg.claimed_radius(n);
    est.diagnostics.verdict = Some(stage.verdict);
    est.diagnostics.budgets = budgets;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Estimator2DConfig<f64> {
        Estimator2DConfig::new(0.01, 1.0).unwrap()
    }

    #[test]
    fn default_config_invariants() {
        let c = cfg();
        assert!(c.alpha_inlier < 1.0 && c.alpha_default > 1.0);
        assert!(c.tau > 0.0 && c.tau <= TAU_CAP);
        assert_eq!(c.net.len(), 8);
    }

    #[test]
    fn rejects_out_of_range_constants() {
        assert!(Estimator2DConfig::<f64>::builder(0.01, 1.0).beta(1.0 / 16.0).build().is_err());
        assert!(Estimator2DConfig::<f64>::builder(0.01, 1.0).l(0.2).build().is_err());
        assert!(Estimator2DConfig::<f64>::builder(0.01, 1.0).l(0.6).build().is_err());
        assert!(matches!(Estimator2DConfig::<f64>::builder(0.01, 1.0).xi(0.0).build(), Err(Error::InvalidXi(_))));
    }

    #[test]
    fn log_psi_needs_explicit_tau() {
        let b = Estimator2DConfig::<f64>::builder(0.01, 1.0).psi(PsiKind::CatoniUpperLog);
        assert!(matches!(b.clone().build(), Err(Error::NoImprovedSlack { .. })));
        assert!(b.tau(0.01).build().is_ok());
    }

    #[test]
    fn constant_samples_recovered() {
        let p = [1.25, -3.5];
        let est = heavy_tailed_estimator_2d(&vec![p; 5000], &cfg()).unwrap();
        assert!((est.value[0] - p[0]).abs() < 1e-9 && (est.value[1] - p[1]).abs() < 1e-9);
        let c = cfg();
        let inits: Vec<f64> = c.net.vectors.iter().map(|u| u[0] * p[0] + u[1] * p[1]).collect();
        let est = inlier_light_estimator_2d(&vec![p; 100], &inits, &c).unwrap();
        assert!((est.value[0] - p[0]).abs() < 1e-9 && (est.value[1] - p[1]).abs() < 1e-9);
    }

    #[test]
    fn trimming_rule() {
        let (beta, t) = (0.01f64, 100.0);
        let mut xs = vec![[0.0, 0.0]; 9];
        xs.push([10.0 * beta.sqrt() * t, 0.0]);
        let est = outlier_light_estimator_2d(&xs, [0.0, 0.0], beta, t);
        assert_eq!(est.value, [0.0, 0.0]);
        assert_eq!(est.diagnostics.trimmed, 1);
        let est = outlier_light_estimator_2d(&[[1.0, 2.0], [3.0, 4.0]], [2.0, 3.0], beta, t);
        assert_eq!(est.value, [2.0, 3.0]);
    }

    #[test]
    fn too_few_samples() {
        let r = heavy_tailed_estimator_2d(&vec![[0.0, 0.0]; 100], &cfg());
        assert!(matches!(r, Err(Error::TooFewSamples { .. })));
    }
}
