use rayon::prelude::*;
use tightmean::distributions::{
    make_inlier_light_instance, sample, sample_1d, sample_2d, two_point_outlier_distribution, Family, SamplerSpec,
};
use tightmean::estimators::{
    catoni, catoni_local, hd_estimator, heavy_tailed_estimator_2d, median_of_means, tester_stage_2d, CatoniParams,
    Estimator2DConfig, HdConfig, Path, DEFAULT_BETA, DEFAULT_L,
};
use tightmean::lightness::{test_lightness_1d, verdict_matches_oracle, Outcome2D, Population};
use tightmean::psi::{PsiFunction, PsiKind};
use tightmean::rng::split_seed;
use tightmean::scalar::jung_constant;

fn quantile(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn catoni_gaussian_coverage() {
    let (n, delta) = (100_000, 0.01);
    let psi = PsiFunction::new(PsiKind::ClippedCubicSqrt2);
    let spec = SamplerSpec::new(Family::Gaussian { mean: vec![3.0], sigma: 1.0 }, 0);
    let misses = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            let xs = sample_1d(&spec.with_seed(split_seed(31, i)), n).unwrap();
            let e = catoni(&xs, delta, 1.0, &psi, 0.05).unwrap();
            (e.value - 3.0).abs() > e.half_width
        })
        .count();
    assert!(misses as f64 / 1000.0 <= 3.0 * delta, "{misses} misses");
}

#[test]
fn clipped_psi_beats_unbounded_log_on_inlier_light_law() {
    let (n, delta) = (100_000, 0.01);
    let inst = make_inlier_light_instance(DEFAULT_BETA, DEFAULT_L, n, delta, 1.0).unwrap();
    let spec = SamplerSpec::new(Family::Discrete(inst.marginal(&[1.0, 0.0])), 0);
    let params = CatoniParams::new(1.0, delta, n).unwrap();
    let clipped = PsiFunction::new(PsiKind::ClippedCubicSqrt2);
    let log = PsiFunction::new(PsiKind::CatoniUpperLog);
    let errs: Vec<(f64, f64)> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let xs = sample_1d(&spec.with_seed(split_seed(32, i)), n).unwrap();
            (catoni_local(&xs, 0.0, &clipped, &params).value.abs(), catoni_local(&xs, 0.0, &log, &params).value.abs())
        })
        .collect();
    let a = quantile(errs.iter().map(|e| e.0).collect(), 1.0 - delta);
    let b = quantile(errs.iter().map(|e| e.1).collect(), 1.0 - delta);
    assert!(a < b, "clipped {a} vs log {b}");
}

#[test]
fn catoni_beats_mom_on_two_point_outliers() {
    let (n, delta) = (100_000, 0.01);
    let t = (n as f64 / (2.0 * (2.0f64 / delta).ln())).sqrt();
    let law = two_point_outlier_distribution(3.0 * t, 1.0, 0.5).unwrap();
    let spec = SamplerSpec::new(Family::Discrete(law), 0);
    let psi = PsiFunction::new(PsiKind::ClippedCubicSqrt2);
    let errs: Vec<(f64, f64)> = (0..400u64)
        .into_par_iter()
        .map(|i| {
            let xs = sample_1d(&spec.with_seed(split_seed(33, i)), n).unwrap();
            (catoni(&xs, delta, 1.0, &psi, 0.05).unwrap().value.abs(), median_of_means(&xs, delta).unwrap().abs())
        })
        .collect();
    let c = quantile(errs.iter().map(|e| e.0).collect(), 0.99);
    let m = quantile(errs.iter().map(|e| e.1).collect(), 0.99);
    assert!(c < m, "catoni {c} vs mom {m}");
}

#[test]
fn gaussian_1d_tester_reports_outlier_light() {
    let n = 100_000;
    let t = (n as f64 / (2.0 * 200f64.ln())).sqrt();
    let beta = 0.1;
    assert!(2.0 * beta * t > 5.0);
    let spec = SamplerSpec::new(Family::Gaussian { mean: vec![0.0], sigma: 1.0 }, 0);
    let hits = (0..500u64)
        .into_par_iter()
        .filter(|&i| {
            let xs = sample_1d(&spec.with_seed(split_seed(34, i)), n).unwrap();
            !test_lightness_1d(&xs, 0.0, t, beta, 0.1, 1.0).is_inlier_light()
        })
        .count();
    assert!(hits >= 495, "{hits}/500");
}

#[test]
fn tester_verdicts_agree_with_oracle() {
    let (n, delta) = (100_000, 0.01);
    let cfg = Estimator2DConfig::new(delta, 1.0).unwrap();
    let inst = make_inlier_light_instance(cfg.beta, cfg.l, n, delta, 1.0).unwrap();
    let gauss = SamplerSpec::new(Family::Gaussian { mean: vec![0.0, 0.0], sigma: 1.0 }, 0);
    let light = SamplerSpec::new(Family::Discrete(inst.clone()), 0);
    let run = |spec: &SamplerSpec, pop: Population<'_, f64>, salt: u64| {
        (0..200u64)
            .into_par_iter()
            .map(|i| {
                let xs = sample_2d(&spec.with_seed(split_seed(salt, i)), n).unwrap();
                let st = tester_stage_2d(&xs, &cfg).unwrap();
                let ok = verdict_matches_oracle(st.verdict.outcome, pop, cfg.beta, cfg.l, st.t, 1.0);
                (st.verdict.outcome, ok)
            })
            .collect::<Vec<_>>()
    };
    let g = run(&gauss, Population::IsotropicGaussian { sigma: 1.0 }, 35);
    let l = run(&light, Population::Discrete(&inst), 36);
    assert!(g.iter().filter(|r| r.0 == Outcome2D::Bottom).count() >= 198);
    assert!(l.iter().filter(|r| r.0 == Outcome2D::Direction(0)).count() >= 198);
    assert!(g.iter().chain(&l).filter(|r| r.1).count() >= 396);
}

#[test]
fn two_d_estimator_beats_jung_factor() {
    let (n, delta) = (100_000, 0.01);
    let cfg = Estimator2DConfig::new(delta, 1.0).unwrap();
    let inst = make_inlier_light_instance(cfg.beta, cfg.l, n, delta, 1.0).unwrap();
    let specs = [
        (SamplerSpec::new(Family::Gaussian { mean: vec![0.0, 0.0], sigma: 1.0 }, 0), Path::OutlierLight),
        (SamplerSpec::new(Family::Discrete(inst), 0), Path::InlierLight),
    ];
    for (k, (spec, expected)) in specs.iter().enumerate() {
        let out: Vec<(f64, Path, bool)> = (0..200u64)
            .into_par_iter()
            .map(|i| {
                let xs = sample_2d(&spec.with_seed(split_seed(37 + k as u64, i)), n).unwrap();
                let e = heavy_tailed_estimator_2d(&xs, &cfg).unwrap();
                let strips_ok = e.diagnostics.region_empty
                    || e.diagnostics.strips.iter().all(|s| {
                        (s.direction[0] * e.value[0] + s.direction[1] * e.value[1] - s.estimate).abs()
                            <= s.half_width + 1e-9
                    });
                (norm(&e.value) / cfg.rate(n), e.path, strips_ok && e.diagnostics.total_budget() <= delta)
            })
            .collect();
        assert!(out.iter().all(|o| o.2));
        assert!(out.iter().filter(|o| o.1 == *expected).count() >= 198);
        let q = quantile(out.iter().map(|o| o.0).collect(), 1.0 - delta);
        assert!(q < jung_constant::<f64>(2), "law {k}: ratio {q}");
    }
}

#[test]
fn high_d_degenerates_to_2d() {
    let spec = SamplerSpec::new(Family::StudentT { dof: 3.0, scale: 0.5, d: 2 }, 41);
    let xs = sample(&spec, 20_000).unwrap();
    let flat: Vec<[f64; 2]> = xs.iter().map(|x| [x[0], x[1]]).collect();
    let hd = hd_estimator(&xs, 0.05, 1.0, &HdConfig::default()).unwrap();
    let cfg = Estimator2DConfig::new(0.05, 1.0).unwrap();
    let two = heavy_tailed_estimator_2d(&flat, &cfg).unwrap();
    assert_eq!(hd.value, two.value.to_vec());
    assert_eq!(hd.diagnostics.constraints.len(), 1);
}

#[test]
fn high_d_gaussian_smoke() {
    let (n, delta, d) = (20_000, 0.05, 3);
    let spec = SamplerSpec::new(Family::Gaussian { mean: vec![1.0, -2.0, 0.5], sigma: 1.0 }, 0);
    let rate = (2.0 * (2.0f64 / delta).ln() / n as f64).sqrt();
    let out: Vec<(f64, bool)> = (0..40u64)
        .into_par_iter()
        .map(|i| {
            let xs = sample(&spec.with_seed(split_seed(42, i)), n).unwrap();
            let e = hd_estimator(&xs, delta, 1.0, &HdConfig::default()).unwrap();
            let diag = &e.diagnostics;
            if diag.feasible {
                assert!(diag.constraints.iter().all(|c| c.excess(&e.value) <= diag.tolerance));
            }
            let r = diag.constraints[0].radius;
            assert!((e.claimed_radius - jung_constant::<f64>(d) / jung_constant::<f64>(2) * r).abs() <= 1e-15);
            let err = norm(&[e.value[0] - 1.0, e.value[1] + 2.0, e.value[2] - 0.5]);
            (err / rate, diag.feasible)
        })
        .collect();
    assert!(out.iter().filter(|o| o.1).count() >= 38);
    let q = quantile(out.iter().map(|o| o.0).collect(), 0.95);
    assert!(q <= 1.1 * jung_constant::<f64>(d), "ratio {q}");
}
