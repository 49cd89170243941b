use proptest::prelude::*;
use tightmean::distributions::{
    inlier_moment, is_inlier_light, is_outlier_light, outlier_moment_1d, DiscreteDistribution,
};
use tightmean::estimators::{
    catoni_local, heavy_tailed_estimator_2d, median_of_means, outlier_light_estimator_2d, CatoniParams,
    Estimator2DConfig, Path,
};
use tightmean::geometry::{brute_force_meb, intersect_strips, min_enclosing_ball, Strip};
use tightmean::lightness::test_lightness_1d;
use tightmean::psi::{uniform_grid, PsiFunction, PsiKind};
use tightmean::robust::{simplex_mean_distance, simplex_vertices, tv_distance};
use tightmean::scalar::jung_constant;

fn kinds() -> impl Strategy<Value = PsiKind> {
    prop::sample::select(PsiKind::ALL.to_vec())
}

fn points(d: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, d), 1..=max)
}

fn discrete_1d() -> impl Strategy<Value = DiscreteDistribution<f64>> {
    prop::collection::vec((-20.0..20.0f64, 0.01..1.0f64), 1..8).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        DiscreteDistribution {
            dimension: 1,
            support: atoms.iter().map(|a| vec![a.0]).collect(),
            probs: atoms.iter().map(|a| a.1 / total).collect(),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_is_odd(kind in kinds(), x in -50.0..50.0f64) {
        prop_assert!((kind.eval(x) + kind.eval(-x)).abs() <= 1e-14);
    }

    #[test]
    fn psi_is_monotone(kind in kinds(), a in -50.0..50.0f64, b in -50.0..50.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(kind.eval(lo) <= kind.eval(hi));
    }

    #[test]
    fn bounded_psi_respects_sup(kind in kinds(), x in -1e6..1e6f64) {
        if let Some(s) = kind.sup_abs::<f64>() {
            prop_assert!(kind.eval(x).abs() <= s + 1e-15);
        }
    }

    #[test]
    fn meb_contains_all_points(pts in points(3, 15)) {
        let b = min_enclosing_ball::<f64, _>(&pts).unwrap();
        for p in &pts {
            prop_assert!(b.contains(p, 1e-9));
        }
    }

    #[test]
    fn meb_matches_brute_force_2d(pts in points(2, 12)) {
        let a = min_enclosing_ball::<f64, _>(&pts).unwrap();
        let b = brute_force_meb::<f64, _>(&pts).unwrap();
        prop_assert!((a.radius - b.radius).abs() <= 1e-9, "{} vs {}", a.radius, b.radius);
    }

    #[test]
    fn strip_polygon_is_sound(
        strips in prop::collection::vec((0.0..std::f64::consts::PI, -1.0..1.0f64, 0.5..3.0f64), 1..10),
        probes in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 20),
    ) {
        let strips: Vec<Strip<f64>> = strips
            .into_iter()
            .map(|(a, c, w)| Strip { direction: [a.cos(), a.sin()], center: c, half_width: w })
            .collect();
        let region = intersect_strips(&strips);
        for v in &region.vertices {
            for s in &strips {
                prop_assert!(s.violation(*v) <= 1e-9);
            }
        }
        if region.vertices.len() >= 3 {
            // Convex combinations of the first vertex with consecutive pairs.
            let vs = &region.vertices;
            for (k, (u, w)) in probes.iter().enumerate() {
                let i = 1 + k % (vs.len() - 2);
                let (a, b) = (u * w, u * (1.0 - w));
                let c = 1.0 - a - b;
                let p = [c * vs[0][0] + a * vs[i][0] + b * vs[i + 1][0], c * vs[0][1] + a * vs[i][1] + b * vs[i + 1][1]];
                for s in &strips {
                    prop_assert!(s.violation(p) <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn catoni_local_translation_equivariant(
        xs in prop::collection::vec(-5.0..5.0f64, 1..50),
        shift in -1024i32..1024,
    ) {
        // Power-of-two scale and integer shifts keep every operation exact.
        let c = shift as f64 / 8.0;
        let psi = PsiFunction::new(PsiKind::ClippedCubicSqrt2);
        let params = CatoniParams::with_scale(1.0, 0.05, 4.0).unwrap();
        let base = catoni_local(&xs, 0.0, &psi, &params).value;
        let moved: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let shifted = catoni_local(&moved, c, &psi, &params).value;
        prop_assert!((shifted - (base + c)).abs() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn catoni_local_is_bounded(kind in kinds(), xs in prop::collection::vec(-1e4..1e4f64, 1..50), mu0 in -10.0..10.0f64) {
        let psi = PsiFunction::new(kind);
        let params = CatoniParams::new(1.0, 0.05, xs.len()).unwrap();
        let v = catoni_local(&xs, mu0, &psi, &params).value;
        if let Some(s) = kind.sup_abs::<f64>() {
            prop_assert!((v - mu0).abs() <= params.t * s * (1.0 + 1e-12));
        }
    }

    #[test]
    fn catoni_local_monotone_in_one_sample(
        xs in prop::collection::vec(-5.0..5.0f64, 1..30),
        i in 0usize..30,
        bump in 0.0..10.0f64,
    ) {
        let psi = PsiFunction::new(PsiKind::ClippedCubicSqrt2);
        let params = CatoniParams::new(1.0, 0.05, xs.len()).unwrap();
        let mut ys = xs.clone();
        let i = i % xs.len();
        ys[i] += bump;
        prop_assert!(catoni_local(&ys, 0.0, &psi, &params).value >= catoni_local(&xs, 0.0, &psi, &params).value);
    }

    #[test]
    fn mom_within_sample_range(xs in prop::collection::vec(-100.0..100.0f64, 1..200), delta in 0.001..0.5f64) {
        let m = median_of_means(&xs, delta).unwrap();
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo - 1e-9 <= m && m <= hi + 1e-9);
    }

    #[test]
    fn lowering_l_never_makes_inlier_light(
        xs in prop::collection::vec(-5.0..5.0f64, 1..100),
        l_hi in 0.0..0.5f64,
        gap in 0.0..0.5f64,
    ) {
        let l_lo = (l_hi - gap).max(0.0);
        let strict = test_lightness_1d(&xs, 0.0, 10.0, 0.2, l_hi, 1.0);
        let loose = test_lightness_1d(&xs, 0.0, 10.0, 0.2, l_lo, 1.0);
        // Threshold (1 - 2L) sigma² grows as L falls, so strict inlier implies loose inlier.
        prop_assert!(!strict.is_inlier_light() || loose.is_inlier_light());
        prop_assert_eq!(strict.statistic, loose.statistic);
        prop_assert_eq!(test_lightness_1d(&xs, 0.0, 10.0, 0.2, l_hi, 1.0), strict);
    }

    #[test]
    fn truncated_moments_are_complementary(d in discrete_1d(), beta in 0.01..1.0f64, t in 0.5..30.0f64, l in 0.0..0.99f64) {
        let var = d.moments().covariance[0][0];
        let (im, om) = (inlier_moment(&d, beta, t), outlier_moment_1d(&d, beta, t));
        prop_assert!((im + om - var).abs() <= 1e-9 * (1.0 + var));
        // Both predicates failing would need im + om >= (1 - L + L') sigma² > sigma².
        let sigma = var.sqrt().max(1e-6);
        let l_out = l + 1e-6;
        prop_assert!(is_inlier_light(&d, beta, l, t, sigma) || is_outlier_light(&d, beta, l_out, t, sigma, 0));
    }

    #[test]
    fn outlier_path_is_odd(xs in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 1..60), mu in (-1.0..1.0f64, -1.0..1.0f64)) {
        let s: Vec<[f64; 2]> = xs.iter().map(|p| [p.0, p.1]).collect();
        let neg: Vec<[f64; 2]> = s.iter().map(|p| [-p[0], -p[1]]).collect();
        let a = outlier_light_estimator_2d(&s, [mu.0, mu.1], 0.01, 100.0);
        let b = outlier_light_estimator_2d(&neg, [-mu.0, -mu.1], 0.01, 100.0);
        prop_assert_eq!(a.value, [-b.value[0], -b.value[1]]);
    }

    #[test]
    fn tv_is_a_metric(p in discrete_1d(), q in discrete_1d(), r in discrete_1d()) {
        let pq = tv_distance(&p, &q).unwrap();
        let qp = tv_distance(&q, &p).unwrap();
        let pr = tv_distance(&p, &r).unwrap();
        let qr = tv_distance(&q, &r).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-12);
        prop_assert!(pr <= pq + qr + 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&pq));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn pipeline_budget_within_delta(seed in any::<u64>(), delta in 0.005..0.2f64) {
        use tightmean::distributions::{sample_2d, Family, SamplerSpec};
        let cfg = Estimator2DConfig::new(delta, 1.0).unwrap();
        let spec = SamplerSpec::new(Family::Gaussian { mean: vec![0.0, 0.0], sigma: 1.0 }, seed);
        let xs = sample_2d(&spec, 20_000).unwrap();
        let est = heavy_tailed_estimator_2d(&xs, &cfg).unwrap();
        prop_assert!(est.diagnostics.total_budget() <= delta * (1.0 + 1e-12));
        prop_assert!(est.diagnostics.verdict.is_some());
        if est.path == Path::InlierLight {
            prop_assert_eq!(est.diagnostics.strips.len(), cfg.net.len());
        }
    }
}

#[test]
fn psi_grid_oddness_and_order() {
    let grid = uniform_grid(-20.0, 20.0, 100_001);
    for kind in PsiKind::ALL {
        let vals: Vec<f64> = grid.iter().map(|&x| kind.eval(x)).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{kind:?} not monotone");
        assert!(grid.iter().all(|&x| (kind.eval(x) + kind.eval(-x)).abs() <= 1e-14));
    }
}

#[test]
fn eta_nondecreasing_in_beta() {
    let psi = PsiFunction::<f64>::new(PsiKind::ClippedCubicSqrt2);
    let betas = [0.01, 1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 0.25];
    let etas: Vec<f64> = betas.iter().map(|&b| psi.compute_eta(b).unwrap()).collect();
    assert!(etas.windows(2).all(|w| w[0] <= w[1]), "{etas:?}");
}

#[test]
fn stored_certificates_reverify_on_random_grid() {
    use rand::Rng;
    let psi = PsiFunction::<f64>::new(PsiKind::ClippedCubicSqrt2)
        .with_eta_certificate(0.125)
        .unwrap()
        .with_eta_certificate(0.25)
        .unwrap();
    let mut rng = tightmean::rng::rng_from_seed(99);
    let grid: Vec<f64> = (0..200_000).map(|_| rng.gen_range(-40.0..40.0)).collect();
    for c in psi.certificates() {
        assert!(psi.verify_improved_constraint(c.beta, c.eta, &grid).passed(), "{c:?}");
    }
}

#[test]
fn jung_constant_increases_below_sqrt2() {
    let js: Vec<f64> = (1..200).map(jung_constant::<f64>).collect();
    assert!(js.windows(2).all(|w| w[0] < w[1]));
    assert!(js.iter().all(|&j| j < std::f64::consts::SQRT_2));
}

#[test]
fn simplex_distance_lower_bound_sweep() {
    use rand::Rng;
    let mut rng = tightmean::rng::rng_from_seed(5);
    for d in 1..=5 {
        let v = simplex_vertices::<f64>(d);
        for _ in 0..10_000 {
            let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
            assert!(simplex_mean_distance(&v, &u) >= 1.0 - 1e-12);
        }
    }
}
