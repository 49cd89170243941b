use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use tightmean::distributions::sample_2d;
use tightmean::estimators::{tester_stage_2d, Estimator2DConfig};
use tightmean::geometry::{brute_force_meb, check_generalized_jung, diameter, min_enclosing_ball};
use tightmean::lightness::{verdict_matches_oracle, Outcome2D, Population};
use tightmean::psi::{uniform_grid, verify_envelope_fn, PsiFunction, PsiKind, BASE_TOLERANCE};
use tightmean::rng::{rng_from_seed, split_seed};
use tightmean::robust::{
    mean_gap_bound_check, random_gap_pair, robust_lower_bound_check, robust_upper_bound_check, simplex_vertices,
};

use crate::config::{ConfigError, ExperimentConfig};
use crate::coverage::worker_pool;
use crate::dist::parse_dist;
use crate::report::write_rows_to;

pub const PSI_GRID_RANGE: f64 = 20.0;
pub const PSI_GRID_POINTS: usize = 1_000_000;
pub const ETA_SWEEP: [f64; 3] = [0.25, 0.125, 0.0625];
/// Tolerance for the geometry oracles.
pub const GEOMETRY_TOL: f64 = 1e-9;
pub const MEB_ORACLE_SETS: usize = 200;
pub const JUNG_SETS: usize = 100;
pub const GAP_PAIRS: usize = 500;
pub const ROBUST_GRID: [(usize, f64); 4] = [(1, 0.1), (2, 0.05), (3, 0.05), (100, 0.05)];

fn print_summary<S: Serialize>(s: &S) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(s)?);
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiRow {
    pub psi: String,
    pub check: &'static str,
    pub beta: Option<f64>,
    pub eta: Option<f64>,
    pub points: usize,
    pub violations: usize,
    pub max_violation: f64,
    pub passed: bool,
    pub note: String,
}

/// Base constraint for every shipped psi, then an eta sweep. Clipped cubic
/// forms must produce eta > 0 strictly decreasing in beta; the log forms sit
/// on the envelope and have no slack to report.
pub fn psi_check_rows(inject_broken: bool) -> Vec<PsiRow> {
    let grid = uniform_grid(-PSI_GRID_RANGE, PSI_GRID_RANGE, PSI_GRID_POINTS);
    let mut rows: Vec<PsiRow> = PsiKind::ALL
        .par_iter()
        .map(|&k| {
            let r = PsiFunction::<f64>::new(k).verify_base_constraint(&grid);
            PsiRow {
                psi: k.name().into(),
                check: "base",
                beta: None,
                eta: None,
                points: r.points_checked,
                violations: r.violations,
                max_violation: r.max_violation,
                passed: r.passed(),
                note: r.first_violation_at.map(|x| format!("first violation at {x}")).unwrap_or_default(),
            }
        })
        .collect();
    if inject_broken {
        let r = verify_envelope_fn(|x: f64| x, &grid, 0.0, BASE_TOLERANCE);
        rows.push(PsiRow {
            psi: "injected-identity".into(),
            check: "base",
            beta: None,
            eta: None,
            points: r.points_checked,
            violations: r.violations,
            max_violation: r.max_violation,
            passed: r.passed(),
            note: r.first_violation_at.map(|x| format!("first violation at {x}")).unwrap_or_default(),
        });
    }
    for k in PsiKind::ALL {
        let psi = PsiFunction::<f64>::new(k);
        let clipped = k.sup_abs::<f64>().is_some() && k != PsiKind::CatoniLowerLog;
        let etas: Vec<Option<f64>> = ETA_SWEEP.iter().map(|&b| psi.compute_eta(b).ok()).collect();
        for (&beta, eta) in ETA_SWEEP.iter().zip(&etas) {
            let passed = !clipped || eta.is_some_and(|e| e > 0.0);
            rows.push(PsiRow {
                psi: k.name().into(),
                check: "eta",
                beta: Some(beta),
                eta: *eta,
                points: 0,
                violations: usize::from(!passed),
                max_violation: 0.0,
                passed,
                note: if eta.is_none() { "no improved slack".into() } else { String::new() },
            });
        }
        if clipped {
            let decreasing = etas.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b < a));
            rows.push(PsiRow {
                psi: k.name().into(),
                check: "eta-monotone",
                beta: None,
                eta: None,
                points: etas.len(),
                violations: usize::from(!decreasing),
                max_violation: 0.0,
                passed: decreasing,
                note: String::new(),
            });
        }
    }
    rows
}

#[derive(Serialize)]
struct CheckSummary {
    command: &'static str,
    passed: bool,
    checks: usize,
    failed: usize,
    failures: Vec<String>,
}

fn summarize<R>(
    command: &'static str,
    rows: &[R],
    ok: impl Fn(&R) -> bool,
    label: impl Fn(&R) -> String,
) -> (bool, CheckSummary) {
    let failures: Vec<String> = rows.iter().filter(|r| !ok(r)).map(label).collect();
    let s = CheckSummary { command, passed: failures.is_empty(), checks: rows.len(), failed: failures.len(), failures };
    (s.passed, s)
}

pub fn cmd_psi_check(cfg: &ExperimentConfig, inject_broken: bool) -> anyhow::Result<i32> {
    let rows = psi_check_rows(inject_broken);
    write_rows_to(&rows, cfg.out.as_deref(), cfg.format)?;
    let (ok, s) = summarize("psi-check", &rows, |r| r.passed, |r| format!("{} {}", r.psi, r.check));
    print_summary(&s)?;
    Ok(if ok { 0 } else { 1 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TesterRow {
    pub trial_index: usize,
    pub seed: u64,
    /// `e1`, `e2` or `bottom`.
    pub verdict: String,
    pub statistic_e1: f64,
    pub statistic_e2: f64,
    pub threshold: f64,
    pub t: f64,
    pub oracle_agrees: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TesterSummary {
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub direction_rate: f64,
    pub bottom_rate: f64,
    pub oracle_agreement_rate: Option<f64>,
}

/// Runs the 2D tester stage per trial and scores each verdict against the
/// population when the law is discrete or Gaussian.
pub fn run_tester_eval(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
) -> anyhow::Result<(Vec<TesterRow>, TesterSummary)> {
    cfg.validate()?;
    if cfg.dim != 2 {
        return Err(ConfigError("tester-eval runs in dimension 2".into()).into());
    }
    let dist = parse_dist(cfg)?;
    let mut b = Estimator2DConfig::builder(cfg.delta, cfg.sigma).xi(cfg.xi);
    if let Some(v) = cfg.beta {
        b = b.beta(v);
    }
    if let Some(v) = cfg.l {
        b = b.l(v);
    }
    let est = b.build().map_err(|e| ConfigError(e.to_string()))?;
    let pop = match (dist.discrete(), dist.is_gaussian()) {
        (Some(d), _) => Some(Population::Discrete(d)),
        (None, true) => Some(Population::IsotropicGaussian { sigma: cfg.sigma }),
        _ => None,
    };
    let rows = worker_pool(threads)?.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| {
                let seed = split_seed(cfg.seed, i as u64);
                let xs = sample_2d(&dist.spec.with_seed(seed), cfg.n)?;
                let st = tester_stage_2d(&xs, &est)?;
                let v = st.verdict;
                Ok(TesterRow {
                    trial_index: i,
                    seed,
                    verdict: match v.outcome {
                        Outcome2D::Direction(j) => format!("e{}", j + 1),
                        Outcome2D::Bottom => "bottom".into(),
                    },
                    statistic_e1: v.per_axis[0].statistic,
                    statistic_e2: v.per_axis[1].statistic,
                    threshold: v.per_axis[0].threshold,
                    t: st.t,
                    oracle_agrees: pop.map(|p| verdict_matches_oracle(v.outcome, p, est.beta, est.l, st.t, cfg.sigma)),
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    let m = rows.len() as f64;
    let bottom = rows.iter().filter(|r| r.verdict == "bottom").count() as f64;
    let agree: Vec<bool> = rows.iter().filter_map(|r| r.oracle_agrees).collect();
    let summary = TesterSummary {
        command: "tester-eval",
        config: cfg.clone(),
        direction_rate: (m - bottom) / m,
        bottom_rate: bottom / m,
        oracle_agreement_rate: (!agree.is_empty())
            .then(|| agree.iter().filter(|&&a| a).count() as f64 / agree.len() as f64),
    };
    Ok((rows, summary))
}

pub fn cmd_tester_eval(cfg: &ExperimentConfig) -> anyhow::Result<i32> {
    let (rows, summary) = run_tester_eval(cfg, None)?;
    write_rows_to(&rows, cfg.out.as_deref(), cfg.format)?;
    print_summary(&summary)?;
    Ok(0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustRow {
    pub check: &'static str,
    pub d: usize,
    pub eps: f64,
    pub d_restricted: usize,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Lower and upper simplex checks on `grid`, plus the mean gap sweep.
pub fn robust_rows(grid: &[(usize, f64)], gap_pairs: usize, seed: u64) -> anyhow::Result<Vec<RobustRow>> {
    let mut rows = Vec::new();
    for &(d, eps) in grid {
        let lo = robust_lower_bound_check::<f64>(d, eps)?;
        let dr = lo.d_restricted;
        rows.push(RobustRow {
            check: "lower-minimum",
            d,
            eps,
            d_restricted: dr,
            value: lo.minimum.value,
            bound: lo.two_eps,
            passed: lo.minimum_ok,
        });
        rows.push(RobustRow {
            check: "lower-identity",
            d,
            eps,
            d_restricted: dr,
            value: lo.identity_residual,
            bound: 1e-12,
            passed: lo.identity_ok,
        });
        rows.push(RobustRow {
            check: "lower-constant",
            d,
            eps,
            d_restricted: dr,
            value: lo.constant,
            bound: std::f64::consts::SQRT_2 * (1.0 - eps),
            passed: lo.restricted_floor_ok,
        });
        let up = robust_upper_bound_check::<f64>(dr, eps)?;
        rows.push(RobustRow {
            check: "upper-meb",
            d,
            eps,
            d_restricted: dr,
            value: up.max_error,
            bound: up.relaxed_bound,
            passed: up.passed(),
        });
    }
    if gap_pairs > 0 {
        let reports = (0..gap_pairs as u64)
            .into_par_iter()
            .map(|i| {
                let (p, q) = random_gap_pair(split_seed(seed, i));
                mean_gap_bound_check(&p, &q)
            })
            .collect::<tightmean::Result<Vec<_>>>()?;
        let worst = reports.iter().map(|r| r.gap - r.bound).fold(f64::NEG_INFINITY, f64::max);
        rows.push(RobustRow {
            check: "mean-gap",
            d: 1,
            eps: reports.iter().map(|r| r.eps).fold(0.0, f64::max),
            d_restricted: 1,
            value: worst,
            bound: 0.0,
            passed: reports.iter().all(|r| r.holds),
        });
    }
    Ok(rows)
}

pub fn cmd_robust_verify(cfg: &ExperimentConfig, explicit: Option<(usize, f64)>) -> anyhow::Result<i32> {
    let grid: Vec<(usize, f64)> = explicit.map_or_else(|| ROBUST_GRID.to_vec(), |p| vec![p]);
    let rows = robust_rows(&grid, GAP_PAIRS, cfg.seed)?;
    write_rows_to(&rows, cfg.out.as_deref(), cfg.format)?;
    let (ok, s) = summarize("robust-verify", &rows, |r| r.passed, |r| format!("{} d={} eps={}", r.check, r.d, r.eps));
    print_summary(&s)?;
    Ok(if ok { 0 } else { 1 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryRow {
    pub check: &'static str,
    pub instance: usize,
    pub dim: usize,
    pub points: usize,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

fn random_set(seed: u64, dim: usize, max_points: usize) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    let k = rng.gen_range(2..=max_points);
    (0..k).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

fn jung_row(check: &'static str, instance: usize, pts: &[Vec<f64>]) -> anyhow::Result<GeometryRow> {
    let d = pts[0].len();
    let r = min_enclosing_ball::<f64, _>(pts)?.radius;
    let bound = diameter::<f64, _>(pts) * (d as f64 / (2.0 * (d as f64 + 1.0))).sqrt();
    Ok(GeometryRow { check, instance, dim: d, points: pts.len(), value: r, bound, passed: r <= bound + GEOMETRY_TOL })
}

fn equality_row(check: &'static str, pts: &[Vec<f64>]) -> anyhow::Result<GeometryRow> {
    let mut row = jung_row(check, 0, pts)?;
    row.passed = (row.value - row.bound).abs() <= GEOMETRY_TOL;
    Ok(row)
}

/// Equality cases, the brute-force MEB oracle, Jung on random sets and a
/// few generalized Jung comparisons.
pub fn geometry_rows(seed: u64) -> anyhow::Result<Vec<GeometryRow>> {
    let h = 3f64.sqrt() / 2.0;
    let mut rows = vec![
        equality_row("equilateral", &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]])?,
        equality_row("regular-simplex-3d", &simplex_vertices::<f64>(3))?,
    ];
    let pair = [vec![-1.0, 0.5], vec![2.0, 4.5]];
    let r = min_enclosing_ball::<f64, _>(&pair)?.radius;
    rows.push(GeometryRow {
        check: "two-point",
        instance: 0,
        dim: 2,
        points: 2,
        value: r,
        bound: 2.5,
        passed: (r - 2.5).abs() <= GEOMETRY_TOL,
    });
    let meb = (0..MEB_ORACLE_SETS)
        .into_par_iter()
        .map(|i| {
            let pts = random_set(split_seed(seed, i as u64), 2, 12);
            let a = min_enclosing_ball::<f64, _>(&pts)?;
            let b = brute_force_meb::<f64, _>(&pts)?;
            let gap = (a.radius - b.radius).abs();
            Ok(GeometryRow {
                check: "meb-oracle",
                instance: i,
                dim: 2,
                points: pts.len(),
                value: gap,
                bound: GEOMETRY_TOL,
                passed: gap <= GEOMETRY_TOL,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    rows.extend(meb);
    for dim in [2, 3] {
        let salt = split_seed(seed ^ 0x6a09_e667, dim as u64);
        let jung = (0..JUNG_SETS)
            .into_par_iter()
            .map(|i| jung_row("jung", i, &random_set(split_seed(salt, i as u64), dim, 20)))
            .collect::<anyhow::Result<Vec<_>>>()?;
        rows.extend(jung);
    }
    for (i, (a, b)) in [(3usize, 2usize), (2, 1), (3, 1)].into_iter().enumerate() {
        let pts = random_set(split_seed(seed ^ 0xbb67_ae85, i as u64), 3, 10);
        let r = check_generalized_jung::<f64, _>(&pts, a, b, 400, split_seed(seed, 77 + i as u64))?;
        rows.push(GeometryRow {
            check: "generalized-jung",
            instance: i,
            dim: 3,
            points: pts.len(),
            value: r.r_i,
            bound: r.factor * r.r_j_hat + r.tolerance,
            passed: r.passed,
        });
    }
    Ok(rows)
}

pub fn cmd_geometry_verify(cfg: &ExperimentConfig) -> anyhow::Result<i32> {
    let rows = geometry_rows(cfg.seed)?;
    write_rows_to(&rows, cfg.out.as_deref(), cfg.format)?;
    let (ok, s) =
        summarize("geometry-verify", &rows, |r| r.passed, |r| format!("{} #{} d={}", r.check, r.instance, r.dim));
    print_summary(&s)?;
    Ok(if ok { 0 } else { 1 })
}
