use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use tightmean::distributions::{sample, sample_1d, sample_2d};
use tightmean::estimators::{
    catoni, hd_estimator, heavy_tailed_estimator_2d, median_of_means, mom_batch_count, Estimator2DConfig, HdConfig,
};
use tightmean::psi::{PsiFunction, PsiKind};
use tightmean::rng::split_seed;

use crate::config::{ConfigError, EstimatorKind, ExperimentConfig};
use crate::dist::{parse_dist, ParsedDist};
use crate::report::{csv_hash, quantile, write_rows_to};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial_index: usize,
    pub seed: u64,
    pub estimator: String,
    pub path_taken: String,
    pub error_norm: f64,
    pub claimed_radius: f64,
    pub covered: bool,
    /// Cylinder feasibility certificate; empty for estimators without one.
    pub feasible: Option<bool>,
    pub wall_time_ms: f64,
}

/// Every column except `wall_time_ms`.
#[derive(Serialize)]
struct HashedRow<'a> {
    trial_index: usize,
    seed: u64,
    estimator: &'a str,
    path_taken: &'a str,
    error_norm: f64,
    claimed_radius: f64,
    covered: bool,
    feasible: Option<bool>,
}

pub fn determinism_hash(rows: &[TrialReport]) -> anyhow::Result<String> {
    let view: Vec<HashedRow<'_>> = rows
        .iter()
        .map(|r| HashedRow {
            trial_index: r.trial_index,
            seed: r.seed,
            estimator: &r.estimator,
            path_taken: &r.path_taken,
            error_norm: r.error_norm,
            claimed_radius: r.claimed_radius,
            covered: r.covered,
            feasible: r.feasible,
        })
        .collect();
    csv_hash(&view)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageSummary {
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub failure_rate: f64,
    /// `sigma sqrt(2 ln(2/delta) / n)`.
    pub rate: f64,
    /// Error quantile at level `1 - delta`.
    pub error_quantile: f64,
    /// `error_quantile / rate`.
    pub ratio: f64,
    pub quantiles: BTreeMap<String, f64>,
    pub paths: BTreeMap<String, usize>,
    pub feasible_rate: Option<f64>,
    pub determinism_hash: String,
}

#[derive(Clone, Debug)]
pub struct CoverageOutcome {
    pub rows: Vec<TrialReport>,
    pub summary: CoverageSummary,
}

/// Worker pool sized by `threads`, else by `TIGHTMEAN_THREADS`, else rayon's default.
pub fn worker_pool(threads: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let threads = match threads {
        Some(t) => t,
        None => match std::env::var("TIGHTMEAN_THREADS") {
            Ok(v) => v.trim().parse().map_err(|_| ConfigError(format!("TIGHTMEAN_THREADS=`{v}` is not a count")))?,
            Err(_) => 0,
        },
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

enum Prepared {
    Catoni(PsiFunction<f64>),
    Mom,
    Mean,
    Heavy2d(Box<Estimator2DConfig<f64>>),
    Hd(HdConfig<f64>),
}

fn prepare(cfg: &ExperimentConfig) -> anyhow::Result<Prepared> {
    let psi: PsiKind = cfg.psi.parse().map_err(|_| ConfigError(format!("unknown psi `{}`", cfg.psi)))?;
    Ok(match cfg.estimator {
        EstimatorKind::Catoni => Prepared::Catoni(PsiFunction::new(psi)),
        EstimatorKind::Mom => Prepared::Mom,
        EstimatorKind::Mean => Prepared::Mean,
        EstimatorKind::Heavy2d => {
            let mut b = Estimator2DConfig::builder(cfg.delta, cfg.sigma).xi(cfg.xi).psi(psi);
            if let Some(v) = cfg.beta {
                b = b.beta(v);
            }
            if let Some(v) = cfg.l {
                b = b.l(v);
            }
            if let Some(v) = cfg.tau {
                b = b.tau(v);
            }
            Prepared::Heavy2d(Box::new(b.build().map_err(|e| ConfigError(e.to_string()))?))
        }
        EstimatorKind::Hd => {
            let mut h = HdConfig { xi: cfg.xi, tau: cfg.tau, psi, ..HdConfig::default() };
            h.beta = cfg.beta.unwrap_or(h.beta);
            h.l = cfg.l.unwrap_or(h.l);
            Prepared::Hd(h)
        }
    })
}

struct Estimate {
    value: Vec<f64>,
    claimed_radius: f64,
    path: String,
    feasible: Option<bool>,
}

fn estimate(est: &Prepared, cfg: &ExperimentConfig, dist: &ParsedDist, seed: u64) -> anyhow::Result<Estimate> {
    let spec = dist.spec.with_seed(seed);
    let (n, delta, sigma) = (cfg.n, cfg.delta, cfg.sigma);
    Ok(match est {
        Prepared::Catoni(psi) => {
            let e = catoni(&sample_1d(&spec, n)?, delta, sigma, psi, cfg.xi)?;
            Estimate { value: vec![e.value], claimed_radius: e.half_width, path: "catoni".into(), feasible: None }
        }
        Prepared::Mom => {
            let v = median_of_means(&sample_1d(&spec, n)?, delta)?;
            // Chebyshev per batch plus Hoeffding over batches.
            let k = mom_batch_count(n, delta) as f64;
            Estimate {
                value: vec![v],
                claimed_radius: 2.0 * sigma * (k / n as f64).sqrt(),
                path: "mom".into(),
                feasible: None,
            }
        }
        Prepared::Mean => {
            let xs = sample(&spec, n)?;
            let d = cfg.dim;
            let mut m = vec![0.0; d];
            for x in &xs {
                m.iter_mut().zip(x).for_each(|(a, b)| *a += b);
            }
            m.iter_mut().for_each(|a| *a /= n as f64);
            // Chebyshev on the squared norm.
            let r = sigma * (d as f64 / (n as f64 * delta)).sqrt();
            Estimate { value: m, claimed_radius: r, path: "empirical".into(), feasible: None }
        }
        Prepared::Heavy2d(c) => {
            let e = heavy_tailed_estimator_2d(&sample_2d(&spec, n)?, c)?;
            Estimate {
                value: e.value.to_vec(),
                claimed_radius: e.claimed_radius,
                path: e.path.name().into(),
                feasible: None,
            }
        }
        Prepared::Hd(h) => {
            let e = hd_estimator(&sample(&spec, n)?, delta, sigma, h)?;
            let path = format!("frames:{}/inlier:{}", e.diagnostics.constraints.len(), e.diagnostics.inlier_frames);
            Estimate { value: e.value, claimed_radius: e.claimed_radius, path, feasible: Some(e.diagnostics.feasible) }
        }
    })
}

/// Runs the seeded trials and summarizes them; writes nothing.
pub fn run_coverage(cfg: &ExperimentConfig, threads: Option<usize>) -> anyhow::Result<CoverageOutcome> {
    cfg.validate()?;
    let dist = parse_dist(cfg)?;
    if dist.spec.dimension() != cfg.dim {
        return Err(
            ConfigError(format!("distribution has dimension {}, expected {}", dist.spec.dimension(), cfg.dim)).into()
        );
    }
    let est = prepare(cfg)?;
    let mean = dist.mean();
    let pool = worker_pool(threads)?;
    let mut rows = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| {
                let seed = split_seed(cfg.seed, i as u64);
                let start = Instant::now();
                let e = estimate(&est, cfg, &dist, seed)?;
                let err = e.value.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                Ok(TrialReport {
                    trial_index: i,
                    seed,
                    estimator: cfg.estimator.name().into(),
                    path_taken: e.path,
                    error_norm: err,
                    claimed_radius: e.claimed_radius,
                    covered: err <= e.claimed_radius,
                    feasible: e.feasible,
                    wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    rows.sort_by_key(|r| r.trial_index);
    let summary = summarize(cfg, &rows)?;
    Ok(CoverageOutcome { rows, summary })
}

fn summarize(cfg: &ExperimentConfig, rows: &[TrialReport]) -> anyhow::Result<CoverageSummary> {
    let m = rows.len() as f64;
    let errors: Vec<f64> = rows.iter().map(|r| r.error_norm).collect();
    let rate = cfg.sigma * (2.0 * (2.0 / cfg.delta).ln() / cfg.n as f64).sqrt();
    let error_quantile = quantile(&errors, 1.0 - cfg.delta);
    let quantiles = [0.5, 0.9, 0.95, 0.99].into_iter().map(|q| (format!("{q}"), quantile(&errors, q))).collect();
    let mut paths = BTreeMap::new();
    for r in rows {
        *paths.entry(r.path_taken.clone()).or_insert(0) += 1;
    }
    let flagged: Vec<bool> = rows.iter().filter_map(|r| r.feasible).collect();
    let feasible_rate =
        (!flagged.is_empty()).then(|| flagged.iter().filter(|&&f| f).count() as f64 / flagged.len() as f64);
    Ok(CoverageSummary {
        command: "coverage",
        config: cfg.clone(),
        failure_rate: rows.iter().filter(|r| !r.covered).count() as f64 / m,
        rate,
        error_quantile,
        ratio: error_quantile / rate,
        quantiles,
        paths,
        feasible_rate,
        determinism_hash: determinism_hash(rows)?,
    })
}

/// Runs trials, writes rows to `--out` if given, prints the summary. Exit 0
/// regardless of the statistics.
pub fn cmd_coverage(cfg: &ExperimentConfig) -> anyhow::Result<i32> {
    let out = run_coverage(cfg, None)?;
    write_rows_to(&out.rows, cfg.out.as_deref(), cfg.format)?;
    println!("{}", serde_json::to_string(&out.summary)?);
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;

    fn cfg(o: Overrides) -> ExperimentConfig {
        ExperimentConfig::resolve(o).unwrap()
    }

    #[test]
    fn point_mass_is_exact() {
        for est in [EstimatorKind::Catoni, EstimatorKind::Mom, EstimatorKind::Mean] {
            let c = cfg(Overrides {
                estimator: Some(est),
                dist: Some("point-mass:2.5".into()),
                trials: Some(1),
                ..Default::default()
            });
            let out = run_coverage(&c, Some(1)).unwrap();
            assert_eq!(out.rows[0].error_norm, 0.0);
            assert!(out.rows[0].covered);
        }
    }

    #[test]
    fn hash_ignores_wall_time_and_threads() {
        let c = cfg(Overrides { trials: Some(6), n: Some(5_000), ..Default::default() });
        let a = run_coverage(&c, Some(1)).unwrap();
        let b = run_coverage(&c, Some(3)).unwrap();
        assert_eq!(a.summary.determinism_hash, b.summary.determinism_hash);
        let mut rows = a.rows.clone();
        rows[0].wall_time_ms += 1.0;
        assert_eq!(determinism_hash(&rows).unwrap(), a.summary.determinism_hash);
        rows[0].error_norm += 1e-16;
        assert_ne!(determinism_hash(&rows).unwrap(), a.summary.determinism_hash);
    }

    #[test]
    fn seed_changes_rows() {
        let a = run_coverage(&cfg(Overrides { trials: Some(2), ..Default::default() }), Some(1)).unwrap();
        let b =
            run_coverage(&cfg(Overrides { trials: Some(2), seed: Some(9), ..Default::default() }), Some(1)).unwrap();
        assert_ne!(a.summary.determinism_hash, b.summary.determinism_hash);
    }
}
