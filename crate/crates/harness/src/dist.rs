use std::path::Path;

use tightmean::distributions::{
    make_inlier_light_instance, DiscreteDistribution, Family, SamplerSpec, TWO_POINT_OUTLIER_SHARE,
};
use tightmean::estimators::{DEFAULT_BETA, DEFAULT_L};

use crate::config::{ConfigError, ExperimentConfig};

/// Distribution parsed from `--dist`, with everything needed to sample it
/// and to judge tester verdicts against the population.
#[derive(Clone, Debug)]
pub struct ParsedDist {
    pub spec: SamplerSpec,
    pub label: String,
}

impl ParsedDist {
    pub fn mean(&self) -> Vec<f64> {
        self.spec.mean()
    }

    pub fn discrete(&self) -> Option<&DiscreteDistribution<f64>> {
        match &self.spec.family {
            Family::Discrete(d) => Some(d),
            _ => None,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.spec.family, Family::Gaussian { .. })
    }
}

/// `sigma sqrt(n / (2 ln(2/delta)))`.
pub fn outlier_scale(n: usize, delta: f64, sigma: f64) -> f64 {
    sigma * (n as f64 / (2.0 * (2.0 / delta).ln())).sqrt()
}

fn arg(s: Option<&str>, default: f64, what: &str) -> Result<f64, ConfigError> {
    match s {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| ConfigError(format!("bad {what} `{v}`"))),
    }
}

pub fn parse_dist(cfg: &ExperimentConfig) -> Result<ParsedDist, ConfigError> {
    let (name, param) = match cfg.dist.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (cfg.dist.as_str(), None),
    };
    let (d, sigma) = (cfg.dim, cfg.sigma);
    let family = match name {
        "gaussian" => Family::Gaussian { mean: vec![arg(param, 0.0, "mean")?; d], sigma },
        "student-t" => {
            let dof = arg(param, 3.0, "dof")?;
            if dof <= 2.0 {
                return Err(ConfigError(format!("student-t needs dof > 2 for finite variance, got {dof}")));
            }
            Family::StudentT { dof, scale: sigma * ((dof - 2.0) / dof).sqrt(), d }
        }
        "two-point" => {
            let m = arg(param, 3.0, "outlier multiple")? * outlier_scale(cfg.n, cfg.delta, sigma);
            Family::TwoPointOutlier { m, sigma, d, axis: 0, share: TWO_POINT_OUTLIER_SHARE }
        }
        "point-mass" => Family::Discrete(DiscreteDistribution::point_mass(vec![arg(param, 0.0, "location")?; d])),
        "inlier-light" => {
            let inst = make_inlier_light_instance(
                cfg.beta.unwrap_or(DEFAULT_BETA),
                cfg.l.unwrap_or(DEFAULT_L),
                cfg.n,
                cfg.delta,
                sigma,
            )
            .map_err(|e| ConfigError(e.to_string()))?;
            match d {
                1 => Family::Discrete(inst.marginal(&[1.0, 0.0])),
                2 => Family::Discrete(inst),
                _ => return Err(ConfigError("inlier-light instance exists in dimension 1 or 2".into())),
            }
        }
        _ if name.ends_with(".json") || Path::new(&cfg.dist).is_file() => {
            let text = std::fs::read_to_string(&cfg.dist).map_err(|e| ConfigError(format!("{}: {e}", cfg.dist)))?;
            let law = DiscreteDistribution::from_json(&text).map_err(|e| ConfigError(format!("{}: {e}", cfg.dist)))?;
            if law.dimension != d {
                return Err(ConfigError(format!("{} has dimension {}, expected {d}", cfg.dist, law.dimension)));
            }
            Family::Discrete(law)
        }
        _ => return Err(ConfigError(format!("unknown distribution `{}`", cfg.dist))),
    };
    Ok(ParsedDist { spec: SamplerSpec::new(family, cfg.seed), label: cfg.dist.clone() })
}
