use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

/// Invalid or inconsistent experiment parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// 1D median-of-means initialization plus one Catoni step.
    Catoni,
    /// 1D median of means.
    Mom,
    /// Empirical mean, any dimension.
    Mean,
    /// 2D heavy-tailed estimator.
    Heavy2d,
    /// High-dimensional estimator over a subspace net.
    Hd,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Catoni => "catoni",
            EstimatorKind::Mom => "mom",
            EstimatorKind::Mean => "mean",
            EstimatorKind::Heavy2d => "heavy2d",
            EstimatorKind::Hd => "hd",
        }
    }

    fn default_dim(self) -> usize {
        match self {
            EstimatorKind::Catoni | EstimatorKind::Mom | EstimatorKind::Mean => 1,
            EstimatorKind::Heavy2d => 2,
            EstimatorKind::Hd => 3,
        }
    }
}

/// Parameters accepted both as flags and as keys of a JSON config file.
/// Flags win over the file.
#[derive(Clone, Debug, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorKind>,
    /// gaussian[:mean], student-t[:dof], two-point[:multiple of T],
    /// inlier-light, point-mass[:value], or a path to a JSON distribution.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Influence function name, e.g. clipped-cubic-sqrt2.
    #[arg(long)]
    pub psi: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

macro_rules! merge_fields {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        Overrides { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl Overrides {
    pub fn over(self, lower: Overrides) -> Overrides {
        merge_fields!(
            self, lower, estimator, dist, n, delta, sigma, beta, l, xi, tau, psi, trials, seed, dim, eps, out, format
        )
    }

    pub fn from_json_file(path: &Path) -> anyhow::Result<Overrides> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub estimator: EstimatorKind,
    pub dist: String,
    pub n: usize,
    pub delta: f64,
    pub sigma: f64,
    pub beta: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub xi: f64,
    pub tau: Option<f64>,
    pub psi: String,
    pub trials: usize,
    pub seed: u64,
    pub dim: usize,
    pub eps: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn resolve(o: Overrides) -> Result<Self, ConfigError> {
        let estimator = o.estimator.unwrap_or(EstimatorKind::Catoni);
        let cfg = Self {
            estimator,
            dist: o.dist.unwrap_or_else(|| "gaussian".into()),
            n: o.n.unwrap_or(10_000),
            delta: o.delta.unwrap_or(0.01),
            sigma: o.sigma.unwrap_or(1.0),
            beta: o.beta,
            l: o.l,
            xi: o.xi.unwrap_or(tightmean::estimators::DEFAULT_XI),
            tau: o.tau,
            psi: o.psi.unwrap_or_else(|| tightmean::psi::PsiKind::ClippedCubicSqrt2.name().into()),
            trials: o.trials.unwrap_or(100),
            seed: o.seed.unwrap_or(0),
            dim: o.dim.unwrap_or(estimator.default_dim()),
            eps: o.eps,
            out: o.out,
            format: o.format.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.n == 0 || self.dim == 0 {
            return bad("n and dim must be positive");
        }
        if self.psi.parse::<tightmean::psi::PsiKind>().is_err() {
            return bad(format!("unknown psi `{}`", self.psi));
        }
        let dim_ok = match self.estimator {
            EstimatorKind::Catoni | EstimatorKind::Mom => self.dim == 1,
            EstimatorKind::Heavy2d => self.dim == 2,
            EstimatorKind::Hd => self.dim >= 2,
            EstimatorKind::Mean => true,
        };
        if !dim_ok {
            return bad(format!("estimator {} does not run in dimension {}", self.estimator.name(), self.dim));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: Overrides = serde_json::from_str(r#"{"n": 500, "delta": 0.05, "L": 0.3}"#).unwrap();
        let flags = Overrides { n: Some(700), ..Default::default() };
        let merged = flags.over(file);
        assert_eq!(merged.n, Some(700));
        assert_eq!(merged.delta, Some(0.05));
        assert_eq!(merged.l, Some(0.3));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<Overrides>(r#"{"samples": 5}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::resolve(Overrides { trials: Some(0), ..Default::default() }).is_err());
        assert!(ExperimentConfig::resolve(Overrides { delta: Some(1.5), ..Default::default() }).is_err());
        let o = Overrides { estimator: Some(EstimatorKind::Heavy2d), dim: Some(3), ..Default::default() };
        assert!(ExperimentConfig::resolve(o).is_err());
        let c =
            ExperimentConfig::resolve(Overrides { estimator: Some(EstimatorKind::Hd), ..Default::default() }).unwrap();
        assert_eq!(c.dim, 3);
    }
}
