use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tightmean_harness::{
    cmd_coverage, cmd_geometry_verify, cmd_psi_check, cmd_robust_verify, cmd_tester_eval, exit_code_for, EstimatorKind,
    ExperimentConfig, Overrides,
};

#[derive(Parser)]
#[command(name = "tightmean", version, about = "Mean estimation experiments and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Check every shipped influence function against the envelope bounds.
    PsiCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true)]
        inject_broken_psi: bool,
    },
    /// Monte Carlo error and coverage of an estimator.
    Coverage(Common),
    /// Verdict frequencies of the 2D lightness tester, scored against the population.
    TesterEval(Common),
    /// Simplex lower bound, Jung-center upper bound and mean gap checks.
    RobustVerify(Common),
    /// Minimum enclosing ball oracle and Jung inequality suites.
    GeometryVerify(Common),
}

fn resolve(common: Common, defaults: Overrides) -> anyhow::Result<ExperimentConfig> {
    let file = match &common.config {
        Some(p) => Overrides::from_json_file(p)?,
        None => Overrides::default(),
    };
    Ok(ExperimentConfig::resolve(common.flags.over(file).over(defaults))?)
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::PsiCheck { common, inject_broken_psi } => {
            cmd_psi_check(&resolve(common, Overrides::default())?, inject_broken_psi)
        }
        Command::Coverage(common) => cmd_coverage(&resolve(common, Overrides::default())?),
        Command::TesterEval(common) => {
            let defaults = Overrides {
                estimator: Some(EstimatorKind::Heavy2d),
                dist: Some("inlier-light".into()),
                n: Some(100_000),
                ..Default::default()
            };
            cmd_tester_eval(&resolve(common, defaults)?)
        }
        Command::RobustVerify(common) => {
            let explicit = (common.flags.dim, common.flags.eps);
            let cfg = resolve(common, Overrides { estimator: Some(EstimatorKind::Mean), ..Default::default() })?;
            let pair = match explicit {
                (Some(d), Some(e)) => Some((d, e)),
                (None, None) => None,
                _ => return Err(tightmean_harness::ConfigError("give both --dim and --eps, or neither".into()).into()),
            };
            cmd_robust_verify(&cfg, pair)
        }
        Command::GeometryVerify(common) => cmd_geometry_verify(&resolve(common, Overrides::default())?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
