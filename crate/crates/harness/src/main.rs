use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use weylab_harness::cache::SpectrumCache;
use weylab_harness::config::{ExperimentConfig, Kind};
use weylab_harness::runner::{default_out_dir, run, RunOptions};
use weylab_harness::{HarnessError, Result};

/// Numerical experiments on Weyl asymptotics for boundary-degenerate metrics.
#[derive(Debug, Parser)]
#[command(name = "weylab", version)]
struct Cli {
    /// Experiment kind; must match the `kind` field of the config.
    kind: String,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG overlay plot for curve kinds.
    #[arg(long)]
    svg: bool,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Spectrum cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
}

/// Exit status for failed checks in `report` mode.
const REPORT_FAILURE: u8 = 3;

fn parse_kind(s: &str) -> Result<Kind> {
    Kind::ALL
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| {
            let names: Vec<&str> = Kind::ALL.iter().map(Kind::as_str).collect();
            HarnessError::Validation(vec![format!(
                "kind: unknown `{s}`, expected one of {}",
                names.join(", ")
            )])
        })
}

fn open_cache(cli: &Cli, cfg: &ExperimentConfig) -> Result<Option<SpectrumCache>> {
    if !cfg.cache.enabled {
        return Ok(None);
    }
    match cli.cache.as_ref().or(cfg.cache.dir.as_ref()) {
        Some(dir) => Ok(Some(SpectrumCache::new(dir)?)),
        None => SpectrumCache::from_env(),
    }
}

fn main_inner(cli: &Cli) -> Result<u8> {
    let kind = parse_kind(&cli.kind)?;
    let cfg = ExperimentConfig::load(&cli.config)?;
    if cfg.kind != kind {
        return Err(HarnessError::Validation(vec![format!(
            "kind: command line says `{}` but config says `{}`",
            kind.as_str(),
            cfg.kind.as_str()
        )]));
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(HarnessError::Validation(vec![
                "jobs: must be at least 1".into()
            ]));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| HarnessError::Validation(vec![format!("jobs: {e}")]))?;
    }
    let cache = open_cache(cli, &cfg)?;
    let opts = RunOptions {
        out_dir: cli.out.clone().unwrap_or_else(|| default_out_dir(&cfg)),
        svg: cli.svg,
        cache: cache.as_ref(),
    };
    let outcome = run(&cfg, &opts)?;
    for p in &outcome.written {
        log::info!("wrote {}", p.display());
    }
    if outcome.failures.is_empty() {
        Ok(0)
    } else {
        for f in &outcome.failures {
            eprintln!("FAIL {f}");
        }
        Ok(REPORT_FAILURE)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if let HarnessError::Validation(list) = &e {
                for v in list {
                    eprintln!("error: {v}");
                }
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
