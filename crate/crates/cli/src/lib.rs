//! Configuration, dispatch and output for the `spinwave` command-line tool.
//!
//! Exit codes: `0` success, `1` computational refusal (instability, failed
//! numerics or a failed oracle check), `2` configuration or usage error.

pub mod commands;
pub mod config;
pub mod output;

use std::io::Write;

pub use commands::{dispatch, Artifact, Command, Report};
pub use config::{ConfigError, RunConfig};

/// Environment variable consulted when `--workers` is absent.
pub const WORKERS_ENV: &str = "SPINWAVE_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Compute(#[from] spinwave::Error),
    #[error("io error: {0}")]
    Io(String),
    #[error("usage error: {0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use spinwave::Error as E;
        match self {
            CliError::Compute(
                E::Unstable { .. }
                | E::NearCritical { .. }
                | E::Eigen(_)
                | E::NotPositiveDefinite(_)
                | E::Uncertainty { .. }
                | E::Quadrature { .. }
                | E::Fit(_),
            ) => 1,
            _ => 2,
        }
    }
}

/// Worker count: the flag, then the environment, then the config; 0 means
/// one per core.
pub fn resolve_workers(flag: Option<usize>, config: &RunConfig) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{WORKERS_ENV}='{v}' is not a non-negative integer"))),
        Err(_) => Ok(config.workers),
    }
}

/// Write artifacts: unnamed ones to `config.output` (`-` is stdout), named
/// ones to their paths. Returns the paths written.
pub fn write_report(report: &Report, config: &RunConfig) -> Result<Vec<String>, CliError> {
    let io = |e: std::io::Error, what: &str| CliError::Io(format!("{what}: {e}"));
    let mut written = Vec::new();
    for a in &report.artifacts {
        match &a.path {
            Some(path) => {
                if let Some(dir) = path.parent() {
                    std::fs::create_dir_all(dir).map_err(|e| io(e, &dir.display().to_string()))?;
                }
                std::fs::write(path, &a.content).map_err(|e| io(e, &path.display().to_string()))?;
                written.push(path.display().to_string());
            }
            None if config.output == "-" => {
                std::io::stdout()
                    .write_all(a.content.as_bytes())
                    .map_err(|e| io(e, "stdout"))?;
            }
            None => {
                std::fs::write(&config.output, &a.content).map_err(|e| io(e, &config.output))?;
                written.push(config.output.clone());
            }
        }
    }
    Ok(written)
}

/// Run `command` on a worker pool and write its outputs; returns the exit code.
pub fn execute(command: Command, config: &RunConfig, workers: usize) -> Result<i32, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))?;
    let report = pool.install(|| dispatch(command, config))?;
    for path in write_report(&report, config)? {
        eprintln!("wrote {path}");
    }
    if report.failures > 0 {
        eprintln!("{} check(s) failed", report.failures);
        return Ok(1);
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let unstable = CliError::Compute(spinwave::Error::Unstable {
            min_eigenvalue: -1.0,
            g_c: 1.74,
        });
        assert_eq!(unstable.exit_code(), 1);
        let cfg = CliError::from(RunConfig::parse("x = 1").unwrap_err());
        assert_eq!(cfg.exit_code(), 2);
        let arg = CliError::Compute(spinwave::Error::InvalidArgument("bad".into()));
        assert_eq!(arg.exit_code(), 2);
    }

    #[test]
    fn workers_flag_wins() {
        let mut c = RunConfig::default();
        c.workers = 3;
        assert_eq!(resolve_workers(Some(2), &c).unwrap(), 2);
    }
}
