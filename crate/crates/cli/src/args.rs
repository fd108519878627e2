use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tsync::Preset;

pub const OUT_ENV: &str = "TSYNC_OUT";

#[derive(Debug, Parser)]
#[command(name = "tsync", version, about = "Broadcast-gossip clock synchronization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every seed of an experiment and write traces and metrics.
    Run(RunArgs),
    /// Run an experiment over several network sizes.
    Scaling(ScalingArgs),
    /// Analyze the artifacts of a previous `run`.
    Report(ReportArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Experiment config file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in preset, see `tsync presets`.
    #[arg(long)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Seeds: `3`, `0,4,7`, `0..10`, or empty for none.
    #[arg(long, value_parser = parse_seeds)]
    pub seeds: Option<Seeds>,
    /// Output root; each experiment writes into `<out>/<name>`.
    #[arg(long, env = OUT_ENV, default_value = "runs")]
    pub out: PathBuf,
    /// Stop after this many updates.
    #[arg(long, conflicts_with = "horizon")]
    pub updates: Option<u64>,
    /// Stop at this absolute time instead of an update count.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Snapshot every this many updates.
    #[arg(long)]
    pub stride: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Network sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 50, 100])]
    pub nodes: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `tsync run`.
    pub dir: PathBuf,
}

/// Seed list wrapper so clap treats the whole value as one argument.
#[derive(Debug, Clone)]
pub struct Seeds(pub Vec<u64>);

pub fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Seeds(Vec::new()));
    }
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
        let hi: u64 = hi.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
        return Ok(Seeds((lo..hi).collect()));
    }
    s.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| format!("bad seed {p:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_forms() {
        assert_eq!(parse_seeds("").unwrap().0, Vec::<u64>::new());
        assert_eq!(parse_seeds("5").unwrap().0, vec![5]);
        assert_eq!(parse_seeds("1, 4,9").unwrap().0, vec![1, 4, 9]);
        assert_eq!(parse_seeds("2..5").unwrap().0, vec![2, 3, 4]);
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("3..y").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
