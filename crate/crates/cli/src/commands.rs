use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use tsync::analysis::Metrics;
use tsync::experiment::SeedRun;
use tsync::{ExperimentConfig, Preset};

use crate::args::{Overrides, RunArgs, ScalingArgs, Source};
use crate::Invalid;

pub const CONFIG_FILE: &str = "config.toml";
pub const NETWORK_FILE: &str = "network.toml";
pub const TRACE_FILE: &str = "trace.csv";
pub const METRICS_FILE: &str = "metrics.csv";

pub fn seed_dir(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed-{seed}"))
}

fn load(source: &Source) -> Result<ExperimentConfig> {
    match (&source.config, source.preset) {
        (Some(path), _) => ExperimentConfig::load(path)
            .map_err(|e| Invalid(format!("cannot load config {}: {e}", path.display())).into()),
        (None, Some(preset)) => Ok(preset.config()),
        (None, None) => Err(Invalid("either --config or --preset is required".into()).into()),
    }
}

fn resolve(source: &Source, o: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = load(source)?;
    if let Some(seeds) = &o.seeds {
        cfg.seeds = seeds.0.clone();
    }
    if let Some(u) = o.updates {
        cfg.updates = u;
        cfg.horizon = None;
    }
    if let Some(h) = o.horizon {
        cfg.horizon = Some(h);
    }
    if let Some(s) = o.stride {
        cfg.stride = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn writer(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Runs one seed and writes its network, trace and metrics under `dir`.
fn run_and_write(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<(SeedRun, Metrics)> {
    let run = cfg.run_seed(seed).with_context(|| format!("seed {seed}"))?;
    let metrics = Metrics::from_trace(&run.trace, &run.network);
    let sdir = seed_dir(dir, seed);
    create_dir(&sdir)?;
    write_file(&sdir.join(NETWORK_FILE), &run.network.to_toml_string())?;
    run.trace.write_csv(writer(&sdir.join(TRACE_FILE))?)?;
    metrics.write_csv(writer(&sdir.join(METRICS_FILE))?)?;
    Ok((run, metrics))
}

/// All seeds in parallel, returned in seed order.
fn sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<(SeedRun, Metrics)>> {
    cfg.seeds.par_iter().map(|&s| run_and_write(cfg, s, dir)).collect()
}

fn write_summary(path: &Path, runs: &[(SeedRun, Metrics)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer(path)?);
    w.write_record([
        "seed",
        "updates",
        "end_time",
        "initial_drift_spread",
        "drift_spread",
        "msd",
        "offset_dispersion",
        "vclock_gap",
        "c_spread",
        "max_abs_offset",
    ])?;
    for (run, m) in runs {
        let last = m.len() - 1;
        w.write_record([
            run.seed.to_string(),
            run.trace.updates().to_string(),
            run.trace.end_time.to_string(),
            m.drift_spread[0].to_string(),
            m.drift_spread[last].to_string(),
            m.msd[last].to_string(),
            m.offset_dispersion[last].to_string(),
            m.vclock_gap[last].to_string(),
            m.c_spread[last].to_string(),
            m.max_abs_offset[last].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &RunArgs) -> Result<()> {
    let cfg = resolve(&args.source, &args.overrides)?;
    if cfg.seeds.is_empty() {
        println!("{}: no seeds, nothing to do", cfg.name);
        return Ok(());
    }
    let dir = args.overrides.out.join(&cfg.name);
    create_dir(&dir)?;
    write_file(&dir.join(CONFIG_FILE), &cfg.to_toml_string())?;
    let runs = sweep(&cfg, &dir)?;
    write_summary(&dir.join("summary.csv"), &runs)?;
    println!("{}: {} seeds -> {}", cfg.name, runs.len(), dir.display());
    println!("{:>6} {:>9} {:>12} {:>12} {:>12}", "seed", "updates", "drift_spread", "offset_disp", "c_spread");
    for (run, m) in &runs {
        let last = m.len() - 1;
        println!(
            "{:>6} {:>9} {:>12.3e} {:>12.3e} {:>12.3e}",
            run.seed,
            run.trace.updates(),
            m.drift_spread[last],
            m.offset_dispersion[last],
            m.c_spread[last]
        );
    }
    Ok(())
}

/// Mean of the disagreement over the first tenth of the run, the region
/// where the network size matters most.
fn initial_msd(m: &Metrics) -> f64 {
    let k_end = *m.k.last().unwrap_or(&0);
    let xs: Vec<f64> = m
        .k
        .iter()
        .zip(&m.msd)
        .filter(|(&k, _)| k > 0 && k <= k_end / 10)
        .map(|(_, &v)| v)
        .collect();
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn scaling(args: &ScalingArgs) -> Result<()> {
    let base = resolve(&args.source, &args.overrides)?;
    if let Some(&n) = args.nodes.iter().find(|&&n| n < 2) {
        return Err(Invalid(format!("network sizes must be >= 2, got {n}")).into());
    }
    if base.seeds.is_empty() || args.nodes.is_empty() {
        println!("{}: nothing to do", base.name);
        return Ok(());
    }
    let dir = args.overrides.out.join(format!("{}_scaling", base.name));
    create_dir(&dir)?;
    let mut w = csv::Writer::from_writer(writer(&dir.join("scaling.csv"))?);
    w.write_record(["n", "seed", "initial_msd", "final_msd"])?;
    println!("{:>6} {:>16} {:>16}", "n", "median init msd", "median final msd");
    for &n in &args.nodes {
        let cfg = base.with_nodes(n)?;
        let ndir = dir.join(format!("n{n}"));
        create_dir(&ndir)?;
        write_file(&ndir.join(CONFIG_FILE), &cfg.to_toml_string())?;
        let runs = sweep(&cfg, &ndir)?;
        let (mut init, mut fin) = (Vec::new(), Vec::new());
        for (run, m) in &runs {
            let (a, b) = (initial_msd(m), *m.msd.last().unwrap());
            w.write_record([n.to_string(), run.seed.to_string(), a.to_string(), b.to_string()])?;
            init.push(a);
            fin.push(b);
        }
        println!("{:>6} {:>16.4e} {:>16.4e}", n, median(init), median(fin));
    }
    w.flush()?;
    println!("-> {}", dir.display());
    Ok(())
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub fn list_presets() {
    for p in Preset::ALL {
        let cfg = p.config();
        println!("{:<13} {} / {:?}", p.name(), cfg.sync.drift.label(), cfg.sync.offset);
    }
}
