use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use tsync::analysis::{
    applied_exponent, build_b_bar, corrected, fixed_point_residual, offset_cauchy_ratios,
    pooled_increment_ratio, rate_bound, spectral_check, update_fractions, Metrics, ZERO_TOL,
};
use tsync::topology::probability_profile;
use tsync::{run, ExperimentConfig, Network};

use crate::commands::{median, seed_dir, CONFIG_FILE, NETWORK_FILE, TRACE_FILE};
use crate::Invalid;

/// Per-seed analysis of a finished run.
struct SeedReport {
    seed: u64,
    replay_identical: bool,
    drift_ratio: f64,
    offset_dispersion: f64,
    c_spread: f64,
    zero_eigenvalues: usize,
    max_real: f64,
    hurwitz: bool,
    zeta_d_max: f64,
    fixed_point_residual: f64,
    worst_cauchy: f64,
    worst_update_fraction: f64,
    increment_ratio: f64,
    flooding_gap: Option<f64>,
    noiseless: bool,
}

fn read_artifact(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Invalid(format!("missing artifact {}: {e}", path.display())).into())
}

fn noiseless(net: &Network) -> bool {
    net.clocks().all(|c| c.xi_sigma == 0.0) && net.arcs().iter().all(|a| a.delay.eta_sigma == 0.0)
}

fn analyze(cfg: &ExperimentConfig, dir: &Path, seed: u64) -> Result<SeedReport> {
    let sdir = seed_dir(dir, seed);
    let net = Network::from_toml_str(&read_artifact(&sdir.join(NETWORK_FILE))?)
        .with_context(|| format!("seed {seed}: network"))?;
    let saved = read_artifact(&sdir.join(TRACE_FILE))?;
    let trace = run(&net, &cfg.run_config(seed))?;
    let mut replay = Vec::new();
    trace.write_csv(&mut replay)?;

    let profile = probability_profile(&net);
    let metrics = Metrics::from_trace(&trace, &net);
    let last = metrics.len() - 1;
    let sync = &cfg.sync;
    let zeta = applied_exponent(&sync.drift, sync.schedule.zeta_drift);
    let spectral = spectral_check(&build_b_bar(&net, &profile, zeta)?, ZERO_TOL);
    let zeta_d_max = rate_bound(&sync.drift, sync.schedule.zeta_drift, &net, &profile, None)
        .map(|b| b.zeta_d_max)
        .unwrap_or(f64::NAN);
    let fixed = fixed_point_residual(&net, &profile, &trace, sync);
    let k = trace.updates();
    let worst_cauchy = offset_cauchy_ratios(&trace, &net, k - k / 10).into_iter().fold(0.0, f64::max);
    let worst_update_fraction = update_fractions(&trace)
        .iter()
        .zip(&profile.p_update)
        .filter(|(_, &p)| p > 0.0)
        .map(|(got, want)| (got / want - 1.0).abs())
        .fold(0.0, f64::max);
    let (increment_ratio, _) = pooled_increment_ratio(&trace, &net, &sync.drift, sync.drift_warmup, k / 10);
    let flooding_gap = cfg.reference_node(&net).map(|r| {
        let (g, _) = corrected(&net, &trace.final_state);
        g.iter().map(|x| (x - g[r]).abs()).fold(0.0, f64::max) / g[r].abs()
    });
    Ok(SeedReport {
        seed,
        replay_identical: replay == saved.as_bytes(),
        drift_ratio: metrics.drift_spread[last] / metrics.drift_spread[0],
        offset_dispersion: metrics.offset_dispersion[last],
        c_spread: metrics.c_spread[last],
        zero_eigenvalues: spectral.zero_multiplicity,
        max_real: spectral.max_real,
        hurwitz: spectral.hurwitz_ok,
        zeta_d_max,
        fixed_point_residual: fixed.residual,
        worst_cauchy,
        worst_update_fraction,
        increment_ratio,
        flooding_gap,
        noiseless: noiseless(&net),
    })
}

fn write_csv(path: &Path, reports: &[SeedReport]) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record([
        "seed",
        "replay_identical",
        "drift_ratio",
        "offset_dispersion",
        "c_spread",
        "zero_eigenvalues",
        "max_real",
        "hurwitz",
        "zeta_d_max",
        "fixed_point_residual",
        "worst_cauchy",
        "worst_update_fraction",
        "increment_ratio",
        "flooding_gap",
    ])?;
    for r in reports {
        w.write_record([
            r.seed.to_string(),
            r.replay_identical.to_string(),
            r.drift_ratio.to_string(),
            r.offset_dispersion.to_string(),
            r.c_spread.to_string(),
            r.zero_eigenvalues.to_string(),
            r.max_real.to_string(),
            r.hurwitz.to_string(),
            r.zeta_d_max.to_string(),
            r.fixed_point_residual.to_string(),
            r.worst_cauchy.to_string(),
            r.worst_update_fraction.to_string(),
            r.increment_ratio.to_string(),
            r.flooding_gap.map(|g| g.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

fn verdict(applicable: bool, ok: bool) -> Verdict {
    match (applicable, ok) {
        (false, _) => Verdict::NotApplicable,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Fail,
    }
}

pub fn report(dir: &Path) -> Result<()> {
    let cfg_path = dir.join(CONFIG_FILE);
    read_artifact(&cfg_path)?;
    let cfg = ExperimentConfig::load(&cfg_path).map_err(|e| Invalid(format!("{}: {e}", cfg_path.display())))?;
    let reports: Vec<SeedReport> = cfg
        .seeds
        .par_iter()
        .map(|&s| analyze(&cfg, dir, s))
        .collect::<Result<_>>()?;
    if reports.is_empty() {
        println!("{}: no seeds", cfg.name);
        return Ok(());
    }
    write_csv(&dir.join("report.csv"), &reports)?;

    println!("{} ({} seeds, drift {})", cfg.name, reports.len(), cfg.sync.drift.label());
    println!(
        "{:>5} {:>10} {:>11} {:>9} {:>10} {:>9} {:>9} {:>9}",
        "seed", "drift_rat", "offset_disp", "zero_eig", "max_re", "zeta_d", "fp_resid", "cauchy"
    );
    for r in &reports {
        println!(
            "{:>5} {:>10.3e} {:>11.3e} {:>9} {:>10.3e} {:>9.3} {:>9.2e} {:>9.3}",
            r.seed,
            r.drift_ratio,
            r.offset_dispersion,
            r.zero_eigenvalues,
            r.max_real,
            r.zeta_d_max,
            r.fixed_point_residual,
            r.worst_cauchy
        );
    }

    let all = |f: &dyn Fn(&SeedReport) -> bool| reports.iter().all(f);
    let med = |f: &dyn Fn(&SeedReport) -> f64| median(reports.iter().map(f).collect());
    let checks = [
        (
            "drift consensus: median final/initial spread <= 0.1",
            verdict(true, med(&|r| r.drift_ratio) <= 0.1),
        ),
        ("spectrum: one zero eigenvalue, rest stable", verdict(true, all(&|r| r.hurwitz))),
        (
            "offsets: last-decade change <= 5% of final value",
            verdict(true, all(&|r| r.worst_cauchy <= 0.05)),
        ),
        (
            "update fractions and increment means within 5%",
            verdict(
                true,
                all(&|r| r.worst_update_fraction <= 0.05 && (r.increment_ratio - 1.0).abs() <= 0.05),
            ),
        ),
        (
            "fixed point: relative residual < 0.05",
            verdict(all(&|r| r.noiseless), all(&|r| r.fixed_point_residual < 0.05)),
        ),
        (
            "flooding: max |g_i - g_ref| <= 1% of |g_ref|",
            verdict(
                all(&|r| r.flooding_gap.is_some()),
                all(&|r| r.flooding_gap.is_some_and(|g| g <= 1e-2)),
            ),
        ),
        ("replay: byte-identical trace", verdict(true, all(&|r| r.replay_identical))),
    ];
    for (name, v) in checks {
        let tag = match v {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "n/a ",
        };
        println!("{tag}  {name}");
    }
    println!("median final c spread {:.3e}", med(&|r| r.c_spread));
    Ok(())
}
