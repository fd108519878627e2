use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tsync(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsync"))
        .args(args)
        .env("TSYNC_OUT", out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn run_writes_artifacts_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["run", "--preset", "fig1a", "--seeds", "0,1", "--updates", "3000", "--stride", "50"];
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    assert_eq!(code(&tsync(&args, &first)), 0);
    assert_eq!(code(&tsync(&args, &second)), 0);
    for seed in ["seed-0", "seed-1"] {
        for file in ["trace.csv", "metrics.csv", "network.toml"] {
            let a = fs::read(first.join("fig1a").join(seed).join(file)).unwrap();
            let b = fs::read(second.join("fig1a").join(seed).join(file)).unwrap();
            assert!(!a.is_empty());
            assert_eq!(a, b, "{seed}/{file} differs");
        }
    }
    let trace = fs::read_to_string(first.join("fig1a/seed-0/trace.csv")).unwrap();
    // Header plus k = 0 and one row per 50 updates.
    assert_eq!(trace.lines().count(), 2 + 3000 / 50);
    assert!(first.join("fig1a/summary.csv").exists());
}

#[test]
fn resolved_config_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    assert_eq!(code(&tsync(&["run", "--preset", "fig2b", "--seeds", "3", "--updates", "2000"], &a)), 0);
    let cfg = a.join("fig2b/config.toml");
    let b = tmp.path().join("b");
    assert_eq!(code(&tsync(&["run", "--config", cfg.to_str().unwrap()], &b)), 0);
    assert_eq!(
        fs::read(a.join("fig2b/seed-3/trace.csv")).unwrap(),
        fs::read(b.join("fig2b/seed-3/trace.csv")).unwrap()
    );
}

#[test]
fn empty_seed_list_is_a_no_op() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsync(&["run", "--preset", "fig1a", "--seeds", ""], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(!tmp.path().join("fig1a").exists());
}

#[test]
fn invalid_configs_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let typo = tmp.path().join("typo.toml");
    fs::write(&typo, "schema_version = 1\n[sync.schedule]\nzeta_prime = 0.9\n").unwrap();
    let range = tmp.path().join("range.toml");
    fs::write(&range, "schema_version = 1\n[sync.schedule]\nzeta_drift = 1.5\n").unwrap();
    let version = tmp.path().join("version.toml");
    fs::write(&version, "schema_version = 99\n").unwrap();
    for path in [&typo, &range, &version] {
        let o = tsync(&["run", "--config", path.to_str().unwrap()], tmp.path());
        assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&tsync(&["run", "--preset", "nope"], tmp.path())), 1);
    assert_eq!(code(&tsync(&["run", "--preset", "fig1a", "--stride", "0"], tmp.path())), 1);
    assert_eq!(code(&tsync(&["run"], tmp.path())), 1);
    assert_eq!(code(&tsync(&["report", tmp.path().join("none").to_str().unwrap()], tmp.path())), 1);
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = tsync(&["run", "--preset", "fig1a", "--seeds", "0", "--updates", "100"], &blocker);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_replays_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tsync(&["run", "--preset", "fixed_point", "--seeds", "0..2", "--updates", "20000"], tmp.path());
    assert_eq!(code(&run), 0);
    let o = tsync(&["report", tmp.path().join("fixed_point").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("PASS  replay: byte-identical trace"), "{stdout}");
    assert!(stdout.contains("PASS  spectrum"), "{stdout}");
    assert!(tmp.path().join("fixed_point/report.csv").exists());
}

#[test]
fn report_flags_missing_seed_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&tsync(&["run", "--preset", "fig1a", "--seeds", "0", "--updates", "500"], tmp.path())), 0);
    fs::remove_file(tmp.path().join("fig1a/seed-0/trace.csv")).unwrap();
    let o = tsync(&["report", tmp.path().join("fig1a").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn scaling_writes_one_entry_per_size_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsync(
        &["scaling", "--preset", "fig3", "--nodes", "2,6", "--seeds", "0..2", "--updates", "2000"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(tmp.path().join("fig3_scaling/scaling.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 2);
    assert!(tmp.path().join("fig3_scaling/n2/seed-1/metrics.csv").exists());
    assert_eq!(code(&tsync(&["scaling", "--preset", "fig3", "--nodes", "1"], tmp.path())), 1);
}
