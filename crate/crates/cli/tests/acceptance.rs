//! CLI acceptance: determinism of sde-compare under different worker counts.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_lingrow")
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("compare.toml");
    std::fs::write(
        &path,
        r#"
schema_version = 1

[sde_compare]
horizon = 1.0
x0 = [1.0]
noise_dim = 1
p = 2.0
paths = 10000
steps = 1024
seed = 42
k = [-10.0, 10.0]
drift = { exprs = ["-x"] }
diffusion = { exprs = ["0.5*x + 0.5"] }
approx_drift = { exprs = ["-x + 0.001"] }
approx_diffusion = { exprs = ["0.5*x + 0.501"] }
assert_max = 0.05

[[sde_compare.sweep]]
label = "1e-2"
drift = { exprs = ["-x + 0.01"] }
diffusion = { exprs = ["0.5*x + 0.51"] }

[[sde_compare.sweep]]
label = "1e-3"
drift = { exprs = ["-x + 0.001"] }
diffusion = { exprs = ["0.5*x + 0.501"] }

[[sde_compare.sweep]]
label = "1e-4"
drift = { exprs = ["-x + 0.0001"] }
diffusion = { exprs = ["0.5*x + 0.5001"] }
"#,
    )
    .unwrap();
    path
}

#[test]
fn criterion_10_thread_count_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());

    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out_dir = dir.path().join(format!("threads_{threads}"));
        let status = Command::new(binary())
            .args(["sde-compare", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_dir)
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(status.success(), "sde-compare failed at --threads {threads}");
        let main_csv = std::fs::read(out_dir.join("sde_compare.csv")).unwrap();
        let sweep_csv = std::fs::read(out_dir.join("sweep.csv")).unwrap();
        outputs.push((main_csv, sweep_csv));
    }
    assert_eq!(
        outputs[0].0, outputs[1].0,
        "sde_compare.csv differs between --threads 1 and --threads 8"
    );
    assert_eq!(
        outputs[0].1, outputs[1].1,
        "sweep.csv differs between --threads 1 and --threads 8"
    );

    let elapsed = started.elapsed();
    println!(
        "[PASS] criterion 10 (thread-count determinism): byte-identical CSVs at --threads 1 and 8 ({elapsed:.2?})"
    );
    assert!(
        elapsed <= Duration::from_secs(120),
        "criterion 10 exceeded its runtime budget: {elapsed:.2?}"
    );
}
