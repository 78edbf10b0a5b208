//! Determinism acceptance check for the binary: identical config, different
//! worker counts, byte-identical outputs.

use std::fs;
use std::process::Command;

const CONFIG: &str = "\
model.family = power_law
model.C2 = 1.0
model.C3 = 1.0
model.g = 0.5
model.H = 1.0
grid.N = 256
sweep.eps_list = 0.4, 0.3, 0.2
output.dir = out
seed = 7
";

#[test]
fn criterion_8_sweep_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, CONFIG).unwrap();

    let mut csvs = Vec::new();
    for workers in ["1", "8"] {
        let out = dir.path().join(format!("out_{workers}"));
        let result = Command::new(env!("CARGO_BIN_EXE_perikdv"))
            .arg("sweep")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .env("PERIKDV_THREADS", workers)
            .output()
            .expect("binary runs");
        assert!(
            result.status.success(),
            "sweep with {workers} workers failed: {}",
            String::from_utf8_lossy(&result.stderr)
        );
        csvs.push(fs::read(out.join("sweep.csv")).expect("sweep.csv written"));
    }

    let ok = !csvs[0].is_empty() && csvs[0] == csvs[1];
    let word = if ok { "PASS" } else { "FAIL" };
    println!(
        "acceptance 8 sweep determinism across 1 vs 8 workers: {word} [{} bytes, identical: {}]",
        csvs[0].len(),
        csvs[0] == csvs[1]
    );
    assert!(ok, "sweep.csv differs between 1 and 8 workers");
}
