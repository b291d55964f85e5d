//! Acceptance criterion 11: end-to-end determinism of the `simulate` binary
//! across worker counts.

use std::path::PathBuf;
use std::process::Command;

fn run_simulate(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .output()
        .expect("simulate runs")
}

#[test]
fn criterion_11_byte_identical_csv_across_worker_counts() {
    let start = std::time::Instant::now();
    let dir = std::env::temp_dir().join(format!("poolsim-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let out_one: PathBuf = dir.join("fig8iii_w1.csv");
    let out_four: PathBuf = dir.join("fig8iii_w4.csv");

    for (workers, path) in [("1", &out_one), ("4", &out_four)] {
        let output = run_simulate(&[
            "--preset",
            "fig8iii",
            "--seed",
            "42",
            "--workers",
            workers,
            "--out",
            path.to_str().expect("utf8 path"),
        ]);
        assert!(
            output.status.success(),
            "workers={workers}: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }

    let one = std::fs::read(&out_one).expect("first run output");
    let four = std::fs::read(&out_four).expect("second run output");
    assert!(!one.is_empty());
    assert_eq!(one, four, "CSV bytes differ between worker counts");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 240.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 11: fig8iii CSV byte-identical with 1 and 4 workers ({elapsed:?})"
    );
    let _ = std::fs::remove_dir_all(&dir);
}
