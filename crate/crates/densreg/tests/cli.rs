//! Black-box checks of the command-line surface: artifacts land where
//! requested, flag overrides work, and bad input exits nonzero with a
//! single diagnostic line.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_densreg"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("densreg_cli_tests").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.conf");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL_SWEEP: &str = "generator = swiss_roll\n\
    n_total = 60   # keep the smoke run quick\n\
    n_grid = 5,10\n\
    alpha_grid = 0,0.2\n\
    repetitions = 2\n\
    k = 6\n\
    sigma = 0.2\n\
    h = 0.15\n\
    seed = 3\n";

#[test]
fn simulate_writes_csv_and_svg() {
    let dir = workdir("simulate");
    let config = write_config(&dir, SMALL_SWEEP);
    let out = dir.join("artifacts");
    let result = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .args(["--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let csv = std::fs::read_to_string(out.join("risk.csv")).unwrap();
    assert!(csv.starts_with("n,alpha,mean_mse,ci_low,ci_high,reps\n"));
    assert_eq!(csv.lines().count(), 5, "two n times two alpha plus header");
    let svg = std::fs::read_to_string(out.join("risk.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn seed_override_changes_results() {
    let dir = workdir("seed_override");
    let config = write_config(&dir, SMALL_SWEEP);
    let read = |out: &PathBuf| std::fs::read_to_string(out.join("risk.csv")).unwrap();
    let mut outputs = Vec::new();
    for (name, seed) in [("a", "3"), ("b", "3"), ("c", "99")] {
        let out = dir.join(name);
        let status = bin()
            .args(["simulate", "--config", config.to_str().unwrap()])
            .args(["--out", out.to_str().unwrap(), "--seed", seed])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(read(&out));
    }
    assert_eq!(outputs[0], outputs[1], "same seed must reproduce");
    assert_ne!(outputs[0], outputs[2], "different seed must differ");
}

#[test]
fn fast_flag_caps_repetitions() {
    let dir = workdir("fast");
    let config = write_config(&dir, &SMALL_SWEEP.replace("repetitions = 2", "repetitions = 60"));
    let out = dir.join("artifacts");
    let status = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .args(["--out", out.to_str().unwrap(), "--fast"])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("risk.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",50"), "repetitions not capped: {line}");
    }
}

#[test]
fn compare_writes_baseline_and_ratios() {
    let dir = workdir("compare");
    let config = write_config(&dir, SMALL_SWEEP);
    let out = dir.join("artifacts");
    let status = bin()
        .args(["compare", "--config", config.to_str().unwrap()])
        .args(["--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let sup = std::fs::read_to_string(out.join("supervised.csv")).unwrap();
    assert_eq!(sup.lines().count(), 3, "one supervised row per n");
    let ratio = std::fs::read_to_string(out.join("ratio.csv")).unwrap();
    assert_eq!(ratio.lines().next().unwrap(), "n,alpha,ratio");
    assert_eq!(ratio.lines().count(), 5);
    for line in ratio.lines().skip(1) {
        let r: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(r.is_finite() && r > 0.0);
    }
}

#[test]
fn cover_reports_counts_and_exponent() {
    let dir = workdir("cover");
    let config = write_config(
        &dir,
        "generator = swiss_roll\n\
         n_total = 80\n\
         sigma = 0.2\n\
         alpha = 0\n\
         k = 6\n\
         radii = 0.05,0.1,0.2,0.4\n\
         seed = 5\n",
    );
    let out = dir.join("artifacts");
    let result: Output = bin()
        .args(["cover", "--config", config.to_str().unwrap()])
        .args(["--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success());
    assert!(String::from_utf8_lossy(&result.stdout).contains("fitted exponent"));
    let csv = std::fs::read_to_string(out.join("cover.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "radius,count");
    assert_eq!(lines.len(), 5);
    let counts: Vec<usize> = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
}

#[test]
fn distance_dumps_all_pairs() {
    let dir = workdir("distance");
    let config = write_config(
        &dir,
        "generator = swiss_roll\n\
         n_total = 20\n\
         sigma = 0.2\n\
         alpha = 1\n\
         k = 4\n\
         seed = 6\n",
    );
    let out = dir.join("artifacts");
    let status = bin()
        .args(["distance", "--config", config.to_str().unwrap()])
        .args(["--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("distance.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "i,j,distance");
    assert_eq!(lines.len(), 1 + 20 * 19 / 2);
    for line in &lines[1..] {
        let d: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(d.is_finite() && d >= 0.0);
    }
}

#[test]
fn bad_input_exits_nonzero_with_one_diagnostic_line() {
    let dir = workdir("errors");
    // missing file
    let missing = bin()
        .args(["simulate", "--config", dir.join("nope.conf").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    // malformed line
    let bad_syntax = write_config(&dir, "this is not a key value pair\n");
    let result = bin()
        .args(["simulate", "--config", bad_syntax.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert_eq!(stderr.trim_end().lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("error:"));
    // missing required key
    let no_h = write_config(&dir, &SMALL_SWEEP.replace("h = 0.15\n", ""));
    let result = bin()
        .args(["simulate", "--config", no_h.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("h"));
}
