use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn lgscan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgscan")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lgscan-test-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const RUN: &str = "[r]\ntheta = \"pi/3\"\nphi = \"pi/2\"\ntau = [\"pi/3\", \"5pi/6\"]\neta = [0.6, 1]\nbias = \"eta-minus-one\"\n";

#[test]
fn eval_prints_every_section() {
    let o = lgscan(&["eval", "--theta", "pi/3", "--phi", "pi/2", "--tau", "pi/3", "--eta", "1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for needle in ["standard (bound 1)", "wigner form (bound 0)", "entropic (bound 0)", "nsit:", "joint measurability", "triple"] {
        assert!(text.contains(needle), "missing {needle}");
    }
    assert!(text.contains("VIOLATED"));
}

#[test]
fn scan_writes_csv_and_json() {
    let cfg = scratch("run.toml");
    fs::write(&cfg, RUN).unwrap();
    let o = lgscan(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("theta,phi,tau,eta,x,axis_alpha,axis_beta,family,spec_index"));
    // Four points, one record per family each.
    assert_eq!(lines.len(), 1 + 4 * 3);
    assert!(String::from_utf8(o.stderr).unwrap().contains("4 points evaluated"));

    let out = scratch("run.json");
    let o = lgscan(&["scan", "--config", cfg.to_str().unwrap(), "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let json = fs::read_to_string(&out).unwrap();
    assert!(json.trim_start().starts_with('['));
    assert_eq!(json.matches("\"spec_index\"").count(), 12);
}

#[test]
fn scan_is_byte_identical_across_job_counts() {
    let cfg = scratch("jobs.toml");
    fs::write(&cfg, RUN.replace("eta = [0.6, 1]", "eta = { from = 0.1, to = 1, points = 10 }")).unwrap();
    let a = lgscan(&["--jobs", "1", "scan", "--config", cfg.to_str().unwrap()]);
    let b = lgscan(&["--jobs", "2", "scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_errors_exit_with_2_and_name_the_line() {
    let cfg = scratch("bad.toml");
    fs::write(&cfg, "[r]\neta = 0.5\nsharpness = 1\n").unwrap();
    let o = lgscan(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("r.sharpness"), "{err}");
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(code(&lgscan(&["figure", "7"])), 2);
    assert_eq!(code(&lgscan(&["eval", "--tau", "1"])), 2);
    assert_eq!(code(&lgscan(&["eval", "--tau", "1", "--eta", "1", "--bias", "sideways"])), 2);
}

#[test]
fn other_failures_exit_with_1() {
    let missing = scratch("absent.toml");
    assert_eq!(code(&lgscan(&["scan", "--config", missing.to_str().unwrap()])), 1);
    // SLGI at zero delay is η² and never crosses 1.
    let o = lgscan(&["threshold", "--family", "slgi", "--mixed", "--tau", "0", "--coarse-step", "0.05"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn threshold_reports_crossing() {
    let o = lgscan(&[
        "threshold", "--family", "wlgi", "--theta", "pi/3", "--phi", "pi/2", "--tau", "pi/3", "--coarse-step", "0.01",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let eta: f64 = text.lines().next().unwrap().trim_start_matches("eta* = ").parse().unwrap();
    assert!((eta - 0.69).abs() < 2e-3, "{eta}");
}

#[test]
fn selftest_passes() {
    let o = lgscan(&["selftest", "--cases", "50", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().matches("PASS").count(), 6);
}
