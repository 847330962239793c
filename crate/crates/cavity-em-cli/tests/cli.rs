use std::path::Path;
use std::process::{Command, Output};

use cavity_em_cli::{csv_string, CSV_HEADER};

const BIN: &str = env!("CARGO_BIN_EXE_cavity-em");

const SMALL: &str = "# unit aperture, shallow lossy fill\n\
    a = 1 lambda\nb = 1 lambda\nc = 0.5 lambda\neps_re_1 = 2\neps_im_1 = 0.3\nwavelength = 1\n\
    M = 2\nN = 2\nJ = 200\nalpha_deg = 30\ntheta_start_deg = 0\ntheta_end_deg = 50\ntheta_step_deg = 0.5\n\
    phi_deg = 0\nquad_grid = 256\n";

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("cavity.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

fn cavity_em(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

#[test]
fn writes_one_row_per_angle_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (out1, out2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&out1, &out2] {
        let o = cavity_em(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let stdout = String::from_utf8(o.stdout).unwrap();
        for phase in ["T_singular", "T_assemble", "T_solve", "T_RCS"] {
            assert!(stdout.contains(&format!("phase={phase} seconds=")), "{stdout}");
        }
    }
    let text = std::fs::read_to_string(&out1).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(lines[0], CSV_HEADER);
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first.len(), 7);
    assert_eq!(first[0], 0.0);
    assert!((first[2] - 30.0).abs() < 1e-12);
    assert!((first[5] - first[6]).abs() < 1e-6, "θ=0 on a square: {first:?}");
    let last: Vec<f64> = lines[100].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 49.5).abs() < 1e-9);
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("theta_end_deg = 50", "theta_end_deg = 2"));
    let o = cavity_em(&["--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 5);
    assert!(stdout.starts_with(CSV_HEADER));
    assert!(String::from_utf8(o.stderr).unwrap().contains("phase=T_solve"));
}

#[test]
fn invalid_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("M = 2", "M = two"));
    let o = cavity_em(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("`M`"));
    let missing = cavity_em(&["--config", dir.path().join("nope.cfg").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn cache_only_persists_the_gram_tensors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let cache = dir.path().join("cache");
    let o = cavity_em(&["--config", cfg.to_str().unwrap(), "--cache-dir", cache.to_str().unwrap(), "--cache-only"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("phase=T_singular") && stdout.contains("cache stored"), "{stdout}");
    let files: Vec<_> = std::fs::read_dir(&cache).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    assert!(files[0].extension().is_some_and(|e| e == "bin"));

    let again = cavity_em(&["--config", cfg.to_str().unwrap(), "--cache-dir", cache.to_str().unwrap(), "--cache-only"]);
    assert!(String::from_utf8(again.stdout).unwrap().contains("cache hit"));
    let no_dir = cavity_em(&["--config", cfg.to_str().unwrap(), "--cache-only"]);
    assert!(!no_dir.status.success());
}

#[test]
fn verify_reports_every_check_passing() {
    let o = cavity_em(&["--verify"]);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(o.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS ")).count(), 4, "{stdout}");
}

#[test]
fn empty_sample_list_is_an_error() {
    assert_eq!(csv_string(&[]).unwrap_err(), "no samples");
}
