use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use difflb::render::{self, FrameMode};

fn difflb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_difflb")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn metric_column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().to_string()).collect()
}

#[test]
fn zero_rounds_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = difflb(&["run", "--graph", "cycle:8", "--rounds", "0", "--out", path_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(csv.trim_end(), "round,total_load,max_above_avg,max_local_diff,potential_over_n,min_load,min_transient");
}

#[test]
fn runs_repeat_exactly_and_conserve_load() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = difflb(&[
            "run", "--graph", "torus2d:12x9", "--scheme", "sos", "--rounds", "80", "--seed", "5",
            "--out", path_arg(d.path()),
        ]);
        assert!(o.status.success());
    }
    let ca = std::fs::read_to_string(a.path().join("metrics.csv")).unwrap();
    let cb = std::fs::read_to_string(b.path().join("metrics.csv")).unwrap();
    assert_eq!(ca, cb);
    let totals = metric_column(&ca, "total_load");
    assert_eq!(totals.len(), 80);
    assert!(totals.iter().all(|t| t.parse::<f64>().unwrap() == 108_000.0));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small test\ngraph=cycle:10\nrounds=7\nscheme=fos\n").unwrap();
    let o = difflb(&["run", "--config", path_arg(&cfg), "--rounds", "3", "--out", path_arg(dir.path())]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("rounds=3 "));
    let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);

    std::fs::write(&cfg, "graph=cycle:10\nspeed=3\n").unwrap();
    let o = difflb(&["run", "--config", path_arg(&cfg), "--out", path_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(difflb(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(difflb(&["run", "--graph", "cycle:5", "--mode", "continuous", "--rounding", "floor"]).status.code(), Some(2));
    assert_eq!(difflb(&["run", "--graph", "cycle:5", "--workers", "0"]).status.code(), Some(2));
    assert_eq!(difflb(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_q_series_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = difflb(&["verify", "q-series", "--instances", "10", "--out", path_arg(dir.path())]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("q-series: "));
    let report = std::fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(report.lines().count() > 1);
}

#[test]
fn spectral_reports_known_values() {
    let o = difflb(&["spectral", "--graph", "hypercube:20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    // d/(d+1) is both the second eigenvalue and 1 - 2/(d+1)
    assert!(text.contains("n=1048576 lambda=0.9047619048"), "{text}");
    let o = difflb(&["spectral", "--graph", "complete:2"]);
    assert!(stdout(&o).contains("lambda=0.0000000000 beta=1.0000000000"), "{}", stdout(&o));
}

#[test]
fn rendering_snapshots_reproduces_run_frames() {
    let run = tempfile::tempdir().unwrap();
    let o = difflb(&[
        "run", "--graph", "torus2d:8x6", "--rounds", "20", "--frame-stride", "5", "--snapshot-stride", "5",
        "--out", path_arg(run.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let again = tempfile::tempdir().unwrap();
    let snaps = run.path().join("snapshots");
    let o = difflb(&[
        "render", "--snapshots", path_arg(&snaps), "--graph", "torus2d:8x6", "--out", path_arg(again.path()),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("rendered 5 frames"));
    for r in [0, 5, 10, 15, 20] {
        let name = render::frame_file_name(r);
        let a = std::fs::read(run.path().join("frames").join(&name)).unwrap();
        let b = std::fs::read(again.path().join("frames").join(&name)).unwrap();
        assert_eq!(a, b, "{name}");
    }

    let trace = tempfile::tempdir().unwrap();
    let o = difflb(&[
        "spectral", "--graph", "torus2d:8x6", "--trace", path_arg(&snaps), "--out", path_arg(trace.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let coeffs = std::fs::read_to_string(trace.path().join("coefficients.csv")).unwrap();
    assert_eq!(coeffs.lines().count(), 6);
}

#[test]
fn frames_match_golden_files() {
    let x = [0i64, 3, 6, 9, 12, 6];
    let adaptive = render::render(&x, 3, 2, FrameMode::Adaptive).unwrap();
    assert_eq!(render::encode_pgm(&adaptive).unwrap(), std::fs::read(data("adaptive_3x2.pgm")).unwrap());
    let threshold = render::render(&x, 3, 2, FrameMode::Threshold(4.0)).unwrap();
    assert_eq!(render::encode_pgm(&threshold).unwrap(), std::fs::read(data("threshold4_3x2.pgm")).unwrap());
    assert_eq!(render::read_pgm(&data("adaptive_3x2.pgm")).unwrap(), adaptive);
}
