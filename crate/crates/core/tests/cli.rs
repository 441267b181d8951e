//! End-to-end runs of the `eigenwavelet` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigenwavelet")).current_dir(dir).args(args).output().unwrap()
}

/// Rows of a rendered CSV slice as `(x1, x3, |f|)`, singular cells as NaN.
fn read_slice(path: &Path) -> Vec<(f64, f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x3,t,re,im,abs"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], v[1], v[5])
        })
        .collect()
}

#[test]
fn pulse_peak_travels_along_the_beam_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["render", "--a", "0,0,1", "--b", "1.01", "--grid", "-3:3:61,-2:8:101", "--times", "2,4,6", "--out", "p"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut peaks = Vec::new();
    for i in 0..3 {
        let rows = read_slice(&dir.path().join(format!("p_t{i}.csv")));
        let peak = rows.iter().filter(|r| r.2.is_finite()).max_by(|a, b| a.2.total_cmp(&b.2)).unwrap();
        assert!(peak.0.abs() < 0.2, "peak off axis at x1 = {}", peak.0);
        peaks.push(peak.1);
    }
    assert!(peaks[0] < peaks[1] && peaks[1] < peaks[2], "peaks {peaks:?}");
}

#[test]
fn tiny_grid_writes_all_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["render", "--grid", "-1:1:2,-1:1:2", "--times", "0", "--format", "both", "--out", "s"]);
    assert!(out.status.success());
    for ext in ["csv", "pgm", "meta"] {
        assert!(dir.path().join(format!("s_t0.{ext}")).exists(), "missing .{ext}");
    }
    let pgm = std::fs::read(dir.path().join("s_t0.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n2 2\n65535\n"));
    assert_eq!(pgm.len(), b"P5\n2 2\n65535\n".len() + 8);
}

#[test]
fn shell_source_vanishes_outside_the_shell() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["source", "--a", "0,0,1", "--b", "1.3", "--p1", "1.8", "--p2", "2.2", "--grid", "-4:4:41,-4:4:41", "--times", "1", "--out", "g"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_slice(&dir.path().join("g_t0.csv"));
    let p_of = |x1: f64, x3: f64| {
        // oblate radius in the x2 = 0 plane for a = e3
        let s = x1 * x1 + x3 * x3 - 1.0;
        ((s + (s * s + 4.0 * x3 * x3).sqrt()) / 2.0).sqrt()
    };
    let (mut inside, mut outside) = (0, 0);
    for (x1, x3, v) in rows {
        let p = p_of(x1, x3);
        if p < 1.79 || p > 2.21 {
            assert_eq!(v, 0.0, "nonzero source at ({x1}, {x3})");
            outside += 1;
        } else if (1.81..2.19).contains(&p) && v > 0.0 {
            inside += 1;
        }
    }
    assert!(outside > 0 && inside > 0);
}

#[test]
fn abrupt_surface_table_is_finite() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["source", "--abrupt", "2", "--on-surface", "5,8", "--times", "0.5", "--out", "l"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("l_t0.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,q,phi,x1,x2,x3,re_single,im_single,re_double,im_double"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|s| s.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().flatten().all(|v| v.is_finite()));
    assert!(rows.iter().all(|r| r[0] == 2.0));
}

#[test]
fn focus_table_and_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["focus", "--b-list", "1.1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let width: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((width - 0.2 * 3f64.sqrt()).abs() < 1e-6);

    let bad = run(dir.path(), &["focus", "--b-list", "1.5,1.0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn command_line_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "b-list = 1.5\n# comment\nr_far = 50\n").unwrap();
    let from_file = run(dir.path(), &["focus", "--config", "run.cfg"]);
    let text = String::from_utf8(from_file.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("1.5,"));
    let overridden = run(dir.path(), &["focus", "--config", "run.cfg", "--b-list", "1.01"]);
    let text = String::from_utf8(overridden.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("1.01,"));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(dir.path(), &["verify", "identities"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8(ok.stdout).unwrap().starts_with("# suite=identities seed=1"));
    assert_eq!(run(dir.path(), &["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["verify", "gradients", "--threshold", "0"]).status.code(), Some(3));
}
