//! End-to-end checks of the `elastic-shape` binary: every verb, the exit
//! code contract, and report determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_elastic-shape"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn generate_lift_dist_geodesic_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // gen writes a pair of sphere tracks
    let out = run(
        &[
            "gen", "--space", "s2", "--samples", "40", "--knots", "5", "--seed", "4", "--out",
            "a.csv", "--pair",
        ],
        d,
    );
    assert_ok(&out);
    assert!(d.join("a.csv").exists());
    assert!(d.join("a_reparam.csv").exists());

    let out = run(
        &[
            "gen", "--space", "s2", "--samples", "40", "--knots", "5", "--seed", "5", "--out",
            "b.csv",
        ],
        d,
    );
    assert_ok(&out);

    // lift reports near-zero residuals
    let out = run(&["lift", "a.csv", "--space", "s2"], d);
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("projection residual"), "lift output: {text}");

    // dist on the planted pair is tiny and exits 0
    let out = run(
        &[
            "dist",
            "a.csv",
            "a_reparam.csv",
            "--space",
            "s2",
            "--quotient",
            "shape",
            "--dp-res",
            "40",
            "--out",
            "report.json",
        ],
        d,
    );
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let dist_line = text
        .lines()
        .find(|l| l.starts_with("distance:"))
        .expect("distance line");
    let value: f64 = dist_line
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(value < 1e-4, "planted pair distance {value}");

    // determinism: identical invocations produce byte-identical reports
    let first = std::fs::read(d.join("report.json")).unwrap();
    let out = run(
        &[
            "dist",
            "a.csv",
            "a_reparam.csv",
            "--space",
            "s2",
            "--quotient",
            "shape",
            "--dp-res",
            "40",
            "--out",
            "report2.json",
        ],
        d,
    );
    assert_ok(&out);
    let second = std::fs::read(d.join("report2.json")).unwrap();
    assert_eq!(first, second, "reports must be byte-identical");

    // geodesic writes frames, a combined JSON and an SVG
    let out = run(
        &[
            "geodesic", "a.csv", "b.csv", "--space", "s2", "--dp-res", "40", "--frames", "4",
            "--svg", "--out", "sw",
        ],
        d,
    );
    assert_ok(&out);
    for j in 0..=4 {
        assert!(d.join(format!("sw_f{j:02}.csv")).exists(), "frame {j} missing");
    }
    assert!(d.join("sw_sweep.json").exists());
    assert!(d.join("sw.svg").exists());
}

#[test]
fn quotient_flags_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (seed, name) in [(11, "a.csv"), (12, "b.csv")] {
        let out = run(
            &[
                "gen", "--space", "h2", "--samples", "30", "--seed", &seed.to_string(), "--out",
                name,
            ],
            d,
        );
        assert_ok(&out);
    }
    let mut distances = Vec::new();
    for quotient in ["param", "shape", "mod-g", "shape-mod-g"] {
        let out = run(
            &[
                "dist", "a.csv", "b.csv", "--space", "h2", "--quotient", quotient, "--dp-res",
                "30",
            ],
            d,
        );
        assert_ok(&out);
        let text = String::from_utf8_lossy(&out.stdout).to_string();
        let value: f64 = text
            .lines()
            .find(|l| l.starts_with("distance:"))
            .unwrap()
            .split_whitespace()
            .nth(1)
            .unwrap()
            .parse()
            .unwrap();
        distances.push(value);
    }
    // each extra quotient can only shrink the distance
    assert!(distances[1] <= distances[0] + 1e-9, "shape > param");
    assert!(distances[2] <= distances[0] + 1e-9, "mod-g > param");
    assert!(distances[3] <= distances[2] + 1e-9, "shape-mod-g > mod-g");
}

#[test]
fn baseline_and_bench_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("l1.csv"), "0,0\n1,0.2\n2,0.1\n3,0.4\n4,0.2\n").unwrap();
    std::fs::write(d.join("l2.csv"), "1,1\n2,1.2\n3,1.1\n4,1.4\n5,1.2\n").unwrap();
    let out = run(
        &[
            "baseline", "l1.csv", "l2.csv", "--space", "r:2", "--quotient", "mod-g", "--dp-res",
            "4",
        ],
        d,
    );
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let value: f64 = text
        .lines()
        .find(|l| l.starts_with("distance:"))
        .unwrap()
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(value < 1e-10, "translated copies differ by {value}");

    let out = run(
        &[
            "bench",
            "--problems",
            "1",
            "--sizes",
            "16",
            "--seed",
            "2",
            "--out",
            "table.csv",
        ],
        d,
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(d.join("table.csv")).unwrap();
    // header plus 6 configurations at one size
    assert_eq!(csv.lines().count(), 7, "bench table:\n{csv}");
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("mean (s)"));
}

#[test]
fn triangle_inequality_across_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (seed, name) in [(41, "a.csv"), (42, "b.csv"), (43, "c.csv")] {
        let out = run(
            &[
                "gen", "--space", "s2", "--samples", "24", "--seed", &seed.to_string(), "--out",
                name,
            ],
            d,
        );
        assert_ok(&out);
    }
    let dist = |f1: &str, f2: &str| -> f64 {
        let out = run(
            &[
                "dist", f1, f2, "--space", "s2", "--quotient", "param", "--dp-res", "24",
            ],
            d,
        );
        assert_ok(&out);
        String::from_utf8_lossy(&out.stdout)
            .lines()
            .find(|l| l.starts_with("distance:"))
            .unwrap()
            .split_whitespace()
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    let ab = dist("a.csv", "b.csv");
    let bc = dist("b.csv", "c.csv");
    let ac = dist("a.csv", "c.csv");
    assert!(ac <= ab + bc + 1e-6, "triangle violated: {ac} > {ab} + {bc}");
}

#[test]
fn errors_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // missing file
    let out = run(&["dist", "x.csv", "y.csv", "--space", "s2"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    // malformed latitude
    std::fs::write(d.join("bad.csv"), "95,0\n0,0\n").unwrap();
    let out = run(&["lift", "bad.csv", "--space", "s2"], d);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("latitude"), "stderr: {err}");

    // unknown space
    let out = run(&["dist", "bad.csv", "bad.csv", "--space", "torus"], d);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn spd_pipeline_with_ellipsoid_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (seed, name) in [(31, "p.json"), (32, "q.json")] {
        let out = run(
            &[
                "gen", "--space", "pdsm:3", "--samples", "20", "--seed", &seed.to_string(),
                "--out", name,
            ],
            d,
        );
        assert_ok(&out);
    }
    let out = run(
        &[
            "geodesic", "p.json", "q.json", "--space", "pdsm:3", "--dp-res", "20", "--frames",
            "3", "--svg", "--out", "spd",
        ],
        d,
    );
    assert_ok(&out);
    assert!(d.join("spd_sweep.json").exists());
    let table = std::fs::read_to_string(d.join("spd_ellipsoids.csv")).unwrap();
    // header + (frames+1) * (samples+1) rows
    assert_eq!(table.lines().count(), 1 + 4 * 21, "ellipsoid table:\n{table}");
    assert!(table.starts_with("frame,sample,lambda1"));
}
