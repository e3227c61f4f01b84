use std::path::Path;
use std::process::{Command, Output};

fn spinwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinwave"))
        .args(args)
        .env_remove("SPINWAVE_WORKERS")
        .output()
        .expect("binary runs")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn instability_exits_with_one() {
    let out = spinwave(&["entropy-scan", "--set", "g1=1.8", "--set", "g2=1.8"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("beyond critical coupling g_c = 1.74028"), "{err}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "boundry = periodic\n").unwrap();
    let out = spinwave(&["phase-diagram", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key 'boundry' (line 1)"));

    let out = spinwave(&["covariance", "--set", "boundary=open", "--set", "engine=fft"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_has_metadata_and_header() {
    let out = spinwave(&["gap-scan", "--set", "boundary=infinite", "--set", "g_points=4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# command: gap-scan");
    assert!(lines[1].starts_with("# config-sha256: ") && lines[1].len() == 17 + 64);
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert_eq!(lines[header], "g,gap,gc_minus_g,status");
    assert_eq!(lines.len(), header + 5);
    assert!(lines[header + 1].starts_with("0,1500,"));
}

#[test]
fn json_mirror() {
    let out = spinwave(&["two-site", "--set", "g1=1.5", "--set", "g2=1.5", "--set", "boundary=infinite", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"][4], "zeta");
    assert_eq!(v["config"]["g1"], 1.5);
    let zeta1 = v["rows"][0][4].as_f64().unwrap();
    assert!(zeta1 > 0.8 && zeta1 < 0.9, "{zeta1}");
}

#[test]
fn print_config_round_trips() {
    let out = spinwave(&["covariance", "--set", "g1=0.3", "--print-config"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed = spinwave_cli::RunConfig::parse(&text).unwrap();
    assert_eq!(parsed.g1, 0.3);
    assert_eq!(parsed.to_text(), text);
}

#[test]
fn worker_count_does_not_change_output() {
    let args = ["derivative-scan", "--set", "boundary=infinite", "--set", "g_min=1.0", "--set", "g_max=1.6", "--set", "g_points=6"];
    let one = spinwave(&[&args[..], &["--workers", "1"]].concat());
    let three = Command::new(env!("CARGO_BIN_EXE_spinwave"))
        .args(args)
        .env("SPINWAVE_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn output_file_and_finite_size() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fs.csv");
    let out = spinwave(&[
        "finite-size",
        "--set", "sides=5,7",
        "--set", "g_min=1.0",
        "--set", "g_max=1.7",
        "--set", "g_points=8",
        "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("# peak_M5: "));
    assert_eq!(text.lines().filter(|l| l.starts_with("5,") || l.starts_with("7,")).count(), 16);
}

#[test]
fn reproduce_commands_are_deterministic() {
    for command in ["reproduce-fig2", "reproduce-fig3"] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        // Same relative output dir, so the two configs (and digests) match.
        for (dir, workers) in [(&a, "1"), (&b, "2")] {
            let out = Command::new(env!("CARGO_BIN_EXE_spinwave"))
                .args([command, "--output-dir", "out", "--workers", workers])
                .current_dir(dir.path())
                .output()
                .unwrap();
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        }
        let fa = read_dir_sorted(&a.path().join("out"));
        let fb = read_dir_sorted(&b.path().join("out"));
        assert!(fa.len() >= 3);
        assert_eq!(fa, fb, "{command}");
    }
}
