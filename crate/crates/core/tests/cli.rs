use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use membrane_bifurcation::export::parse_csv;

fn membrane(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_membrane"));
    cmd.args(args).env_remove("MEMBRANE_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("MEMBRANE_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn inadmissible_trace_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("t");
    let out = membrane(
        &[
            "trace",
            "--c_o",
            "2",
            "--z_o",
            "-0.2",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("admissible"));
    assert!(!out_dir.exists());
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["trace", "--c_o", "2", "--z_o", "-0.6", "--R", "1"],
        vec!["trace", "--c_o", "two", "--z_o", "-0.6"],
        vec!["trace", "--c_o", "2"],
        vec!["frobnicate"],
        vec!["--recipe", "fig7"],
        vec![
            "family", "--R", "0.5", "--Z", "-3", "--c_min", "1.8", "--c_max", "1.2",
        ],
    ] {
        let out = membrane(&args, None);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", stderr(&out));
    }
    assert_eq!(membrane(&["--help"], None).status.code(), Some(0));
}

#[test]
fn shooting_failure_exits_two_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = membrane(
        &[
            "sigma0",
            "--R",
            "5",
            "--Z",
            "-0.01",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("no convergence") && err.contains("iteration"),
        "{err}"
    );
}

#[test]
fn table1_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = membrane(&["table1", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let table = parse_csv(&text, "table1.csv").unwrap();
    assert_eq!(
        table.column("z_o").unwrap(),
        vec![-0.55, -0.6, -0.7, -0.9, -1.2]
    );
    assert!(table.column("c_o").unwrap().iter().all(|&c| c == 2.0));
    let h = table.column("h_prime_boundary").unwrap();
    assert!((h[0] + 23.1896).abs() < 1e-3);
    for name in ["config.txt", "run.json", "table1.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

fn assert_same_tree(a: &Path, b: &Path) {
    let mut names: Vec<_> = fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mut other: Vec<_> = fs::read_dir(b)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    other.sort();
    assert_eq!(names, other);
    for n in names {
        assert_eq!(
            fs::read(a.join(&n)).unwrap(),
            fs::read(b.join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn config_file_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let out = membrane(
        &[
            "mesh",
            "--R",
            "0.5",
            "--Z",
            "-3",
            "--kind",
            "branch",
            "--amplitude",
            "0.2",
            "--samples",
            "60",
            "--n_theta",
            "24",
            "--out",
            first.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let config = first.join("config.txt");
    let out = membrane(
        &[
            "mesh",
            "--config",
            config.to_str().unwrap(),
            "--out",
            second.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_same_tree(&first, &second);
}

#[test]
fn flags_override_config_and_duplicates_warn() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# disc\nc_o = 2\nz_o = -0.9\nz_o = -0.7\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = membrane(
        &[
            "trace",
            "--config",
            cfg.to_str().unwrap(),
            "--z_o",
            "-0.6",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("duplicate key z_o"));
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("run.json")).unwrap()).unwrap();
    assert_eq!(record["inputs"]["z_o"], "-0.6");
    assert_eq!(record["inputs"]["rtol"], "1e-10");
    assert!(record["inputs"].get("out").is_none());
    assert!(
        record["derived"]["first_integral_residual"]
            .as_f64()
            .unwrap()
            < 1e-10
    );
}

#[test]
fn environment_sets_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = membrane(&["sigma0", "--R", "0.5", "--Z", "-3"], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0));
    let profile = dir.path().join("sigma0").join("profile.csv");
    assert!(profile.exists());
}

#[test]
fn certify_writes_pass_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = membrane(
        &[
            "certify",
            "--R",
            "0.5",
            "--Z",
            "-3",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let cert: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("certificate.json")).unwrap())
            .unwrap();
    assert_eq!(cert["verdict"], "Pass");
}
