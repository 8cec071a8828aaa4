use std::fs;
use std::process::{Command, Output};

fn ocs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn nodes_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nodes.csv");
    let out = ocs(&["nodes", "--order", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,rho,theta,x,y");
    assert_eq!(lines.len(), 1 + 15);
    // 17 significant digits
    let rho = lines[1].split(',').nth(1).unwrap();
    assert_eq!(rho.split('e').next().unwrap().replace('.', "").len(), 17);
}

#[test]
fn nodes_json_and_matrix_export() {
    let dir = tempfile::tempdir().unwrap();
    let mpath = dir.path().join("a.csv");
    let out = ocs(&[
        "nodes",
        "--order",
        "3",
        "--format",
        "json",
        "--matrix",
        "elevation",
        "--matrix-out",
        mpath.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 10);
    let matrix = fs::read_to_string(&mpath).unwrap();
    assert_eq!(matrix.lines().count(), 10);
    assert!(matrix.lines().all(|l| l.split(',').count() == 10));
}

#[test]
fn cond_table_json_schema() {
    let out = ocs(&[
        "cond-table",
        "--orders",
        "5,6",
        "--pattern",
        "ocs",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for key in [
        "n",
        "mode",
        "kappa2",
        "kappa_inf",
        "sigma_min",
        "sigma_max",
        "pattern",
    ] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn asymptotics_report() {
    let out = ocs(&["asymptotics", "--variant", "g2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["variant"], "g2");
    assert!((v["L"].as_f64().unwrap() + 0.675676).abs() < 1e-4);
    assert!(v["target_minus_two_thirds_gap"].as_f64().unwrap() < 0.0);
}

#[test]
fn optimize_writes_result_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = ocs(&[
        "optimize",
        "--order",
        "3",
        "--seed",
        "7",
        "--budget",
        "200",
        "--trace-out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["radii"].as_array().unwrap().len(), 2);
    assert!(v["kappa2"].as_f64().unwrap() <= v["seed_kappa2"].as_f64().unwrap());
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("evaluation,best_kappa2\n"));
}

#[test]
fn lebesgue_curve_with_mesh_dump() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("mesh.csv");
    let out = ocs(&[
        "lebesgue-curve",
        "--orders",
        "0-3",
        "--density",
        "4",
        "--mesh-out",
        mesh.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["rows"][0]["lambda"].as_f64().unwrap(), 1.0);
    assert!(v["fit"]["r_squared"].is_f64());
    assert!(fs::read_to_string(&mesh).unwrap().starts_with("x,y,l\n"));
}

#[test]
fn recover_and_sweeps_run() {
    let out = ocs(&["recover", "--orders", "8", "--trials", "5", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("n,pattern,trials,rms_mean,rms_std\n"));
    let out = ocs(&["slope-cond", "--orders", "1-4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 1 + 8);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "perturb-sweep",
        "--orders",
        "5",
        "--trials",
        "4",
        "--seed",
        "11",
    ];
    assert_eq!(ocs(&args).stdout, ocs(&args).stdout);
    let other = ocs(&[
        "perturb-sweep",
        "--orders",
        "5",
        "--trials",
        "4",
        "--seed",
        "12",
    ]);
    assert_ne!(ocs(&args).stdout, other.stdout);
}

#[test]
fn configuration_errors_exit_2() {
    for args in [
        vec!["nodes", "--order", "0"],
        vec!["nodes", "--orders", "3,4"],
        vec!["nodes", "--order", "3", "--pattern", "hexagonal"],
        vec!["recover", "--orders", "5", "--trials", "0"],
        vec!["optimize", "--order", "5", "--budget", "3"],
        vec!["lebesgue-curve", "--orders", "3", "--density", "1"],
        vec!["asymptotics", "--variant", "g3"],
        vec!["perturb-sweep", "--orders", "5", "--magnitudes=-1"],
    ] {
        let out = ocs(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}
