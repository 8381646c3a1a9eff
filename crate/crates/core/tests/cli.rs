use std::process::{Command, Output};

fn qcrb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcrb"))
        .args(args)
        .env_remove("QCRB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn compute_qubit_xy_text_report() {
    let o = qcrb(&["compute", "--builtin", "qubit_xy", "--params", "0.5", "--cost", "identity"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("C_S = 2.0000000000"));
    assert!(text.contains("C_H = 2.99999") || text.contains("C_H = 3.00000"));
    assert!(text.contains("theorem1 OK"));
    assert!(text.contains("max{C_S, C_R} <= C_H <= 3*C_S"));
}

#[test]
fn compute_qubit_xy_json_values() {
    let o = qcrb(&["compute", "--builtin", "qubit_xy", "--params", "0.5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["c_s"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((v["c_h"].as_f64().unwrap() - 3.0).abs() < 1e-5 * 3.0);
    assert!((v["ratio"].as_f64().unwrap() - 1.5).abs() < 1e-5);
    assert_eq!(v["theorem1_ok"], true);
    assert_eq!(v["solver_status"], "converged");
}

#[test]
fn compute_diag_classical_single_parameter() {
    let o = qcrb(&["compute", "--builtin", "diag_classical", "--params", "0.25", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["c_s"].as_f64().unwrap() - 0.1875).abs() < 1e-12);
    assert!((v["c_h"].as_f64().unwrap() - 0.1875).abs() < 1e-5 * 0.1875);
    assert_eq!(v["prop_rank"], 1);
}

#[test]
fn json_report_prints_seventeen_digits() {
    let o = qcrb(&["compute", "--random", "3,2", "--seed", "9", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.contains("\"c_s\"")).unwrap();
    let num = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = num.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{num}");
}

#[test]
fn csv_has_fixed_header() {
    let o = qcrb(&["compute", "--builtin", "qubit_xy", "--params", "0.3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(
        text.lines().next().unwrap(),
        "model_label,d,n,cost_rank,seed,c_s,c_h,c_r,ratio,theorem1_ok,sandwich_ok,prop_ok,solver_status,certificate_gap"
    );
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn usage_errors_are_prefixed() {
    let o = qcrb(&["compute"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR:"), "{}", stderr(&o));

    let o = qcrb(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR:usage:"));

    let o = qcrb(&["compute", "--builtin", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR:usage:"), "{}", stderr(&o));

    let o = qcrb(&["compute", "--builtin", "qubit_xy", "--params", "0.5", "--cost", "identity3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR:"));
}

#[test]
fn support_obstruction_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pure.json");
    std::fs::write(
        &path,
        r#"{"label":"edge","dim":2,"n_params":1,
            "rho":[[[1,0],[0,0]],[[0,0],[0,0]]],
            "drho":[[[[-1,0],[0,0]],[[0,0],[1,0]]]]}"#,
    )
    .unwrap();
    let o = qcrb(&["compute", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR:support:"), "{}", stderr(&o));
}

#[test]
fn export_then_compute_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let p = path.to_str().unwrap();
    let o = qcrb(&["export-model", "--random", "3,3", "--seed", "4", "--cost", "rank:2:7", "--output", p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (m, g) = qcrb::model::load_model(&path).unwrap();
    assert_eq!((m.dim, m.n_params, g.rank), (3, 3, 2));
    let direct = qcrb::model::random_model(3, 3, 4, 1e-3).unwrap();
    assert_eq!(m.rho, direct.rho);
    assert_eq!(m.drho, direct.drho);

    let from_file = qcrb(&["compute", "--model", p, "--format", "json"]);
    let inline = qcrb(&["compute", "--random", "3,3", "--seed", "4", "--cost", "rank:2:7", "--format", "json"]);
    assert_eq!(from_file.status.code(), Some(0));
    let (a, b) = (json(&from_file), json(&inline));
    assert_eq!(a["c_s"], b["c_s"]);
    assert_eq!(a["c_h"], b["c_h"]);
}

#[test]
fn seed_flag_wins_over_environment() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_qcrb"));
        c.args(args).env_remove("QCRB_SEED");
        if let Some(v) = env {
            c.env("QCRB_SEED", v);
        }
        c.output().unwrap().stdout
    };
    let base = ["export-model", "--random", "2,2"];
    let env5 = run(Some("5"), &base);
    let flag5 = run(None, &["export-model", "--random", "2,2", "--seed", "5"]);
    let both = run(Some("6"), &["export-model", "--random", "2,2", "--seed", "5"]);
    let env6 = run(Some("6"), &base);
    assert_eq!(env5, flag5);
    assert_eq!(both, flag5);
    assert_ne!(env6, flag5);
}

#[test]
fn sweep_output_independent_of_jobs() {
    let args = |jobs: &'static str| {
        vec!["sweep", "--dims", "2,3", "--ns", "2", "--count", "6", "--seed", "3", "--jobs", jobs]
    };
    let a = qcrb(&args("1"));
    let b = qcrb(&args("3"));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 7);
}

#[test]
fn sweep_requires_dims() {
    let o = qcrb(&["sweep", "--ns", "2", "--count", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR:usage:"));
}

#[test]
fn verify_small_run_passes() {
    let o = qcrb(&["verify", "--seed", "3", "--count", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("total violations: 0"));
}
