use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn pflow_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pflow"))
        .args(args)
        .env("PFLOW_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn coupled_study_writes_table_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tbl.csv");
    let o = pflow(&[
        "study",
        "--p",
        "2",
        "--delta",
        "0",
        "--kind",
        "coupled",
        "--levels",
        "4",
        "--mms",
        "trig",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "level,h,kappa,err_max_l2,err_f_sq,newton_total,notes");
    assert_eq!(lines.len(), 5);
    // p = 2 is linear: one Newton iteration per step, M = 4, 8, 16, 32
    let newton: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(5).unwrap()).collect();
    assert_eq!(newton, ["4", "8", "16", "32"]);

    let meta = json(&out.with_extension("json"));
    for key in ["config", "slopes", "seed", "runtime_seconds", "pass"] {
        assert!(meta.get(key).is_some(), "missing {key}");
    }
    assert_eq!(meta["pass"], true);
    assert_eq!(meta["config"]["p"], 2.0);
    assert_eq!(meta["config"]["sigma0"], 1.0);
    assert_eq!(meta["config"]["mms"], "trig");
}

#[test]
fn invalid_exponent_is_a_config_error() {
    let o = pflow(&["study", "--p", "0.9"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("p must exceed 1"));
}

#[test]
fn too_few_levels_is_a_config_error() {
    let o = pflow(&["study", "--levels", "2"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("levels"));
}

#[test]
fn coupling_violation_is_a_config_error() {
    let o = pflow(&["study", "--kind", "spatial", "--sigma0", "1", "--p", "1.5"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("coupling"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_and_unknown_config_key_are_rejected() {
    assert_eq!(pflow(&["study", "--bogus", "1"]).status.code(), Some(64));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "p = 1.5\nfrobnicate = 3\n").unwrap();
    let o = pflow(&["study", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("frobnicate"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# temporal run\nkind = temporal\np = 1.5\ndelta = 1\nlevels = 3\nmin-slope = 0.5\n",
    )
    .unwrap();
    let out = dir.path().join("t.csv");
    let o = pflow(&[
        "study",
        "--config",
        cfg.to_str().unwrap(),
        "--delta",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let meta = json(&out.with_extension("json"));
    assert_eq!(meta["config"]["kind"], "temporal");
    assert_eq!(meta["config"]["delta"], 0.5);
    assert_eq!(meta["config"]["p"], 1.5);
    assert_eq!(meta["config"]["mms"], "affine");
    assert_eq!(meta["config"]["min_slope"], 0.5);
}

#[test]
fn temporal_study_with_defaults_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = pflow(&[
        "study",
        "--kind",
        "temporal",
        "--levels",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let meta = json(&out.with_extension("json"));
    assert_eq!(meta["slopes"]["headline"]["scale"], "kappa");
    assert!(meta["slopes"]["headline"]["fit"]["Slope"].as_f64().unwrap() >= 0.85);
}

#[test]
fn unreachable_slope_exits_two() {
    let o = pflow(&["study", "--levels", "3", "--min-slope", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_format_carries_rows() {
    let o = pflow(&["study", "--levels", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    assert_eq!(doc["seed"], 0);
}

#[test]
fn csv_is_byte_identical_across_runs_and_thread_counts() {
    let args = [
        "study", "--p", "1.5", "--delta", "1e-4", "--levels", "3", "--seed", "11",
    ];
    let a = pflow_env(&args, "1");
    let b = pflow_env(&args, "1");
    let c = pflow_env(&args, "4");
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn check_reports_structure() {
    let o = pflow(&[
        "check",
        "--p",
        "1.5",
        "--delta",
        "0.1",
        "--samples",
        "10000",
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["pass"], true);
    assert!(doc["structure"]["min_coercivity_ratio"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["config"]["seed"], 7);
}

#[test]
fn quadratic_check_has_unit_ratio() {
    let o = pflow(&["check", "--p", "2", "--delta", "0", "--samples", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r1 = &doc["equivalence"]["r1"];
    for end in ["min", "max"] {
        assert!((r1[end].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn cubic_stress_fails_the_check() {
    let o = pflow(&[
        "check",
        "--p",
        "1.5",
        "--delta",
        "0.1",
        "--stress",
        "cubic",
        "--samples",
        "2000",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["pass"], false);
}

#[test]
fn interp_rates_match_predictions() {
    let dir = tempfile::tempdir().unwrap();
    for (q, expected) in [("2", 2.0), ("1", 1.0)] {
        let out = dir.path().join(format!("i{q}.csv"));
        let o = pflow(&[
            "interp",
            "--ell",
            "2",
            "--q",
            q,
            "--r",
            "2",
            "--levels",
            "4",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("level,h,value,slope_to_prev\n"));
        assert_eq!(text.lines().count(), 5);
        let meta = json(&out.with_extension("json"));
        let slope = meta["slopes"]["fitted"]["Slope"].as_f64().unwrap();
        assert!((slope - expected).abs() <= 0.2, "q={q}: {slope}");
    }
}

#[test]
fn invalid_embedding_is_a_config_error() {
    let o = pflow(&["interp", "--ell", "1", "--q", "1", "--r", "4"]);
    assert_eq!(o.status.code(), Some(64));
    let o = pflow(&["interp", "--ell", "3", "--q", "2", "--r", "2"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn mesh_stats_refine() {
    let o = pflow(&["mesh", "--n", "2", "--levels", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cells: Vec<u64> = doc
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["stats"]["cells"].as_u64().unwrap())
        .collect();
    assert_eq!(cells, [8, 32, 128]);
}
