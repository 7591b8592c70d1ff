//! End-to-end checks of the command-line surface: exit codes, output
//! schemas, determinism, and atomic writes.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parageo"))
}

fn write_config(dir: &std::path::Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("parageo-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn system_csv_and_summary() {
    let dir = tempdir("system");
    let cfg = write_config(
        &dir,
        "sys.json",
        r#"{ "n": 4, "sequence": {"regular": {"x1": "2", "rho": "2", "count": 6}} }"#,
    );
    let out_csv = dir.join("graph.csv");
    let out = run(bin()
        .arg("system")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_csv));
    assert!(out.status.success(), "{out:?}");

    let csv = fs::read_to_string(&out_csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "segment_id,component_index,q_start,y_start,q_end,y_end,slope"
    );
    // n=4, count=6: 3 breakpoints, 2 intervals, 4 segments each = 8 rows;
    // each interval carries one slope-3 row and three slope-(-1) rows.
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    let rising = rows.iter().filter(|r| r.ends_with(",3")).count();
    let falling = rows.iter().filter(|r| r.ends_with(",-1")).count();
    assert_eq!((rising, falling), (2, 6));

    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["schema"], 1);
    assert_eq!(summary["mesh_at_least_log4"], "true");
    assert_eq!(summary["regular_rho"], "2");
    assert_eq!(summary["mesh_gap"], "2");
}

#[test]
fn construct_deterministic_and_echoes_inputs() {
    let dir = tempdir("construct");
    let cfg_body = r#"{ "n": 2, "sequence": {"regular": {"x1": "2", "rho": "2", "count": 6}} }"#;
    let cfg = write_config(&dir, "c.json", cfg_body);
    let a = run(bin().arg("construct").arg("--config").arg(&cfg));
    let b = run(bin().arg("construct").arg("--config").arg(&cfg));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "identical config must give identical bytes");

    let record: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(record["schema"], 1);
    assert_eq!(record["inputs"], serde_json::from_str::<serde_json::Value>(cfg_body).unwrap());
    assert_eq!(record["stages"], 6);
    // round-trip: every point coordinate parses back to the same integer
    for p in record["points"].as_array().unwrap() {
        for c in p.as_array().unwrap() {
            let s = c.as_str().unwrap();
            let n: parageo::num_bigint::BigInt = s.parse().unwrap();
            assert_eq!(n.to_string(), s);
        }
    }
    for cert in record["certificates"].as_array().unwrap() {
        let det = cert["det"].as_str().unwrap();
        assert!(det == "1" || det == "-1");
    }
}

#[test]
fn invalid_sequences_exit_2() {
    let dir = tempdir("invalid");
    for body in [
        // nonpositive first value
        r#"{ "n": 2, "sequence": {"explicit": ["0", "1.4", "2.8"]} }"#,
        // not strictly increasing
        r#"{ "n": 2, "sequence": {"explicit": ["2", "2", "3"]} }"#,
        // malformed decimal
        r#"{ "n": 2, "sequence": {"explicit": ["2", "abc"]} }"#,
        // count below n
        r#"{ "n": 3, "sequence": {"regular": {"x1": "2", "rho": "2", "count": 2}} }"#,
        // n too small
        r#"{ "n": 1, "sequence": {"regular": {"x1": "2", "rho": "2", "count": 5}} }"#,
    ] {
        let cfg = write_config(&dir, "bad.json", body);
        let out = run(bin().arg("construct").arg("--config").arg(&cfg));
        assert_eq!(out.status.code(), Some(2), "config {body} gave {out:?}");
    }
}

#[test]
fn mesh_gap_refusal_exits_3() {
    let dir = tempdir("gap");
    let cfg = write_config(
        &dir,
        "gap.json",
        r#"{ "n": 2, "sequence": {"explicit": ["1", "2", "3", "4"]} }"#,
    );
    for sub in ["construct", "verify"] {
        let out = run(bin().arg(sub).arg("--config").arg(&cfg));
        assert_eq!(out.status.code(), Some(3), "{sub} must refuse small mesh");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("log 4"), "refusal must explain the hypothesis");
    }
}

#[test]
fn verify_pass_and_indeterminate_exit_codes() {
    let dir = tempdir("verify");
    let cfg = write_config(
        &dir,
        "v.json",
        r#"{ "n": 2, "sequence": {"regular": {"x1": "2", "rho": "2", "count": 6}} }"#,
    );
    let out_json = dir.join("report.json");
    let out = run(bin()
        .arg("verify")
        .arg("--config")
        .arg(&cfg)
        .arg("--grid")
        .arg("64")
        .arg("--out")
        .arg(&out_json));
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_json).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    assert_eq!(report["bound"], 8);

    // a single sample per interval leaves the n h term too large: exit 5
    let out = run(bin()
        .arg("verify")
        .arg("--config")
        .arg(&cfg)
        .arg("--grid")
        .arg("1"));
    assert_eq!(out.status.code(), Some(5), "{out:?}");
}

#[test]
fn minima_modes_agree_within_certificate() {
    let dir = tempdir("minima");
    let cfg = write_config(
        &dir,
        "m.json",
        r#"{ "n": 2, "sequence": {"regular": {"x1": "2", "rho": "2", "count": 6}} }"#,
    );
    // unit ball at a rational unit direction
    let out = run(bin()
        .arg("minima")
        .arg("--config")
        .arg(&cfg)
        .arg("--u")
        .arg("0.6,0.8")
        .arg("--Q")
        .arg("1"));
    assert!(out.status.success(), "{out:?}");
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["lambdas_sq"], serde_json::json!(["1", "1"]));

    // exact and certificate modes: certificate brackets the exact profile
    let exact = run(bin()
        .arg("minima")
        .arg("--config")
        .arg(&cfg)
        .arg("--u")
        .arg("1,1")
        .arg("--Q")
        .arg("2"));
    let cert = run(bin()
        .arg("minima")
        .arg("--config")
        .arg(&cfg)
        .arg("--u")
        .arg("1,1")
        .arg("--Q")
        .arg("2")
        .arg("--mode")
        .arg("certificate"));
    assert!(exact.status.success() && cert.status.success());
    let exact: serde_json::Value = serde_json::from_slice(&exact.stdout).unwrap();
    let cert: serde_json::Value = serde_json::from_slice(&cert.stdout).unwrap();
    let exact_lo: f64 = exact["lambdas"][0][0].as_str().unwrap().parse().unwrap();
    let cert_hi: f64 = cert["lambdas"][0][1].as_str().unwrap().parse().unwrap();
    let factor_hi: f64 = cert["certificate_factor"][1].as_str().unwrap().parse().unwrap();
    assert!(exact_lo <= cert_hi, "certificate must sit above the minimum");
    assert!(cert_hi <= factor_hi * exact_lo * 1.0001, "and within the factor");
}

#[test]
fn minima_budget_exit_6() {
    let dir = tempdir("budget");
    let cfg = write_config(
        &dir,
        "b.json",
        r#"{ "n": 2, "sequence": {"regular": {"x1": "2", "rho": "2", "count": 6}}, "enumeration_budget": 10 }"#,
    );
    let out = run(bin()
        .arg("minima")
        .arg("--config")
        .arg(&cfg)
        .arg("--u")
        .arg("0.6,0.8")
        .arg("--Q")
        .arg("3"));
    assert_eq!(out.status.code(), Some(6), "{out:?}");
}

#[test]
fn construct_stages_extends_regular_mesh() {
    let dir = tempdir("stages");
    let cfg = write_config(
        &dir,
        "s.json",
        r#"{ "n": 2, "sequence": {"regular": {"x1": "2", "rho": "2", "count": 6}} }"#,
    );
    let out = run(bin()
        .arg("construct")
        .arg("--config")
        .arg(&cfg)
        .arg("--stages")
        .arg("8"));
    assert!(out.status.success(), "{out:?}");
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["stages"], 8);

    // explicit meshes cannot extend
    let cfg = write_config(
        &dir,
        "e.json",
        r#"{ "n": 2, "sequence": {"explicit": ["2", "4", "8"]} }"#,
    );
    let out = run(bin()
        .arg("construct")
        .arg("--config")
        .arg(&cfg)
        .arg("--stages")
        .arg("5"));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn atomic_write_leaves_no_temp() {
    let dir = tempdir("atomic");
    let cfg = write_config(
        &dir,
        "a.json",
        r#"{ "n": 2, "sequence": {"regular": {"x1": "2", "rho": "2", "count": 5}} }"#,
    );
    let out_path = dir.join("record.json");
    let out = run(bin()
        .arg("construct")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_path));
    assert!(out.status.success());
    assert!(out_path.exists());
    assert!(!out_path.with_extension("tmp").exists());
}
