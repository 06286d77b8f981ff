use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn schwarz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schwarz"))
        .args(args)
        .output()
        .expect("spawn schwarz")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn keys(v: &Value) -> Vec<&str> {
    v.as_object().unwrap().keys().map(String::as_str).collect()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn integrate_tan_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let o = schwarz(&[
        "integrate",
        "--jet",
        "0,0,1,0,2",
        "--t-end",
        "1",
        "--tol",
        "1e-10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,u,p,q,r,S,C");
    let last = csv_rows(&text).pop().unwrap();
    assert_eq!(last[0], 1.0);
    assert!((last[1] - 1f64.tan()).abs() < 1e-9, "{}", last[1]);
    // Config is echoed on stderr so the CSV stays plain.
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("\"tol\":1e-10"), "{err}");
}

#[test]
fn integrate_line_has_zero_schwarzian() {
    let o = schwarz(&["integrate", "--jet", "0,0,1,0,0", "--t-end", "5"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&String::from_utf8_lossy(&o.stdout));
    assert!(rows.len() >= 2);
    assert!(rows.iter().all(|r| r[5] == 0.0));
    assert!((rows.last().unwrap()[1] - 5.0).abs() < 1e-12);
}

#[test]
fn integrate_rejects_singular_jet() {
    let o = schwarz(&["integrate", "--jet", "0,0,0,1,0", "--t-end", "1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular initial jet (p=0)"));
}

#[test]
fn integrate_stops_before_pole() {
    let o = schwarz(&["integrate", "--jet", "0,0,1,0,2", "--t-end", "2"]);
    assert_eq!(code(&o), 2);
    let rows = csv_rows(&String::from_utf8_lossy(&o.stdout));
    let t = rows.last().unwrap()[0];
    assert!(t < std::f64::consts::FRAC_PI_2 && t > 1.5, "{t}");
}

#[test]
fn integrate_accepts_negative_values() {
    let o = schwarz(&["integrate", "--jet", "-1,0,1,0,2", "--t-end", "-1.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let last = csv_rows(&String::from_utf8_lossy(&o.stdout)).pop().unwrap();
    assert_eq!(last[0], -1.5);
    assert!((last[1] - (-0.5f64).tan()).abs() < 1e-9);
}

#[test]
fn invariants_of_el_field() {
    let o = schwarz(&["invariants", "--field", "EL", "--jet", "0,0,1,0,2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(keys(&v), ["config", "rows"]);
    let row = &v["rows"][0];
    assert_eq!(keys(row), ["jet", "W0", "W1", "S"]);
    assert_eq!(keys(&row["jet"]), ["t", "u", "p", "q", "r"]);
    assert!((row["W0"].as_f64().unwrap() + 1.44).abs() < 1e-12);
    assert!(row["W1"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(row["S"].as_f64().unwrap(), 2.0);
}

#[test]
fn invariants_of_custom_fields() {
    let v = json(&schwarz(&["invariants", "--F", "0", "--jet", "0,0,1,0,0"]));
    let row = &v["rows"][0];
    assert_eq!(keys(row), ["jet", "W0", "W1"]);
    assert_eq!(row["W0"].as_f64().unwrap(), 0.0);
    assert_eq!(row["W1"].as_f64().unwrap(), 0.0);

    let v = json(&schwarz(&["invariants", "--F", "r", "--jet", "0,0,1,1,1"]));
    assert!((v["rows"][0]["W1"].as_f64().unwrap() + 0.375).abs() < 1e-14);
}

#[test]
fn invariants_random_sampling_is_seeded() {
    let run = |seed: &str| schwarz(&["invariants", "--random", "20", "--seed", seed]).stdout;
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
    let v: Value = serde_json::from_slice(&run("7")).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    for r in rows {
        let s = r["S"].as_f64().unwrap();
        let w0 = r["W0"].as_f64().unwrap();
        assert!((w0 + 0.36 * s * s).abs() <= 1e-9 * w0.abs().max(1.0));
        assert!(r["W1"].as_f64().unwrap().abs() <= 1e-9);
    }
}

#[test]
fn invariants_reports_parse_errors() {
    let o = schwarz(&["invariants", "--F", "q +", "--jet", "0,0,1,0,0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn family_verify_mobius() {
    let o = schwarz(&[
        "family", "--sigma", "0", "--A", "1", "--B", "0", "--C", "1", "--D", "-1", "--verify",
        "100",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(
        keys(&v),
        [
            "config",
            "family",
            "class",
            "rate",
            "determinant",
            "singularities",
            "verify"
        ]
    );
    assert_eq!(keys(&v["family"]), ["A", "B", "C", "D", "sigma"]);
    assert_eq!(v["class"], "parabolic");
    let rep = &v["verify"];
    assert_eq!(
        keys(rep),
        ["samples", "max_schwarzian_residual", "max_el_residual"]
    );
    assert!(rep["max_schwarzian_residual"].as_f64().unwrap() < 1e-9);
    assert!(rep["max_el_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn family_verify_across_pole_is_a_singularity() {
    let o = schwarz(&[
        "family",
        "--sigma",
        "0",
        "--C",
        "1",
        "--D",
        "-1",
        "--verify",
        "10",
        "--interval",
        "0,2",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn linearize_exp_and_tan() {
    let v = json(&schwarz(&[
        "linearize",
        "--field",
        "EL",
        "--base",
        "exp",
        "--t",
        "0.3",
    ]));
    let row = &v["rows"][0];
    assert_eq!(keys(row), ["t", "a1", "a2", "a3"]);
    for (k, want) in [("a1", 2.0), ("a2", -5.0), ("a3", 4.0)] {
        assert!((row[k].as_f64().unwrap() - want).abs() < 1e-10, "{k}");
    }

    let v = json(&schwarz(&[
        "linearize",
        "--base",
        "tan",
        "--t",
        "-0.4,0.2,1.1",
    ]));
    for row in v["rows"].as_array().unwrap() {
        let tn = row["t"].as_f64().unwrap().tan();
        let want = [-16.0 * tn, 8.0 - 12.0 * tn * tn, 8.0 * tn];
        for (k, w) in ["a1", "a2", "a3"].iter().zip(want) {
            assert!((row[k].as_f64().unwrap() - w).abs() < 1e-10 * w.abs().max(1.0));
        }
    }
}

#[test]
fn variation_finds_witness_for_tan() {
    let o = schwarz(&[
        "variation",
        "--u",
        "tan(t)",
        "--interval",
        "0.1,1",
        "--n",
        "50",
        "--expect-critical",
    ]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_eq!(
        keys(&v),
        ["config", "u", "interval", "n", "max_delta", "witness"]
    );
    assert_eq!(
        keys(&v["witness"]),
        ["center", "radius", "amplitude", "delta"]
    );
    assert!(v["max_delta"].as_f64().unwrap() > 1e-3);
    assert_eq!(v["interval"], serde_json::json!([0.1, 1.0]));
}

#[test]
fn variation_of_mobius_curve_is_critical() {
    let o = schwarz(&[
        "variation",
        "--u",
        "(2*t+1)/(t+3)",
        "--interval",
        "0,1",
        "--n",
        "8",
        "--expect-critical",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert!(v["witness"].is_null());
    assert!(v["max_delta"].as_f64().unwrap() < 1e-8);
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"jet": "0,0,1,0,2", "t-end": 0.5, "tol": 1e-6}"#).unwrap();
    let o = schwarz(&[
        "integrate",
        "--config",
        cfg.to_str().unwrap(),
        "--tol",
        "1e-9",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("\"t-end\":0.5") && err.contains("\"tol\":1e-9"),
        "{err}"
    );
    let last = csv_rows(&String::from_utf8_lossy(&o.stdout)).pop().unwrap();
    assert_eq!(last[0], 0.5);

    fs::write(&cfg, r#"{"t_end": 0.5}"#).unwrap();
    let o = schwarz(&[
        "integrate",
        "--config",
        cfg.to_str().unwrap(),
        "--jet",
        "0,0,1,0,2",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&schwarz(&["integrate", "--bogus"])), 1);
    assert_eq!(
        code(&schwarz(&["integrate", "--jet", "0,0,1", "--t-end", "1"])),
        1
    );
    assert_eq!(code(&schwarz(&["--help"])), 0);
}
