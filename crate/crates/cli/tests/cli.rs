#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use voxfact::GradedVector;
use voxfact_cli::suite::{run_suite, Status, SuiteConfig, IN_SCOPE};
use voxfact_cli::tables::{mode_table, suite_tables};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_voxfact"))
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn run_ok(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// The results the suite is expected to cover, one label each.
const EXPECTED_LABELS: [&str; 26] = [
    "n-point multiplication",
    "dilation action and weight spaces",
    "weight space isomorphism",
    "weight projection by contour integral",
    "decomposition into weight projections",
    "multiplication maps from a prefactorization algebra",
    "insertion at zero",
    "equivariance under dilation",
    "associativity",
    "meromorphic operator product expansion",
    "precosheaf of expressions",
    "external product of analytic functionals",
    "affine action on expressions",
    "evaluation map",
    "relations",
    "relations generated on discs",
    "quotient by relations",
    "annulus counterexample",
    "holomorphy of the dilation maps",
    "relations on a disc",
    "comparison isomorphism",
    "contour identity for weight projections",
    "multiplicativity",
    "Weiss covers",
    "relations on smaller concentric discs",
    "Weiss cosheaf",
];

#[test]
fn default_suite_passes_with_one_entry_per_label() {
    let report = run_suite(&SuiteConfig::default()).unwrap();
    let labels: Vec<&str> = report.entries.iter().map(|e| e.label.as_str()).collect();
    assert_eq!(labels, EXPECTED_LABELS);
    let scoped: Vec<&str> = IN_SCOPE.iter().map(|(l, _)| *l).collect();
    assert_eq!(scoped, EXPECTED_LABELS);
    let mut ids: Vec<&str> = IN_SCOPE.iter().map(|(_, c)| *c).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), IN_SCOPE.len());
    for e in &report.entries {
        assert_eq!(e.status, Status::Pass, "{}: {:?}", e.label, e.reason);
    }
    assert!(report.pass);
}

#[test]
fn suite_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    for p in &paths {
        let (code, _, _) = run_ok(&["suite", "--window", "0:3", "--seed", "11", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn degenerate_window_marks_skips() {
    let config = SuiteConfig { window: "0:0".into(), ..SuiteConfig::default() };
    let report = run_suite(&config).unwrap();
    assert!(report.pass);
    let entry = |id: &str| report.entries.iter().find(|e| e.check == id).unwrap();
    let ins = entry("insertion_at_zero");
    assert_eq!(ins.status, Status::Pass);
    assert_eq!(ins.report.as_ref().unwrap().truncation["states"], 1);
    assert_eq!(entry("equivariance").status, Status::Skipped);
    assert!(report.entries.iter().any(|e| e.status == Status::Skipped && e.reason.is_some()));
}

#[test]
fn malformed_rational_is_a_config_error() {
    let (code, _, err) = run_ok(&["npoint", "--states", "a-1", "--points", "1/0"]);
    assert_eq!(code, 2);
    assert!(err.contains("1/0"), "{err}");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, "{\"preset\": \"virasoro\", \"c\": \"1/0\"}").unwrap();
    let (code, _, _) = run_ok(&["suite", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    std::fs::write(&cfg, "{\n  \"window\": \"0:2\",\n  \"colour\": 1\n}").unwrap();
    let (code, _, err) = run_ok(&["suite", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 3") && err.contains("colour"), "{err}");
}

#[test]
fn usage_errors_and_failures_have_distinct_codes() {
    assert_eq!(run_ok(&["frobnicate"]).0, 2);
    assert_eq!(run_ok(&["suite", "--window", "4:1"]).0, 2);
    assert_eq!(run_ok(&["mode", "--a", "L-2", "--n", "1", "--b", "a-1"]).0, 2);
    // a(0)a = 0 in the free boson, so m = 0 yields no counterexample.
    assert_eq!(run_ok(&["counterexample", "--m", "0"]).0, 1);
    assert_eq!(run_ok(&["counterexample", "--m", "1"]).0, 0);
}

#[test]
fn free_boson_mode_table_matches_golden_and_oracle() {
    let (p, alg) = &common::presets()[0];
    let t = mode_table(p, 3).unwrap();
    assert_eq!(t.rows.len(), 12);
    assert_eq!(t.to_csv().unwrap(), golden("modes.csv"));
    let basis = p.basis_up_to(1, 3);
    for row in &t.rows {
        let a = basis.iter().find(|m| m.to_string() == row[0]).unwrap();
        let b = basis.iter().find(|m| m.to_string() == row[2]).unwrap();
        let n: i64 = row[1].parse().unwrap();
        assert_eq!(alg.mode(a, n, &GradedVector::basis(b.clone())).to_string(), row[3]);
    }
}

#[test]
fn suite_tables_match_golden() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run_ok(&[
        "suite",
        "--only",
        "counterexample,insertion_at_zero",
        "--tables",
        dir.path().to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    for name in ["modes.csv", "poles.csv", "counterexample.csv"] {
        assert_eq!(std::fs::read_to_string(dir.path().join(name)).unwrap(), golden(name), "{name}");
    }
    assert_eq!(std::fs::read_to_string(dir.path().join("curves.csv")).unwrap(), "label,terms,err\n");
}

#[test]
fn empty_report_gives_header_only_tables() {
    let config = SuiteConfig { only: Some(vec![]), ..SuiteConfig::default() };
    let report = run_suite(&config).unwrap();
    assert!(report.entries.is_empty());
    for t in suite_tables(&report).unwrap() {
        assert!(t.rows.is_empty());
        assert_eq!(t.to_csv().unwrap().lines().count(), 1);
    }
}

#[test]
fn associativity_curve_table_decreases() {
    let config = SuiteConfig { only: Some(vec!["associativity".into()]), ..SuiteConfig::default() };
    let report = run_suite(&config).unwrap();
    let curves = &suite_tables(&report).unwrap()[2];
    assert!(curves.rows.len() >= 3);
    let errs: Vec<f64> = curves.rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn factor_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("geo.json");
    std::fs::write(
        &geo,
        r#"{"W": {"disc": {"center": "0", "radius": "4"}},
            "X": {"disc": {"center": "0", "radius": "2"}},
            "cover": [{"disc": {"center": "0", "radius": "1"}},
                      {"annulus": {"center": "0", "inner": "1/2", "outer": "2"}}]}"#,
    )
    .unwrap();
    let exprs = dir.path().join("e.json");
    std::fs::write(
        &exprs,
        r#"[{"carrier": {"disc": {"center": "-2", "radius": "1"}},
             "terms": [{"coeff": "1", "factors": [{"delta": {"p": "-2", "d": 0}}], "states": ["a-1"]}]},
            {"carrier": {"disc": {"center": "2", "radius": "1"}},
             "terms": [{"coeff": "1", "factors": [{"delta": {"p": "2", "d": 0}}], "states": ["a-1"]}]}]"#,
    )
    .unwrap();
    let product = dir.path().join("p.json");
    let (g, e, p) = (geo.to_str().unwrap(), exprs.to_str().unwrap(), product.to_str().unwrap());
    assert_eq!(run_ok(&["factor", "multiply", "--geometry", g, "--exprs", e, "--report", p]).0, 0);
    let (code, out, _) = run_ok(&["factor", "eval", "--exprs", p, "--window", "0:2"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    // μ(a, −2, a, 2): the vacuum part is (z − w)^{-2} = 1/16 and the a₋₂ part cancels.
    assert_eq!(v[0]["value"], "(1/16)·|0> + a-1 a-1|0>");
    let (code, out, _) = run_ok(&["factor", "kernel", "--exprs", e, "--window", "0:1"]);
    assert_eq!(code, 0);
    let k: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(k["kernel_dim"], 1);

    let straddle = dir.path().join("s.json");
    std::fs::write(
        &straddle,
        r#"{"carrier": {"disc": {"center": "0", "radius": "2"}},
            "terms": [{"coeff": "1", "factors": [{"delta": {"p": "0", "d": 0}}, {"delta": {"p": "3/2", "d": 0}}],
                       "states": ["a-1", "a-1"]}]}"#,
    )
    .unwrap();
    let (code, _, _) = run_ok(&["factor", "weiss", "--geometry", g, "--exprs", straddle.to_str().unwrap(), "--window", "0:2"]);
    assert_eq!(code, 1);
    assert_eq!(run_ok(&["factor", "roundtrip", "--window", "0:3"]).0, 0);
}

#[test]
fn mode_and_npoint_commands() {
    let (code, out, _) = run_ok(&["mode", "--a", "a-1", "--n", "1", "--b", "a-1"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"], "|0>");
    let (code, out, _) = run_ok(&["npoint", "--states", "a-1;a-1", "--points", "2,0", "--window", "0:0", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out, "degree,value\n0,(1/4)·|0>\n");
    let (code, _, _) = run_ok(&["--preset", "virasoro", "--c", "1/2", "check", "insertion", "--window", "0:4"]);
    assert_eq!(code, 0);
}
