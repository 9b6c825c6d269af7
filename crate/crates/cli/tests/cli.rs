use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use matorth::WeightParams;
use matorth_cli::config::{build_params, parse_a_list};
use matorth_cli::tables::{read_table_json, recurrence_identity_residual, Table};
use matorth_cli::{export_tables, run_suite, Format, RunConfig, Status};
use serde_json::Value as Json;

fn matorth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matorth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Json {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn config(size: usize, a: &str, b: f64, nmax: usize) -> RunConfig {
    let params = build_params(size, &parse_a_list(a).unwrap(), b).unwrap();
    RunConfig {
        nmax,
        ..RunConfig::new(params)
    }
}

fn check_names(doc: &Json) -> Vec<String> {
    doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn default_verify_passes_every_check() {
    let out = matorth(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = json_stdout(&out);
    assert_eq!(doc["pass"], Json::Bool(true));
    assert_eq!(doc["params"]["size"], 2);
    assert_eq!(doc["params"]["a"], serde_json::json!([[1.0, 0.0]]));
    assert_eq!(doc["params"]["b"], 2.0);
    assert_eq!(doc["params"]["nmax"], 10);
    assert_eq!(doc["params"]["grid"].as_array().unwrap().len(), 11);
    for check in doc["checks"].as_array().unwrap() {
        assert_eq!(check["pass"], Json::Bool(true), "{check}");
        assert_eq!(check["status"], "pass", "{check}");
        assert!(check["residual"].as_f64().unwrap() <= check["tolerance"].as_f64().unwrap());
    }
    let names = check_names(&doc);
    for expected in [
        "structure/hermitian",
        "lemma/principal_relation",
        "symmetry/second_order",
        "chi_xi/xi_diagonal",
        "oracle",
        "orthogonality",
        "eigen",
        "rodrigues_explicit",
        "recurrence/closed_form",
        "recurrence/identity",
        "norms",
        "pde",
        "asymptotics/limit",
        "asymptotics/monotone",
    ] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }
    assert!(doc["tables"]["A"].is_array());
    assert!(doc["timings"]["oracle"].is_number());
}

#[test]
fn stages_run_in_documented_order() {
    let summary = run_suite(&RunConfig::flagship());
    let stage = |name: &str| name.split('/').next().unwrap().to_string();
    let mut order: Vec<String> = Vec::new();
    for c in &summary.checks {
        let s = stage(&c.name);
        if order.last() != Some(&s) {
            order.push(s);
        }
    }
    assert_eq!(
        order,
        [
            "structure",
            "lemma",
            "symmetry",
            "chi_xi",
            "oracle",
            "orthogonality",
            "eigen",
            "rodrigues_explicit",
            "recurrence",
            "norms",
            "pde",
            "asymptotics"
        ]
    );
    let timed: Vec<&str> = summary.timings.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(timed.len(), order.len());
}

#[test]
fn degenerate_b_skips_only_the_singular_identities() {
    let summary = run_suite(&config(2, "1", 1.0, 6));
    assert!(summary.pass());
    let skipped: Vec<&str> = summary
        .checks
        .iter()
        .filter(|c| c.status == Status::Skipped)
        .map(|c| c.name.as_str())
        .collect();
    assert_eq!(
        skipped,
        [
            "lemma/even_power_expansion",
            "lemma/principal_relation",
            "asymptotics/limit",
            "asymptotics/monotone"
        ]
    );
    for name in &skipped {
        let note = summary.check(name).unwrap().note.as_deref().unwrap();
        assert!(note.starts_with("degenerate-skipped"), "{note}");
    }
    assert!(summary.check("lemma/psi_intertwining").unwrap().status == Status::Pass);
    assert!(summary.check("norms").unwrap().status == Status::Pass);
}

#[test]
fn larger_sizes_run_the_general_checks_only() {
    let summary = run_suite(&config(4, "1,0.5+0.5i,-1", 0.7, 6));
    assert!(summary.pass(), "{:?}", summary.checks);
    assert!(summary.check("eigen").is_some());
    assert!(summary.check("pde").is_none());
    assert!(summary.check("recurrence/closed_form").is_none());
}

#[test]
fn configuration_errors_exit_with_two() {
    let zero = matorth(&["verify", "--size", "3", "--a", "1,0"]);
    assert_eq!(zero.status.code(), Some(2));
    let message = String::from_utf8_lossy(&zero.stderr);
    assert!(message.contains("a_2"), "{message}");
    assert!(zero.stdout.is_empty());

    for args in [
        &["verify", "--a", "1+x"][..],
        &["verify", "--grid", "3:-3:11"],
        &["verify", "--b", "-1"],
        &["verify", "--size", "3", "--a", "1,1,1"],
        &["verify", "--tol-abs", "0"],
        &["asymptotics", "--size", "3"],
    ] {
        assert_eq!(matorth(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verification_failure_exits_with_one() {
    let out = matorth(&["verify", "--tol-rel", "1e-300", "--tol-abs", "1e-300", "--nmax", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json_stdout(&out);
    assert_eq!(doc["pass"], Json::Bool(false));
    // per-check failures do not stop later stages
    assert!(check_names(&doc).iter().any(|n| n == "asymptotics/limit"));
}

#[test]
fn csv_summary_has_one_row_per_check() {
    let out = matorth(&["verify", "--format", "csv", "--nmax", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,residual,tolerance,pass,status,note"));
    assert_eq!(lines.count(), run_suite(&config(2, "1", 2.0, 4)).checks.len());
}

fn load_tables(dir: &Path) -> BTreeMap<String, Table> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let doc = read_table_json(&e.unwrap().path()).unwrap();
            let t = doc.to_table().unwrap();
            (t.name.clone(), t)
        })
        .collect()
}

fn round_trip(size: usize, a: &str, b: f64) {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(size, a, b, 8);
    cfg.output = Some(dir.path().to_path_buf());
    let written = export_tables(&cfg).unwrap();
    assert!(written.iter().all(|p| p.extension().unwrap() == "json"));
    let doc = read_table_json(&dir.path().join("B_hat.json")).unwrap();
    let params: WeightParams = doc.params.weight_params().unwrap();
    assert_eq!(params, cfg.params);
    let residual = recurrence_identity_residual(&params, &load_tables(dir.path()), doc.params.nmax).unwrap();
    assert!(residual <= cfg.tolerances.rel, "size {size}: {residual:e}");
    let suite = run_suite(&cfg);
    if let Some(identity) = suite.check("recurrence/identity") {
        assert!(identity.pass());
    }
}

#[test]
fn exported_json_round_trips_through_the_recurrence_identity() {
    round_trip(2, "1", 2.0);
    round_trip(2, "1+1i", 0.5);
    round_trip(3, "1,-0.5+1i", 3.0);
}

#[test]
fn export_is_byte_identical_across_runs() {
    for format in ["json", "csv"] {
        let first = tempfile::tempdir().unwrap();
        let second = tempfile::tempdir().unwrap();
        for dir in [&first, &second] {
            let out = matorth(&["export", "--b", "4", "--format", format, "--out", dir.path().to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0));
        }
        let mut names: Vec<_> = fs::read_dir(first.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert_eq!(names.len(), 13);
        for name in names {
            let a = fs::read(first.path().join(&name)).unwrap();
            let b = fs::read(second.path().join(&name)).unwrap();
            assert_eq!(a, b, "{name:?}");
        }
    }
}

#[test]
fn csv_export_has_one_row_per_n() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(2, "1", 2.0, 5);
    cfg.output = Some(dir.path().to_path_buf());
    cfg.format = Format::Csv;
    export_tables(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("B.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,v11_re,v11_im,v12_re,v12_im,v21_re,v21_im,v22_re,v22_im");
    assert_eq!(lines.len(), 1 + 6);
    assert!(lines[1].starts_with("0,"));
    // B_0 = (b/√(γ_0γ_1)) b^{-3/4} [[0, a], [ā, 0]] is off-diagonal
    let fields: Vec<f64> = lines[1].split(',').skip(1).map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[0], 0.0);
    assert!(fields[2] > 0.0);
    assert_eq!(fields[2], fields[4]);
    let gamma = fs::read_to_string(dir.path().join("gamma.csv")).unwrap();
    assert_eq!(gamma.lines().next(), Some("n,value"));
    assert_eq!(gamma.lines().nth(1), Some("0,2.0"));
}

#[test]
fn exported_values_are_complex_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out = matorth(&["export", "--a", "1+1i", "--b", "0.5", "--nmax", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Json = serde_json::from_str(&fs::read_to_string(dir.path().join("B.json")).unwrap()).unwrap();
    assert_eq!(doc["table"], "B");
    assert_eq!(doc["source"], "closed-form");
    assert_eq!(doc["params"]["a"], serde_json::json!([[1.0, 1.0]]));
    let row = &doc["rows"][1];
    assert_eq!(row["n"], 1);
    let entry = &row["value"][0][1];
    assert_eq!(entry.as_array().unwrap().len(), 2);
    // B_n ∝ [[0, a], [ā, 0]] with a = 1+i
    let (re, im) = (entry[0].as_f64().unwrap(), entry[1].as_f64().unwrap());
    assert!((re - im).abs() <= 1e-15 * re.abs());
    let lower = &row["value"][1][0];
    assert_eq!(lower[0].as_f64().unwrap(), re);
    assert_eq!(lower[1].as_f64().unwrap(), -im);
}

#[test]
fn seeded_sweep_is_reproducible() {
    let args = ["verify", "--size", "3", "--nmax", "3", "--seed", "42", "--draws", "3"];
    let first = json_stdout(&matorth(&args));
    let second = json_stdout(&matorth(&args));
    let sweep = |doc: &Json| -> Vec<Json> {
        doc["checks"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|c| c["name"].as_str().unwrap().starts_with("sweep/"))
            .cloned()
            .collect()
    };
    assert_eq!(sweep(&first).len(), 3);
    assert_eq!(sweep(&first), sweep(&second));
    assert_eq!(first["params"]["seed"], 42);
    let without = json_stdout(&matorth(&["verify", "--size", "3", "--nmax", "3"]));
    assert!(sweep(&without).is_empty());
}

#[test]
fn other_subcommands_emit_documents() {
    let structure = json_stdout(&matorth(&["structure", "--size", "3"]));
    assert_eq!(structure["Acal"].as_array().unwrap().len(), 3);
    assert_eq!(structure["weight"].as_array().unwrap().len(), 11);
    assert_eq!(structure["F2"]["coefficients"].as_array().unwrap().len(), 2);

    let ortho = json_stdout(&matorth(&["orthopoly", "--nmax", "3"]));
    assert_eq!(ortho["monic"].as_array().unwrap().len(), 4);
    assert_eq!(ortho["explicit"].as_array().unwrap().len(), 4);
    // P̂_n is monic: the leading coefficient is the identity
    assert_eq!(ortho["monic"][3]["coefficients"][3], serde_json::json!([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]));

    let rec = json_stdout(&matorth(&["recurrence", "--nmax", "3"]));
    let keys: Vec<&str> = rec["tables"].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["A", "A_tilde", "B", "B_hat", "B_tilde", "C_hat", "C_tilde"]);

    let norms = json_stdout(&matorth(&["norms", "--size", "3", "--nmax", "3"]));
    assert_eq!(norms["sources"]["norm_monic"], "moments");

    let asym = json_stdout(&matorth(&["asymptotics", "--b", "4", "--nmax", "40"]));
    assert_eq!(asym["rows"].as_array().unwrap().len(), 40);
    assert_eq!(asym["decreasing_from_20"], Json::Bool(true));
    let limit = &asym["limit"];
    assert!((limit[0][0][0].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((limit[1][1][0].as_f64().unwrap() - 1.0 / 8f64.sqrt()).abs() < 1e-15);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = matorth(&["verify", "--nmax", "3", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(path).unwrap().starts_with("name,residual"));
}
