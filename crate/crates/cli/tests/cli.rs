use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gscatter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gscatter")).args(args).output().expect("spawn gscatter")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// A labelled path-plus-triangle graph and a relabeled copy of it.
const ISOMORPHIC_PAIR: &str = "\
graph a 1
0 1
1 2
2 0
2 3
3 4
graph b 1
4 3
3 2
2 4
2 1
1 0
";

#[test]
fn zero_bank_fails_the_frame_check() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", "[frame]\nbank = { filters = [{ kind = \"constant\", amplitude = 0.0 }] }\n");
    let out = gscatter(&["validate-frame", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("A: 0.000000000000"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error: lower frame bound"));
}

#[test]
fn frame_check_of_presets_succeeds() {
    let out = gscatter(&["validate-frame", "--preset", "architecture_II"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "A: 2.000000000000\nB: 3.000000000000\ntight: false\n");
}

#[test]
fn missing_inputs_exit_with_code_two() {
    let out = gscatter(&["aggregate", "--dataset", "/definitely/not/here.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.lines().any(|l| l == "error: dataset not found: /definitely/not/here.txt"), "{err}");

    let out = gscatter(&["energy", "--config", "/definitely/not/run.toml"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", "colour = 3\n");
    assert_eq!(gscatter(&["energy", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn depth_one_scatter_has_one_output_per_signal() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "g.txt", ISOMORPHIC_PAIR);
    let cfg = write(dir.path(), "run.toml", "[dataset]\npath = \"g.txt\"\ndescriptors = [\"degree\"]\n");
    let out = gscatter(&["scatter", "--config", &cfg, "--depth", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("graph,signal,layer,path,vertex,re,im"));
    // Two graphs, one signal, one output of five vertices each.
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.split(',').nth(2) == Some("1")));
}

#[test]
fn isomorphic_graphs_give_identical_feature_rows() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "g.txt", ISOMORPHIC_PAIR);
    let out = gscatter(&["aggregate", "--dataset", &data]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows = |id: &str| -> Vec<String> {
        text.lines().filter_map(|l| l.strip_prefix(&format!("{id},"))).map(str::to_string).collect()
    };
    let (a, b) = (rows("a"), rows("b"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn runs_are_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "g.txt", ISOMORPHIC_PAIR);
    let one = gscatter(&["aggregate", "--dataset", &data, "--jobs", "1"]);
    let four = gscatter(&["aggregate", "--dataset", &data, "--jobs", "4"]);
    assert_eq!(one.stdout, four.stdout);

    let e1 = gscatter(&["energy", "--seed", "5"]);
    let e2 = gscatter(&["energy", "--seed", "5"]);
    assert_eq!(e1.status.code(), Some(0));
    assert_eq!(e1.stdout, e2.stdout);
}

#[test]
fn energy_rows_respect_their_bound() {
    let out = gscatter(&["energy", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,W_n,bound_n"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(r[1] <= r[2]);
    }
}

#[test]
fn unperturbed_run_reports_margin_equal_to_bound() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", "[perturb]\ndelta = 0.0\nsamples = 5\n");
    let report = dir.path().join("report.json");
    let out = gscatter(&["perturb", "--config", &cfg, "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["empirical_max_ratio"].as_f64(), Some(0.0));
    assert_eq!(json["margin"], json["stability_constant"]);
    assert_eq!(json["holds"], true);
}

#[test]
fn fit_reports_fold_metrics() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", "seed = 4\n[fit]\nsynthetic = 40\nfolds = 4\n");
    let out = gscatter(&["fit", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("samples: 40\nfeatures: 850\nmae: "));
    assert!(text.contains("target_std: "));
    assert_eq!(text.lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).count(), 4);
}
