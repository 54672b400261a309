use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mpggm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpggm"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scenario(dir: &Path, p: usize, n: usize) -> std::path::PathBuf {
    let file = dir.join("scenario.json");
    fs::write(
        &file,
        format!(
            r#"{{"family": "scale-free", "p": {p}, "n": {n}, "platforms": 2, "groups": 3,
                "similarity_layout": "setting-one", "seed": 3}}"#
        ),
    )
    .unwrap();
    file
}

fn fit(manifest: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "fit", "--manifest", path(manifest), "--iterations", "40", "--burnin", "10",
        "--output-dir", path(out),
    ];
    args.extend_from_slice(extra);
    mpggm(&args)
}

#[test]
fn simulate_fit_evaluate_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sc = scenario(d, 10, 50);
    ok(mpggm(&["simulate", "--scenario", path(&sc), "--output-dir", path(&d.join("truth"))]));
    let manifest = d.join("truth/manifest.json");
    assert!(manifest.exists());

    ok(fit(&manifest, &d.join("fit1"), &[]));
    ok(fit(&manifest, &d.join("fit2"), &[]));
    for name in ["summary.json", "similarity.json", "run.json", "mpp_platform1_group1.csv"] {
        let a = fs::read(d.join("fit1").join(name)).unwrap();
        let b = fs::read(d.join("fit2").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let run: Value = serde_json::from_str(&fs::read_to_string(d.join("fit1/run.json")).unwrap()).unwrap();
    assert_eq!(run["chains"], 2);
    assert!(run["chain_agreement"].is_number());
    assert_eq!(run["pd_failures"], 0);

    let table = ok(mpggm(&[
        "evaluate", "--summary", path(&d.join("fit1")), "--truth", path(&d.join("truth")),
        "--output-dir", path(&d.join("eval")),
    ]));
    assert!(table.starts_with("Method"), "{table}");
    assert!(table.contains("mpggm (pooled)"));
    let eval: Value = serde_json::from_str(&fs::read_to_string(d.join("eval/evaluation.json")).unwrap()).unwrap();
    assert_eq!(eval["replicates"], 1);

    let report = ok(mpggm(&[
        "summarize", "--summary", path(&d.join("fit1")), "--output-dir", path(&d.join("graphs")),
    ]));
    assert!(report.contains("Total Pairs"), "{report}");
    assert!(d.join("graphs/graph_report.json").exists());
}

#[test]
fn single_chain_has_no_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sc = scenario(d, 6, 20);
    let out = d.join("fit");
    ok(mpggm(&[
        "fit", "--scenario", path(&sc), "--iterations", "20", "--burnin", "5", "--chains", "1",
        "--output-dir", path(&out),
    ]));
    let run: Value = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert!(run["chain_agreement"].is_null());
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    scenario(d, 6, 20);
    fs::write(
        d.join("run.json"),
        r#"{"scenario": "scenario.json", "iterations": 15, "burnin": 5, "seed": 9, "output_dir": "out"}"#,
    )
    .unwrap();
    ok(mpggm(&["fit", "--config", path(&d.join("run.json")), "--iterations", "500"]));
    let run: Value = serde_json::from_str(&fs::read_to_string(d.join("out/run.json")).unwrap()).unwrap();
    assert_eq!(run["iterations"], 15);
    assert_eq!(run["seed"], 9);
}

#[test]
fn default_scenario_writes_full_size_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sc = scenario(d, 40, 100);
    ok(mpggm(&["simulate", "--scenario", path(&sc), "--output-dir", path(&d.join("t"))]));
    let data: Vec<_> = fs::read_dir(d.join("t"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("data_") && n.ends_with(".csv"))
        .collect();
    assert_eq!(data.len(), 6);
    for name in data {
        let text = fs::read_to_string(d.join("t").join(&name)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 101, "{name}");
        assert!(lines.iter().all(|l| l.split(',').count() == 40));
    }
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let bad = d.join("bad.json");
    fs::write(&bad, r#"{"family": "lattice", "p": 5, "platforms": 1, "groups": 2, "similarity_layout": "setting-two"}"#).unwrap();
    let out = mpggm(&["simulate", "--scenario", path(&bad), "--output-dir", path(&d.join("x"))]);
    assert_eq!(out.status.code(), Some(2));

    let sc = scenario(d, 5, 10);
    let out = mpggm(&[
        "fit", "--scenario", path(&sc), "--iterations", "10", "--burnin", "10",
        "--output-dir", path(&d.join("y")),
    ]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(d.join("g.csv"), "a,b\n1,2\n3,x\n").unwrap();
    fs::write(
        d.join("m.json"),
        r#"{"platforms": [{"name": "p", "groups": [{"name": "g", "csv_path": "g.csv"}]}]}"#,
    )
    .unwrap();
    let out = fit(&d.join("m.json"), &d.join("z"), &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3, column 2"));
}
