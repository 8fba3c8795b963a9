use std::path::Path;

use epibound::cli::{dispatch, EXIT_CAP, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("epibound").chain(args.iter().copied());
    let code = dispatch(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn cycle_bounds_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let c5 = path(dir.path(), "c5.txt");
    assert_eq!(run(&["gen", "cycle", "--n", "5", "--out", &c5]).0, EXIT_OK);
    let (code, out, _) = run(&["bounds", "--graph", &c5, "--seeds", "0", "--beta", "0.5"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["lb"], 2.5);
    assert_eq!(v["n"], 5);
    assert!(v["ub_degree"].is_null());
    let prov = &v["provenance"];
    assert_eq!(prov["tool_version"], env!("CARGO_PKG_VERSION"));
    assert!(prov.get("master_seed").is_some());
    assert_eq!(prov["params"]["beta"], 0.5);
}

#[test]
fn exact_on_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = path(dir.path(), "k3.txt");
    std::fs::write(&k3, "3 3\n0 1\n1 2\n0 2\n").unwrap();
    let (code, out, _) = run(&["exact", "--graph", &k3, "--seeds", "0", "--beta", "0.5"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["mean"], 2.25);
    assert!(v["provenance"].is_object());

    let (code, out, _) = run(&[
        "exact", "--graph", &k3, "--seeds", "0", "--beta", "0.5", "--pmf",
    ]);
    assert_eq!(code, EXIT_OK);
    let pmf: Vec<f64> = serde_json::from_value(json(&out)["pmf"].clone()).unwrap();
    assert_eq!(pmf.len(), 4);
    assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn parity_violation_is_a_domain_error() {
    let (code, _, err) = run(&[
        "gen",
        "random-regular",
        "--n",
        "5",
        "--r",
        "3",
        "--seed",
        "1",
    ]);
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("even"), "{err}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let c5 = path(dir.path(), "c5.txt");
    let k8 = path(dir.path(), "k8.txt");
    run(&["gen", "cycle", "--n", "5", "--out", &c5]);
    run(&["gen", "complete", "--n", "8", "--out", &k8]);

    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["bounds", "--graph", &c5]).0, EXIT_USAGE);
    let missing = path(dir.path(), "missing.txt");
    assert_eq!(
        run(&["bounds", "--graph", &missing, "--beta", "0.5"]).0,
        EXIT_USAGE
    );

    assert_eq!(
        run(&["bounds", "--graph", &c5, "--beta", "1"]).0,
        EXIT_DOMAIN
    );
    assert_eq!(
        run(&["bounds", "--graph", &c5, "--beta", "0.5", "--ub-only"]).0,
        EXIT_DOMAIN
    );
    assert_eq!(
        run(&["bounds", "--graph", &c5, "--beta", "0.4", "--ub-only"]).0,
        EXIT_OK
    );
    assert_eq!(
        run(&["bounds", "--graph", &c5, "--seeds", "9", "--beta", "0.4"]).0,
        EXIT_DOMAIN
    );

    let (code, _, err) = run(&["exact", "--graph", &k8, "--beta", "0.5"]);
    assert_eq!(code, EXIT_CAP, "{err}");
}

#[test]
fn outputs_are_byte_identical_across_runs_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let g = path(dir.path(), "g.txt");
    assert_eq!(
        run(&[
            "gen",
            "random-regular",
            "--n",
            "200",
            "--r",
            "3",
            "--seed",
            "9",
            "--out",
            &g
        ])
        .0,
        EXIT_OK
    );
    let gen_again = run(&[
        "gen",
        "random-regular",
        "--n",
        "200",
        "--r",
        "3",
        "--seed",
        "9",
    ])
    .1;
    assert_eq!(std::fs::read_to_string(&g).unwrap(), gen_again);

    let sim = |jobs: &str| {
        run(&[
            "simulate", "--graph", &g, "--seeds", "0,7", "--beta", "0.3", "--trials", "5000",
            "--seed", "42", "--method", "process", "--jobs", jobs,
        ])
    };
    let (code, first, _) = sim("1");
    assert_eq!(code, EXIT_OK);
    assert_eq!(first, sim("1").1);
    assert_eq!(first, sim("3").1);
    let v = json(&first);
    assert_eq!(v["trials"], 5000);
    assert_eq!(v["method"], "process");
    assert_eq!(v["provenance"]["master_seed"], 42);
}

#[test]
fn experiment_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "exp.cfg");
    let csv = path(dir.path(), "rows.csv");
    let summary = path(dir.path(), "summary.json");
    std::fs::write(
        &cfg,
        "mode = convergence\nfamily = cycle\nn = 11, 21\nbeta = 0.5\ntrials = 500\nseed = 3\n",
    )
    .unwrap();
    let args = [
        "experiment",
        "--config",
        &cfg,
        "--out",
        &csv,
        "--summary",
        &summary,
    ];
    assert_eq!(run(&args).0, EXIT_OK);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert!(rows.starts_with("family,n,vertices,beta,k,"));
    let s = json(&std::fs::read_to_string(&summary).unwrap());
    assert_eq!(s["cells"], 2);
    assert_eq!(s["provenance"]["master_seed"], 3);

    let first = std::fs::read(&csv).unwrap();
    assert_eq!(run(&args).0, EXIT_OK);
    assert_eq!(first, std::fs::read(&csv).unwrap());

    std::fs::write(
        &cfg,
        "mode = convergence\nfamily = cycle\nn = 11\nbeta = 0.5\nbogus = 1\n",
    )
    .unwrap();
    assert_eq!(run(&["experiment", "--config", &cfg]).0, EXIT_USAGE);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_epibound");
    let status = std::process::Command::new(bin)
        .args(["gen", "random-regular", "--n", "5", "--r", "3"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_DOMAIN));
    let ok = std::process::Command::new(bin)
        .args(["gen", "path", "--n", "3"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("3 2\n0 1\n1 2\n"));
}
