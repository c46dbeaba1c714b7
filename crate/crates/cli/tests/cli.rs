use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_holocurve"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg(command).arg("--config").arg(config).arg("--output").arg(out).args(extra).output().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn digests(dir: &Path) -> BTreeMap<String, String> {
    manifest(dir)["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| (f["path"].as_str().unwrap().to_string(), f["sha256"].as_str().unwrap().to_string()))
        .collect()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn invalid_configs_exit_2_with_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    let empty = write(tmp.path(), "empty.json", "");
    let o = run("admissible", &empty, &out, &[]);
    assert_eq!(o.status.code(), Some(2));

    let zero = write(
        tmp.path(),
        "zero.json",
        "{\n  \"system\": {\n    \"order\": 1,\n    \"forms\": [[1, 0], [0, 0], [1, 1]]\n  }\n}\n",
    );
    let o = run("admissible", &zero, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("zero.json:4:") && err.contains("forms[1]"), "{err}");

    let knob = write(tmp.path(), "knob.json", "{\n  \"numeric\": {\n    \"cluster_tol\": 7\n  }\n}\n");
    let o = run("counterexample", &knob, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("knob.json:3:"));

    let missing = tmp.path().join("nope.json");
    assert_eq!(run("counterexample", &missing, &out, &[]).status.code(), Some(2));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn numerical_failures_exit_3() {
    // No node doublings allowed: the flux quadrature cannot confirm convergence.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "budget.json",
        r#"{"measures": [{"name": "line", "measure": {"kind": "curve",
            "curve": {"family": "exponential", "slopes": [0, 1]},
            "settings": {"initial_nodes": 64, "step": null, "rel_tol": 1e-6, "max_doublings": 0, "node_density": 8}}}],
            "numeric": {"schedule": [16, 64]}}"#,
    );
    let o = run("lemma_demo", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
}

#[test]
fn degenerate_inputs_are_reported_not_failed() {
    // A flat curve carries no mass: the search reports a failed hypothesis.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "flat.json",
        r#"{"curve": {"family": "exponential", "slopes": [0, 0]},
            "system": {"order": 1, "forms": [[1, 0], [0, 1], [1, -1]]},
            "numeric": {"remplissage_m_range": [0, 5]}}"#,
    );
    let out = tmp.path().join("out");
    let o = run("remplissage", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("julia_report.json")).unwrap()).unwrap();
    assert_eq!(doc["report"]["search"]["outcome"], "hypothesis_fails");

    // A zero measure is finite.
    let cfg = write(
        tmp.path(),
        "zero.json",
        r#"{"measures": [{"name": "zero", "measure": {"kind": "zero"}}], "numeric": {"schedule": [4, 8]}}"#,
    );
    let out = tmp.path().join("out2");
    assert_eq!(run("lemma_demo", &cfg, &out, &[]).status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("lemma_demo.json")).unwrap()).unwrap();
    assert_eq!(doc["report"]["measures"][0]["outcome"]["outcome"], "finite_measure");
}

#[test]
fn identical_runs_have_identical_digests() {
    let tmp = tempfile::tempdir().unwrap();
    for (command, config) in
        [("counterexample", "counterexample.json"), ("analyze", "exp_line.json"), ("lemma_demo", "lemma_demo.json")]
    {
        let a = tmp.path().join(format!("{command}-a"));
        let b = tmp.path().join(format!("{command}-b"));
        assert!(run(command, &configs().join(config), &a, &["--seed", "5"]).status.success());
        assert!(run(command, &configs().join(config), &b, &["--seed", "5", "--jobs", "2"]).status.success());
        assert_eq!(digests(&a), digests(&b), "{command}");
        let m = manifest(&a);
        assert_eq!(m["config"]["seed"], 5);
        assert_eq!(m["command"], command);
        for f in m["files"].as_array().unwrap() {
            let bytes = std::fs::read(a.join(f["path"].as_str().unwrap())).unwrap();
            assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
        }
    }
    // A different seed moves the quasi-random samples.
    let c = tmp.path().join("seed-6");
    assert!(run("counterexample", &configs().join("counterexample.json"), &c, &["--seed", "6"]).status.success());
    assert_ne!(digests(&c)["bounded_discs.csv"], digests(&tmp.path().join("counterexample-a"))["bounded_discs.csv"]);
}

#[test]
fn golden_counterexample_digests() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert!(run("counterexample", &configs().join("counterexample.json"), &out, &[]).status.success());
    let d = digests(&out);
    assert_eq!(d["annulus_profile.csv"], "e7a5e734055faffb88674ca21e4fa8e6852602b781c7a0eb8851186a442cceae");
    assert_eq!(d["bounded_discs.csv"], "f7774e7eb44ee5546c3d6e2b2a41ede6a53d2863cfb53309e920733f2b15dc50");
    assert_eq!(d["counterexample.json"], "ba89b2bc4b9c5ef2ac9d2e8897629beded01cd3aabb6f873ac9c5facef1940a5");
}

#[test]
fn reports_embed_config_and_versioned_schemas() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert!(run("analyze", &configs().join("exp_line.json"), &out, &[]).status.success());
    let m = manifest(&out);
    let digest = m["config_sha256"].as_str().unwrap();
    for f in m["files"].as_array().unwrap() {
        let name = f["path"].as_str().unwrap();
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        if name.ends_with(".csv") {
            let first = text.lines().next().unwrap();
            assert!(first.starts_with("schema=holocurve.") && first.contains(digest), "{name}: {first}");
        } else {
            let doc: Value = serde_json::from_str(&text).unwrap();
            assert!(doc["schema"].as_str().unwrap().ends_with("/1"));
            assert_eq!(doc["config"], m["config"]);
        }
    }
    // Boundary and measure routes agree on T(r) for the line.
    let table = std::fs::read_to_string(out.join("characteristic.csv")).unwrap();
    let mut rows = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(table.as_bytes());
    for row in rows.records().skip(2) {
        let row = row.unwrap();
        assert!(row[4].parse::<f64>().unwrap() <= 0.02, "{row:?}");
    }
}

#[test]
fn admissible_and_counterexample_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("adm");
    assert!(run("admissible", &configs().join("paper.json"), &out, &[]).status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("admissibility.json")).unwrap()).unwrap();
    assert_eq!(doc["report"]["admissibility"]["admissible"], true);
    assert_eq!(doc["report"]["constants"].as_array().unwrap().len(), 20);

    let out = tmp.path().join("cx");
    assert!(run("counterexample", &configs().join("counterexample.json"), &out, &[]).status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("counterexample.json")).unwrap()).unwrap();
    let r = &doc["report"];
    assert_eq!(r["unbounded_profile"], false);
    assert!(r["max_profile_error"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["discs"]["all_within_bound"], true);
    assert!(r["discs"]["max_mass"].as_f64().unwrap() <= 0.04);
}

#[test]
fn bundled_example_config_reproduces_the_example() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("example");
    let o = run("verify_example", &configs().join("paper.json"), &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify_example.json")).unwrap()).unwrap();
    let r = &doc["report"];
    assert_eq!(r["admissibility"]["admissible"], true);
    assert!(r["symmetry"]["max_residual"].as_f64().unwrap() <= 1e-9);
    assert_eq!(r["sectors"].as_array().unwrap().len(), 6);
    assert_eq!(r["sector_claims_hold"], true);
    for check in r["equivariance"].as_array().unwrap() {
        assert_eq!(check["counts_agree"], true);
        assert_eq!(check["verdicts_agree"], true);
    }
    assert_eq!(r["julia_equivariance"]["holds"], true);
    assert!(!r["julia"]["directions"].as_array().unwrap().is_empty());
    assert_eq!(digests(&out).len(), 3);
}
