use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

fn small_config() -> Value {
    json!({
        "seed": 3,
        "data": {"synthetic": {"n_patients": 150, "seed": 5}},
        "features": {"k_neighbors": 3, "rfe": {"step_k": 10, "cv_folds": 2}},
        "models": [
            {"kind": "knn", "params": {"n_neighbors": 5}},
            {"kind": "forest", "params": {"n_estimators": 15, "max_depth": 6}},
            {"kind": "svm", "params": {"c": 0.5}, "rfe": true}
        ],
        "sequence": {
            "windows": [8],
            "steps": [8],
            "train": {"epochs": 1, "batch_size": 16, "max_train_windows": 48},
            "archs": [{"kind": "lstm", "hidden": 8}]
        },
        "eval": {"importance_repeats": 1, "importance_max_windows": 20}
    })
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn neurolos(args: &[&str], config: &Path, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_neurolos"));
    cmd.args(args)
        .arg("--config")
        .arg(config)
        .env("RUST_LOG", "warn")
        .env_remove("NEUROLOS_OUT");
    if let Some(out) = out {
        cmd.arg("--out").arg(out);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("run_manifest.json")).unwrap()).unwrap()
}

fn files_under(root: &Path, dir: &Path, acc: &mut BTreeMap<String, String>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            files_under(root, &p, acc);
        } else {
            let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
            acc.insert(rel, hex::encode(Sha256::digest(fs::read(&p).unwrap())));
        }
    }
}

#[test]
fn full_run_reports_every_model_and_inventories_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &small_config());
    let o = neurolos(&["run", "--stages", "all"], &config, Some(&out));
    assert!(o.status.success(), "{}", stderr(&o));
    for stage in ["generate", "marts", "train", "report"] {
        assert!(stdout(&o).contains(&format!("{stage:<11} ran in")), "{}", stdout(&o));
    }

    let table = fs::read_to_string(out.join("report/model_comparison.csv")).unwrap();
    for model in ["majority", "bayes", "knn", "forest", "svm", "lstm_w8_s8"] {
        assert!(
            table.lines().any(|l| l.starts_with(&format!("{model},"))),
            "{model} missing:\n{table}"
        );
    }
    let md = fs::read_to_string(out.join("report/report.md")).unwrap();
    for section in [
        "## Model comparison",
        "## Per-class metrics",
        "## Confusion matrices",
        "## Permutation importance",
        "## Window and step sizes",
    ] {
        assert!(md.contains(section), "{section}");
    }
    assert!(fs::read_to_string(out.join("report/window_grid.svg"))
        .unwrap()
        .contains("<polyline"));

    let mut on_disk = BTreeMap::new();
    files_under(&out, &out, &mut on_disk);
    on_disk.remove("run_manifest.json");
    let listed: BTreeMap<String, String> = manifest(&out)["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            (
                f["path"].as_str().unwrap().to_string(),
                f["sha256"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    assert_eq!(listed, on_disk);
}

#[test]
fn rerunning_marts_is_a_no_op() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &small_config());
    let first = neurolos(&["run", "--stages", "generate,ingest,marts"], &config, Some(&out));
    assert!(first.status.success(), "{}", stderr(&first));
    let before = manifest(&out);

    let second = neurolos(&["marts"], &config, Some(&out));
    assert!(second.status.success(), "{}", stderr(&second));
    assert!(
        stdout(&second).contains("marts       up to date"),
        "{}",
        stdout(&second)
    );
    let after = manifest(&out);
    assert_eq!(before["files"], after["files"]);
    assert_eq!(before["stages"]["marts"], after["stages"]["marts"]);
}

#[test]
fn unknown_model_kind_is_a_config_error_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["models"][1]["kind"] = json!("xgboost");
    let config = write_config(tmp.path(), &cfg);
    let o = neurolos(&["run"], &config, Some(&tmp.path().join("out")));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("models[1].kind"), "{}", stderr(&o));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn stage_without_its_inputs_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &small_config());
    let o = neurolos(&["features"], &config, Some(&tmp.path().join("out")));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("run that stage first"), "{}", stderr(&o));
}

#[test]
fn environment_sets_the_output_root_and_ddl_is_emitted() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("from-env");
    let ddl = tmp.path().join("schema.sql");
    let config = write_config(tmp.path(), &small_config());
    let o = Command::new(env!("CARGO_BIN_EXE_neurolos"))
        .args(["run", "--stages", "generate,ingest,marts", "--config"])
        .arg(&config)
        .arg("--emit-ddl")
        .arg(&ddl)
        .env("NEUROLOS_OUT", &out)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("raw/chartevents.csv").is_file());
    assert!(out.join("marts/admissions_mart/meta.json").is_file());
    let sql = fs::read_to_string(&ddl).unwrap();
    for table in ["patients", "chartevents", "admissions_mart"] {
        assert!(sql.contains(&format!("CREATE TABLE \"{table}\"")), "{table}:\n{sql}");
    }
}

#[test]
fn raw_directory_source_matches_the_synthetic_run() {
    let tmp = tempfile::tempdir().unwrap();
    let synthetic = tmp.path().join("synthetic");
    let config = write_config(tmp.path(), &small_config());
    let o = neurolos(&["run", "--stages", "generate,ingest,marts"], &config, Some(&synthetic));
    assert!(o.status.success(), "{}", stderr(&o));

    let mut cfg = small_config();
    cfg["data"] = json!({"raw_dir": synthetic.join("raw")});
    let raw_dir = tmp.path().join("raw-config");
    fs::create_dir(&raw_dir).unwrap();
    let config = write_config(&raw_dir, &cfg);
    let from_raw = tmp.path().join("from-raw");
    let o = neurolos(&["run", "--stages", "generate,ingest,marts"], &config, Some(&from_raw));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!from_raw.join("raw").exists());
    for file in [
        "marts/split.csv",
        "marts/admissions_mart/data.csv",
        "ingest/selected_admissions.csv",
    ] {
        assert_eq!(
            fs::read(synthetic.join(file)).unwrap(),
            fs::read(from_raw.join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn missing_raw_directory_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["data"] = json!({"raw_dir": tmp.path().join("nowhere")});
    let config = write_config(tmp.path(), &cfg);
    let o = neurolos(
        &["run", "--stages", "generate,ingest"],
        &config,
        Some(&tmp.path().join("out")),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
