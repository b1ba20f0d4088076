use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn latbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latbs"))
        .args(args)
        .env_remove("LATBS_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

const COMMANDS: [&str; 11] = [
    "bs-sweep",
    "eig-count",
    "weak-coupling",
    "dispersive-fit",
    "strichartz",
    "knapp",
    "flatband",
    "threshold-div",
    "holder-bv",
    "ultra-probe",
    "continuum-dispersive",
];

#[test]
fn list_shows_every_experiment() {
    let o = latbs(&["list-experiments"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    for c in COMMANDS {
        assert!(text.lines().any(|l| l.starts_with(c)), "{c} missing");
    }
    let one = latbs(&["list-experiments", "knapp"]);
    assert!(String::from_utf8_lossy(&one.stdout).contains("verdicts: unbounded|bounded"));
    assert_eq!(latbs(&["list-experiments", "nope"]).status.code(), Some(1));
}

#[test]
fn config_errors_exit_one_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let o = latbs(&["run", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty"), "{}", stderr(&o));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"command": "threshold-div", "params": {"mu": [0.1, "x"]}}"#).unwrap();
    let o = latbs(&["run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("params.mu[1]"), "{}", stderr(&o));

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"command": "knapp", "params": {"mesh": 32, "meshh": 1}}"#).unwrap();
    let o = latbs(&["run", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("meshh"), "{}", stderr(&o));

    let top = dir.path().join("top.json");
    std::fs::write(&top, r#"{"command": "knapp", "sed": 1}"#).unwrap();
    assert_eq!(latbs(&["run", top.to_str().unwrap()]).status.code(), Some(1));

    let mismatch = latbs(&["knapp", "--config", repo().join("configs/flatband.json").to_str().unwrap()]);
    assert_eq!(mismatch.status.code(), Some(1));
}

#[test]
fn flags_override_config_and_assert_controls_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo().join("configs/threshold-div.json");
    let out = dir.path().join("t");
    let o = latbs(&["threshold-div", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_json(&out.join("threshold-div.json"))["verdict"], "divergent");

    // d = 3 is bounded, so the config's own assert now fails.
    let o = latbs(&["threshold-div", "--config", cfg.to_str().unwrap(), "--d", "3", "--potential", "delta:-1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let env = read_json(&out.join("threshold-div.json"));
    assert_eq!(env["params"]["d"], 3);
    assert_eq!(env["verdict"], "bounded");

    let o = latbs(&["threshold-div", "--d", "3", "--assert", "bounded", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = latbs(&["threshold-div", "--assert", "maybe", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn artifacts_envelope_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    let o = latbs(&["run", repo().join("configs/flatband.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let env = read_json(&out.join("flatband.json"));
    for key in ["command", "version", "seed", "params", "verdict", "report"] {
        assert!(env.get(key).is_some(), "{key}");
    }
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "flatband");
    assert!(manifest["timestamp"]["wall_time_s"].is_number());
    for a in manifest["artifacts"].as_array().unwrap() {
        let f = out.join(a["file"].as_str().unwrap());
        assert_eq!(std::fs::metadata(&f).unwrap().len(), a["bytes"].as_u64().unwrap());
    }
    let mut csvs: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    csvs.sort();
    assert_eq!(csvs.len(), 3, "{csvs:?}");
    for c in csvs {
        let text = std::fs::read_to_string(out.join(&c)).unwrap();
        let header = text.lines().next().unwrap();
        let cols = header.split(',').count();
        assert!(text.lines().skip(1).all(|l| l.split(',').count() == cols), "{c}");
    }
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_latbs"))
        .args(["strichartz", "--t-max", "2"])
        .env("LATBS_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("strichartz/strichartz.json").exists());
}

#[test]
fn published_schemas_are_current() {
    for name in COMMANDS.iter().chain(["config"].iter()) {
        let o = latbs(&["schema", name]);
        assert!(o.status.success());
        let live: Value = serde_json::from_slice(&o.stdout).unwrap();
        let file = repo().join(format!("docs/schemas/{name}.schema.json"));
        assert_eq!(read_json(&file), live, "{} is stale", file.display());
    }
}

#[test]
fn shipped_configs_cover_every_command() {
    for c in COMMANDS {
        let cfg = read_json(&repo().join(format!("configs/{c}.json")));
        assert_eq!(cfg["command"], c);
        assert!(cfg["assert"].is_string(), "{c} has no expected verdict");
    }
}
