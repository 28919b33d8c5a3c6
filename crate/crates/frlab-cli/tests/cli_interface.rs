//! External-interface contracts of the binary: flag/config/env precedence,
//! output schemas, and the exit-code convention.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_frlab")
}

fn tmpfile(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("frlab-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn flags_override_config_file() {
    let config = tmpfile(
        "override.toml",
        "n = 1\np = \"2,2\"\nq = \"4,4\"\nalpha = \"0,0\"\nbeta = \"1,1\"\na = \"0,0\"\nb = \"0,0\"\nc = \"1.5,2\"\n",
    );
    // config alone: c = 1.5,2 is below the threshold -> exit 1
    let out = Command::new(bin())
        .args(["check", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // the flag overrides c back into the bounded region
    let out = Command::new(bin())
        .args(["check", "--config", config.to_str().unwrap(), "--c", "2,2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["config"]["c"], serde_json::json!("2,2"));
    assert_eq!(doc["report"]["verdict"]["outcome"], serde_json::json!("Bounded"));
}

#[test]
fn seed_env_var_is_the_default() {
    let run = |env_seed: Option<&str>, flag_seed: Option<&str>| {
        let mut cmd = Command::new(bin());
        cmd.args(["calibrate", "--n", "1", "--budget", "20000"]);
        cmd.env_remove("FRLAB_SEED");
        if let Some(s) = env_seed {
            cmd.env("FRLAB_SEED", s);
        }
        if let Some(s) = flag_seed {
            cmd.args(["--seed", s]);
        }
        let out = cmd.output().unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        doc["seed"].as_u64().unwrap()
    };
    assert_eq!(run(Some("123"), None), 123);
    // an explicit flag wins over the environment
    assert_eq!(run(Some("123"), Some("7")), 7);
    // default applies with neither
    assert_eq!(run(None, None), 42);
}

#[test]
fn scan_csv_has_the_documented_columns() {
    let out = Command::new(bin())
        .args([
            "scan", "--n", "1", "--p", "2,2", "--q", "4,4", "--alpha", "0,0", "--beta", "1,1",
            "--a", "0,0", "--b", "0,0", "--c", "2,2", "--format", "csv",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("header line");
    assert_eq!(header, "theta,delta,f_norm,Tf_norm,ratio");
    // provenance comments present
    assert!(text.lines().any(|l| l.starts_with("# seed=")));
    assert!(text.lines().any(|l| l.starts_with("# version=")));
    assert!(text.lines().any(|l| l.starts_with("# budget=")));
}

#[test]
fn usage_errors_exit_two() {
    // unknown flag
    let out = Command::new(bin()).args(["check", "--nope", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // missing required parameter
    let out = Command::new(bin())
        .args(["check", "--n", "1", "--p", "2,2", "--q", "4,4", "--alpha", "0,0", "--beta", "1,1", "--a", "0,0", "--b", "0,0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unknown subcommand
    let out = Command::new(bin()).args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // malformed pair
    let out = Command::new(bin())
        .args(["check", "--n", "1", "--p", "2", "--q", "4,4", "--alpha", "0,0", "--beta", "1,1", "--a", "0,0", "--b", "0,0", "--c", "2,2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infinite_exponents_spell_inf() {
    let out = Command::new(bin())
        .args([
            "check", "--n", "1", "--p", "inf,inf", "--q", "inf,inf", "--alpha", "0,0",
            "--beta", "1,1", "--a", "1,1", "--b", "0,0", "--c", "3,3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["report"]["verdict"]["case_tag"], serde_json::json!("p=q=(inf,inf)"));
    assert_eq!(doc["report"]["verdict"]["outcome"], serde_json::json!("Bounded"));
}

#[test]
fn apply_closed_matches_known_value() {
    // T of the probe at the axis points with the worked parameters
    let out = Command::new(bin())
        .args([
            "apply", "--op", "t", "--n", "1", "--a", "0,0", "--b", "0,0", "--c", "2,2",
            "--s", "2.5", "--t", "0.5", "--z", "0,1", "--w", "0,2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = doc["report"]["value"].as_array().unwrap();
    assert!(value[0].as_f64().unwrap().is_finite());
    // a second run is byte-identical
    let out2 = Command::new(bin())
        .args([
            "apply", "--op", "t", "--n", "1", "--a", "0,0", "--b", "0,0", "--c", "2,2",
            "--s", "2.5", "--t", "0.5", "--z", "0,1", "--w", "0,2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.stdout, out2.stdout);
}
