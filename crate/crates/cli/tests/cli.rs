use std::fs;
use std::process::Command;

fn cllab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cllab"))
}

#[test]
fn config_subcommand_prints_loadable_toml() {
    let out = cllab().args(["config", "ks"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("experiment = \"ks\""));
    assert!(!cllab()
        .args(["config", "nope"])
        .output()
        .unwrap()
        .status
        .success());
}

#[test]
fn exit_status_follows_the_assertions() {
    let dir = tempfile::tempdir().unwrap();
    let run = |toml: &str, name: &str| {
        let cfg = dir.path().join(format!("{name}.toml"));
        fs::write(&cfg, toml).unwrap();
        cllab()
            .args(["mesh", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(name))
            .output()
            .unwrap()
    };
    let ok = run(
        "experiment = \"mesh\"\ndomains = [\"ball\"]\nresolutions = [4, 8, 16]\n",
        "ok",
    );
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(ok.status.success(), "{stdout}");
    assert!(stdout.lines().last().unwrap().starts_with("PASS mesh"));
    assert!(dir.path().join("ok").join("mesh.json").exists());

    let bad = run(
        "experiment = \"mesh\"\ndomains = [\"ball\"]\nresolutions = [1]\n",
        "bad",
    );
    assert_eq!(
        bad.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&bad.stdout)
    );
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL "));
}

#[test]
fn mismatched_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ks.toml");
    fs::write(
        &cfg,
        "experiment = \"ks\"\ndomains = [\"ball\"]\nresolutions = [1]\n",
    )
    .unwrap();
    let out = cllab()
        .args(["mesh", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("configures `ks`"));
}
