use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[problem]
T = 0.5
[numerics]
K = 16
[experiment]
n_list = [2, 4]
epsilon_list = [0.1]
k_levels = [8, 16]
illposed_k = [8, 16]
"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_cvsheet"))
        .arg("--config")
        .arg(&cfg)
        .arg("--output")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/manifest.json")).unwrap()).unwrap()
}

#[test]
fn every_subcommand_succeeds_and_writes_a_manifest() {
    let cases: [(&[&str], &str); 7] = [
        (&["solve"], "trajectory.csv"),
        (&["equiv-check"], "equiv.csv"),
        (
            &["ineq-lab", "--samples", "40"],
            "samples_comm_bessel_iii.csv",
        ),
        (&["cont-dep"], "dependence.csv"),
        (&["triangulate"], "triangulation.csv"),
        (&["illposed"], "illposed.csv"),
        (&["resolution"], "resolution.csv"),
    ];
    for (args, file) in cases {
        let dir = tempfile::tempdir().unwrap();
        let out = run(dir.path(), SMALL, args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(
            dir.path().join("out").join(file).exists(),
            "{args:?} missing {file}"
        );
        assert!(dir.path().join("out/summary.json").exists());
        let m = manifest(dir.path());
        assert_eq!(m["command"], args[0]);
        assert_eq!(m["invariants_passed"], true);
        assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
        assert!(m["outputs"].as_array().unwrap().iter().any(|o| o == file));
    }
}

#[test]
fn identical_configs_give_byte_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(run(dir.path(), SMALL, &["cont-dep"]).status.success());
        assert!(run(
            dir.path(),
            SMALL,
            &["ineq-lab", "--inequality", "q-diff", "--samples", "30"]
        )
        .status
        .success());
    }
    for file in ["dependence.csv", "trajectory_n4.csv", "samples_q_diff.csv"] {
        let x = std::fs::read(a.path().join("out").join(file)).unwrap();
        let y = std::fs::read(b.path().join("out").join(file)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{file} differs between runs");
    }
}

#[test]
fn dependence_csv_has_one_row_per_n() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), SMALL, &["cont-dep"]).status.success());
    let text = std::fs::read_to_string(dir.path().join("out/dependence.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("n,"));
    assert!(lines[1].starts_with("2,") && lines[2].starts_with("4,"));
}

#[test]
fn unknown_key_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "[numerics]\nK = 16\nwibble = 3\n", &["solve"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wibble"));
}

#[test]
fn inadmissible_data_fail_the_solve() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "[problem]\nbase_amplitude = 0.6\n[numerics]\nK = 16\n",
        &["solve"],
    );
    assert_eq!(out.status.code(), Some(2));
    let summary = std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    assert!(!summary.contains("\"status\": \"ok\""));
}

#[test]
fn violated_invariant_sets_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[experiment]\nillposed_k = [32]\nt_short = 2.0\n";
    let out = run(dir.path(), cfg, &["illposed"]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(manifest(dir.path())["invariants_passed"], false);
}

#[test]
fn template_parses_back() {
    let out = Command::new(env!("CARGO_BIN_EXE_cvsheet"))
        .arg("template")
        .output()
        .unwrap();
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    assert!(run(
        dir.path(),
        &String::from_utf8(out.stdout).unwrap(),
        &["illposed"]
    )
    .status
    .success());
}
