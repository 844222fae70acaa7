use std::path::PathBuf;
use std::process::{Command, Output};

fn recon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recon"))
        .args(args)
        .env_remove("RS_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn system(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "systems", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_final_example() {
    let o = recon(&["analyze", &system("final_example.json"), "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let spec: Vec<f64> = serde_json::from_value(v["spectrum"].clone()).unwrap();
    assert!(recon_core::linalg::max_abs_diff(&spec, &[2.0, 2.0, 1.5, 1.5]) < 1e-12);
}

#[test]
fn malformed_input_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"m\": 1,\n  \"d\": oops\n}").unwrap();
    let o = recon(&["analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn erasing_everything_is_an_argument_error() {
    let o = recon(&["erase", &system("duplicated_parseval.json"), "--J", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_lists_every_proper_subset() {
    let o = recon(&["erase", &system("final_example.json"), "--scan", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert!(rows[0].starts_with("erased,"));
    assert_eq!(rows.len(), 1 + 6);
}

#[test]
fn examples_filter_and_unknown_name() {
    let o = recon(&["examples", "--only", "riesz"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("riesz"));
    let o = recon(&["examples", "--only", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_output_is_deterministic() {
    let args = ["conjecture", "-k", "2,2,1", "-d", "3", "--samples", "50", "--seed", "9", "--json"];
    assert_eq!(recon(&args).stdout, recon(&args).stdout);
}

#[test]
fn sampled_system_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let p = path.to_str().unwrap();
    let o = recon(&["sample", "-k", "2,1,1", "-d", "3", "-v", "1,0.5,2", "--seed", "4", "-o", p]);
    assert!(o.status.success());
    let loaded = recon_cli::io::read_system(&path).unwrap();
    assert_eq!(loaded.weights.unwrap().values(), &[1.0, 0.5, 2.0]);
    let again = recon_cli::io::format_system(&loaded.system, Some(&recon_core::Weights::new(vec![1.0, 0.5, 2.0]).unwrap()));
    assert_eq!(again, std::fs::read_to_string(&path).unwrap());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "seed = 3\nbogus = 1\n").unwrap();
    let o = recon(&["--config", path.to_str().unwrap(), "examples"]);
    assert_eq!(o.status.code(), Some(2));
}
