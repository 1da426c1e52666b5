use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn bmfeas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmfeas"))
        .args(args)
        .env_remove("BMFEAS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn two_arc_network_is_infeasible() {
    let out = bmfeas(&["solve", "--topology", &fixture("fig2a.top"), "--data", &fixture("xor.csv")]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["status"], "infeasible");
}

#[test]
fn solve_then_verify() {
    let dir = std::env::temp_dir().join(format!("bmfeas-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let solution = dir.join("fig2b.json").display().to_string();
    let (top, data) = (fixture("fig2b.top"), fixture("xor.csv"));

    let out = bmfeas(&["solve", "--topology", &top, "--data", &data, "--output", &solution]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "feasible");

    let out = bmfeas(&["verify", "--topology", &top, "--data", &data, "--solution", &solution]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("valid"));

    let out = bmfeas(&["verify", "--topology", &top, "--data", &data, "--solution", &solution, "--margin", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("invalid"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reference_solution_verifies_at_quarter_not_half() {
    let args = |margin: &'static str| {
        let mut v = vec![
            "verify".to_string(),
            "--topology".into(),
            fixture("fig2c.top"),
            "--data".into(),
            fixture("xor.csv"),
            "--solution".into(),
            fixture("fig2c_reference.json"),
            "--margin".into(),
        ];
        v.push(margin.into());
        v
    };
    let run = |margin| {
        let a = args(margin);
        bmfeas(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let out = run("1/4");
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("achieved margin 1/4"));
    assert_eq!(run("1/2").status.code(), Some(1));
}

#[test]
fn compile_prints_rows() {
    let out = bmfeas(&[
        "compile", "--topology", &fixture("fig2b.top"), "--data", &fixture("xor.csv"), "--hidden", "0001",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 8);
    assert_eq!(json["params"].as_array().unwrap().len(), 7);
}

#[test]
fn sample_output_is_seeded() {
    let base = [
        "sample", "--topology", &fixture("fig2c.top"), "--solution", &fixture("fig2c_reference.json"), "--size", "20",
    ];
    let a = bmfeas(&[&base[..], &["--seed", "9", "--full"]].concat());
    let b = Command::new(env!("CARGO_BIN_EXE_bmfeas"))
        .args([&base[..], &["--full"]].concat())
        .env("BMFEAS_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 20);
    for line in lines {
        let fields: Vec<&str> = line.split(" | ").collect();
        assert_eq!(fields.len(), 3, "{line}");
        assert_eq!(fields[0].split(' ').count(), 3);
        assert!(fields[2] == "0" || fields[2] == "1");
    }
}

#[test]
fn sweep_prints_table() {
    let out = bmfeas(&[
        "sweep", "--topology", &fixture("fig2c.top"), "--data", &fixture("xor.csv"),
        "--solution", &fixture("fig2c_reference.json"), "--epsilons", "0.1,2", "--size", "50", "--seeds", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("epsilon"));
    assert_eq!(text.lines().count(), 1 + 2 + 2);
}

#[test]
fn xor_demo_exits_zero() {
    let out = bmfeas(&["xor-demo"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("2C"));
}

#[test]
fn usage_and_input_errors_exit_two() {
    let out = bmfeas(&["solve", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage:"));
    let out = bmfeas(&["solve", "--topology", &fixture("xor.csv"), "--data", &fixture("xor.csv")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}
