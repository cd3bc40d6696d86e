use std::process::{Command, Output};

fn affen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affen"))
        .args(args)
        .env_remove("AFFEN_FIELD")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

#[test]
fn energy_json_on_small_grid() {
    let o = affen(&["energy", "--gen", "grid:3", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["m"], 3);
    assert_eq!(v["report"]["M"], 3);
    assert_eq!(v["config"]["input"]["gen"], "grid:3");
    assert!(v["schema"].as_str().unwrap().starts_with("affen/energy"));
}

#[test]
fn oracle_run_passes_over_prime_field() {
    let o = affen(&["oracle", "--gen", "randaff:20:seed=1", "--field", "Fp:101"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().skip(2).all(|l| l.ends_with(",true")), "{text}");
}

#[test]
fn sweep_emits_one_row_per_size() {
    let o = affen(&["sweep", "--gen", "affprod:gp(1,2,N)xap(0,1,N)", "--range", "N=3..10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert!(lines[0].starts_with("# affen/sweep/v1"));
    assert_eq!(lines.len(), 1 + 1 + 8);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let base = ["energy", "--gen", "randaff:30:seed=4", "--format", "json"];
    let one = affen(&[&base[..], &["--threads", "1"]].concat());
    let many = affen(&[&base[..], &["--threads", "8"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn field_comes_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_affen"))
        .args(["decompose", "--gen", "grid:3"])
        .env("AFFEN_FIELD", "Fp:5")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("# affen/decompose/v1 field=Fp:5"));
}

#[test]
fn configuration_errors_exit_two() {
    for args in [
        &["energy", "--gen", "bogus"][..],
        &["energy", "--gen", "grid:3", "--field", "Fp:6"],
        &["energy", "--gen", "grid:3", "--format", "xml"],
        &["energy"],
        &["oracle", "--gen", "randaff:70:seed=1", "--cap", "64"],
        &["sweep", "--gen", "grid:N"],
        &["energy", "--gen", "grid:3", "--nonsense"],
    ] {
        assert_eq!(affen(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn reads_maps_from_file_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("maps.txt");
    std::fs::write(&input, "# a b\n1 0\n2 1\n3 -1\n1/2 4\n").unwrap();
    let out = dir.path().join("report.csv");
    let o = affen(&[
        "boundcheck",
        "--input",
        input.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# affen/boundcheck/v1 field=Q input=file:"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn shadow_and_richlines_run() {
    let o = affen(&["shadow", "--gen", "randplanar:10:seed=2", "--l1", "1:1:-100", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "ok");
    let o = affen(&["richlines", "--gen", "gridlines:ap(0,1,5):affprod:{1}xap(0,1,5)", "--alpha", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
