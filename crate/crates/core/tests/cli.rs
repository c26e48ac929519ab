use std::process::Command;

fn submr() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_submr"));
    c.env_remove("SUBMR_SEED");
    c
}

fn stdout(c: &mut Command) -> String {
    let out = c.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn generate_then_run() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cov.txt");
    stdout(submr().args(["generate", "random-coverage", "n=12", "universe=20", "max_set_size=4", "--seed", "3", "-o"]).arg(&file));
    let csv = stdout(
        submr()
            .args(["run", "--alg", "tworound", "--k", "3", "--seeds", "10", "--opt", "bruteforce", "--p", "0.5", "--instance"])
            .arg(&file),
    );
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("seed,status,route,value,opt,ratio"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[1], "ok");
        assert!(cols[5].parse::<f64>().unwrap() >= 0.5 - 1e-9);
    }
}

#[test]
fn adversarial_header_and_tightness() {
    let text = stdout(submr().args(["generate", "adversarial", "t=3", "k=500"]));
    assert_eq!(text, "adversarial 3 500 1\n");
    let csv = stdout(submr().args(["run", "--alg", "tightness", "--k", "1000", "--t", "2"]));
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let ratio: f64 = row[5].parse().unwrap();
    assert!((ratio - 5.0 / 9.0).abs() < 0.01 * 5.0 / 9.0);
}

#[test]
fn spec_file_env_seed_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("exp.toml");
    std::fs::write(
        &spec,
        "algorithm = \"combined\"\nk = 4\nseeds = 3\n\n[instance]\nkind = \"random-coverage\"\nn = 300\nuniverse = 400\n",
    )
    .unwrap();
    let a = stdout(submr().arg("run").arg("--spec").arg(&spec).env("SUBMR_SEED", "50"));
    let seeds: Vec<&str> = a.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(seeds, ["50", "51", "52"]);
    let b = stdout(submr().arg("run").arg("--spec").arg(&spec).env("SUBMR_SEED", "50").args(["--threads", "1"]));
    assert_eq!(a, b);
    let json = stdout(submr().arg("run").arg("--spec").arg(&spec).args(["--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(v["rows"][0]["ledger"]["records"].is_array());
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    std::fs::write(&file, "coverage 2 3\n0: 1\n0: 2\n").unwrap();
    let out = submr().args(["run", "--alg", "greedy", "--k", "1", "--instance"]).arg(&file).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));
    let out = submr().args(["run", "--k", "2"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn budget_failures_do_not_change_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cov.txt");
    stdout(submr().args(["generate", "uniform-additive", "n=400", "-o"]).arg(&file));
    let csv = stdout(
        submr()
            .args(["run", "--alg", "dense", "--k", "4", "--seeds", "3", "--enforce", "fail", "--budget-central", "1", "--instance"])
            .arg(&file),
    );
    assert_eq!(csv.lines().skip(1).filter(|l| l.contains(",error,")).count(), 3);
}
