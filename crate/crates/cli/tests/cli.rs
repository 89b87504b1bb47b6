use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const TRIANGLE: &str = "3 3\n1 2\n2 3\n1 3\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liftgap"))
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn json_ok(args: &[&str], stdin: Option<&str>) -> Value {
    let out = run(args, stdin);
    assert!(out.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn opt_on_triangle() {
    let v = json_ok(&["opt"], Some(TRIANGLE));
    assert_eq!(v["value"], "2/3");
    assert_eq!(v["witness"], "-++");
    assert_eq!(v["manifest"]["command"], "opt");
    assert_eq!(v["manifest"]["inputs"][0]["path"], "-");
}

#[test]
fn generated_cycle_pipes_into_opt() {
    let gen = run(&["gen", "cycle", "--n", "5"], None);
    assert!(gen.status.success());
    let text = String::from_utf8(gen.stdout).unwrap();
    assert_eq!(text, "5 5\n1 2\n2 3\n3 4\n4 5\n1 5\n");
    let v = json_ok(&["opt", "-"], Some(&text));
    assert_eq!(v["value"], "4/5");
}

#[test]
fn generated_formats_agree() {
    let edges = String::from_utf8(run(&["gen", "gnp", "--n", "6", "--p", "1/2", "--seed", "3"], None).stdout).unwrap();
    let as_json =
        String::from_utf8(run(&["gen", "gnp", "--n", "6", "--p", "1/2", "--seed", "3", "--format", "json"], None).stdout)
            .unwrap();
    let a = json_ok(&["opt"], Some(&edges));
    let b = json_ok(&["opt"], Some(&as_json));
    assert_eq!(a["value"], b["value"]);
    assert_eq!(a["witness"], b["witness"]);
    let cnf = String::from_utf8(run(&["gen", "3sat", "--n", "5", "--m", "8", "--seed", "1"], None).stdout).unwrap();
    assert!(cnf.starts_with("p cnf 5 8"));
    let v = json_ok(&["opt"], Some(&cnf));
    assert_eq!(v["m"], 8);
}

#[test]
fn farkas_on_triangle() {
    let v = json_ok(&["farkas", "--c", "2/3"], Some(TRIANGLE));
    assert_eq!(v["feasible"], true);
    assert_eq!(v["verify"], true);
    let v = json_ok(&["farkas", "--c", "13/20"], Some(TRIANGLE));
    assert_eq!(v["feasible"], false);
    assert_eq!(v["verify"], true);
}

#[test]
fn lp_and_sa_values() {
    let dir = tempfile::tempdir().unwrap();
    let c5 = write(dir.path(), "c5.txt", "5 5\n1 2\n2 3\n3 4\n4 5\n1 5\n");
    assert_eq!(json_ok(&["lp", &c5], None)["value"], "4/5");
    assert_eq!(json_ok(&["lp", &c5, "--relaxation", "universal:5"], None)["value"], "4/5");
    let sa = json_ok(&["sa", &c5, "--rounds", "2"], None);
    assert_eq!(sa["value"], "1");
    assert_eq!(sa["pe"]["moments"]["0"], "1");
}

#[test]
fn translations_preserve_objective() {
    for dir in ["v2e", "e2v"] {
        let v = json_ok(&["translate", "--direction", dir], Some(TRIANGLE));
        assert_eq!(v["report"]["objectivePreserved"], true, "{dir}");
        assert_eq!(v["report"]["edgeCheck"]["feasible"], true, "{dir}");
    }
}

#[test]
fn slack_tables() {
    let out = run(&["slack", "--n", "3"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[0], "row,0,1,2,3,4,5,6,7");
    let v = json_ok(&["slack", "--n", "3", "--out", "json"], None);
    assert_eq!(v["slacks"].as_array().unwrap().len(), 10);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.txt", TRIANGLE);
    let a = run(&["main-ineq", "--n", "12", "--inst0", &tri, "--d", "2", "--seed", "1"], None);
    let b = run(&["main-ineq", "--n", "12", "--inst0", &tri, "--d", "2", "--seed", "1"], None);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["holds"], true);
    assert_eq!(v["seed"], 1);
    assert_eq!(v["manifest"]["seed"], 1);
}

#[test]
fn keys_are_sorted() {
    let out = run(&["opt"], Some(TRIANGLE));
    let text = String::from_utf8(out.stdout).unwrap();
    let m = text.find("\"m\"").unwrap();
    let manifest = text.find("\"manifest\"").unwrap();
    let value = text.find("\"value\"").unwrap();
    assert!(m < manifest && manifest < value);
}

#[test]
fn restrict_with_a_family_file() {
    let dir = tempfile::tempdir().unwrap();
    let fam = write(
        dir.path(),
        "fam.json",
        r#"[{"n":12,"coeffs":{"0":"1","1":"1/2"}},{"n":12,"coeffs":{"0":"1"}}]"#,
    );
    let v = json_ok(&["restrict", "--family", &fam, "--n", "12", "--m", "3", "--d", "2", "--seed", "9"], None);
    assert_eq!(v["passed"], true);
    assert_eq!(v["S"].as_array().unwrap().len(), 3);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["parameters"]["t"], 8);
}

#[test]
fn protocol_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("p");
    let v = json_ok(
        &["protocol", "--c", "7/8", "--s", "3/4", "--T", "2", "--out-dir", out_dir.to_str().unwrap()],
        None,
    );
    assert_eq!(v["rows"], 17);
    assert_eq!(v["excessWithinTail"], true);
    assert_eq!(v["factorization"]["verified"], true);
    for f in ["M.csv", "Mprime.csv", "U.csv", "V.csv", "factorization.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let m = std::fs::read_to_string(out_dir.join("M.csv")).unwrap();
    assert!(m.starts_with("row,0,1,2,"));
    let fm: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("factorization.json")).unwrap()).unwrap();
    assert_eq!(fm["T"], 2);
    assert_eq!(fm["messageSpace"], 36);
}

#[test]
fn symmetric_check_reports_contradiction() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.txt", TRIANGLE);
    let v = json_ok(&["symmetric-check", "--inst0", &tri, "--c", "99/100", "--d", "2"], None);
    assert_eq!(v["decompositionFeasible"], false);
    assert_eq!(v["contradictionExpected"], true);
    assert_eq!(v["certificateVerified"], true);
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["opt", "--bogus"], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim().lines().count(), 1);
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "usage");
    let out = run(&["opt", "/definitely/missing"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one() {
    let out = run(&["opt"], Some("3 1\n1 1\n"));
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["error"], "parse");
    let out = run(&["sa", "--rounds", "2"], Some("p cnf 3 1\n1 2 3 0\n"));
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["error"], "hypothesis");
}

#[test]
fn help_succeeds() {
    let out = run(&["main-ineq", "--help"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("--seed"));
}
