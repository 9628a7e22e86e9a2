use std::io::Write;
use std::process::{Command, Output};

fn dqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqs")).args(args).env_remove("DQS_CONFIG").output().expect("dqs runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).expect("valid json")
}

#[test]
fn eval_examples() {
    let o = dqs(&["eval", "--l", "0", "--k", "1", "--nu", "1", "--z", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "5");
    let o = dqs(&["eval", "--l", "0", "--k", "1", "--nu", "2", "--z", "1"]);
    assert_eq!(stdout(&o).trim(), "73");
    let o = dqs(&["eval", "--l", "1", "--k", "5", "--nu", "3", "--z", "-3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("+/-"));
}

#[test]
fn eval_rejects_bad_index() {
    let o = dqs(&["eval", "--l", "0", "--k", "5", "--nu", "2", "--z", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("K_0 = [1, 2, 3]"));
    let o = dqs(&["eval", "--l", "0", "--k", "2", "--nu", "2", "--z", "1/2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(dqs(&["eval", "--bogus"]).status.code(), Some(2));
}

#[test]
fn identities_json_roundtrip() {
    let o = dqs(&["verify", "identities", "--l", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let v = json(&o);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 4);
    assert!(checks.iter().all(|c| c["status"] == "pass"));
    assert_eq!(v["config"]["l"], "2");
    assert!(v["version"].as_str().unwrap().starts_with("dqs "));
    let mut again = serde_json::to_string_pretty(&v).unwrap();
    again.push('\n');
    assert_eq!(again, text);
}

#[test]
fn recurrence_exact_counts() {
    let o = dqs(&["verify", "recurrence", "--l", "1", "--k", "5", "--nu-min", "2", "--nu-max", "10", "--mode", "exact", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let checks = v["checks"].as_array().unwrap();
    let count = |p: &str| checks.iter().filter(|c| c["check_id"].as_str().unwrap().starts_with(p) && c["status"] == "pass").count();
    assert_eq!(count("forward."), 9);
    assert_eq!(count("backward."), 9);
    assert!(checks.iter().all(|c| c.get("residual").is_none() && c["window"].is_array()));
}

#[test]
fn recurrence_numeric_reports_budget() {
    let o = dqs(&["verify", "recurrence", "--l", "2", "--k", "7", "--nu-min", "5", "--nu-max", "5", "--mode", "numeric", "--z", "-3", "--prec", "192", "--T", "60"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("residual") && text.contains("budget"));
    assert!(text.contains("2/2 checks passed"));
    let o = dqs(&["verify", "recurrence", "--l", "0", "--k", "1", "--mode", "numeric"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn jobs_do_not_change_output_order() {
    let run = |j: &str| {
        let v = json(&dqs(&["verify", "recurrence", "--l", "0", "--nu-min", "2", "--nu-max", "4", "--jobs", j, "--format", "json"]));
        v["checks"].as_array().unwrap().iter().map(|c| c["check_id"].as_str().unwrap().to_string()).collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn dump_examples() {
    let o = dqs(&["dump", "matrices", "--l", "0", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("1,-4,8,-12"));
    assert_eq!(text.split("\n\n").count(), 3);
    let o = dqs(&["dump", "table", "--l", "0", "--nu-max", "2", "--format", "csv"]);
    assert_eq!(stdout(&o), "0,1\n1,5\n2,73\n");
    assert_eq!(dqs(&["dump", "matrices", "--l", "3"]).status.code(), Some(2));
    let v = json(&dqs(&["dump", "matrices", "--l", "2", "--format", "json"]));
    assert_eq!(v["matrices"][4]["name"], "V_2(3)");
    assert_eq!(v["matrices"][4]["rows"][0][0], "952");
}

#[test]
fn config_file_and_flag_override() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "# defaults\nl = 0\nk = 1\nnu = 2\nz = 1").unwrap();
    let path = f.path().to_str().unwrap();
    let o = dqs(&["eval", "--config", path]);
    assert_eq!(stdout(&o).trim(), "73");
    let o = dqs(&["eval", "--config", path, "--nu", "1"]);
    assert_eq!(stdout(&o).trim(), "5");
    let o = Command::new(env!("CARGO_BIN_EXE_dqs")).args(["eval", "--format", "json"]).env("DQS_CONFIG", path).output().unwrap();
    let v = json(&o);
    assert_eq!(v["config"]["nu"], "2");
    assert_eq!(v["value"]["re_im"], "73");
    let o = dqs(&["eval", "--config", "/nonexistent/dqs.conf"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    let o = dqs(&["verify", "identities", "--l", "0", "--perturb", "V:0:0:1:2:+1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    let failed: Vec<_> = v["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").collect();
    assert!(!failed.is_empty());
    assert!(failed[0]["witness"].as_str().unwrap().contains("entry"));
    let o = dqs(&["verify", "recurrence", "--l", "0", "--k", "1", "--perturb", "S:0:1:2:-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(dqs(&["verify", "identities", "--perturb", "X:1"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(dqs(&["verify", "recurrence", "--l", "0", "--k", "2", "--T", "5"]).status.code(), Some(2));
    assert_eq!(dqs(&["verify", "recurrence", "--l", "0", "--nu-min", "1"]).status.code(), Some(2));
    assert_eq!(dqs(&["verify", "recurrence", "--l", "0", "--mode", "fast"]).status.code(), Some(2));
}
