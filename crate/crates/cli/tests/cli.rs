use std::path::Path;
use std::process::{Command, Output};

fn pirlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pirlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn sunjafar_run_reports_capacity_rate() {
    let o = pirlab(&["run", "--scheme", "sunjafar", "--n", "2", "--k", "3", "--q", "3", "--theta", "1", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["rate"], "4/7");
    assert_eq!(v["decoded_ok"], true);
    assert_eq!(v["transcript"]["rate"], "4/7");
}

#[test]
fn tian_expected_rate() {
    let o = pirlab(&["run", "--scheme", "tian", "--n", "3", "--k", "3", "--expected"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["expected_rate"], "9/13");
}

#[test]
fn unsupported_database_count_is_a_config_error() {
    let o = pirlab(&["run", "--scheme", "cgks", "--n", "3", "--k", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pirlab(&["run", "--scheme", "no-such-scheme"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pirlab(&["run", "--scheme", "residual", "--q", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_pir_scheme_runs() {
    for scheme in ["cgks", "residual", "leaky", "spir-deterministic", "spir-probabilistic"] {
        let o = pirlab(&["run", "--scheme", scheme, "--seed", "3"]);
        assert_eq!(o.status.code(), Some(0), "{scheme}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&o)["rate_ok"], true);
    }
}

#[test]
fn tian_audit_passes_with_zero_distance() {
    let o = pirlab(&["audit", "--scheme", "tian", "--n", "3", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert_eq!(r["result"], "pass");
        assert_eq!(r["tv"], "0/1");
        assert_eq!(r["check"], "user-privacy");
    }
}

#[test]
fn planted_leak_fails_audit() {
    let o = pirlab(&["audit", "--scheme", "fixture-leaky-theta"]);
    assert_eq!(o.status.code(), Some(4));
    let v = json(&o);
    assert!(v.as_array().unwrap().iter().any(|r| r["result"] == "fail" && r["tv"] == "1/1"));
}

#[test]
fn pruw_audit_passes() {
    let o = pirlab(&["audit", "--scheme", "pruw", "--q", "5", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v.as_array().unwrap().iter().all(|r| r["result"] == "pass"));
}

#[test]
fn spir_audit_includes_database_privacy() {
    let o = pirlab(&["audit", "--scheme", "spir-deterministic", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v.as_array().unwrap().iter().any(|r| r["check"] == "db-privacy"));
}

#[test]
fn capacity_outputs() {
    assert_eq!(stdout(&pirlab(&["capacity", "pir", "--n", "2", "--k", "2"])).trim(), "2/3 (0.6666666667)");
    assert!(stdout(&pirlab(&["capacity", "mmpir", "--n", "2", "--k", "5", "--p", "2"])).contains("uncharacterized regime"));
    assert_eq!(
        stdout(&pirlab(&["capacity", "rd", "--dr", "0.25", "--c1", "2", "--dw", "0", "--c2", "2"])).trim(),
        "C_R=1.5 C_W=2"
    );
    assert_eq!(stdout(&pirlab(&["capacity", "spir", "--n", "4"])).trim(), "3/4 (0.7500000000)");
}

#[test]
fn leakage_csv() {
    let o = pirlab(&["leakage", "--l", "4", "--b", "1,2", "--s", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(
        r.headers().unwrap(),
        vec!["B", "single_stage_bits", "two_stage_bits", "ragged"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(&rows[0], vec!["1", "0.000", "0.000", "false"]);
    assert_eq!(&rows[1], vec!["2", "1.252", "0.918", "false"]);

    let o = pirlab(&["leakage", "--l", "12", "--b", "5", "--r", "1/6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",true"));

    let o = pirlab(&["leakage", "--l", "12", "--r", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pruw_demo_with_distortion() {
    let o = pirlab(&["pruw-demo", "--n", "4", "--m", "3", "--l", "8", "--distortion", "0.5", "--theta", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["positions"], 4);
    assert_eq!(v["reading_cost"], "2/1");
    assert_eq!(v["writing_cost"], "2/1");
    assert_eq!(v["write_ok"], true);

    let o = pirlab(&["pruw-demo", "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

fn run_to(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut args = vec!["run", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = pirlab(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn identical_seeds_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    for (i, args) in [
        vec!["--scheme", "sunjafar", "--n", "2", "--k", "3", "--seed", "7"],
        vec!["--scheme", "tian", "--n", "3", "--k", "3", "--seed", "11", "--l", "6"],
        vec!["--scheme", "pruw", "--seed", "5"],
    ]
    .iter()
    .enumerate()
    {
        let a = run_to(dir.path(), &format!("a{i}.json"), args);
        let b = run_to(dir.path(), &format!("b{i}.json"), args);
        assert_eq!(a, b);
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "scheme = \"residual\"\nn = 4\nk = 2\nseed = 9\n").unwrap();
    let c = cfg.to_str().unwrap();
    let v = json(&pirlab(&["--config", c, "run"]));
    assert_eq!((v["N"].as_u64(), v["rate"].as_str()), (Some(4), Some("3/4")));
    let v = json(&pirlab(&["--config", c, "run", "--n", "5"]));
    assert_eq!((v["N"].as_u64(), v["rate"].as_str()), (Some(5), Some("4/5")));

    std::fs::write(&cfg, "scheme = \"residual\"\nunknown = 1\n").unwrap();
    assert_eq!(pirlab(&["--config", c, "run"]).status.code(), Some(2));
}

#[test]
fn thread_cap_is_respected_and_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_pirlab"))
        .args(["audit", "--scheme", "tian"])
        .env("PIRLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_pirlab"))
        .args(["audit", "--scheme", "tian"])
        .env("PIRLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
