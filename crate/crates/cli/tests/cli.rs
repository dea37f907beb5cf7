use std::path::Path;

use aqec_core::ensembles::{build, EnsembleParams, Family};
use assert_cmd::Command;
use serde_json::Value;
use tempfile::TempDir;

fn lab() -> Command {
    let mut cmd = Command::cargo_bin("aqec-lab").unwrap();
    cmd.env_remove("AQEC_LAB_THREADS");
    cmd
}

fn json_of(cmd: &mut Command) -> Value {
    let out = cmd.assert().success().get_output().stdout.clone();
    serde_json::from_slice(&out).unwrap()
}

fn without_wall_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn bounds_reproduces_the_reference_value() {
    let v = json_of(lab().args([
        "bounds",
        "--family",
        "double-layer",
        "--noise",
        "erasure-iid:0.1",
        "--n",
        "256",
        "--k",
        "51",
        "--eps",
        "0.00390625",
    ]));
    assert_eq!(v["command"], "bounds");
    assert_eq!(v["tool"], "aqec-lab");
    let r = &v["result"][0];
    let value = r["value"].as_f64().unwrap();
    assert!((value - 0.3071201340267175).abs() < 1e-12, "{value}");
    assert_eq!(r["formula_id"], "double-layer/erasure-iid/non-smooth");
}

#[test]
fn bounds_csv_sweeps_n_with_an_epsilon_rule() {
    let out = lab()
        .args([
            "bounds",
            "--family",
            "double-layer",
            "--noise",
            "erasure-iid:0.05",
            "--n",
            "256,1024",
            "--rate",
            "0.25",
            "--eps-rule",
            "n^-1",
            "--format",
            "csv",
        ])
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "family,noise,n,k,epsilon,delta,value,log2_value,vacuous,formula_id"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[2]
        .starts_with("double-layer,erasure-iid:0.05,1024,256,0.0009765625,,0.281170662595,"));
}

#[test]
fn block_family_reports_the_lower_bound() {
    let v = json_of(lab().args([
        "bounds",
        "--family",
        "block",
        "--noise",
        "erasure-iid:0.25",
        "--n",
        "240",
        "--rate",
        "0.2",
        "--eps-rule",
        "n^(-0.375)",
    ]));
    let r = &v["result"][0];
    assert_eq!(r["formula_id"], "block/erasure-iid/lower");
    assert!((r["term_const"].as_f64().unwrap() - 0.4725034926528997).abs() < 1e-12);
    lab()
        .args([
            "bounds",
            "--family",
            "block",
            "--noise",
            "depolarizing:0.1",
            "--n",
            "240",
            "--k",
            "48",
            "--eps",
            "0.1",
        ])
        .assert()
        .code(3);
}

#[test]
fn exit_codes() {
    lab()
        .args([
            "bounds",
            "--noise",
            "erasure-iid:0.1",
            "--n",
            "64",
            "--k",
            "8",
            "--eps",
            "0.1",
        ])
        .assert()
        .code(2);
    lab().args(["bounds", "--bogus"]).assert().code(2);
    lab().args(["nonsense"]).assert().code(2);
    lab()
        .args([
            "bounds",
            "--family",
            "double-layer",
            "--noise",
            "erasure-iid:1.5",
            "--n",
            "64",
            "--k",
            "8",
            "--eps",
            "0.1",
        ])
        .assert()
        .code(3);
    lab()
        .args([
            "bounds",
            "--family",
            "brickwork",
            "--noise",
            "erasure-iid:0.1",
            "--n",
            "64",
            "--k",
            "8",
            "--eps",
            "0.1",
            "--delta",
            "0.01",
        ])
        .assert()
        .code(3);
    lab()
        .args([
            "simulate",
            "--family",
            "double-layer",
            "--n",
            "16",
            "--k",
            "2",
            "--xi",
            "2",
            "--noise",
            "depolarizing:0.1",
        ])
        .assert()
        .code(3);
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    lab()
        .args(["curves", "--output", target.to_str().unwrap()])
        .assert()
        .code(3);
}

#[test]
fn curves_are_byte_identical_with_a_sidecar() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        lab()
            .args(["curves", "--output", p.to_str().unwrap()])
            .assert()
            .success();
    }
    let body = std::fs::read(&a).unwrap();
    assert_eq!(body, std::fs::read(&b).unwrap());
    let text = String::from_utf8(body).unwrap();
    assert_eq!(text.lines().count(), 62);
    assert!(text.lines().all(|l| l.split(',').count() == 8));
    let meta: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["command"], "curves");
    assert_eq!(meta["rng_algorithm"], "ChaCha8");
    assert!(meta["wall_time_s"].is_number());
}

#[test]
fn simulate_is_independent_of_worker_count() {
    let run = |workers: &str| {
        without_wall_time(json_of(lab().args([
            "simulate",
            "--family",
            "double-layer",
            "--n",
            "24",
            "--k",
            "4",
            "--xi",
            "3",
            "--noise",
            "erasure-iid:0.15",
            "--circuits",
            "8",
            "--patterns",
            "100",
            "--seed",
            "5",
            "--workers",
            workers,
        ])))
    };
    let one = run("1");
    let three = run("3");
    assert_eq!(one["result"], three["result"]);
    let r = &one["result"];
    assert!(r.get("wall_time_s").is_none());
    assert_eq!(r["seed"], 5);
    assert!(r["mean_choi_error"].as_f64().unwrap() >= 0.0);
}

#[test]
fn thread_variable_is_honoured_and_validated() {
    let base = [
        "simulate",
        "--family",
        "double-layer",
        "--n",
        "16",
        "--k",
        "2",
        "--xi",
        "2",
        "--noise",
        "erasure-t:2",
        "--circuits",
        "4",
        "--patterns",
        "10",
    ];
    let mut cmd = lab();
    cmd.args(base).env("AQEC_LAB_THREADS", "2");
    let a = without_wall_time(json_of(&mut cmd));
    let b = without_wall_time(json_of(lab().args(base)));
    assert_eq!(a["result"], b["result"]);
    lab()
        .args(base)
        .env("AQEC_LAB_THREADS", "many")
        .assert()
        .code(2);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "bounds.json",
        r#"{"command": "bounds", "family": "double-layer", "noise": "erasure-iid:0.1", "n": [256], "k": 51, "eps": 0.5}"#,
    );
    let from_file = json_of(lab().args(["bounds", "--config", cfg.to_str().unwrap()]));
    let overridden = json_of(lab().args([
        "bounds",
        "--config",
        cfg.to_str().unwrap(),
        "--eps",
        "0.00390625",
    ]));
    let v = overridden["result"][0]["value"].as_f64().unwrap();
    assert!((v - 0.3071201340267175).abs() < 1e-12);
    assert_ne!(
        from_file["result"][0]["value"],
        overridden["result"][0]["value"]
    );
    assert_eq!(overridden["config"]["eps"], 0.00390625);

    let unknown = write(
        dir.path(),
        "bad.json",
        r#"{"family": "double-layer", "colour": 3}"#,
    );
    lab()
        .args(["bounds", "--config", unknown.to_str().unwrap()])
        .assert()
        .code(2);
    let wrong = write(dir.path(), "wrong.json", r#"{"command": "curves"}"#);
    lab()
        .args(["bounds", "--config", wrong.to_str().unwrap()])
        .assert()
        .code(2);
    lab()
        .args(["bounds", "--config", "/nonexistent/cfg.json"])
        .assert()
        .code(2);
}

#[test]
fn compare_block_small_run() {
    let v = json_of(lab().args([
        "compare-block",
        "--n",
        "48",
        "--rate",
        "0.2",
        "--p",
        "0.1",
        "--xi",
        "3",
        "--circuits",
        "6",
        "--patterns",
        "50",
        "--seed",
        "9",
    ]));
    let r = &v["result"];
    assert!((r["exponents"]["double_layer_upper_decay"].as_f64().unwrap()).is_finite());
    assert!(r["separated"].is_boolean());
}

#[test]
fn second_moment_modes() {
    let v = json_of(lab().args([
        "second-moment",
        "--mode",
        "transfer",
        "--xi",
        "1",
        "--logical",
        "1,0",
        "--erased",
        "0,1",
        "--exact",
    ]));
    assert!(v["result"].to_string().contains("rational"));
    let v = json_of(lab().args([
        "second-moment",
        "--mode",
        "walk",
        "--sites",
        "5",
        "--m",
        "2",
        "--walks",
        "2000",
        "--seed",
        "3",
    ]));
    assert!(v["result"].is_object());
    let v = json_of(lab().args([
        "second-moment",
        "--mode",
        "markov",
        "--sites",
        "4",
        "--depth",
        "6",
        "--q",
        "2",
    ]));
    assert!(v["result"].is_object());
}

#[test]
fn lightcone_reads_a_spec_file() {
    let dir = TempDir::new().unwrap();
    let spec = build(&EnsembleParams::new(64, 8, 1.0, Family::DoubleLayer).with_xi(4)).unwrap();
    let path = write(dir.path(), "spec.json", &spec.to_json().unwrap());
    let v = json_of(lab().args(["lightcone", "--spec", path.to_str().unwrap(), "--p", "0.1"]));
    let r = &v["result"];
    assert_eq!(r["n"], 64);
    assert_eq!(r["max_cone"], 16);
    assert_eq!(r["depth"], 2);
    let sim = json_of(lab().args([
        "simulate",
        "--spec",
        path.to_str().unwrap(),
        "--noise",
        "erasure-t:4",
        "--circuits",
        "3",
        "--patterns",
        "20",
    ]));
    assert_eq!(sim["result"]["n"], 64);
    let bad = write(dir.path(), "bad.json", "{\"version\": 1}");
    lab()
        .args(["lightcone", "--spec", bad.to_str().unwrap()])
        .assert()
        .code(3);
}
