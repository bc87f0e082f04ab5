mod common;

use std::fs;

use serde_json::Value;

use common::{cli, cli_ok};

fn report(out: &std::process::Output) -> Vec<(String, String)> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once(' ').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

fn field(r: &[(String, String)], key: &str) -> f64 {
    r.iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("no `{key}` in report"))
        .1
        .parse()
        .unwrap()
}

#[test]
fn sampling_a_hadamard_is_a_fair_coin() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.txt"), "1\n0 h 0\n").unwrap();
    let out = cli_ok(
        dir.path(),
        &[
            "sample",
            "--circuit",
            "h.txt",
            "--num",
            "100",
            "--records",
            "rec.txt",
            "--out",
            "s.txt",
        ],
    );
    let text = fs::read_to_string(dir.path().join("s.txt")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 100);
    assert!(lines.iter().all(|l| *l == "0" || *l == "1"));
    let ones = lines.iter().filter(|l| **l == "1").count();
    assert!((35..=65).contains(&ones), "{ones}");
    let r = report(&out);
    assert_eq!(field(&r, "samples"), 100.0);
    assert_eq!(field(&r, "fidelity"), 1.0);
    let records = fs::read_to_string(dir.path().join("rec.txt")).unwrap();
    assert_eq!(records.lines().count(), 100);
    assert!(records.lines().all(|l| l.split_whitespace().count() == 3));
}

#[test]
fn full_fidelity_keeps_every_slice() {
    let dir = tempfile::tempdir().unwrap();
    cli_ok(
        dir.path(),
        &["generate", "--qubits", "8", "--cycles", "6", "--out", "c.txt"],
    );
    let out = cli_ok(
        dir.path(),
        &[
            "select-slices",
            "--circuit",
            "c.txt",
            "--fidelity",
            "1.0",
            "--out",
            "p.txt",
        ],
    );
    let r = report(&out);
    let k = field(&r, "k");
    assert_eq!(field(&r, "accepted_slices"), k.exp2());
    assert!((field(&r, "fidelity") - 1.0).abs() < 1e-12);
    let plan = fs::read_to_string(dir.path().join("p.txt")).unwrap();
    assert!(plan.lines().any(|l| l == format!("X {}", k.exp2() as usize)));
}

#[test]
fn pipeline_scores_near_the_plan_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cli_ok(
        d,
        &[
            "generate", "--qubits", "12", "--cycles", "14", "--seed", "3", "--out", "c.txt",
        ],
    );
    cli_ok(
        d,
        &[
            "select-slices",
            "--circuit",
            "c.txt",
            "--fidelity",
            "0.1",
            "--tree-out",
            "t.txt",
            "--out",
            "s.txt",
        ],
    );
    let sampled = cli_ok(
        d,
        &[
            "sample",
            "--circuit",
            "c.txt",
            "--num",
            "20000",
            "--plan",
            "t.txt",
            "--slices",
            "s.txt",
            "--out",
            "x.txt",
        ],
    );
    let f = field(&report(&sampled), "fidelity");
    assert!(f >= 0.1);
    cli_ok(
        d,
        &[
            "oracle",
            "probs",
            "--circuit",
            "c.txt",
            "--samples",
            "x.txt",
            "--out",
            "p.txt",
        ],
    );
    let x = cli_ok(d, &["xeb", "--samples", "x.txt", "--probs", "p.txt"]);
    let r = report(&x);
    let (xeb, se) = (field(&r, "xeb"), field(&r, "std_error"));
    assert!((xeb - f).abs() < 3.0 * se + 0.06, "XEB {xeb} +- {se} vs F {f}");
}

#[test]
fn amplitudes_agree_with_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cli_ok(
        d,
        &[
            "generate",
            "--qubits",
            "9",
            "--cycles",
            "8",
            "--entangler",
            "cz",
            "--out",
            "c.txt",
        ],
    );
    let pattern = "1*0**01*0";
    let a = cli_ok(d, &["amplitudes", "--circuit", "c.txt", "--pattern", pattern]);
    let b = cli_ok(d, &["oracle", "amplitudes", "--circuit", "c.txt", "--pattern", pattern]);
    let parse = |o: &std::process::Output| -> Vec<(String, f64, f64)> {
        String::from_utf8(o.stdout.clone())
            .unwrap()
            .lines()
            .map(|l| {
                let w: Vec<&str> = l.split_whitespace().collect();
                (w[0].to_string(), w[1].parse().unwrap(), w[2].parse().unwrap())
            })
            .collect()
    };
    let (a, b) = (parse(&a), parse(&b));
    assert_eq!(a.len(), 16);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.0, y.0);
        assert!((x.1 - y.1).abs() < 1e-12 && (x.2 - y.2).abs() < 1e-12);
    }
}

#[test]
fn json_reports_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cli_ok(d, &["generate", "--qubits", "6", "--cycles", "4", "--out", "c.txt"]);
    let out = cli_ok(
        d,
        &[
            "spoof",
            "--circuit",
            "c.txt",
            "--num",
            "8",
            "--fidelity",
            "0.5",
            "--format",
            "json",
            "--manifest",
            "m.json",
            "--out",
            "s.txt",
        ],
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["selected"], 8);
    assert!(v["xeb_selected"].as_f64().unwrap() >= v["xeb_batch"].as_f64().unwrap());
    let m: Value = serde_json::from_str(&fs::read_to_string(d.join("m.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "spoof");
    assert_eq!(m["seed"], 0);
    assert!(m["inputs"]["c.txt"].is_string());
    assert!(m["outputs"]["s.txt"].is_string());
    assert!(m["elapsed_ms"].is_u64());
}

#[test]
fn diagnose_reports_porter_thomas_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cli_ok(d, &["generate", "--qubits", "10", "--cycles", "12", "--out", "c.txt"]);
    let out = cli_ok(d, &["diagnose", "--circuit", "c.txt", "--k", "3"]);
    let r = report(&out);
    assert!(field(&r, "exponential_p") > 0.001);
    assert!(field(&r, "norm_min") <= 1.0 && field(&r, "norm_max") >= 1.0);
    assert_eq!(
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .filter(|l| l.starts_with("histogram"))
            .count(),
        2
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(cli(d, &["sample"]).status.code(), Some(1));
    assert_eq!(cli(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(cli(d, &["--help"]).status.code(), Some(0));
    assert_eq!(
        cli(d, &["xeb", "--samples", "missing.txt", "--probs", "missing.txt"])
            .status
            .code(),
        Some(2)
    );
    fs::write(d.join("bad.txt"), "2\n0 h 5\n").unwrap();
    assert_eq!(
        cli(d, &["oracle", "probs", "--circuit", "bad.txt"]).status.code(),
        Some(2)
    );

    cli_ok(d, &["generate", "--qubits", "8", "--cycles", "8", "--out", "c.txt"]);
    assert_eq!(
        cli(d, &["select-slices", "--circuit", "c.txt", "--fidelity", "1.5"])
            .status
            .code(),
        Some(1)
    );
    cli_ok(
        d,
        &[
            "select-slices",
            "--circuit",
            "c.txt",
            "--fidelity",
            "0.25",
            "--tree-out",
            "t.txt",
            "--out",
            "s.txt",
        ],
    );
    // understating F inflates every amplitude, which the sampler's mass check catches
    let plan = fs::read_to_string(d.join("s.txt")).unwrap();
    let forged: String = plan
        .lines()
        .map(|l| {
            if l.starts_with("F ") {
                "F 1e-3".to_string()
            } else {
                l.to_string()
            }
        })
        .map(|l| l + "\n")
        .collect();
    fs::write(d.join("forged.txt"), forged).unwrap();
    let out = cli(
        d,
        &[
            "sample",
            "--circuit",
            "c.txt",
            "--num",
            "10",
            "--plan",
            "t.txt",
            "--slices",
            "forged.txt",
        ],
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // a plan for a different layout is an input error
    let other = cli(
        d,
        &[
            "sample",
            "--circuit",
            "c.txt",
            "--num",
            "10",
            "--pattern",
            "********",
            "--plan",
            "t.txt",
            "--slices",
            "s.txt",
        ],
    );
    assert_eq!(other.status.code(), Some(2));
}
