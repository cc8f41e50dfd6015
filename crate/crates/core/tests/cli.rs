use std::process::Command;
use std::sync::Arc;

use gersten::cli::run;
use gersten::cyclecx::chain_from_json;
use gersten::cyclemod::CycleModuleInstance;
use gersten::gfield::field_of_order;
use gersten::schememod::SchemeDescription;
use serde_json::Value;

fn gersten(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("gersten")
        .chain(args.iter().copied())
        .map(String::from)
        .collect();
    run(&argv)
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let (code, out, err) = gersten(&a);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn documented_examples() {
    let cases: [(&[&str], &str); 3] = [
        (
            &[
                "residue", "--field", "F3(t)", "--place", "t", "--symbol", "{t, t-1}",
            ],
            "2 in F3^x\n",
        ),
        (
            &["chow", "--scheme", "P1", "--q", "3", "--p", "1", "--i", "1"],
            "Z (degree map)\n",
        ),
        (
            &["reciprocity", "--q", "5", "--symbol", "{t, t-2}"],
            "product of norms = 1; PASS\n",
        ),
    ];
    for (args, expected) in cases {
        assert_eq!(
            gersten(args),
            (0, expected.to_string(), String::new()),
            "{args:?}"
        );
    }
}

#[test]
fn residues_of_each_degree() {
    let (_, out, _) = gersten(&[
        "residue",
        "--field",
        "F5(t)",
        "--place",
        "t-2",
        "--symbol",
        "{(t-2)^3/t}",
    ]);
    assert_eq!(out, "3 in Z\n");
    let (_, out, _) = gersten(&[
        "residue",
        "--field",
        "F3(t)",
        "--place",
        "t^2+1",
        "--symbol",
        "{t^2+1, t}",
    ]);
    assert!(out.ends_with("in F9^x\n"), "{out}");
    let (_, out, _) = gersten(&[
        "residue", "--field", "F7(t)", "--place", "t", "--symbol", "{t, 3}", "--module", "km/3",
    ]);
    assert_eq!(out, "2 in F7^x/3\n");
    let (_, out, _) = gersten(&[
        "residue", "--field", "F7(t)", "--place", "t", "--symbol", "{t, 6}", "--module", "km/3",
    ]);
    assert_eq!(out, "1 in F7^x/3\n");
}

#[test]
fn reciprocity_residues_in_json() {
    let v = json(&["reciprocity", "--q", "5", "--symbol", "{t, t-2}"]);
    let residues: Vec<&str> = v["symbols"][0]["residues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["residue"].as_str().unwrap())
        .collect();
    assert_eq!(residues, ["2", "2", "4"]);
    assert_eq!(v["passed"], true);
}

#[test]
fn divisors_and_round_trip() {
    let (code, out, _) = gersten(&[
        "divisor",
        "--scheme",
        "P1",
        "--q",
        "3",
        "--symbol",
        "{(t^2-1)/t^2}",
    ]);
    assert_eq!(
        (code, out.as_str()),
        (0, "-2[(t)] + [(t + 1)] + [(t + 2)]\n")
    );
    let (_, out, _) = gersten(&[
        "divisor",
        "--scheme",
        "A1",
        "--q",
        "3",
        "--symbol",
        "{(t^2-1)/t^2}",
    ]);
    assert_eq!(out, "-2[(t)] + [(t + 1)] + [(t + 2)]\n");
    let v = json(&[
        "divisor",
        "--scheme",
        "P1",
        "--q",
        "5",
        "--symbol",
        "{t^2+2, t}",
    ]);
    let k = field_of_order(5).unwrap();
    let p1 = Arc::new(SchemeDescription::projective_line(&k));
    let c = chain_from_json(&v.to_string(), &p1, &CycleModuleInstance::milnor()).unwrap();
    assert_eq!(c.codim(), 1);
    assert!(!c.is_zero());
}

#[test]
fn square_zero_reports() {
    let v = json(&[
        "square-zero",
        "--scheme",
        "line_config",
        "--lines",
        "x,y,z",
        "--q",
        "3",
        "--seed",
        "1",
    ]);
    assert_eq!(v["failures"], Value::Array(vec![]));
    let v = json(&["square-zero", "--random-configs", "4", "--seed", "2"]);
    assert_eq!(v["schemes"], 4);
    assert_eq!(v["failures"], Value::Array(vec![]));
}

#[test]
fn coniveau_page_dump() {
    for q in [3, 5] {
        let v = json(&["ss", "--scheme", "P1", "--q", &q.to_string(), "--n", "1"]);
        let e2 = v["pages"]
            .as_array()
            .unwrap()
            .iter()
            .find(|p| p["r"] == 2)
            .unwrap();
        let entries = e2["entries"].as_array().unwrap();
        let at = |p: i64| entries.iter().find(|e| e["p"] == p && e["q"] == 1).unwrap();
        assert_eq!(
            (at(1)["rank"].clone(), at(1)["torsion"].clone()),
            (Value::from(1), Value::Array(vec![]))
        );
        assert_eq!(at(0)["torsion"], Value::Array(vec![Value::from(q - 1)]));
        assert_eq!(v["weight"], 1);
    }
}

#[test]
fn filtration_on_total_degree_two() {
    let (code, out, _) = gersten(&[
        "ss", "--scheme", "P1", "--q", "3", "--n", "1", "--degree", "2",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("N^1 = Z, N^2 = 0"), "{out}");
}

#[test]
fn empty_axiom_run() {
    let v = json(&["axioms", "--samples", "0", "--seed", "4"]);
    let checks = v.as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks
        .iter()
        .all(|c| c["samples"] == 0 && c["failures"] == Value::Array(vec![])));
}

#[test]
fn failed_checks_exit_one() {
    let (code, out, _) = gersten(&[
        "axioms",
        "--module",
        "km-flipped",
        "--samples",
        "20",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 1);
    assert!(out.ends_with("FAIL\n"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["axioms", "--samples", "3"],
        &["reciprocity", "--q", "5"],
        &["reciprocity", "--q", "5", "--samples", "3"],
        &[
            "residue", "--field", "F6(t)", "--place", "t", "--symbol", "{t}",
        ],
        &[
            "residue", "--field", "F3(t)", "--place", "t^2", "--symbol", "{t}",
        ],
        &["symbol", "--field", "F3(t)", "--symbol", "{t,,}"],
        &[
            "chow", "--scheme", "P1", "--q", "2000003", "--p", "1", "--i", "1",
        ],
        &[
            "ss",
            "--scheme",
            "P1",
            "--q",
            "3",
            "--n",
            "1",
            "--realization",
            "etale",
        ],
        &[
            "divisor", "--scheme", "P1", "--q", "3", "--symbol", "{t}", "--module", "km/1",
        ],
        &["square-zero", "--load", "/nonexistent.json", "--seed", "1"],
    ] {
        let (code, out, err) = gersten(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty() && !err.is_empty(), "{args:?}");
    }
}

#[test]
fn help_and_version_go_to_stdout() {
    for flag in ["--help", "--version"] {
        let (code, out, err) = gersten(&[flag]);
        assert_eq!(code, 0);
        assert!(!out.is_empty() && err.is_empty());
    }
}

#[test]
fn negative_weights_and_gradings() {
    let (code, out, _) = gersten(&["unramified", "--scheme", "P1", "--q", "3", "--i", "-1"]);
    assert_eq!((code, out.as_str()), (0, "0\n"));
    let (code, _, _) = gersten(&["ss", "--scheme", "P1", "--q", "3", "--n", "-2"]);
    assert_eq!(code, 0);
}

#[test]
fn seeded_runs_repeat() {
    for args in [
        &[
            "axioms",
            "--samples",
            "25",
            "--seed",
            "12",
            "--format",
            "json",
        ][..],
        &["reciprocity", "--q", "9", "--samples", "20", "--seed", "8"],
        &[
            "square-zero",
            "--random-configs",
            "3",
            "--seed",
            "6",
            "--format",
            "json",
        ],
    ] {
        assert_eq!(gersten(args), gersten(args));
    }
    let a = gersten(&[
        "axioms",
        "--samples",
        "25",
        "--seed",
        "1",
        "--format",
        "json",
    ]);
    let b = gersten(&[
        "axioms",
        "--samples",
        "25",
        "--seed",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(a.0, b.0);
}

#[test]
fn support_bound_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_gersten"))
        .args([
            "ss", "--scheme", "P1", "--q", "3", "--n", "1", "--format", "json",
        ])
        .env("GERSTEN_SUPPORT_BOUND", "1")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["support_bound"], 1);
    let out = Command::new(env!("CARGO_BIN_EXE_gersten"))
        .args([
            "ss", "--scheme", "P1", "--q", "3", "--n", "1", "--bound", "3", "--format", "json",
        ])
        .env("GERSTEN_SUPPORT_BOUND", "1")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["support_bound"], 3);
}
