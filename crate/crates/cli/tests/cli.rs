use std::process::{Command, Output};

use serde_json::Value;

fn ordsel(args: &[&str]) -> Output {
    ordsel_env(args, &[])
}

fn ordsel_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ordsel"));
    cmd.args(args).env_remove("ORDSEL_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn ordsel")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn ok(args: &[&str]) -> String {
    let out = ordsel(args);
    assert!(
        out.status.success(),
        "ordsel {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

fn records(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

fn one(args: &[&str]) -> Value {
    let mut r = records(&ok(args));
    assert_eq!(r.len(), 1);
    r.remove(0)
}

fn code(args: &[&str]) -> i32 {
    ordsel(args).status.code().expect("exit code")
}

#[test]
fn clayton_closed_form_example() {
    let r = one(&["psuccess", "--copula", "clayton", "--param", "1", "--n", "3", "--m", "1", "--alpha", "0.5", "--method", "quad"]);
    let v = r["result"]["value"].as_f64().unwrap();
    assert!((v - (9.0 - 12.0 * 2f64.ln())).abs() < 1e-8, "{v}");
    assert_eq!(r["method"], "quadrature");
}

#[test]
fn independence_example() {
    let r = one(&["psuccess", "--copula", "independence", "--n", "10", "--m", "3", "--alpha", "0.2", "--method", "quad"]);
    assert!((r["result"]["value"].as_f64().unwrap() - 0.488).abs() < 1e-9);
}

#[test]
fn psuccess_csv_row() {
    let text = ok(&["psuccess", "--copula", "gaussian", "--param", "-0.3", "--n", "5", "--m", "2", "--alpha", "0.3", "--format", "csv"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "copula,param,n,m,alpha,method,value,stderr,replications");
    assert!(lines[1].starts_with("gaussian,-0.3,5,2,0.3,quadrature,0."), "{}", lines[1]);
    assert_eq!(lines.len(), 2);
}

#[test]
fn monte_carlo_is_reproducible() {
    let args = ["psuccess", "--copula", "gaussian", "--param", "0.5", "--n", "20", "--m", "2", "--alpha", "0.1", "--method", "mc", "--reps", "50000", "--seed", "42"];
    assert_eq!(ok(&args), ok(&args));
    let r = one(&args);
    assert_eq!(r["result"]["replications"], 50000);
    assert!(r["result"]["stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn bound_examples() {
    let r = one(&["bound", "--n", "100", "--alpha", "0.05", "--rho", "0.4"]);
    let b100 = r["result"]["bound"].as_f64().unwrap();
    assert!(b100 >= 0.2098);
    assert_eq!(r["result"]["certified"], true);
    for key in ["omega", "c1", "c2", "mu_n", "sigma_n2"] {
        assert!(r["result"][key].is_f64(), "{key}");
    }
    let r = one(&["bound", "--n", "100000", "--alpha", "0.05", "--rho", "0.4"]);
    assert!(r["result"]["bound"].as_f64().unwrap() > b100);
}

#[test]
fn uncertified_omega_exits_4_after_reporting() {
    let out = ordsel(&["bound", "--n", "3", "--alpha", "0.05", "--rho", "0.4", "--omega", "0.785"]);
    assert_eq!(out.status.code(), Some(4));
    let r = records(&stdout(&out));
    assert_eq!(r[0]["result"]["certified"], false);
    assert_eq!(r[0]["result"]["failed_check"], "positivity");
}

#[test]
fn invert_examples() {
    let r = one(&["invert", "--alpha", "0.01", "--rho", "0.99", "--delta", "0.05"]);
    assert_eq!(r["result"]["exact_n"], 505);
    assert!(r["result"]["bound_at_n"].as_f64().unwrap() >= 0.95);

    let r = one(&["invert", "--alpha", "0.01", "--rho", "0.3", "--delta", "0.1"]);
    assert!(r["result"]["exact_n"].is_null());
    let l = r["result"]["log10_n"].as_f64().unwrap();
    assert!((l - 8.775e31f64.log10()).abs() / 8.775e31f64.log10() < 0.02);

    let r = one(&["invert", "--alpha", "0.01", "--xi2", "0", "--delta", "0.1"]);
    assert_eq!(r["result"]["exact_n"], 230);
    assert_eq!(r["method"], "noiseless_closed_form");
}

#[test]
fn invert_needs_exactly_one_dependence_flag() {
    assert_eq!(code(&["invert", "--alpha", "0.01", "--delta", "0.1"]), 2);
    assert_eq!(code(&["invert", "--alpha", "0.01", "--rho", "0.5", "--xi2", "1", "--delta", "0.1"]), 2);
}

#[test]
fn table_single_cell_and_csv_header() {
    let r = one(&["table", "--rhos", "0.9", "--deltas", "0.05"]);
    assert_eq!(r["result"]["exact_n"], 4338);
    let text = ok(&["table", "--rhos", "0.9,0.99", "--deltas", "0.05", "--format", "csv"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,rho,delta,log10_n,exact_n,omega_star,bound_at_n");
    assert!(lines[1].starts_with("0.01,0.9,0.05,"));
    assert!(lines[2].starts_with("0.01,0.99,0.05,"));
    assert_eq!(lines[2].split(',').nth(4), Some("505"));
}

#[test]
fn table_markdown_layout() {
    let text = ok(&["table", "--rhos", "0.99,0.3", "--deltas", "0.05,0.1", "--format", "markdown"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[2], "| 0.99 | 505 | 372 |");
    assert!(lines[3].starts_with("| 0.3 | 10^38.2"));
}

#[test]
fn sweep_bound_below_truth_in_n() {
    let text = ok(&["sweep", "--vary", "n", "--from", "10", "--to", "1000", "--points", "20", "--reps", "2000"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,p_quadrature,p_mc,mc_stderr,lower_bound"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(f[4] <= f[1], "{line}");
        rows += 1;
    }
    assert_eq!(rows, 20);
}

fn columns(text: &str, idx: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn sweep_alpha_monotone() {
    let text = ok(&["sweep", "--vary", "alpha", "--from", "0.01", "--to", "0.99", "--points", "20", "--reps", "0"]);
    for idx in [1, 4] {
        let c = columns(&text, idx);
        assert!(c.windows(2).all(|w| w[0] <= w[1]), "column {idx}: {c:?}");
    }
}

#[test]
fn sweep_rho_bound_monotone() {
    let text = ok(&["sweep", "--vary", "rho", "--from", "0.05", "--to", "0.95", "--points", "19", "--reps", "0"]);
    let c = columns(&text, 4);
    assert_eq!(c.len(), 19);
    assert!(c.windows(2).all(|w| w[0] <= w[1]), "{c:?}");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["psuccess", "--copula", "gaussian", "--param", "0.5", "--n", "10", "--alpha", "1.5"]), 2);
    assert_eq!(code(&["psuccess", "--copula", "gaussian", "--n", "10", "--alpha", "0.1"]), 2);
    assert_eq!(code(&["psuccess", "--copula", "comonotonic", "--n", "10", "--alpha", "0.1", "--method", "quad"]), 3);
    assert_eq!(code(&["psuccess", "--copula", "clayton", "--param", "2", "--n", "10", "--m", "4", "--alpha", "0.1", "--method", "brute"]), 3);
    assert_eq!(code(&["psuccess", "--copula", "clayton", "--param", "2", "--n", "10", "--alpha", "0.1", "--method", "exact"]), 3);
    assert_eq!(code(&["sweep", "--vary", "rho", "--from", "0.9", "--to", "0.1"]), 2);
    assert_eq!(code(&["sweep", "--vary", "alpha", "--from", "0", "--to", "0.5", "--log-axis"]), 2);
    assert_eq!(code(&["sweep", "--vary", "rho", "--from", "0.5", "--to", "1.5"]), 2);
    assert_eq!(code(&["bogus"]), 2);
    let out = ordsel_env(&["table", "--rhos", "0.9", "--deltas", "0.1"], &[("ORDSEL_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn comonotonic_monte_carlo_runs() {
    let r = one(&["psuccess", "--copula", "comonotonic", "--n", "10", "--alpha", "0.1", "--method", "mc", "--reps", "10000"]);
    assert!(r["result"]["value"].as_f64().unwrap() > 0.6);
    let r = one(&["psuccess", "--copula", "comonotonic", "--n", "10", "--alpha", "0.1", "--method", "exact"]);
    assert!((r["result"]["value"].as_f64().unwrap() - (1.0 - 0.9f64.powi(10))).abs() < 1e-12);
}

#[test]
fn timing_is_opt_in() {
    let r = one(&["bound", "--n", "50", "--alpha", "0.1", "--rho", "0.5"]);
    assert!(r.get("elapsed_ms").is_none());
    let r = one(&["--timing", "bound", "--n", "50", "--alpha", "0.1", "--rho", "0.5"]);
    assert!(r["elapsed_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn output_matches_shipped_schema() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/output_record.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("valid schema");

    let runs: &[&[&str]] = &[
        &["psuccess", "--copula", "clayton", "--param", "2", "--n", "3", "--alpha", "0.5"],
        &["psuccess", "--copula", "independence", "--n", "10", "--m", "3", "--alpha", "0.2", "--method", "exact"],
        &["psuccess", "--copula", "gaussian", "--param", "0.3", "--n", "30", "--m", "2", "--alpha", "0.1", "--method", "brute", "--grid", "60"],
        &["psuccess", "--copula", "frank", "--param", "4", "--n", "30", "--alpha", "0.1", "--method", "mc", "--reps", "2000"],
        &["psuccess", "--copula", "gaussian", "--param", "0.3", "--n", "1000000", "--alpha", "0.01", "--method", "mc-os", "--reps", "2000"],
        &["--timing", "bound", "--n", "100", "--alpha", "0.05", "--rho", "0.4"],
        &["bound", "--n", "100", "--alpha", "0.05", "--rho", "0.4", "--omega", "0.7"],
        &["invert", "--alpha", "0.01", "--rho", "0.3", "--delta", "0.1"],
        &["invert", "--alpha", "0.01", "--xi2", "0.2", "--delta", "0.1"],
        &["table", "--rhos", "0.99,0.01", "--deltas", "0.05"],
        &["sweep", "--vary", "alpha", "--from", "0.1", "--to", "0.5", "--points", "3", "--reps", "1000", "--format", "json"],
    ];
    for args in runs {
        for record in records(&ok(args)) {
            let errors: Vec<String> = validator.iter_errors(&record).map(|e| e.to_string()).collect();
            assert!(errors.is_empty(), "{args:?}: {errors:?}\n{record}");
            let text = serde_json::to_string(&record).unwrap();
            assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), record);
        }
    }

    let bad: Value = serde_json::json!({
        "command": "bound", "inputs": {}, "result": {"bound": 2.0}, "method": "x"
    });
    assert!(!validator.is_valid(&bad));
}

#[test]
fn threads_do_not_change_output() {
    let runs: &[&[&str]] = &[
        &["psuccess", "--copula", "clayton", "--param", "1.5", "--n", "40", "--m", "3", "--alpha", "0.05", "--method", "mc", "--reps", "30000", "--seed", "7"],
        &["sweep", "--vary", "n", "--from", "10", "--to", "200", "--points", "4", "--reps", "20000", "--seed", "3"],
    ];
    for args in runs {
        let base = ordsel_env(args, &[("ORDSEL_THREADS", "1")]);
        for t in ["2", "5"] {
            let other = ordsel_env(args, &[("ORDSEL_THREADS", t)]);
            assert_eq!(base.stdout, other.stdout, "{args:?} with {t} threads");
        }
    }
}

#[test]
fn guide_transcripts_are_current() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../book/src/cli.md");
    let text = std::fs::read_to_string(path).unwrap();
    let mut checked = 0;
    let mut in_console = false;
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.next() {
        if line.starts_with("```") {
            in_console = line == "```console";
            continue;
        }
        let Some(cmd) = line.strip_prefix("$ ordsel ").filter(|_| in_console) else { continue };
        let mut expected = String::new();
        while let Some(next) = lines.peek() {
            if next.is_empty() || next.starts_with("```") {
                break;
            }
            expected.push_str(lines.next().unwrap());
            expected.push('\n');
        }
        let args: Vec<&str> = cmd.split_whitespace().collect();
        assert_eq!(ok(&args), expected, "transcript for `{cmd}`");
        checked += 1;
    }
    assert!(checked >= 4);
}
