use std::path::PathBuf;
use std::process::Command;

use fhl_cli::{
    parse_config, run_with, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_VIOLATION, JOBS_ENV,
};

fn run(args: &[&str]) -> (i32, String, String) {
    let argv = std::iter::once("fhl").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fhl-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn lebesgue_moments() {
    let (code, out, _) = run(&[
        "moments",
        "--measure",
        r#"{"type":"power","c":1,"s":1}"#,
        "--n",
        "3",
    ]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows, ["0,1", "1,0.5", "2,0.33333333333333331", "3,0.25"]);
}

#[test]
fn point_mass_at_origin_has_exact_norm() {
    // only the (0,0) entry survives: θ^{β/2} θ^{-α/2} = 4^{1/2}
    let (code, out, _) = run(&[
        "opnorm",
        "--op",
        "hmu",
        "--measure",
        r#"{"type":"atoms","atoms":[[0,1]]}"#,
        "--theta",
        "4",
        "--alpha",
        "0",
        "--beta",
        "1",
        "--N",
        "64",
    ]);
    assert_eq!(code, EXIT_OK);
    let value: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(value, 2.0);
}

#[test]
fn apply_reads_coefficient_file() {
    let path = scratch("coeffs.txt");
    std::fs::write(&path, "# f = 1 + z/2\n1 0\n\n0.5 0\n").unwrap();
    let (code, out, _) = run(&[
        "apply",
        "--op",
        "hlambda",
        "--lambda",
        "1",
        "--coeffs",
        path.to_str().unwrap(),
        "--n",
        "3",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,re,im");
    assert_eq!(lines[1], "0,1.25,0");
    let b2: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((b2 - (1.0 / 3.0 + 0.125) / 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn constant_under_lebesgue_hmu() {
    let path = scratch("one.txt");
    std::fs::write(&path, "1 0\n").unwrap();
    let measure = r#"{"type":"power","c":1,"s":1}"#;
    let args = [
        "apply",
        "--op",
        "hmu",
        "--measure",
        measure,
        "--theta",
        "2.5",
        "--coeffs",
        path.to_str().unwrap(),
        "--n",
        "6",
    ];
    let (code, out, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    let mut fact = 1.0f64;
    for (n, line) in out.lines().skip(1).enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        let re: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        let want = 1.0 / ((n as f64 + 1.0) * fact.sqrt());
        assert!((re - want).abs() <= 1e-15 * want, "n={n}: {re} vs {want}");
    }
}

#[test]
fn bad_coefficient_file_is_a_config_error() {
    let path = scratch("bad.txt");
    std::fs::write(&path, "1 0\n1 nan\n").unwrap();
    let (code, _, err) = run(&[
        "apply",
        "--op",
        "hcheck",
        "--coeffs",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn json_output_embeds_config() {
    let path = scratch("moments.json");
    let (code, out, _) = run(&[
        "moments",
        "--measure",
        r#"{"type":"atoms","atoms":[[0.5,1]]}"#,
        "--n",
        "2",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["config"]["command"]["subcommand"], "moments");
    assert_eq!(v["config"]["command"]["n"], 2);
    assert_eq!(v["result"]["moments"], serde_json::json!([1.0, 0.5, 0.25]));
    assert!(v["created_unix"].is_u64());
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["opnorm", "--op", "hlambda", "--N", "8"]).0,
        EXIT_CONFIG
    );
    assert_eq!(
        run(&["opnorm", "--op", "hlambda", "--lambda", "1", "--N", "8", "--tol", "0"]).0,
        EXIT_CONFIG
    );
    assert_eq!(
        run(&["moments", "--measure", r#"{"kind":"dirac"}"#, "--n", "2"]).0,
        EXIT_CONFIG
    );
    assert_eq!(
        run(&["moments", "--measure", "/no/such/file.json", "--n", "2"]).0,
        EXIT_CONFIG
    );
    assert_eq!(run(&["no-such-command"]).0, EXIT_CONFIG);
    assert_eq!(
        run(&["hardy-scan", "--model", "dirichlet", "--grid-N", "64"]).0,
        EXIT_CONFIG
    );
    assert_eq!(run(&["hardy-scan", "--p", "1"]).0, EXIT_CONFIG);
    // the λ-transform of a density with exponent s = 0.5 at λ = 0.4 has infinite mass
    assert_eq!(
        run(&[
            "opnorm",
            "--op",
            "hlambdamu",
            "--lambda",
            "0.4",
            "--measure",
            r#"{"type":"power","c":1,"s":0.5}"#,
            "--N",
            "8"
        ])
        .0,
        EXIT_CONFIG
    );
    let (code, _, err) = run(&[
        "opnorm", "--op", "hlambda", "--lambda", "1", "--beta", "800", "--N", "200",
    ]);
    assert_eq!(code, EXIT_NUMERICAL, "{err}");
}

#[test]
fn lemma_checks_pass_and_injected_violation_fails() {
    let small = ["--grid-n", "0..8", "--grid-k", "0..8"];
    let (code, _, _) = run(&[&["verify-lemmas"][..], &small].concat());
    assert_eq!(code, EXIT_OK);
    let (code, out, err) = run(&[&["verify-lemmas", "--bound-scale", "0.5"][..], &small].concat());
    assert_eq!(code, EXIT_VIOLATION);
    assert!(out
        .lines()
        .next()
        .unwrap()
        .starts_with("check,key,arg,value,bound,ok"));
    assert!(err.lines().count() <= 8, "{err}");
}

#[test]
fn help_is_not_an_error() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("scan-threshold") && out.contains("verify-lemmas"));
    assert_eq!(run(&["opnorm", "--help"]).0, EXIT_OK);
}

#[test]
fn grids_and_negative_weights_parse() {
    let cfg = parse_config([
        "fhl",
        "scan-threshold",
        "--alpha",
        "-0.5",
        "--grid-N",
        "8,16",
    ])
    .unwrap();
    let json = serde_json::to_value(&cfg).unwrap();
    assert_eq!(json["command"]["weights"]["alpha"], -0.5);
    assert!(parse_config(["fhl", "opnorm", "--op", "bogus", "--N", "3"]).is_err());
}

#[test]
fn threshold_scan_csv_shape() {
    let (code, out, err) = run(&[
        "scan-threshold",
        "--grid-lambda",
        "1,2",
        "--grid-N",
        "16,32",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("series,param,N,value,ratio"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 5));
    assert!(rows
        .iter()
        .any(|r| r[0] == "opnorm" && r[1] == "2" && r[2] == "32"));
}

#[test]
fn binary_respects_jobs_env_and_is_deterministic() {
    let bin = env!("CARGO_BIN_EXE_fhl");
    let args = [
        "scan-carleson",
        "--measure",
        r#"{"type":"power","c":1,"s":1.5}"#,
        "--grid-N",
        "64,300",
    ];
    let out = |jobs: &str| {
        let o = Command::new(bin)
            .args(args)
            .env(JOBS_ENV, jobs)
            .output()
            .unwrap();
        assert_eq!(
            o.status.code(),
            Some(EXIT_OK),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        o.stdout
    };
    assert_eq!(out("1"), out("6"));
    let bad = Command::new(bin)
        .args(args)
        .env(JOBS_ENV, "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));
}
