use std::process::Command;

use fracspec_cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["fracspec"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn count_example() {
    let (code, out, _) = call(&["count", "--d", "2", "--s", "1", "--L", "pi", "--E", "8"]);
    assert_eq!(code, 0);
    assert_eq!(out, "4\n");
}

#[test]
fn negative_rho_is_an_argument_error() {
    let (code, out, err) = call(&["riesz", "--d", "2", "--s", "1", "--L", "pi", "--rho", "-1", "--E", "10"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("rho") && err.contains(">= 0"), "{err}");
}

#[test]
fn argument_errors_exit_2() {
    assert_eq!(call(&["count", "--d", "2", "--s", "1.5", "--L", "pi", "--E", "8"]).0, 2);
    assert_eq!(call(&["count", "--d", "2", "--s", "1", "--L", "pie", "--E", "8"]).0, 2);
    assert_eq!(call(&["count", "--d", "2"]).0, 2);
    assert_eq!(call(&["frobnicate"]).0, 2);
    assert_eq!(call(&["verify-all", "--criterion", "11"]).0, 2);
    // Monte Carlo paths need an explicit seed.
    assert_eq!(call(&["semiclassical", "--d", "1", "--s", "0.75", "--E", "10", "--mc-samples", "100"]).0, 2);
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify-all"));
}

#[test]
fn pi_literals_match_decimal() {
    let a = call(&["spectrum", "--d", "2", "--s", "0.75", "--L", "2pi", "--E", "6"]);
    let b = call(&["spectrum", "--d", "2", "--s", "0.75", "--L", "6.283185307179586", "--E", "6"]);
    assert_eq!(a.0, 0);
    assert!(a.1.lines().nth(1).unwrap().starts_with("index_1,index_2,value,multiplicity_class"));
    assert_eq!(a.1.lines().skip(1).collect::<Vec<_>>(), b.1.lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let cases: [&[&str]; 4] = [
        &["spectrum", "--d", "3", "--s", "0.6", "--L", "pi", "--count", "500"],
        &["riesz", "--d", "2", "--s", "0.75", "--L", "pi", "--rho", "1.5", "--E", "50,200,800"],
        &["heat", "--d", "2", "--s", "0.9", "--L", "1"],
        &["semiclassical", "--d", "2", "--s", "0.8", "--well", "box", "--E", "5", "--mc-samples", "200000", "--seed", "11"],
    ];
    for case in cases {
        let mut one = vec!["--threads", "1"];
        one.extend_from_slice(case);
        let mut four = vec!["--threads", "4"];
        four.extend_from_slice(case);
        let a = call(&one);
        let b = call(&four);
        let c = call(&four);
        assert_eq!(a.0, 0, "{case:?}: {}", a.2);
        assert_eq!(a.1, b.1, "{case:?}");
        assert_eq!(b.1, c.1, "{case:?}");
    }
}

#[test]
fn json_output_parses() {
    let (code, out, _) = call(&["--format", "json", "count", "--d", "2", "--s", "1", "--L", "pi", "--E", "8"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], 4);
    assert_eq!(v["version"], 1);

    let (code, out, _) = call(&["coherent", "--s", "1", "--k", "1", "--hbar", "0.2,0.1", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let gap = v["rows"][1]["gap"].as_f64().unwrap();
    assert!((gap - 0.05).abs() < 1e-6, "{gap}");
    assert_eq!(v["strictly_decreasing"], true);
}

#[test]
fn bounds_scan_reports_no_violations() {
    let (code, out, _) = call(&["bounds-scan", "--d", "2", "--s", "0.6", "--L", "1", "--n-max", "200", "--E", "10,100,1000"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# fracspec bounds-scan v1"));
    assert_eq!(lines[1], "quantity,param_point,exact,bound,margin,satisfied");
    assert_eq!(lines.len(), 2 + 2 * 200 + 2 * 3);
    assert!(lines[2..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# square of side pi\nd = 2\ns = 1\nL = pi\nE = 8\nformat = json\n").unwrap();
    let target = dir.path().join("count.json");
    let (code, out, err) =
        call(&["count", "--config", cfg.to_str().unwrap(), "--output", target.to_str().unwrap(), "--E", "10"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    // The command line wins over the file.
    assert_eq!(v["count"], 6);
    assert_eq!(v["energy"], 10.0);
}

#[test]
fn sampled_grid_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("well.csv");
    std::fs::write(&path, "dims,4\nspacing,0.25\norigin,0\n1\n1\n1\n1\n").unwrap();
    let grid = call(&["semiclassical", "--d", "1", "--s", "0.75", "--grid", path.to_str().unwrap()]);
    let boxed = call(&["semiclassical", "--d", "1", "--s", "0.75", "--well", "box", "--lower", "0", "--upper", "1"]);
    assert_eq!(grid.0, 0, "{}", grid.2);
    let value = |text: &str| -> f64 {
        text.lines().find_map(|l| l.strip_prefix("moment_sum,")).unwrap().parse().unwrap()
    };
    assert!((value(&grid.1) - value(&boxed.1)).abs() <= 1e-12 * value(&boxed.1));
}

#[test]
fn binary_respects_thread_variable_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_fracspec");
    let out = Command::new(bin)
        .args(["count", "--d", "3", "--s", "1", "--L", "pi", "--E", "12"])
        .env("FRACSPEC_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "11\n");

    let bad = Command::new(bin).args(["count", "--d", "0", "--s", "1", "--L", "1", "--E", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn quick_verification_passes() {
    let (code, out, _) = call(&["verify-all", "--profile", "quick"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
    assert!(out.ends_with("10 of 10 criteria passed\n"));
}
