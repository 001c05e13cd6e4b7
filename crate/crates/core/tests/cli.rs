use mpccip::cli::run;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mpccip").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in\n{out}"))
}

#[test]
fn solve_two_circle() {
    let (code, out, _) = cli(&["solve", "--builtin", "two-circle", "--algorithm", "relaxation", "--tol", "1e-8"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(field(&out, "status"), "success");
    let f: f64 = field(&out, "objective").parse().unwrap();
    assert!((f - 1.0).abs() < 1e-6, "{f}");
}

#[test]
fn log_header_echoes_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.csv");
    let (code, out, err) = cli(&[
        "solve",
        "--builtin",
        "two-circle",
        "--set",
        "relaxation_update=rolloff",
        "--set",
        "rolloff_slope=2.0",
        "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}{err}");
    let text = std::fs::read_to_string(&log).unwrap();
    assert!(text.contains("# relaxation_update=rolloff\n"), "{text}");
    assert!(text.contains("# rolloff_slope=2e0\n"), "{text}");
    let csv_start = text.lines().position(|l| !l.starts_with('#')).unwrap();
    let rows = text.lines().count() - csv_start - 1;
    let iters: usize = field(&out, "iterations").parse().unwrap();
    assert!(rows >= 1 && rows <= iters + 1, "{rows} rows for {iters} iterations");
}

#[test]
fn unknown_option_is_a_usage_error() {
    let (code, _, err) = cli(&["solve", "--builtin", "two-circle", "--set", "no_such_key=1"]);
    assert_eq!(code, 2);
    assert!(err.contains("no_such_key"), "{err}");
    let (code, _, _) = cli(&["solve", "--builtin", "no-such-problem"]);
    assert_eq!(code, 2);
    let (code, _, _) = cli(&["solve", "--frobnicate"]);
    assert_eq!(code, 2);
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("solve"));
}

#[test]
fn iteration_cap_exits_one() {
    let (code, out, _) = cli(&["solve", "--builtin", "two-circle", "--max-iter", "2"]);
    assert_eq!(code, 1, "{out}");
    assert_ne!(field(&out, "status"), "success");
}

#[test]
fn output_is_deterministic() {
    let args = ["solve", "--builtin", "bilinear-lpcc", "--algorithm", "penalty", "--crossover"];
    let (c1, a, _) = cli(&args);
    let (c2, b, _) = cli(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert!(a.contains("B-stat. verified"), "{a}");
}

#[test]
fn file_input_and_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let data = mpccip::bench::builtin_entry("two-circle").unwrap();
    std::fs::write(&p, data.data.to_json()).unwrap();
    let json = dir.path().join("r.json");
    let (code, out, _) = cli(&["solve", p.to_str().unwrap(), "--output", json.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["status"], "success");
}

#[test]
fn bench_writes_records_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("prof.csv");
    let (code, out, _) = cli(&[
        "bench",
        "--builtin",
        "two-circle",
        "--builtin",
        "trivial-corner",
        "--profile",
        prof.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().count(), 5);
    assert!(std::fs::read_to_string(prof).unwrap().starts_with("theta,relaxation,penalty\n"));
}

#[test]
fn list_options_shows_defaults() {
    let (code, out, _) = cli(&["list", "--options"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l.starts_with("tol\t")));
}
