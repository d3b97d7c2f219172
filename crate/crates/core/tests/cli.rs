use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn gdiscord(args: &[&str], stdin: &str) -> Output {
    gdiscord_env(args, stdin, None)
}

fn gdiscord_env(args: &[&str], stdin: &str, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gdiscord"));
    cmd.args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(t) = threads {
        cmd.env("GDISCORD_THREADS", t);
    }
    let mut child = cmd.spawn().expect("spawn gdiscord");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/analyze.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn analyze(spec: &str) -> Value {
    let o = gdiscord(&["analyze"], spec);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert!(schema().is_valid(&v), "{v}");
    v
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn analyze_rho_star() {
    let v = analyze(r#"{"named": {"name": "rho_star"}}"#);
    assert!((v["discord"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(v["separable"], true);
    assert_eq!(v["rank"], 2);
}

#[test]
fn analyze_werner_and_bell() {
    let v = analyze(r#"{"named": {"name": "werner", "param": 0.5}}"#);
    assert!((v["discord"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(v["separable"], false);
    let v = analyze(r#"{"named": {"name": "bell_phi_plus"}}"#);
    assert!((v["discord"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["x_condition"], Value::Null);
}

#[test]
fn analyze_every_encoding_validates() {
    for spec in [
        r#"{"x_state": {"a":0.3,"b":0.2,"c":0.2,"d":0.3,"p":0.1,"q":0.05}}"#,
        r#"{"bloch": {"x":[0,0,0.2],"y":[0.1,0,0],"T":[[0.3,0,0],[0,-0.2,0],[0,0,0.1]]}}"#,
        r#"{"named": {"name": "product", "a": [0,0,1], "b": [0,1,0]}}"#,
        r#"{"named": {"name": "rho_epsilon", "param": 0.3, "component": "phi_plus"}}"#,
        r#"{"named": {"name": "sigma_star"}}"#,
    ] {
        analyze(spec);
    }
}

#[test]
fn analyze_reads_in_file_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("state.json");
    std::fs::write(&p, r#"{"named": {"name": "rho_star"}}"#).unwrap();
    let o = gdiscord(
        &["analyze", "--in", p.to_str().unwrap(), "--format", "table"],
        "",
    );
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text
        .lines()
        .any(|l| l.starts_with("discord") && l.contains("e-1")));
    let o = gdiscord(
        &["analyze", "--in", p.to_str().unwrap(), "--format", "csv"],
        "",
    );
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&gdiscord(&["analyze"], "{not json")), 2);
    assert_eq!(
        code(&gdiscord(&["analyze"], r#"{"named": {"name": "werner"}}"#)),
        2
    );
    assert_eq!(
        code(&gdiscord(
            &["analyze"],
            r#"{"x_state": {"a":1}, "named": {"name": "rho_star"}}"#
        )),
        2
    );
    assert_eq!(code(&gdiscord(&["frobnicate"], "")), 2);
    assert_eq!(code(&gdiscord(&["search", "--seeds", "abc"], "")), 2);

    let o = gdiscord(
        &["analyze"],
        r#"{"named": {"name": "werner", "param": 2.0}}"#,
    );
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains('p'));
    let bad = r#"{"x_state": {"a":0.25,"b":0.25,"c":0.25,"d":0.25,"p":0.5,"q":0}}"#;
    assert_eq!(code(&gdiscord(&["analyze"], bad)), 3);
    assert_eq!(code(&gdiscord(&["search", "--seeds", "0"], "")), 3);
    assert_eq!(code(&gdiscord(&["sweep", "werner", "--lo=-1"], "")), 3);

    assert_eq!(
        code(&gdiscord(
            &["analyze", "--in", "/nonexistent/state.json"],
            ""
        )),
        4
    );
    assert_eq!(
        code(&gdiscord(
            &["sweep", "werner", "--out", "/nonexistent/dir/out.csv"],
            ""
        )),
        4
    );
}

#[test]
fn werner_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("werner.csv");
    let o = gdiscord(
        &[
            "sweep",
            "werner",
            "--lo",
            "0",
            "--hi",
            "1",
            "--steps",
            "101",
            "--out",
            p.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(code(&o), 0);
    let bytes = std::fs::read(&p).unwrap();
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(
        text.lines().next().unwrap(),
        "param,discord,gap,separable,rank"
    );
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 101);
    for r in &rows {
        let (p, d) = (num(&r[0]), num(&r[1]));
        assert!((d - p * p).abs() < 1e-12, "{r:?}");
        assert_eq!(r[3] == "true", p <= 1.0 / 3.0);
        let digits = r[1].split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(digits.len(), 17);
    }

    let again = gdiscord(
        &[
            "sweep", "werner", "--lo", "0", "--hi", "1", "--steps", "101",
        ],
        "",
    );
    assert_eq!(again.stdout, bytes);
}

#[test]
fn rho_epsilon_sweep_csv() {
    let o = gdiscord(
        &[
            "sweep",
            "rho-epsilon",
            "--lo",
            "0",
            "--hi",
            "0.75",
            "--steps",
            "76",
        ],
        "",
    );
    assert_eq!(code(&o), 0);
    let rows = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    assert_eq!(rows.len(), 76);
    for r in &rows {
        assert!((num(&r[1]) - (1.0 - num(&r[0]))).abs() < 1e-10);
        // ε = 0 is the pure entangled state
        assert_eq!(r[4], if num(&r[0]) == 0.0 { "1" } else { "2" });
    }
}

#[test]
fn k_family_sweep_peaks_at_one() {
    let o = gdiscord(
        &[
            "sweep",
            "appendix-k",
            "--lo",
            "0.1",
            "--hi",
            "10",
            "--steps",
            "101",
        ],
        "",
    );
    assert_eq!(code(&o), 0);
    let rows = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    let best = rows
        .iter()
        .max_by(|a, b| num(&a[1]).total_cmp(&num(&b[1])))
        .unwrap();
    assert!((num(&best[0]) - 1.0).abs() < 1e-12);
    assert!((num(&best[1]) - 0.25).abs() < 1e-12);
    assert!(rows.iter().all(|r| r[3] == "true"));
}

#[test]
fn search_single_product_term() {
    let o = gdiscord(
        &["search", "--seeds", "1", "--terms", "1", "--iters", "50"],
        "",
    );
    assert_eq!(code(&o), 0);
    assert!(json(&o)["best_discord"].as_f64().unwrap().abs() < 1e-14);
}

#[test]
fn search_artifacts_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        vec![
            "search".to_string(),
            "--seeds".into(),
            "40".into(),
            "--iters".into(),
            "60".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            d.to_str().unwrap().to_string(),
        ]
    };
    let run = |d: &Path, threads: &str| {
        let owned = args(d);
        let refs: Vec<&str> = owned.iter().map(String::as_str).collect();
        gdiscord_env(&refs, "", Some(threads))
    };
    let oa = run(a.path(), "1");
    let ob = run(b.path(), "3");
    assert_eq!(code(&oa), 0);
    assert_eq!(oa.stdout, ob.stdout);
    for f in ["records.csv", "records.json", "summary.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(!a.path().join("counterexamples.json").exists());

    let summary = json(&oa);
    assert!(summary["worst_gap"].as_f64().unwrap() >= -1e-6);
    let csv = std::fs::read_to_string(a.path().join("records.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "seed,method,discord,gap,separable,rank,iterations"
    );
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 40);
    let mut seeds: Vec<u64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    seeds.sort();
    assert_eq!(seeds, (7..47).collect::<Vec<_>>());
    let records: Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("records.json")).unwrap())
            .unwrap();
    assert_eq!(records.as_array().unwrap().len(), 40);
}

#[test]
fn search_warm_start_reaches_one_quarter() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("warm.json");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let warm = serde_json::json!({"terms": [
        {"weight": 0.5, "a": [h, 0.0, h], "b": [1.0, 0.0, 0.0]},
        {"weight": 0.5, "a": [-h, 0.0, h], "b": [-1.0, 0.0, 0.0]},
    ]});
    std::fs::write(&p, warm.to_string()).unwrap();
    let o = gdiscord(
        &[
            "search",
            "--seeds",
            "8",
            "--iters",
            "300",
            "--warm-start",
            p.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(code(&o), 0);
    assert!(json(&o)["best_discord"].as_f64().unwrap() >= 0.25 - 1e-6);

    std::fs::write(
        &p,
        r#"{"terms": [{"weight": 0.4, "a": [0,0,1], "b": [0,0,1]}]}"#,
    )
    .unwrap();
    assert_eq!(
        code(&gdiscord(
            &["search", "--warm-start", p.to_str().unwrap()],
            ""
        )),
        3
    );
}

#[test]
fn reproduce_report() {
    let o = gdiscord(&["reproduce", "--format", "json"], "");
    let rows = json(&o);
    let rows = rows.as_array().unwrap();
    let status = |id: &str| {
        rows.iter()
            .find(|r| r["id"] == id)
            .unwrap_or_else(|| panic!("{id}"))["pass"]
            .as_bool()
            .unwrap()
    };
    assert!(status("prop1_max"));
    assert!(status("lu_equiv_corrected"));
    assert!(status("werner_p2"));
    assert!(status("fk_argmax"));
    assert!(status("simplex_below_half"));
    // the printed witness and the 2/9 value do not reproduce
    assert!(!status("lu_equiv"));
    assert!(!status("prop2_bound"));
    assert_eq!(code(&o), 1);

    let table = gdiscord(&["reproduce"], "");
    let text = String::from_utf8(table.stdout).unwrap();
    assert_eq!(text.lines().count(), rows.len() + 1);
}
