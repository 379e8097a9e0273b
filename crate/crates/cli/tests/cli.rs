use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn glue(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glue-cert"))
        .args(args)
        .env_remove("GLUE_CERT_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_chain(dir: &Path, name: &str, points: &[[f64; 2]]) -> PathBuf {
    let path = dir.join(name);
    let v = serde_json::json!({"dim": 2, "points": points});
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn square(dir: &Path) -> PathBuf {
    write_chain(dir, "square.json", &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
}

fn line(dir: &Path, n: usize) -> PathBuf {
    let pts: Vec<[f64; 2]> = (0..n).map(|i| [i as f64, 0.5 * i as f64]).collect();
    write_chain(dir, "line.json", &pts)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn subdivide_writes_refined_chain() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.json");
    let o = glue(&["subdivide", "-s", "chaikin", "-i", s(&square(dir.path())), "-r", "3", "-o", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("level 3: 18 points"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 18);

    // the output is valid input again
    let o = glue(&["kappa", "-s", "chaikin", "-i", s(&out), "-r", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn zero_rounds_echo_input() {
    let dir = TempDir::new().unwrap();
    let o = glue(&["subdivide", "-s", "chaikin", "-i", s(&square(dir.path())), "-r", "0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("level 0: 4 points"));
}

#[test]
fn short_chain_is_an_error() {
    let dir = TempDir::new().unwrap();
    let p = write_chain(dir.path(), "short.json", &[[0.0, 0.0], [1.0, 0.0], [2.0, 1.0]]);
    let o = glue(&["subdivide", "-s", "fps", "-i", s(&p)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn unknown_scheme_and_bad_usage_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&glue(&["subdivide", "-s", "nope", "-i", s(&square(dir.path()))])), 2);
    assert_eq!(code(&glue(&["frobnicate"])), 2);
    assert_eq!(code(&glue(&["subdivide", "-i", s(&square(dir.path()))])), 2);
}

#[test]
fn certify_then_check() {
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("cert.json");
    let o = glue(&["certify", "-s", "bspline_tau:0.5", "-o", s(&cert)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert!(v["alpha"].as_f64().unwrap() > 0.0);
    assert!(v["gamma_bound"].as_f64().unwrap() < 1.0);

    let verdict = dir.path().join("verdict.json");
    let o = glue(&[
        "check",
        "-s",
        "bspline_tau:0.5",
        "-c",
        s(&cert),
        "-i",
        s(&line(dir.path(), 8)),
        "-o",
        s(&verdict),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&verdict).unwrap()).unwrap();
    assert_eq!(v["round"], 0);
    assert_eq!(v["level"], "c1_alpha");

    // certificate for another scheme
    let o = glue(&["check", "-s", "chaikin", "-c", s(&cert), "-i", s(&square(dir.path()))]);
    assert_eq!(code(&o), 2);

    // coincident points keep κ infinite
    let p = write_chain(dir.path(), "dup.json", &[[1.0, 1.0]; 8]);
    let o = glue(&["check", "-s", "bspline_tau:0.5", "-c", s(&cert), "-i", s(&p), "--max-rounds", "3"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("unknown"));
}

#[test]
fn zero_budget_is_inconclusive() {
    let o = glue(&["certify", "-s", "chaikin", "--budget", "0"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("inconclusive"));
}

#[test]
fn config_file_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "scheme = \"chaikin\"\n[search]\ndepth_max = 2\ndelta_grid = [0.1]\n").unwrap();
    let o = glue(&["--config", s(&cfg), "certify"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)[stdout(&o).find('{').unwrap()..]).unwrap();
    assert_eq!(v["config"]["depth_max"], 2);
    assert_eq!(v["delta"], 0.1);

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(code(&glue(&["--config", s(&cfg), "certify", "-s", "chaikin"])), 2);
}

#[test]
fn threads_from_environment() {
    let run = |t: &str| {
        Command::new(env!("CARGO_BIN_EXE_glue-cert"))
            .args(["certify", "-s", "chaikin", "--depth-max", "2", "--delta", "0.1"])
            .env("GLUE_CERT_THREADS", t)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("0")), 2);
    let a = run("1");
    let b = run("2");
    assert_eq!(code(&a), 0);
    let alpha = |o: &Output| {
        let text = stdout(o);
        let v: Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
        (v["alpha"].as_f64().unwrap(), v["gamma"].as_f64().unwrap(), v["boxes"].as_u64().unwrap())
    };
    assert_eq!(alpha(&a), alpha(&b));
}

#[test]
fn companion_reports() {
    let o = glue(&["companion", "-s", "cps2d"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("locally linear; companion = four-point"));

    let o = glue(&["companion", "-s", "spoiler"]);
    assert!(stdout(&o).contains("companion = quartic B-spline A^{1/2}"));

    let o = glue(&["jsr", "-s", "bspline_tau:0.25", "--order", "4", "--depth", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("ϱ_1(A_4) = 0.093750000000"));
}

#[test]
fn limit_samples() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("line.csv");
    let o = glue(&[
        "limit",
        "-s",
        "chaikin",
        "-i",
        s(&line(dir.path(), 6)),
        "--level",
        "4",
        "--grid",
        "11",
        "-o",
        s(&csv),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("t,x0,x1"));
    let mut count = 0;
    for row in rows {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[2] - 0.5 * v[1]).abs() < 1e-12, "{row}");
        count += 1;
    }
    assert_eq!(count, 11);

    let o = glue(&["limit", "-s", "chaikin", "-i", s(&line(dir.path(), 6)), "--level", "1", "--z", "0.25"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("at least 2"), "{}", stderr(&o));
}

#[test]
fn circle_limit_with_holder_report() {
    let dir = TempDir::new().unwrap();
    let pts: Vec<[f64; 2]> = (0..9)
        .map(|i| {
            let t = 0.5 * i as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    let p = write_chain(dir.path(), "arc.json", &pts);
    let svg = dir.path().join("arc.svg");
    let o = glue(&[
        "limit", "-s", "cps2d", "-i", s(&p), "--level", "11", "--holder", "1", "--format", "svg", "-o", s(&svg),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("holder order 1"));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}
