use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_braidtrack"));
    c.env_remove("BRAIDTRACK_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_str().unwrap().to_string()
}

fn words(v: &Value, key: &str) -> Vec<String> {
    v["generators"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g[key].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn braid_of_the_cusp() {
    let v = json(&run(&["braid", "z^3 - t^2", "--seed", "1", "--format", "json"]));
    assert_eq!(v["n"], 3);
    assert_eq!(v["generators"].as_array().unwrap().len(), 1);
    assert_eq!(v["generators"][0]["perm"], serde_json::json!([2, 3, 1]));
    assert_eq!(v["monodromy"]["order"], 3);
}

#[test]
fn braid_with_two_branch_points() {
    let v = json(&run(&["braid", "z^4 - 4*z^2 + 3 + t"]));
    assert_eq!(v["generators"].as_array().unwrap().len(), 2);
}

#[test]
fn one_strand_has_no_generators() {
    let v = json(&run(&["braid", "z"]));
    assert_eq!(v["n"], 1);
    assert!(v["generators"].as_array().unwrap().is_empty());
}

#[test]
fn branch_listings() {
    let pts = |src: &str| -> Vec<(f64, f64)> {
        let v = json(&run(&["branch", src]));
        v["branch_points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| (p["point"][0].as_f64().unwrap(), p["point"][1].as_f64().unwrap()))
            .collect()
    };
    let near = |got: Vec<(f64, f64)>, want: &[f64]| {
        assert_eq!(got.len(), want.len(), "{got:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g.0 - w).abs() < 1e-8 && g.1.abs() < 1e-8, "{got:?}");
        }
    };
    near(pts("z^3 - t^2*(1-t)"), &[0.0, 1.0]);
    near(pts("z^2 - t"), &[0.0]);
    near(pts("z^3 - t"), &[0.0]);
    let text = run(&["branch", "z^3 - t^2*(1-t)", "--format", "text"]);
    assert_eq!(String::from_utf8(text.stdout).unwrap(), "0+0i (multiplicity 4)\n1+0i (multiplicity 2)\n");
}

#[test]
fn arrangement_fixtures() {
    let v = json(&run(&["arrangement", &fixture("five_lines.json"), "--seed", "1"]));
    assert_eq!(v["generators"].as_array().unwrap().len(), 8);
    let v = json(&run(&["arrangement", &fixture("fourteen_lines.json"), "--seed", "1"]));
    assert_eq!(v["generators"].as_array().unwrap().len(), 46);
    let v = json(&run(&["arrangement", &fixture("two_lines.json")]));
    assert_eq!(words(&v, "core"), ["s1 s1"]);
    assert_eq!(v["generators"][0]["perm"], serde_json::json!([1, 2]));
}

#[test]
fn render_formats() {
    let out = run(&["render", "s2 s1 s2 s1", "-n", "3", "--render", "tikz"]);
    let tikz = String::from_utf8(out.stdout).unwrap();
    assert!(tikz.contains("\\braid[number of strands=3] (braid) a_{2} a_{1} a_{2} a_{1};"));
    let out = run(&["render", "", "-n", "4", "--render", "ascii"]);
    let ascii = String::from_utf8(out.stdout).unwrap();
    assert_eq!(ascii.lines().filter(|l| *l == "-").count(), 4);
    let svg = |w: &str| String::from_utf8(run(&["render", w, "-n", "2", "--render", "svg"]).stdout).unwrap();
    assert_ne!(svg("s1"), svg("s1^-1"));
    assert_eq!(svg("s1"), svg("s1"));
    let bad = run(&["render", "s7", "-n", "3"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_passes_fresh_and_fails_tampered_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = run(&["braid", "z^3 - t^2", "--seed", "1", "--out", report.to_str().unwrap()]);
    assert!(out.status.success());
    let ok = run(&["verify", report.to_str().unwrap(), "z^3 - t^2"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));

    let original: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let tamper = |edit: &dyn Fn(&mut Value)| {
        let mut v = original.clone();
        edit(&mut v);
        let p = dir.path().join("t.json");
        std::fs::write(&p, serde_json::to_string(&v).unwrap()).unwrap();
        run(&["verify", p.to_str().unwrap(), "z^3 - t^2"])
    };
    let flipped = tamper(&|v| {
        let s = v["generators"][0]["crossings"][0]["sign"].as_i64().unwrap();
        v["generators"][0]["crossings"][0]["sign"] = (-s).into();
    });
    assert_eq!(flipped.status.code(), Some(1));
    let moved = tamper(&|v| {
        let s = v["generators"][0]["crossings"][0]["s"].as_f64().unwrap();
        v["generators"][0]["crossings"][0]["s"] = (s - 1e-2).into();
    });
    assert_eq!(moved.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&moved.stdout).contains("residual"));
    let junk = tamper(&|v| *v = serde_json::json!({"n": 3}));
    assert_eq!(junk.status.code(), Some(1));
}

#[test]
fn verify_arrangement_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let five = fixture("five_lines.json");
    assert!(run(&["arrangement", &five, "--seed", "2", "--out", report.to_str().unwrap()]).status.success());
    let ok = run(&["verify", report.to_str().unwrap(), &five]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
}

#[test]
fn output_is_deterministic_and_seed_comes_from_the_environment() {
    let a = run(&["braid", "z^3 - t^2*(1-t)", "--seed", "5"]).stdout;
    let b = run(&["braid", "z^3 - t^2*(1-t)", "--seed", "5"]).stdout;
    assert_eq!(a, b);
    let c = bin()
        .args(["braid", "z^3 - t^2*(1-t)"])
        .env("BRAIDTRACK_SEED", "5")
        .output()
        .unwrap()
        .stdout;
    assert_eq!(a, c);
}

#[test]
fn exit_codes() {
    let improper = run(&["braid", "z^3 - t*z"]);
    assert_eq!(improper.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&improper.stderr).contains("improper"));
    let parse = run(&["braid", "z^3 - (t"]);
    assert_eq!(parse.status.code(), Some(1));
    assert!(parse.stdout.is_empty());
    let lambda = run(&["braid", "z^3 - t^2", "--lambda", "0"]);
    assert_eq!(lambda.status.code(), Some(1));
}

#[test]
fn options_reach_the_engine() {
    let v = json(&run(&["braid", "z^3 - t^2", "--polygon-sides", "6", "--lambda", "0.6+0.8i"]));
    assert_eq!(v["lambda"], serde_json::json!([0.6, 0.8]));
    let g = &v["generators"][0];
    let vertices = g["loop_vertices"].as_array().unwrap().len();
    let approach = g["approach_len"].as_u64().unwrap() as usize;
    assert_eq!(vertices, 2 * approach + 6 + 1);
    let bad = run(&["braid", "z^3 - t^2", "--radius-factor", "0.9"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn text_report() {
    let out = run(&["braid", "z^4 - 4*z^2 + 3 + t", "--seed", "1", "--format", "text"]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("generator 1 at -3+0i (multiplicity 1)"), "{s}");
    assert!(s.contains("  core: s2\n"));
    assert!(s.contains("monodromy: order 8, transitive"));
}

#[test]
fn diagrams_are_written_next_to_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("cusp.json");
    let out = run(&["braid", "z^3 - t^2", "--out", report.to_str().unwrap(), "--render", "svg,tikz"]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("cusp.json.g1.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let tex = std::fs::read_to_string(dir.path().join("cusp.json.g1.tex")).unwrap();
    assert!(tex.contains("number of strands=3"));
}

#[test]
fn hypersurface_on_a_given_line() {
    let v = json(&run(&["hypersurface", "z^3 - u*v", "--u0", "0;0", "--dir", "1;1", "--seed", "1"]));
    let w = json(&run(&["braid", "z^3 - t^2", "--seed", "1"]));
    assert_eq!(words(&v, "core"), words(&w, "core"));
    let random = json(&run(&["hypersurface", "z^2 - u - v^2", "--seed", "3"]));
    assert_eq!(random["n"], 2);
    let bad = run(&["hypersurface", "z^2 - u", "--vars", "z,u", "--dir", "0"]);
    assert_eq!(bad.status.code(), Some(1));
}
