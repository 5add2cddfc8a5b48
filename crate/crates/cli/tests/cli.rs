use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/instances").join(name)
}

fn hjnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjnet")).args(args).output().expect("binary runs")
}

fn on(network: &str, args: &[&str]) -> Output {
    let path = instance(network);
    let mut all = vec!["--network", path.to_str().unwrap()];
    all.extend_from_slice(args);
    hjnet(&all)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn critical_on_the_loop() {
    let out = on("loop.json", &["critical"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["c"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    assert_eq!(v["config"]["grid"], 257);
    assert_eq!(v["witness"]["kind"], "zero-cycle");
}

#[test]
fn solve_on_the_well_matches_the_hand_integral() {
    let trace = instance("well_trace.json");
    let out = on("well.json", &["solve", "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let arc = &v["arcs"][0];
    let (s, u) = (arc["s_grid"].as_array().unwrap(), arc["values"].as_array().unwrap());
    let err = s.iter().zip(u).map(|(s, u)| (u.as_f64().unwrap() - (s.as_f64().unwrap() - 0.5).powi(2) / 2.0).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "sup error {err}");
    assert!((v["vertices"]["left"].as_f64().unwrap() - 0.125).abs() < 1e-9);
    assert_eq!(v["config"]["panels"], 256);
}

#[test]
fn doubled_field_fails_verification() {
    let field = instance("scaled_field.json");
    let out = on("well.json", &["verify", "--field", field.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["subsolution"]["passed"], false);
    assert!(v["subsolution"]["max_violation"].as_f64().unwrap() > 1e-3);
}

#[test]
fn solve_output_verifies_on_every_bundled_instance() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["loop", "well", "triangle"] {
        let field = dir.path().join(format!("{name}.json"));
        let trace = instance(&format!("{name}_trace.json"));
        let network = format!("{name}.json");
        let solved = on(&network, &["solve", "--trace", trace.to_str().unwrap(), "--output", field.to_str().unwrap()]);
        assert_eq!(solved.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&solved.stderr));
        let verified = on(&network, &["verify", "--field", field.to_str().unwrap()]);
        assert_eq!(verified.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&verified.stdout));
        assert_eq!(json(&verified)["passed"], true);
    }
}

#[test]
fn verification_fails_off_the_critical_level() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("loop.json");
    let trace = instance("loop_trace.json");
    on("loop.json", &["solve", "--trace", trace.to_str().unwrap(), "--output", field.to_str().unwrap()]);
    for level in ["1.9", "2.1"] {
        let out = on("loop.json", &["verify", "--field", field.to_str().unwrap(), "--level", level]);
        assert_eq!(out.status.code(), Some(1), "level {level}");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let trace = instance("triangle_trace.json");
    for args in [vec!["critical"], vec!["aubry"], vec!["solve", "--trace", trace.to_str().unwrap()], vec!["harness", "--trials", "5", "--seed", "3"]] {
        let a = on("triangle.json", &args);
        let b = on("triangle.json", &args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn distance_on_the_loop_takes_the_free_backward_leg() {
    let out = on("loop.json", &["distance", "--from", "v", "--to", "loop:0.3", "--level", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["value"].as_f64().unwrap().abs() < 1e-12);
    let legs = v["certificate"]["legs"].as_array().unwrap();
    assert_eq!(legs.len(), 1);
    assert_eq!(legs[0]["dir"], "rev");
}

#[test]
fn aubry_csv_lists_the_well_point() {
    let out = on("well.json", &["aubry", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "class,origin,kind,name,s1,s2");
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0,degenerate,interval,well,"));
}

#[test]
fn solve_csv_has_one_row_per_sample() {
    let trace = instance("well_trace.json");
    let out = on("well.json", &["solve", "--trace", trace.to_str().unwrap(), "--format", "csv", "--grid", "65", "--panels", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# config: {"));
    assert_eq!(text.lines().filter(|l| l.starts_with("well,")).count(), 65);
}

#[test]
fn checks_pass_on_bundled_instances() {
    for name in ["loop.json", "well.json", "triangle.json"] {
        for args in [vec!["validate"], vec!["harness", "--trials", "10"], vec!["oracle", "--pairs", "5"]] {
            let out = on(name, &args);
            assert_eq!(out.status.code(), Some(0), "{name} {args:?}: {}", String::from_utf8_lossy(&out.stdout));
            assert_eq!(json(&out)["passed"], true);
        }
    }
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(hjnet(&["critical"]).status.code(), Some(2));
    assert_eq!(hjnet(&["bogus"]).status.code(), Some(2));
    assert_eq!(on("missing.json", &["critical"]).status.code(), Some(2));
    assert_eq!(on("well.json", &["critical", "--grid", "100"]).status.code(), Some(2));
    assert_eq!(on("well.json", &["distance", "--from", "left", "--to", "nowhere"]).status.code(), Some(2));
    assert_eq!(on("well.json", &["validate", "--format", "csv"]).status.code(), Some(2));
    let bad = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(bad.path(), r#"{"points":[{"at":{"vertex":"v"},"value":0},{"at":{"arc":"loop","s":0.5},"value":3}]}"#).unwrap();
    let out = on("loop.json", &["solve", "--trace", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not admissible"));
}
