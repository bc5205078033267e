use std::path::PathBuf;
use std::process::{Command, Output};

use lgmono::catalog::Catalog;

fn lgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgm"))
        .args(args)
        .env_remove("LGM_SEED")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let out = lgm(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("lgm-{}-{name}", std::process::id()))
}

#[test]
fn list_shows_every_entry() {
    let out = lgm(&["list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for id in lgmono::catalog::list() {
        assert!(
            text.lines()
                .any(|l| l.split_whitespace().next() == Some(id.as_str())),
            "{id}"
        );
    }
}

#[test]
fn solve_emits_labelled_points() {
    let v = json(&["solve", "p1xp1", "--json"]);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 4);
    for p in points {
        assert!(p["residual"].as_f64().unwrap() < 1e-10);
        for z in p["coords"].as_array().unwrap() {
            assert!((z[0].as_f64().unwrap().abs() - 1.0).abs() < 1e-8);
            assert!(z[1].as_f64().unwrap().abs() < 1e-8);
        }
    }
}

#[test]
fn json_output_is_identical_across_runs() {
    let a = stdout(&lgm(&["solve", "bl2_p2", "--json"]));
    let b = stdout(&lgm(&["solve", "bl2_p2", "--json"]));
    assert_eq!(a, b);
}

#[test]
fn monodromy_reports_cycles() {
    let out = lgm(&["monodromy", "bl1_p2", "--divisor", "n2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "(E0 F1)(E1 E2)");

    let v = json(&["monodromy", "p2", "--divisor", "n1", "--json"]);
    assert_eq!(v["divisor"], "n1");
    assert_eq!(v["epsilon"], 1.0);
    assert_eq!(v["label_cycles"], "(E0 E1 E2)");
    assert_eq!(v["mapping"].as_object().unwrap().len(), 3);
}

#[test]
fn quiver_exports() {
    let v = json(&["quiver", "bl3_p2", "--json"]);
    assert_eq!(v["edges"].as_array().unwrap().len(), 12);
    let dot = stdout(&lgm(&["quiver", "p2", "--dot"]));
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("->").count(), 6);
}

#[test]
fn check_all_passes() {
    let out = lgm(&["check", "--all"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 13);
    assert!(!text.contains("FAIL"));
}

#[test]
fn plot_writes_svg() {
    let path = temp_path("p2.svg");
    let out = lgm(&["plot", "p2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(svg.contains("<svg") && svg.contains("E1"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["solve", "nope"][..],
        &["monodromy", "p2", "--divisor", "n9"],
        &["--catalog", "/nonexistent/catalog.json", "list"],
        &["check"],
        &["frobnicate"],
    ] {
        assert_eq!(lgm(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn wrong_fixture_fails_verification() {
    let mut raw = Catalog::builtin().to_raw();
    let p2 = raw.entries.iter_mut().find(|e| e.id == "p2").unwrap();
    p2.monodromy[0].cycles = "(E0 E2 E1)".into();
    let path = temp_path("catalog.json");
    std::fs::write(&path, serde_json::to_string(&raw).unwrap()).unwrap();
    let out = lgm(&["--catalog", path.to_str().unwrap(), "check", "p2", "--full"]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}
