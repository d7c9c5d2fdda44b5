use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contactfib"))
        .args(args)
        .output()
        .expect("spawn contactfib")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("contactfib-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const FAILING: &str = r#"
name = "failing"

[charts.C]
coords = ["x", "y", "z"]
bounds = [[-1, 1], [-1, 1], [-1, 1]]

[forms.flat]
chart = "C"
form = "dz"

[forms.alpha]
chart = "C"
form = "dz + x*dy"

[[run]]
task = "verify_contact"
target = "flat"

[[run]]
task = "verify_contact"
target = "alpha"
grid = 5
"#;

#[test]
fn list_builtins_names_every_scenario() {
    let o = bin(&["list-builtins"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in [
        "product_lemma",
        "mapping_torus",
        "gray_family",
        "fiber_sum_n1",
        "fiber_sum_n2",
        "negative_controls",
    ] {
        assert!(text.contains(name), "{name} missing from:\n{text}");
    }
}

#[test]
fn explain_known_and_unknown() {
    let o = bin(&["explain", "find_K"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("find_K"));

    let o = bin(&["explain", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown task"));
}

#[test]
fn negative_controls_pass_and_write_json() {
    let out = scratch("neg.json");
    let o = bin(&["verify", "negative_controls", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let json = std::fs::read_to_string(&out).unwrap();
    assert!(json.contains("\"passed\": true"));
    assert!(json.contains("\"seed\": 42"));
}

#[test]
fn failing_scenario_exits_one() {
    let path = scratch("failing.scn");
    std::fs::write(&path, FAILING).unwrap();
    let o = bin(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("FAILED"));
    assert!(text.contains("worst: contact density"));
}

#[test]
fn grid_override_reaches_the_report() {
    let path = scratch("grid.scn");
    std::fs::write(&path, FAILING).unwrap();
    let out = scratch("grid.json");
    let o = bin(&[
        "verify",
        path.to_str().unwrap(),
        "--grid",
        "3",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let json = std::fs::read_to_string(&out).unwrap();
    assert!(json.contains("\"grid\": 3"));
    assert!(json.contains("\"seed\": 7"));
    assert!(json.contains("\"points\": 27"), "{json}");
}

#[test]
fn missing_scenario_exits_two() {
    let o = bin(&["verify", "/nonexistent/none.scn"]);
    assert_eq!(o.status.code(), Some(2));
}
