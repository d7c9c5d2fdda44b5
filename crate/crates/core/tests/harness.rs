use std::path::PathBuf;

use contactfib::bundle::{find_admissible_k, mapping_torus_spec};
use contactfib::contact::DEFAULT_THRESHOLD;
use contactfib::harness::{
    canonical_digest, emit_report, explain, load_builtin, load_scenario, parse_scenario,
    report_from_json, run_suite, to_json, RunReport, Settings, Status, TaskKind, BUILTINS,
};
use contactfib::Error;

fn run(name: &str) -> RunReport {
    let doc = load_builtin(name).unwrap();
    let report = run_suite(&doc, &Settings::default());
    for t in &report.tasks {
        eprintln!(
            "{name} #{} {} {}: {:?} (observed {:?}) {:.2}s {:?} {}",
            t.index,
            t.task,
            t.target,
            t.status,
            t.observed,
            t.wall_time_s,
            t.values,
            t.message.as_deref().unwrap_or("")
        );
    }
    report
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("contactfib-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const SMALL: &str = r#"
name = "small"

[charts.C]
coords = ["x", "y", "z"]
bounds = [[-1, 1], [-1, 1], [-1, 1]]

[forms.alpha]
chart = "C"
form = "dz + x*dy"

[forms.area]
chart = "C"
form = "dx wedge dy"

[forms.flat]
chart = "C"
form = "dz"

[[run]]
task = "verify_contact"
target = "area"

[[run]]
task = "verify_contact"
target = "flat"

[[run]]
task = "verify_contact"
target = "alpha"
grid = 5
"#;

#[test]
fn load_examples() {
    let doc = load_builtin("product_lemma").unwrap();
    assert_eq!(doc.name, "product_lemma");
    assert!(!doc.run.is_empty());

    let dangling = r#"
[forms.alpha]
chart = "Nowhere"
form = "dz"
"#;
    match parse_scenario(dangling, "d").unwrap_err() {
        Error::DanglingReference { section, name } => {
            assert_eq!(section, "forms");
            assert_eq!(name, "Nowhere");
        }
        e => panic!("unexpected {e}"),
    }

    let duplicate = r#"
[charts.C]
coords = ["x"]
bounds = [[0, 1]]

[forms.C]
chart = "C"
form = "dx"
"#;
    assert!(matches!(
        parse_scenario(duplicate, "d").unwrap_err(),
        Error::DuplicateName { .. }
    ));

    match parse_scenario("[charts.C]\ncoords = [\"x\"\n", "d").unwrap_err() {
        Error::Parse { line, column, .. } => assert!(line >= 2 && column >= 1),
        e => panic!("unexpected {e}"),
    }

    let path = scratch("small.scn");
    std::fs::write(&path, SMALL).unwrap();
    let doc = load_scenario(&path).unwrap();
    assert_eq!(doc.run.len(), 3);
}

#[test]
fn digest_ignores_whitespace_and_comments() {
    let a = canonical_digest(SMALL).unwrap();
    let spaced = SMALL.replace(" = ", "   =   ").replace("\n[", "\n\n# note\n[");
    assert_eq!(canonical_digest(&spaced).unwrap(), a);
    let changed = SMALL.replace("dz + x*dy", "dz + 2*x*dy");
    assert_ne!(canonical_digest(&changed).unwrap(), a);
}

#[test]
fn tasks_keep_running_after_errors_and_failures() {
    let doc = parse_scenario(SMALL, "small").unwrap();
    let report = run_suite(&doc, &Settings::default());
    let status: Vec<Status> = report.tasks.iter().map(|t| t.status).collect();
    assert_eq!(status, [Status::Error, Status::Failed, Status::Passed]);
    assert!(!report.passed);
    assert_eq!(report.failures().count(), 2);
    assert_eq!(report.tasks[2].values["min_density"], 1.0);
    assert_eq!(report.digest, doc.digest);
    assert_eq!(report.settings.seed, 42);
}

#[test]
fn settings_override_task_fields() {
    let doc = parse_scenario(SMALL, "small").unwrap();
    let settings = Settings {
        grid: Some(3),
        ..Settings::default()
    };
    let report = run_suite(&doc, &settings);
    assert_eq!(report.tasks[2].reports[0].grid.resolution, vec![3, 3, 3]);
    let report = run_suite(&doc, &Settings::default());
    assert_eq!(report.tasks[2].reports[0].grid.resolution, vec![5, 5, 5]);
}

#[test]
fn emit_report_examples() {
    let empty = RunReport::new("empty", "00", Settings::default());
    let path = scratch("empty.json");
    emit_report(&empty, &path).unwrap();
    let back = report_from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(back.tasks.is_empty());

    let doc = parse_scenario(SMALL, "small").unwrap();
    let report = run_suite(&doc, &Settings::default());
    let path = scratch("small.json");
    emit_report(&report, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"status\": \"passed\""));
    assert_eq!(report_from_json(&text).unwrap(), report);
    // the failed contact check carries its argmin point
    let failed = &report.tasks[1].reports[0];
    assert!(!failed.passed);
    assert_eq!(failed.argmin_point.len(), 3);
    assert!(text.contains("argmin_point"));

    let err = emit_report(&report, std::path::Path::new("/nonexistent/dir/r.json")).unwrap_err();
    assert!(matches!(err, Error::Io(_)));
}

#[test]
fn explain_covers_every_task() {
    for kind in TaskKind::ALL {
        assert!(explain(kind.name()).is_some_and(|s| !s.is_empty()), "{}", kind.name());
    }
    assert!(explain("FIND_K").is_some());
    assert!(explain("nonsense").is_none());
}

#[test]
fn mapping_torus_builtin_matches_direct_pipeline() {
    let report = run("mapping_torus");
    assert!(report.passed);
    let k5 = report
        .tasks
        .iter()
        .find(|t| t.target == "torus_c5")
        .unwrap()
        .values["K"];
    let direct = find_admissible_k(&mapping_torus_spec(5.0, false).unwrap(), 15, DEFAULT_THRESHOLD)
        .unwrap();
    assert_eq!(k5, direct.k);
    for t in &report.tasks {
        if let Some(k) = t.values.get("K") {
            assert!(*k < 1024.0);
        }
    }
}

#[test]
fn other_builtins_pass() {
    for (name, _) in BUILTINS {
        if name == "mapping_torus" {
            continue;
        }
        let report = run(name);
        assert!(report.passed, "{name}");
        if name.starts_with("fiber_sum") {
            for t in report.tasks.iter().filter(|t| t.expect == "pass") {
                if let Some(r) = t.values.get("gluing_residual") {
                    assert!(*r < 1e-9);
                }
            }
        }
        if name == "gray_family" {
            let fam = report.tasks.iter().find(|t| t.task == "family").unwrap();
            let leaf = fam.reports[0].worst_leaf();
            assert!(leaf.t.is_some());
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let doc = load_builtin("fiber_sum_n1").unwrap();
    let a = run_suite(&doc, &Settings::default()).without_timings();
    let b = run_suite(&doc, &Settings::default()).without_timings();
    assert_eq!(to_json(&a).unwrap(), to_json(&b).unwrap());
}
