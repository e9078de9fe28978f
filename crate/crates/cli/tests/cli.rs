use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use unitselect_cli::commands::{bounds_report, load_study, verify_report};
use unitselect_cli::report::{BoundsReport, CompareReport, VerifyReport, VerifyStatus};
use unitselect_core::format::StudyFile;
use unitselect_core::{benefit_bounds, Estimator};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn unitselect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitselect"))
        .args(args)
        .env_remove("UNITSELECT_FORMAT")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json<T: serde::de::DeserializeOwned>(o: &Output) -> T {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn bounds_json(file: &str) -> BoundsReport {
    let o = unitselect(&["bounds", "--input", path(&data(file)), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    json(&o)
}

#[test]
fn bounds_json_matches_in_process_results() {
    for file in ["vaccine.json", "vaccine_with_observational.json", "immediate_profit.json"] {
        let report = bounds_json(file);
        let study = load_study(&data(file)).unwrap();
        assert_eq!(report, bounds_report(&study, Estimator::Midpoint));
        for (g, r) in study.groups().iter().zip(&report.groups) {
            let b = benefit_bounds(study.benefit_vector(), &g.experimental, g.observational.as_ref())
                .unwrap();
            let i = r.bounds.unwrap();
            assert_eq!((i.lower, i.upper), (b.lower, b.upper));
            assert_eq!(r.estimate, Some(b.midpoint()));
        }
    }
}

#[test]
fn vaccine_ranking() {
    let r = bounds_json("vaccine.json");
    let ids: Vec<_> = r.ranking.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, ["c2", "c1"]);
    assert!((r.ranking[1].estimate + 0.1).abs() < 1e-12);

    let r = bounds_json("vaccine_with_observational.json");
    let c2 = r.groups.iter().find(|g| g.id == "c2").unwrap();
    let b = c2.bounds.unwrap();
    assert!((b.lower - 0.3).abs() < 1e-12 && (b.upper - 0.4).abs() < 1e-12);
}

#[test]
fn estimator_flag_selects_endpoint() {
    let o = unitselect(&[
        "bounds", "--input", path(&data("vaccine.json")), "--estimator", "lower", "--format", "json",
    ]);
    let r: BoundsReport = json(&o);
    assert_eq!(r.estimator, "lower");
    assert!((r.groups[0].estimate.unwrap() + 0.4).abs() < 1e-12);
}

#[test]
fn table_is_default_and_env_selects_json() {
    let o = unitselect(&["bounds", "--input", path(&data("vaccine.json"))]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("ranking:"));
    assert!(serde_json::from_str::<serde_json::Value>(&text).is_err());

    let o = Command::new(env!("CARGO_BIN_EXE_unitselect"))
        .args(["bounds", "--input", path(&data("vaccine.json"))])
        .env("UNITSELECT_FORMAT", "json")
        .output()
        .unwrap();
    let _: BoundsReport = json(&o);

    // An explicit flag wins over the environment.
    let o = Command::new(env!("CARGO_BIN_EXE_unitselect"))
        .args(["bounds", "--input", path(&data("vaccine.json")), "--format", "table"])
        .env("UNITSELECT_FORMAT", "json")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).contains("ranking:"));
}

#[test]
fn missing_file_is_input_error() {
    let o = unitselect(&["bounds", "--input", "/nonexistent/study.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn schema_errors_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            r#"{"benefit_vector": {"complier": 1, "always_taker": 0, "never_taker": 0, "defier": -1},
                "groups": [{"id": "a", "experimental": {"probabilities": {"p_y_do_x": 0.5, "p_y_do_xp": 0.5}}},
                           {"id": "b", "experimental": {}}]}"#,
            "groups[1].experimental",
        ),
        (
            r#"{"benefit_vector": {"complier": 1, "always_taker": 0, "never_taker": 0, "defier": -1},
                "groups": [{"id": "a", "experimental": {"counts": {"treated_n": 10, "treated_y": 11, "control_n": 10, "control_y": 1}}}]}"#,
            "groups[0].experimental.counts",
        ),
        (
            r#"{"benefit_vector": {"complier": 1, "always_taker": 0, "never_taker": 0},
                "groups": []}"#,
            "benefit_vector",
        ),
    ];
    for (i, (text, want)) in cases.iter().enumerate() {
        let f = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&f, text).unwrap();
        let o = unitselect(&["bounds", "--input", path(&f)]);
        assert_eq!(o.status.code(), Some(1));
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(want), "case {i}: {err}");
    }
}

#[test]
fn incompatible_group_is_analytic_failure() {
    let o = unitselect(&["bounds", "--input", path(&data("corrupted.json")), "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let r: BoundsReport = json(&o);
    assert_eq!(r.incompatible_groups, 1);
    assert!(r.groups[0].bounds.is_none());
    assert!(!r.groups[0].violations.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("incompatible"));
}

#[test]
fn compare_flags_first_vaccine_group() {
    let o = unitselect(&[
        "compare", "--input", path(&data("vaccine.json")), "--ab", "1,1", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r: CompareReport = json(&o);
    assert_eq!(r.disagreements, 1);
    assert!(r.groups[0].disagreement);
    assert!((r.groups[0].heuristic_value - 0.3).abs() < 1e-12);
    assert!(!r.groups[1].disagreement);

    let o = unitselect(&["compare", "--input", path(&data("vaccine.json")), "--ab", "1,1"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("1 disagreement(s) across 2 group(s)"));
}

#[test]
fn zero_heuristic_scores_zero() {
    let o = unitselect(&[
        "compare", "--input", path(&data("vaccine.json")), "--ab", "0,0", "--format", "json",
    ]);
    let r: CompareReport = json(&o);
    assert!(r.groups.iter().all(|g| g.heuristic_value == 0.0));
}

#[test]
fn matching_heuristic_never_disagrees() {
    for (file, ab) in [
        ("increased_customers.json", "1,1"),
        ("immediate_profit.json", "45000,50000"),
    ] {
        let o = unitselect(&["compare", "--input", path(&data(file)), "--ab", ab, "--format", "json"]);
        let r: CompareReport = json(&o);
        assert_eq!(r.disagreements, 0, "{file}");
        for g in &r.groups {
            let scale = r.heuristic.a.abs().max(1.0);
            assert!((g.heuristic_value - g.estimate.unwrap()).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn case_study_vectors() {
    // (file, expressible, c1 estimate, c2 estimate)
    let cases = [
        ("increased_customers.json", true, 0.3, 0.4),
        ("immediate_profit.json", true, 12000.0, 16500.0),
        ("nonimmediate_profit.json", false, 11700.0, 16200.0),
        ("vaccine_affected_focus.json", false, 0.2, 0.5),
    ];
    for (file, expressible, e1, e2) in cases {
        let r = bounds_json(file);
        let scale = r.groups[0].estimate.unwrap().abs().max(1.0);
        assert_eq!(r.ab_representation.is_some(), expressible, "{file}");
        assert!((r.groups[0].estimate.unwrap() - e1).abs() <= 1e-9 * scale, "{file}: {:?}", r.groups[0]);
        assert!((r.groups[1].estimate.unwrap() - e2).abs() <= 1e-9 * scale, "{file}: {:?}", r.groups[1]);
    }
}

fn simulate(args: &[&str], out: &Path) -> Vec<u8> {
    let truth = data("vaccine_truth.json");
    let mut all = vec!["simulate", "--truth", path(&truth), "--out", path(out)];
    all.extend_from_slice(args);
    let o = unitselect(&all);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out).unwrap()
}

#[test]
fn simulate_exact_reproduces_expected_counts() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = simulate(&["--exact"], &dir.path().join("s.json"));
    let file = StudyFile::from_json(std::str::from_utf8(&bytes).unwrap()).unwrap();
    let counts: Vec<_> = file
        .groups
        .iter()
        .map(|g| g.experimental.counts.unwrap())
        .map(|c| (c.treated_n, c.treated_y, c.control_n, c.control_y))
        .collect();
    assert_eq!(counts, [(750, 450, 750, 225), (750, 525, 750, 225)]);
    let meta = file.simulation.unwrap();
    assert!(meta.exact);
}

#[test]
fn simulate_is_reproducible_and_feeds_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(&["--seed", "7", "--n-obs", "500"], &dir.path().join("a.json"));
    let b = simulate(&["--seed", "7", "--n-obs", "500"], &dir.path().join("b.json"));
    let c = simulate(&["--seed", "8", "--n-obs", "500"], &dir.path().join("c.json"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let o = unitselect(&["bounds", "--input", path(&dir.path().join("a.json"))]);
    assert!(matches!(o.status.code(), Some(0 | 2)));
}

#[test]
fn simulate_without_observational_sample_omits_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = simulate(&["--seed", "7", "--n-obs", "0"], &dir.path().join("s.json"));
    let file = StudyFile::from_json(std::str::from_utf8(&bytes).unwrap()).unwrap();
    assert!(file.groups.iter().all(|g| g.observational.is_none()));
    assert!(!String::from_utf8_lossy(&bytes).contains("\"observational\":"));
}

#[test]
fn simulate_to_stdout() {
    let o = unitselect(&[
        "simulate", "--truth", path(&data("vaccine_truth.json")), "--exact",
    ]);
    assert_eq!(o.status.code(), Some(0));
    StudyFile::from_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
}

#[test]
fn verify_vaccine_passes() {
    for (file, l1) in [
        ("vaccine.json", 4.0),
        ("vaccine_with_observational.json", 4.0),
        ("increased_customers.json", 2.0),
    ] {
        let o = unitselect(&["verify", "--input", path(&data(file)), "--format", "json"]);
        assert_eq!(o.status.code(), Some(0), "{file}");
        let r: VerifyReport = json(&o);
        assert!(r.all_passed);
        assert!((r.tolerance - 2.0 * 0.05 * l1).abs() < 1e-12);
    }
}

#[test]
fn verify_point_identified_range_is_narrow() {
    let study = load_study(&data("increased_customers.json")).unwrap();
    let r = verify_report(&study, 0.05).unwrap();
    for g in &r.groups {
        let bf = g.brute_force.unwrap();
        assert!(bf.max - bf.min <= r.tolerance, "{g:?}");
    }
}

#[test]
fn verify_reports_corrupted_study() {
    let o = unitselect(&["verify", "--input", path(&data("corrupted.json")), "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let r: VerifyReport = json(&o);
    assert_eq!(r.groups[0].status, VerifyStatus::Incompatible);
    assert!(r.groups[0].message.is_some());
}

#[test]
fn verify_rejects_bad_grid_step() {
    let o = unitselect(&["verify", "--input", path(&data("vaccine.json")), "--grid-step", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}
