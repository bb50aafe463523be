use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use selfdist::cli::REPORT_HEADER;
use selfdist::{BoundReport, DeltaEstimate, OptimizationResult, Theorem, VerifyReport};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn selfdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfdist")).args(args).output().unwrap()
}

fn fx(name: &str) -> String {
    fixture(name).display().to_string()
}

fn ok_stdout(out: &Output) -> String {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn delta_on_vertices() {
    let out = selfdist(&["delta", "--norm", &fx("linf2.json"), "--measure", &fx("vertices2.json")]);
    let est: DeltaEstimate = serde_json::from_str(&ok_stdout(&out)).unwrap();
    assert_eq!(est.value, 1.5);
    assert!(est.is_exact());
}

#[test]
fn delta_monte_carlo_is_reproducible() {
    let args = ["delta", "--norm", &fx("linf2.json"), "--sampler", "ball", "--seed", "4", "--pairs", "20000"];
    let a = ok_stdout(&selfdist(&args));
    let b = ok_stdout(&selfdist(&["--threads", "1", args[0], args[1], args[2], args[3], args[4], args[5], args[6], args[7], args[8]]));
    assert_eq!(a, b);
    let est: DeltaEstimate = serde_json::from_str(&a).unwrap();
    assert!((est.value - 14.0 / 15.0).abs() < 5.0 * est.stderr);
}

#[test]
fn input_errors_exit_2() {
    let missing = selfdist(&["delta", "--norm", "/nonexistent/norm.json", "--measure", &fx("vertices2.json")]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());

    let zero = selfdist(&["delta", "--norm", &fx("linf2.json"), "--sampler", "ball", "--seed", "1", "--pairs", "0"]);
    assert_eq!(zero.status.code(), Some(2));

    let no_seed = selfdist(&["delta", "--norm", &fx("linf2.json"), "--sampler", "ball", "--pairs", "10"]);
    assert_eq!(no_seed.status.code(), Some(2));

    let outside = selfdist(&["delta", "--norm", &fx("linf2.json"), "--measure", &fx("outside2.json")]);
    assert_eq!(outside.status.code(), Some(2));

    let range = selfdist(&["report", "--n-max", "1"]);
    assert_eq!(range.status.code(), Some(2));

    let unknown = selfdist(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_3() {
    let out = selfdist(&["bound", "--n", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain"));
}

#[test]
fn invalid_certificate_exits_4() {
    let out = selfdist(&["certify", "--cover", &fx("linf2_incomplete_cover.json"), "--measure", &fx("vertices2.json")]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn certify_reports_partition() {
    let out = selfdist(&["certify", "--cover", &fx("linf2_cover.json"), "--measure", &fx("vertices2.json")]);
    let v: serde_json::Value = serde_json::from_str(&ok_stdout(&out)).unwrap();
    let report: BoundReport = serde_json::from_value(v["report"].clone()).unwrap();
    assert_eq!(report.theorem, Theorem::CoveringCertificate);
    assert!((report.value - (1.5 + 2f64.sqrt() / 4.0)).abs() < 1e-15);
    assert_eq!(v["masses"], serde_json::json!([0.25, 0.25, 0.25, 0.25]));
}

#[test]
fn bound_for_plane_is_fixed_point() {
    let out = selfdist(&["bound", "--n", "2"]);
    let report: BoundReport = serde_json::from_str(&ok_stdout(&out)).unwrap();
    assert_eq!(report.theorem, Theorem::Dim2FixedPoint);
    assert!((report.value - 1.822_105_850_781_889_4).abs() < 1e-12);
}

#[test]
fn verify_fixture_covers() {
    for name in ["linf2_cover.json", "l1_2_cover.json"] {
        let out = selfdist(&["verify-cover", "--cover", &fx(name), "--grid", "0.02"]);
        let report: VerifyReport = serde_json::from_str(&ok_stdout(&out)).unwrap();
        assert!(report.verified && report.exhaustive, "{name}");
    }
    let out = selfdist(&["verify-cover", "--cover", &fx("linf2_incomplete_cover.json"), "--count", "2000", "--seed", "1"]);
    let report: VerifyReport = serde_json::from_str(&ok_stdout(&out)).unwrap();
    assert!(!report.verified);
    let w = report.witness.unwrap();
    assert!(w[0] < 0.0 && w[1] < 0.0);
}

#[test]
fn report_csv() {
    let out = selfdist(&["report", "--n-max", "10", "--format", "csv"]);
    let text = ok_stdout(&out);
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], REPORT_HEADER);
    assert_eq!(lines.len(), 10);
    let col = |line: &str, i: usize| line.split(',').nth(i).unwrap().parse::<f64>().unwrap();
    assert!(lines[1].starts_with("2,"));
    assert_eq!(format!("{:.6}", col(lines[1], 6)), "1.822106");
    let f = |line: &str| col(line, 8);
    assert!(f(lines[9]) > 0.0 && f(lines[9]) < f(lines[2]));
    assert_eq!(text, ok_stdout(&selfdist(&["report", "--n-max", "10", "--format", "csv"])));

    let short = ok_stdout(&selfdist(&["report", "--n-max", "3", "--format", "csv"]));
    assert_eq!(short.lines().count(), 3);
}

#[test]
fn optimize_with_output_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let atoms = dir.path().join("atoms.json");
    std::fs::write(&atoms, "[[1,1],[-1,-1],[0,0]]").unwrap();
    let result = dir.path().join("result.json");
    let manifest = dir.path().join("manifest.json");
    let args = [
        "--output", result.to_str().unwrap(),
        "--manifest", manifest.to_str().unwrap(),
        "optimize", "--norm", &fx("linf2.json"), "--atoms", atoms.to_str().unwrap(),
        "--restarts", "4", "--seed", "1",
    ];
    ok_stdout(&selfdist(&args));
    let first = std::fs::read_to_string(&result).unwrap();
    let r: OptimizationResult = serde_json::from_str(&first).unwrap();
    assert!((r.best_value - 1.0).abs() < 1e-9);
    assert!((r.gap_to_conjecture - 0.5).abs() < 1e-9);

    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["command"], "optimize");
    assert_eq!(m["seed"], 1);
    ok_stdout(&selfdist(&args));
    assert_eq!(first, std::fs::read_to_string(&result).unwrap());
}

#[test]
fn optimize_requires_seed() {
    let out = selfdist(&["optimize", "--norm", &fx("linf2.json"), "--atoms", &fx("vertices2.json")]);
    assert_eq!(out.status.code(), Some(2));
}
