//! End-to-end checks of the command-line contract: exit codes, stream
//! separation (diagnostics on stderr, artifacts on stdout), and the
//! documented command behaviors.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use satam::ingest::{load_workspace, save_workspace};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/poc")
}

fn satam_cmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn validate_clean_fixture_exits_0_with_empty_stdout() {
    let out = satam_cmd(&["validate", fixture_dir().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty(), "diagnostics belong on stderr");
    assert!(stderr(&out).contains("0 error(s), 0 warning(s)"));
}

#[test]
fn validate_workspace_with_errors_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut ws = load_workspace(&fixture_dir()).unwrap();
    ws.adrs.retain(|a| a.id.as_str() != "ADR-DB-1");
    save_workspace(&ws, dir.path()).unwrap();

    let out = satam_cmd(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[R2]"));
}

#[test]
fn validate_with_warnings_only_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let mut ws = load_workspace(&fixture_dir()).unwrap();
    ws.assets[3].caraf_refs.clear();
    save_workspace(&ws, dir.path()).unwrap();

    let out = satam_cmd(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning[W1]"));
    assert!(stderr(&out).contains("migration metadata absent"));

    // Warnings do not block the CBOM build either.
    let cbom = dir.path().join("out.json");
    let out = satam_cmd(&[
        "cbom",
        "build",
        dir.path().to_str().unwrap(),
        "-o",
        cbom.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(cbom.exists());
}

#[test]
fn unparseable_workspace_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = satam_cmd(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error[P1]"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(satam_cmd(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        satam_cmd(&["report", fixture_dir().to_str().unwrap(), "--format", "xml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(satam_cmd(&[]).status.code(), Some(2));
}

#[test]
fn impact_names_the_flow_and_the_adr() {
    let out = satam_cmd(&["impact", fixture_dir().to_str().unwrap(), "CBOM-DB-TLS-1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("BackendService->Database"));
    assert!(text.contains("ADR-DB-1"));
}

#[test]
fn impact_on_unknown_asset_exits_2() {
    let out = satam_cmd(&["impact", fixture_dir().to_str().unwrap(), "CBOM-NOPE-9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown asset id"));
}

#[test]
fn cbom_import_prints_reconstructed_skeletons() {
    let dir = tempfile::tempdir().unwrap();
    let cbom = dir.path().join("out.json");
    let built = satam_cmd(&[
        "cbom",
        "build",
        fixture_dir().to_str().unwrap(),
        "-o",
        cbom.to_str().unwrap(),
        "--pretty",
    ]);
    assert_eq!(built.status.code(), Some(0));

    let out = satam_cmd(&["cbom", "import", cbom.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("CBOM-DB-TLS-1: TLS 1.3"));
    assert!(text.contains("stride: T,I,E"));
    assert!(text.contains("qas_refs: QAS-DB-1"));
    assert!(text.contains("4 component(s)"));
}

#[test]
fn cbom_import_of_garbage_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.json");
    std::fs::write(&path, "{oops").unwrap();
    let out = satam_cmd(&["cbom", "import", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("import failed"));
}

#[test]
fn cbom_build_envelope_overrides_land_in_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let cbom = dir.path().join("out.json");
    let out = satam_cmd(&[
        "cbom",
        "build",
        fixture_dir().to_str().unwrap(),
        "-o",
        cbom.to_str().unwrap(),
        "--serial",
        "urn:uuid:11111111-2222-3333-4444-555555555555",
        "--timestamp",
        "2026-08-10T00:00:00Z",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&cbom).unwrap();
    assert!(text.contains("urn:uuid:11111111-2222-3333-4444-555555555555"));
    assert!(text.contains("2026-08-10T00:00:00Z"));
}

#[test]
fn report_writes_markdown_to_stdout() {
    let out = satam_cmd(&["report", fixture_dir().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("# Crypto asset inventory"));
    assert!(out.stderr.is_empty());
}

#[test]
fn risk_table_and_sheet_reach_stdout() {
    let fix = fixture_dir();
    let out = satam_cmd(&["risk", fix.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("CARAF-DB-1"));

    let out = satam_cmd(&["risk", fix.to_str().unwrap(), "--caraf", "CARAF-STOR-1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("action required (harvest now, decrypt later)"));

    let out = satam_cmd(&["risk", fix.to_str().unwrap(), "--caraf", "CARAF-NOPE"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prioritize_reports_selection_and_residual_risk() {
    let out = satam_cmd(&[
        "prioritize",
        fixture_dir().to_str().unwrap(),
        "--budget",
        "300000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Selected (greedy by risk density):"));
    assert!(text.contains("CARAF-DB-1"));
    assert!(text.contains("Total spent: 250000 cost-units of 300000 cost-units"));
    assert!(text.contains("Residual risk: 3000000 cost-units"));
}
