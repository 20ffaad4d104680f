//! Command-line front-end wiring ingest -> trace -> caraf -> cbom -> report.
//!
//! Exit codes are part of the contract: 0 success (warnings allowed),
//! 1 validation errors, 2 usage or parse failure. Never anything else.
//! Diagnostics go to standard error; artifacts go to standard output or the
//! requested file, so output can be piped.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::caraf::{compute_risk, prioritize, PlanItem};
use crate::cbom::{assemble, emit, import, EnvelopeOptions};
use crate::diag::Diagnostic;
use crate::ingest::{load_workspace, Workspace};
use crate::model::Money;
use crate::report::{
    render_asset_tables, render_caraf_sheet, render_impact, render_plan, render_risk_table,
    ReportFormat,
};
use crate::trace::{build_graph, query_impact, validate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "satam",
    version,
    about = "Turns a security-architecture workspace into a validated traceability graph and an annotated CBOM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the workspace against the full rule catalog
    Validate {
        /// Workspace directory
        workspace: PathBuf,
    },
    /// CBOM emission and import
    Cbom {
        #[command(subcommand)]
        action: CbomAction,
    },
    /// Print CARAF risk results, or one assessment sheet
    Risk {
        /// Workspace directory
        workspace: PathBuf,
        /// Print the full assessment sheet for one CARAF record
        #[arg(long, value_name = "ID")]
        caraf: Option<String>,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Rank mitigations by risk, optionally under a budget
    Prioritize {
        /// Workspace directory
        workspace: PathBuf,
        /// Select greedily by risk density within this budget
        #[arg(long, value_name = "N")]
        budget: Option<Money>,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Show everything a migration of one asset touches
    Impact {
        /// Workspace directory
        workspace: PathBuf,
        /// Asset id (the CBOM bom-ref)
        asset_id: String,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Render the asset inventory and migration-note tables
    Report {
        /// Workspace directory
        workspace: PathBuf,
        #[command(flatten)]
        format: FormatArg,
        /// Write to a file instead of standard output
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum CbomAction {
    /// Validate the workspace, then assemble and emit the CBOM
    Build {
        /// Workspace directory
        workspace: PathBuf,
        /// Output file for the CBOM document
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        /// Two-space indentation and a trailing newline
        #[arg(long)]
        pretty: bool,
        /// Override the envelope serial number
        #[arg(long, value_name = "URN")]
        serial: Option<String>,
        /// Override the envelope metadata timestamp
        #[arg(long, value_name = "RFC3339")]
        timestamp: Option<String>,
    },
    /// Parse a CBOM document and print the reconstructed asset skeletons
    Import {
        /// CBOM file to read
        file: PathBuf,
    },
}

#[derive(Debug, Args)]
struct FormatArg {
    /// Output format
    #[arg(long, value_enum, default_value_t = CliFormat::Md)]
    format: CliFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliFormat {
    Md,
    Plain,
}

impl From<CliFormat> for ReportFormat {
    fn from(f: CliFormat) -> Self {
        match f {
            CliFormat::Md => ReportFormat::Markdown,
            CliFormat::Plain => ReportFormat::Plain,
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };

    match cli.command {
        Command::Validate { workspace } => cmd_validate(&workspace),
        Command::Cbom { action } => match action {
            CbomAction::Build {
                workspace,
                output,
                pretty,
                serial,
                timestamp,
            } => cmd_cbom_build(&workspace, &output, pretty, serial, timestamp),
            CbomAction::Import { file } => cmd_cbom_import(&file),
        },
        Command::Risk {
            workspace,
            caraf,
            format,
        } => cmd_risk(&workspace, caraf.as_deref(), format.format.into()),
        Command::Prioritize {
            workspace,
            budget,
            format,
        } => cmd_prioritize(&workspace, budget, format.format.into()),
        Command::Impact {
            workspace,
            asset_id,
            format,
        } => cmd_impact(&workspace, &asset_id, format.format.into()),
        Command::Report {
            workspace,
            format,
            output,
        } => cmd_report(&workspace, format.format.into(), output.as_deref()),
    }
}

fn print_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}

/// Loads the workspace, mapping parse failure to exit 2.
fn load(workspace: &Path) -> Result<Workspace, i32> {
    load_workspace(workspace).map_err(|diags| {
        print_diagnostics(&diags);
        eprintln!(
            "{}: workspace failed to parse ({} problem(s))",
            workspace.display(),
            diags.len()
        );
        EXIT_USAGE
    })
}

/// Validates the graph for a command that needs a clean workspace. Warnings
/// are printed and tolerated; errors are printed and abort with exit 1.
fn require_valid(ws: &Workspace) -> Result<(), i32> {
    let graph = build_graph(ws);
    let diags = validate(&graph);
    print_diagnostics(&diags);
    if diags.iter().any(Diagnostic::is_error) {
        Err(EXIT_VALIDATION)
    } else {
        Ok(())
    }
}

fn cmd_validate(workspace: &Path) -> i32 {
    let ws = match load(workspace) {
        Ok(ws) => ws,
        Err(code) => return code,
    };
    let graph = build_graph(&ws);
    let diags = validate(&graph);
    print_diagnostics(&diags);
    let errors = diags.iter().filter(|d| d.is_error()).count();
    let warnings = diags.len() - errors;
    eprintln!("validation: {errors} error(s), {warnings} warning(s)");
    if errors > 0 {
        EXIT_VALIDATION
    } else {
        EXIT_OK
    }
}

fn cmd_cbom_build(
    workspace: &Path,
    output: &Path,
    pretty: bool,
    serial: Option<String>,
    timestamp: Option<String>,
) -> i32 {
    let ws = match load(workspace) {
        Ok(ws) => ws,
        Err(code) => return code,
    };
    let graph = build_graph(&ws);
    let mut envelope = EnvelopeOptions::default();
    if let Some(serial) = serial {
        envelope.serial_number = serial;
    }
    if let Some(timestamp) = timestamp {
        envelope.timestamp = timestamp;
    }
    let doc = match assemble(&graph, &envelope) {
        Ok(doc) => doc,
        Err(crate::cbom::AssembleError::ValidationFailed(diags)) => {
            print_diagnostics(&diags);
            eprintln!("cbom build refused: fix the validation errors first");
            return EXIT_VALIDATION;
        }
    };
    // Warnings still deserve a mention even though the build proceeds.
    let warnings: Vec<Diagnostic> = validate(&graph)
        .into_iter()
        .filter(|d| !d.is_error())
        .collect();
    print_diagnostics(&warnings);

    let bytes = emit(&doc, pretty);
    if let Err(e) = fs::write(output, &bytes) {
        eprintln!("cannot write {}: {e}", output.display());
        return EXIT_USAGE;
    }
    eprintln!(
        "wrote CBOM with {} component(s) to {}",
        doc.components.len(),
        output.display()
    );
    EXIT_OK
}

fn cmd_cbom_import(file: &Path) -> i32 {
    let bytes = match fs::read(file) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("cannot read {}: {e}", file.display());
            return EXIT_USAGE;
        }
    };
    let outcome = match import(&bytes) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("import failed: {e}");
            return EXIT_USAGE;
        }
    };
    println!(
        "CBOM {} (spec {}) with {} component(s)",
        outcome.document.serial_number,
        outcome.document.spec_version,
        outcome.document.components.len()
    );
    for skeleton in &outcome.skeletons {
        println!();
        match &skeleton.version {
            Some(v) => println!("{}: {} {}", skeleton.id, skeleton.name, v),
            None => println!("{}: {}", skeleton.id, skeleton.name),
        }
        if let Some(flow) = &skeleton.flow {
            println!("  flow: {flow}");
        }
        if !skeleton.termination.is_empty() {
            println!("  termination: {}", skeleton.termination.join(","));
        }
        if !skeleton.stride.is_empty() {
            println!(
                "  stride: {}",
                crate::model::join_stride_tags(&skeleton.stride)
            );
        }
        if !skeleton.qas_refs.is_empty() {
            println!(
                "  qas_refs: {}",
                skeleton
                    .qas_refs
                    .iter()
                    .map(|i| i.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            );
        }
        if !skeleton.adr_refs.is_empty() {
            println!(
                "  adr_refs: {}",
                skeleton
                    .adr_refs
                    .iter()
                    .map(|i| i.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            );
        }
    }
    EXIT_OK
}

fn cmd_risk(workspace: &Path, caraf: Option<&str>, format: ReportFormat) -> i32 {
    let ws = match load(workspace) {
        Ok(ws) => ws,
        Err(code) => return code,
    };
    if let Err(code) = require_valid(&ws) {
        return code;
    }
    let graph = build_graph(&ws);
    match caraf {
        Some(id) => {
            let Some(record) = ws.caraf.iter().find(|c| c.id.as_str() == id) else {
                eprintln!("unknown CARAF record id: {id}");
                return EXIT_USAGE;
            };
            let risk = compute_risk(record);
            print!("{}", render_caraf_sheet(&graph, record, &risk, format).body);
        }
        None => {
            let results: Vec<_> = ws.caraf.iter().map(compute_risk).collect();
            print!("{}", render_risk_table(&results, format).body);
        }
    }
    EXIT_OK
}

fn cmd_prioritize(workspace: &Path, budget: Option<Money>, format: ReportFormat) -> i32 {
    let ws = match load(workspace) {
        Ok(ws) => ws,
        Err(code) => return code,
    };
    if let Err(code) = require_valid(&ws) {
        return code;
    }
    let items: Vec<PlanItem> = ws
        .caraf
        .iter()
        .map(|record| PlanItem::new(compute_risk(record), record.mitigation_cost))
        .collect();
    let plan = match prioritize(items, budget) {
        Ok(plan) => plan,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    print!("{}", render_plan(&plan, format).body);
    EXIT_OK
}

fn cmd_impact(workspace: &Path, asset_id: &str, format: ReportFormat) -> i32 {
    let ws = match load(workspace) {
        Ok(ws) => ws,
        Err(code) => return code,
    };
    if let Err(code) = require_valid(&ws) {
        return code;
    }
    let graph = build_graph(&ws);
    let report = match query_impact(&graph, asset_id) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    print!("{}", render_impact(&report, format).body);
    EXIT_OK
}

fn cmd_report(workspace: &Path, format: ReportFormat, output: Option<&Path>) -> i32 {
    let ws = match load(workspace) {
        Ok(ws) => ws,
        Err(code) => return code,
    };
    if let Err(code) = require_valid(&ws) {
        return code;
    }
    let graph = build_graph(&ws);
    let rendered = render_asset_tables(&graph, format);
    match output {
        Some(path) => {
            if let Err(e) = fs::write(path, rendered.body.as_bytes()) {
                eprintln!("cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
            eprintln!("wrote report to {}", path.display());
        }
        None => print!("{}", rendered.body),
    }
    EXIT_OK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_subcommand_exits_2() {
        assert_eq!(run(["satam", "frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn missing_arguments_exit_2() {
        assert_eq!(run(["satam", "validate"]), EXIT_USAGE);
        assert_eq!(run(["satam"]), EXIT_USAGE);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run(["satam", "--help"]), EXIT_OK);
    }

    #[test]
    fn nonexistent_workspace_is_a_parse_failure() {
        assert_eq!(run(["satam", "validate", "/no/such/dir"]), EXIT_USAGE);
    }

    #[test]
    fn negative_budget_is_rejected() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/poc");
        // `--budget=-5` reaches the domain check; a bare `-5` would already
        // die in argument parsing.
        let code = run(["satam", "prioritize", dir.to_str().unwrap(), "--budget=-5"]);
        assert_eq!(code, EXIT_USAGE);
    }
}
