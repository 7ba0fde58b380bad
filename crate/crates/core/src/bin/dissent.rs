//! `dissent` command-line front end.
//!
//! Exit status: 0 on success, 1 on input or I/O errors, 2 when a produced or
//! supplied report breaks one of its invariants.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dissent::ingest::{join_responses, load_profiles, load_responses, write_interchange, SchemaConfig};
use dissent::report::validate_report;
use dissent::simulator::{containment_trial, simulated_critics, TrialSummary};
use dissent::{run_audit, AuditConfig, AuditInput, AuditReport, ScenarioSpec, SpMode, UndefinedCells};

#[derive(Parser)]
#[command(name = "dissent", version, about = "Group-fairness audits from agree/disagree feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit every critic and write a JSON report plus a flat CSV table.
    Audit(AuditArgs),
    /// Run seeded simulator trials and write a trial report.
    Simulate(SimulateArgs),
    /// Re-check the invariants of an audit report.
    Validate {
        report: PathBuf,
    },
    /// Join profiles and responses into the interchange format.
    Export {
        #[command(flatten)]
        files: FileInputs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw simulated critics from a scenario into the interchange format.
    Sample {
        scenario: PathBuf,
        #[arg(long, default_value_t = 10)]
        critics: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FileInputs {
    #[arg(long, requires_all = ["responses", "schema"])]
    profiles: Option<PathBuf>,
    #[arg(long)]
    responses: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    files: FileInputs,
    /// Pre-joined interchange file instead of profiles/responses/schema.
    #[arg(long, conflicts_with_all = ["profiles", "responses", "schema"])]
    interchange: Option<PathBuf>,
    /// Label space size for interchange input (default: largest label + 1).
    #[arg(long, requires = "interchange")]
    labels: Option<usize>,
    /// Group count for interchange input (default: largest group + 1).
    #[arg(long, requires = "interchange")]
    groups: Option<usize>,
    #[arg(long, value_enum, default_value_t = SpModeArg::PerCritic)]
    sp_mode: SpModeArg,
    /// Overrides the schema's decile threshold (binarized schemas only).
    #[arg(long)]
    binarize_threshold: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    smoothing_alpha: f64,
    #[arg(long, value_enum, default_value_t = UndefinedArg::Drop)]
    undefined_cells: UndefinedArg,
    /// Report path (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Flat table path; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    scenario: PathBuf,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Overrides the scenario's base seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpModeArg {
    PerCritic,
    Pooled,
}

#[derive(Clone, Copy, ValueEnum)]
enum UndefinedArg {
    Drop,
    Zero,
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<dissent::Error> for Failure {
    fn from(e: dissent::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Audit(args) => audit(args),
        Command::Simulate(args) => simulate(args),
        Command::Validate { report } => validate(&report),
        Command::Export { files, out } => export(files, &out),
        Command::Sample {
            scenario,
            critics,
            seed,
            out,
        } => sample(&scenario, critics, seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(2)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_schema(files: &FileInputs, threshold: Option<f64>) -> Result<SchemaConfig, Failure> {
    let path = files
        .schema
        .as_deref()
        .ok_or_else(|| Failure::Input("--schema is required".into()))?;
    let mut schema = SchemaConfig::load(path)?;
    if let Some(t) = threshold {
        schema.profiles.binarize_threshold = Some(t);
        schema
            .check()
            .map_err(|m| Failure::Input(format!("--binarize-threshold: {m}")))?;
    }
    Ok(schema)
}

fn file_input(files: &FileInputs, threshold: Option<f64>) -> Result<AuditInput, Failure> {
    let (Some(profiles), Some(responses)) = (&files.profiles, &files.responses) else {
        return Err(Failure::Input(
            "give --profiles, --responses and --schema, or --interchange".into(),
        ));
    };
    let schema = load_schema(files, threshold)?;
    Ok(AuditInput::from_files(profiles, responses, &schema)?)
}

fn audit(args: AuditArgs) -> Result<(), Failure> {
    let input = match &args.interchange {
        Some(path) => {
            if args.binarize_threshold.is_some() {
                return Err(Failure::Input(
                    "--binarize-threshold has no effect on interchange input".into(),
                ));
            }
            AuditInput::from_interchange(path, args.labels, args.groups)?
        }
        None => file_input(&args.files, args.binarize_threshold)?,
    };
    let config = AuditConfig {
        sp_mode: match args.sp_mode {
            SpModeArg::PerCritic => SpMode::PerCritic,
            SpModeArg::Pooled => SpMode::Pooled,
        },
        smoothing_alpha: args.smoothing_alpha,
        undefined_cells: match args.undefined_cells {
            UndefinedArg::Drop => UndefinedCells::Drop,
            UndefinedArg::Zero => UndefinedCells::Zero,
        },
    };
    let report = run_audit(&input, &config)?;

    let mut out = create(&args.out)?;
    out.write_all(report.to_json().as_bytes())?;
    out.flush()?;
    let table = args.table.unwrap_or_else(|| args.out.with_extension("csv"));
    report.write_flat_table(create(&table)?)?;

    for a in &report.aggregate {
        if a.error.count > 0 {
            eprintln!(
                "{:>3}  mean error {:.4} (min {:.4}, max {:.4})  mean estimate {:.4}",
                a.kind.code(),
                a.error.mean,
                a.error.min,
                a.error.max,
                a.estimate.mean
            );
        }
    }
    eprintln!(
        "{} critics -> {} and {}",
        report.critics.len(),
        args.out.display(),
        table.display()
    );
    check_report(&report)
}

fn check_report(report: &AuditReport) -> Result<(), Failure> {
    let v = validate_report(report);
    for x in &v.violations {
        match &x.critic_id {
            Some(id) => eprintln!("critic {id}: {}", x.message),
            None => eprintln!("report: {}", x.message),
        }
    }
    if v.passed() {
        eprintln!("PASS: {} critics checked", v.critics_checked);
        Ok(())
    } else {
        Err(Failure::Invariant(format!(
            "{} violation(s) across {} critics",
            v.violations.len(),
            v.critics_checked
        )))
    }
}

fn validate(path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let report = AuditReport::from_json(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    check_report(&report)
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut spec = ScenarioSpec::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        spec = spec.with_seed(seed);
    }
    let summary = containment_trial(&spec, args.trials)?;
    let mut out = create(&args.out)?;
    serde_json::to_writer_pretty(&mut out, &summary).map_err(|e| Failure::Input(e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    print_trials(&summary);

    let broken = summary.containment_violations()
        + summary.midpoint_violations()
        + summary.complement_violations;
    if broken > 0 {
        return Err(Failure::Invariant(format!(
            "{broken} violation(s) in {} trials, see {}",
            summary.trials,
            args.out.display()
        )));
    }
    Ok(())
}

fn print_trials(s: &TrialSummary) {
    eprintln!(
        "{}: {} trials, base seed {}, {} complement violations",
        s.scenario, s.trials, s.base_seed, s.complement_violations
    );
    for n in &s.indefinite {
        eprintln!(
            "{:>3}  containment {}/{} violated  midpoint {} violated  mean error {:.4}",
            n.kind.code(),
            n.containment_violations,
            n.cells_checked,
            n.midpoint_violations,
            n.error.mean
        );
    }
}

fn export(files: FileInputs, out: &Path) -> Result<(), Failure> {
    let (Some(profiles), Some(responses)) = (&files.profiles, &files.responses) else {
        return Err(Failure::Input("give --profiles, --responses and --schema".into()));
    };
    let schema = load_schema(&files, None)?;
    let set = load_profiles(profiles, &schema)?;
    let critics = join_responses(&set, &load_responses(responses, &schema)?)?;
    write_interchange(create(out)?, &critics)?;
    eprintln!("{} critics -> {}", critics.len(), out.display());
    Ok(())
}

fn sample(scenario: &Path, critics: usize, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let mut spec = ScenarioSpec::load(scenario)?;
    if let Some(seed) = seed {
        spec = spec.with_seed(seed);
    }
    let critics = simulated_critics(&spec, critics)?;
    write_interchange(create(out)?, &critics)?;
    eprintln!("{} critics -> {}", critics.len(), out.display());
    Ok(())
}
