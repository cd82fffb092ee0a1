use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use soundscape_eval::circumplex::AxisKind;
use soundscape_eval::dataset::{thai_candidates, THAI_CANDIDATES_CSV};
use soundscape_eval::ingest::{participants_to_csv, responses_to_csv};
use soundscape_eval::pipeline::{analyze, Artifact, ErrorKind, PipelineError, RunConfig};
use soundscape_eval::questionnaire::{
    export_questionnaire, generate_items, parse_candidates, CandidateTranslation, ExportFormat,
};
use soundscape_eval::report::OutputFormat;
use soundscape_eval::scoring::MissingDataPolicy;
use soundscape_eval::synthetic;

#[derive(Parser)]
#[command(
    name = "soundscape-eval",
    version,
    about = "Evaluate translated soundscape attribute candidates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the evaluation questionnaire from a candidate set.
    Generate(GenerateArgs),
    /// Score responses, run the tests and write every report.
    Analyze(AnalyzeArgs),
    /// Check inputs and report problems without writing anything.
    Validate(InputArgs),
    /// Print the bundled Thai candidate set as CSV.
    Candidates,
    /// Write seeded synthetic responses and participant profiles.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct CandidateArgs {
    /// Candidates CSV (`id,attribute,local_text,transliteration,notes`);
    /// the bundled Thai set when omitted.
    #[arg(long, value_name = "FILE")]
    candidates: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    input: CandidateArgs,
    /// Name of the local language used in prompts (default for the bundled set: Thai).
    #[arg(long)]
    language: Option<String>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Shuffle item order with this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    #[command(flatten)]
    candidates: CandidateArgs,
    /// Responses (`participant_id,item_id,rating`), CSV or JSON.
    #[arg(long, value_name = "FILE")]
    responses: PathBuf,
    /// Participant profiles (`participant_id,ilr_local,ilr_english,years_abroad_bucket`).
    #[arg(long, value_name = "FILE")]
    participants: Option<PathBuf>,
    /// TOML run configuration; flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "ALPHA")]
    alpha_gate: Option<f64>,
    #[arg(long, value_name = "ALPHA")]
    alpha_strong: Option<f64>,
    /// Weight contributions by ILR proficiency (needs --participants).
    #[arg(long)]
    weighted: bool,
    /// complete-case or pairwise.
    #[arg(long)]
    policy: Option<MissingDataPolicy>,
    #[arg(long)]
    seed: Option<u64>,
    /// text, csv or json.
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Use `o` and `+` instead of unicode marker glyphs.
    #[arg(long)]
    ascii_markers: bool,
    /// Flag participants whose item coverage falls below this fraction.
    #[arg(long, value_name = "FRACTION")]
    completeness_threshold: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_name = "DIR", default_value = "results")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: CandidateArgs,
    #[arg(long, default_value_t = 31)]
    participants: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

/// Failure carrying its exit-code class.
#[derive(Debug)]
struct Failure {
    kind: ErrorKind,
    message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn fail(kind: ErrorKind, message: impl Into<String>) -> anyhow::Error {
    Failure {
        kind,
        message: message.into(),
    }
    .into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        fail(
            ErrorKind::Io,
            format!("cannot read {}: {e}", path.display()),
        )
    })
}

fn load_candidates(args: &CandidateArgs) -> Result<(Vec<CandidateTranslation>, bool)> {
    match &args.candidates {
        None => Ok((thai_candidates(), true)),
        Some(path) => Ok((parse_candidates(&read(path)?)?, false)),
    }
}

fn classify(err: &anyhow::Error) -> ErrorKind {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return f.kind;
    }
    if let Some(p) = err.downcast_ref::<PipelineError>() {
        return p.kind();
    }
    if err.chain().any(|e| e.is::<std::io::Error>()) {
        return ErrorKind::Io;
    }
    ErrorKind::Validation
}

fn run_config(args: &InputArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => toml::from_str::<RunConfig>(&read(path)?).map_err(|e| {
            fail(
                ErrorKind::Validation,
                format!("{}: {}", path.display(), e.message()),
            )
        })?,
        None => RunConfig::default(),
    };
    if let Some(a) = args.alpha_gate {
        cfg.alpha_posthoc_gate = a;
    }
    if let Some(a) = args.alpha_strong {
        cfg.alpha_strong = a;
    }
    if args.weighted {
        cfg.weighted = true;
    }
    if let Some(p) = args.policy {
        cfg.completeness_policy = p;
    }
    if args.seed.is_some() {
        cfg.shuffle_seed = args.seed;
    }
    if let Some(f) = args.format {
        cfg.output_format = f;
    }
    if args.ascii_markers {
        cfg.ascii_markers = true;
    }
    if let Some(t) = args.completeness_threshold {
        cfg.completeness_threshold = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let (candidates, bundled) = load_candidates(&args.input)?;
    let language = match (&args.language, bundled) {
        (Some(l), _) => l.clone(),
        (None, true) => "Thai".to_string(),
        (None, false) => {
            return Err(fail(
                ErrorKind::Validation,
                "--language is required with --candidates",
            ))
        }
    };
    let format: ExportFormat = args.format.parse()?;
    let items = generate_items(&candidates, &language)?;
    let doc = export_questionnaire(&items, format, args.seed)?;
    let main = items
        .iter()
        .filter(|i| i.source_attribute.axis_kind() == AxisKind::Main)
        .count();
    let summary = format!(
        "{} items ({main} main-axis, {} derived-axis)",
        items.len(),
        items.len() - main
    );
    match &args.out {
        Some(path) => {
            fs::write(path, doc).map_err(|e| {
                fail(
                    ErrorKind::Io,
                    format!("cannot write {}: {e}", path.display()),
                )
            })?;
            println!("{summary}");
        }
        None => {
            std::io::stdout().write_all(doc.as_bytes())?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn load_inputs(
    args: &InputArgs,
) -> Result<(Vec<CandidateTranslation>, String, Option<String>, RunConfig)> {
    let config = run_config(args)?;
    let (candidates, _) = load_candidates(&args.candidates)?;
    let responses = read(&args.responses)?;
    let participants = args.participants.as_deref().map(read).transpose()?;
    Ok((candidates, responses, participants, config))
}

/// Writes all artifacts or none: files written before a failure are removed,
/// as is the directory when this call created it.
fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    let created = !dir.exists();
    let io = |e: std::io::Error, what: &Path| {
        fail(
            ErrorKind::Io,
            format!("cannot write {}: {e}", what.display()),
        )
    };
    fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let mut written = Vec::new();
    for a in artifacts {
        let path = dir.join(&a.file_name);
        if let Err(e) = fs::write(&path, &a.contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            if created {
                let _ = fs::remove_dir_all(dir);
            }
            return Err(io(e, &path));
        }
        written.push(path);
    }
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let (candidates, responses, participants, config) = load_inputs(&args.input)?;
    let analysis = analyze(&candidates, &responses, participants.as_deref(), &config)?;
    let mut artifacts = analysis.artifacts()?;
    artifacts.push(Artifact {
        file_name: "run_config.toml".into(),
        contents: toml::to_string(&config).context("serializing run configuration")?,
    });
    write_artifacts(&args.out_dir, &artifacts)?;

    for line in analysis.summary_lines() {
        println!("{line}");
    }
    let flagged = analysis.flagged_participants();
    if !flagged.is_empty() {
        println!("incomplete participants: {}", flagged.join(", "));
    }
    println!(
        "wrote {} files to {}",
        artifacts.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_validate(args: &InputArgs) -> Result<()> {
    let (candidates, responses, participants, config) = load_inputs(args)?;
    match analyze(&candidates, &responses, participants.as_deref(), &config) {
        Ok(a) => {
            println!(
                "ok: {} candidates, {} items, {} responses, {} participants",
                a.candidates.len(),
                a.items.len(),
                a.records.len(),
                a.completeness.participants.len()
            );
            for p in a.completeness.flagged() {
                println!(
                    "incomplete: {} answered {}/{}",
                    p.participant_id, p.answered, p.total
                );
            }
            Ok(())
        }
        Err(PipelineError::RejectedRows { input, errors }) => {
            for e in &errors {
                eprintln!("{input}: {e}");
            }
            Err(PipelineError::RejectedRows { input, errors }.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let (candidates, _) = load_candidates(&args.input)?;
    let items = generate_items(&candidates, "local")?;
    let ids = synthetic::participant_ids(args.participants);
    let artifacts = [
        Artifact {
            file_name: "responses.csv".into(),
            contents: responses_to_csv(&synthetic::random_responses(
                &items,
                args.participants,
                args.seed,
            )),
        },
        Artifact {
            file_name: "participants.csv".into(),
            contents: participants_to_csv(&synthetic::random_profiles(&ids, args.seed)),
        },
    ];
    write_artifacts(&args.out_dir, &artifacts)?;
    println!(
        "wrote {} participants x {} items to {}",
        args.participants,
        items.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Candidates => {
            print!("{THAI_CANDIDATES_CSV}");
            Ok(())
        }
        Command::Simulate(a) => cmd_simulate(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return ExitCode::from(ErrorKind::Validation.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = classify(&err);
            let line = format!("{err:#}").replace(['\n', '\r'], " ");
            eprintln!("error[{}]: {line}", kind.tag());
            ExitCode::from(kind.exit_code() as u8)
        }
    }
}
