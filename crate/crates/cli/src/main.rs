//! `lesionkit`: run the lesion modeling pipeline from the command line.
//!
//! Exit status is 0 on success, 1 when inputs fail validation and 2 on
//! runtime failures. Errors are written to stderr as one JSON object per line.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lesionkit::io::*;
use lesionkit::model::lexicon::{Cohort, Lexicon};
use lesionkit::model::paper_fixture_nomogram;
use lesionkit::pipeline::{comparison_table, run_until, PipelineFailure, RunArtifacts, Stage};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lesionkit", version, about = "Lesion morphometry, feature selection, nomograms and ROC evaluation")]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "lesionkit-out")]
    out_dir: PathBuf,
    /// Restricts the run to one task.
    #[arg(long, global = true, value_parser = ["biopsy", "malignancy"])]
    task: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Inputs {
    /// Reading records (CSV with header).
    #[arg(long)]
    records: PathBuf,
    /// Lesion outlines (one JSON object per line).
    #[arg(long)]
    contours: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Compute morphometric features for every outline.
    Extract(Inputs),
    /// Run the ICC, collinearity and LASSO selection steps.
    Select(Inputs),
    /// Fit descriptor, morphometric and fused models and their nomograms.
    Fit(Inputs),
    /// Evaluate all methods per partition and pooled.
    Evaluate(Inputs),
    /// Pairwise DeLong comparisons of all methods.
    Compare(Inputs),
    /// Write nomogram documents; from a cohort, or the published-odds fixtures.
    Export {
        #[command(flatten)]
        inputs: Option<Inputs>,
        /// Export the fixtures built from published odds ratios.
        #[arg(long, conflicts_with_all = ["records", "contours"])]
        fixtures: bool,
        /// Intercept for the fixtures; without it they are relative-risk only.
        #[arg(long, requires = "fixtures", allow_hyphen_values = true)]
        intercept: Option<f64>,
    },
    /// Serve nomogram documents over HTTP.
    Serve {
        #[arg(long, env = "LESIONKIT_ARTIFACTS")]
        artifacts: PathBuf,
        #[arg(long, env = "LESIONKIT_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "LESIONKIT_HOST", default_value = "127.0.0.1")]
        host: String,
    },
    /// Write a synthetic cohort (records.csv, contours.jsonl) to the output directory.
    Synth {
        #[arg(long, default_value_t = 400)]
        train: usize,
        #[arg(long, default_value_t = 150)]
        internal: usize,
        #[arg(long, default_value_t = 100)]
        external: usize,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    details: Vec<Value>,
}

impl Failure {
    fn validation(kind: &'static str, message: impl ToString) -> Self {
        Self { code: 1, kind, message: message.to_string(), details: vec![] }
    }

    fn runtime(kind: &'static str, message: impl ToString) -> Self {
        Self { code: 2, kind, message: message.to_string(), details: vec![] }
    }
}

fn config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut c = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::validation("config", format!("{}: {e}", p.display())))?;
            PipelineConfig::parse(&text).map_err(|e| Failure::validation("config", e))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(t) = &cli.task {
        c.set("task", t).map_err(|e| Failure::validation("config", e))?;
    }
    c.validate().map_err(|e| Failure::validation("config", e))?;
    Ok(c)
}

fn load(inputs: &Inputs) -> Result<CohortDataset, Failure> {
    load_cohort(&inputs.records, &inputs.contours).map_err(|e| {
        let kind = match e {
            CohortError::Parse { .. } => "parse",
            CohortError::SchemaViolation(_) => "schema_violation",
            CohortError::JoinError(_) => "join",
        };
        let details = e.report().map(|r| r.rejected.iter().map(|x| serde_json::to_value(x).expect("serializable")).collect()).unwrap_or_default();
        Failure { code: 1, kind, message: e.to_string(), details }
    })
}

fn write_run(run: &RunArtifacts, out: &Path) -> Result<(), Failure> {
    run.write_to(out).map_err(|e| Failure::runtime("io", format!("{}: {e}", out.display())))
}

fn pipeline(cli: &Cli, inputs: &Inputs, stage: Stage) -> Result<RunArtifacts, Failure> {
    let cfg = config(cli)?;
    let ds = load(inputs)?;
    match run_until(&ds, &cfg, stage) {
        Ok(run) => {
            write_run(&run, &cli.out_dir)?;
            Ok(run)
        }
        Err(PipelineFailure { stage, message, artifacts }) => {
            write_run(&artifacts, &cli.out_dir)?;
            Err(Failure { code: 2, kind: "pipeline", message: format!("{stage}: {message}"), details: vec![json!({ "manifest": cli.out_dir.join("manifest.json") })] })
        }
    }
}

fn summary(run: &RunArtifacts) -> Value {
    json!({
        "config_hash": run.manifest.config_hash,
        "seed": run.manifest.seed,
        "completed": run.manifest.completed,
        "files": run.manifest.files.keys().collect::<Vec<_>>(),
    })
}

fn execute(cli: &Cli) -> Result<Value, Failure> {
    match &cli.command {
        Command::Extract(i) => pipeline(cli, i, Stage::Extract).map(|r| summary(&r)),
        Command::Select(i) => pipeline(cli, i, Stage::Select).map(|r| {
            let sel: Vec<Value> = r.tasks.iter().map(|t| json!({ "task": t.task, "selected": t.selection.as_ref().map(|s| &s.selected) })).collect();
            json!({ "run": summary(&r), "selected": sel })
        }),
        Command::Fit(i) => pipeline(cli, i, Stage::Fit).map(|r| summary(&r)),
        Command::Evaluate(i) => pipeline(cli, i, Stage::Evaluate).map(|r| {
            let aucs: Vec<Value> = r
                .tasks
                .iter()
                .flat_map(|t| t.evaluation.iter().map(move |e| (t.task, e)))
                .map(|(task, e)| json!({ "task": task, "partition": e.partition, "auc": e.rows.iter().map(|m| (m.method.clone(), m.auc)).collect::<Vec<_>>() }))
                .collect();
            json!({ "run": summary(&r), "auc": aucs })
        }),
        Command::Compare(i) => {
            let r = pipeline(cli, i, Stage::Evaluate)?;
            let tables: Vec<Value> = r
                .tasks
                .iter()
                .map(|t| json!({ "task": t.task, "comparisons": t.evaluation.iter().map(comparison_table).collect::<Vec<_>>() }))
                .collect();
            let path = cli.out_dir.join("comparisons.json");
            let mut bytes = serde_json::to_vec_pretty(&tables).expect("serializable");
            bytes.push(b'\n');
            std::fs::write(&path, bytes).map_err(|e| Failure::runtime("io", format!("{}: {e}", path.display())))?;
            Ok(json!({ "run": summary(&r), "comparisons": path }))
        }
        Command::Export { inputs, fixtures, intercept } => {
            let dir = cli.out_dir.join("nomograms");
            std::fs::create_dir_all(&dir).map_err(|e| Failure::runtime("io", format!("{}: {e}", dir.display())))?;
            let nomograms = if *fixtures {
                let tasks = config(cli)?.tasks();
                tasks.into_iter().map(|t| paper_fixture_nomogram(t, *intercept)).collect()
            } else {
                let Some(i) = inputs else {
                    return Err(Failure::validation("usage", "export needs --records and --contours, or --fixtures"));
                };
                pipeline(cli, i, Stage::Fit)?.tasks.into_iter().flat_map(|t| t.nomograms).collect::<Vec<_>>()
            };
            let mut written = Vec::new();
            for n in &nomograms {
                let path = dir.join(format!("{}.json", n.id));
                write_nomogram(n, &path).map_err(|e| Failure::runtime("io", e))?;
                written.push(path);
            }
            Ok(json!({ "nomograms": written }))
        }
        Command::Serve { artifacts, port, host } => {
            let reg = lesionkit_service::Registry::load_dir(artifacts).map_err(|e| Failure::validation("artifacts", e))?;
            let addr: SocketAddr = format!("{host}:{port}").parse().map_err(|e| Failure::validation("usage", format!("address {host}:{port}: {e}")))?;
            eprintln!("{}", json!({ "serving": reg.ids(), "address": addr.to_string() }));
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::runtime("runtime", e))?;
            rt.block_on(lesionkit_service::serve(reg, addr)).map_err(|e| Failure::runtime("server", e))?;
            Ok(Value::Null)
        }
        Command::Synth { train, internal, external } => {
            let cfg = config(cli)?;
            let spec = SyntheticSpec {
                seed: cfg.seed,
                cohorts: vec![(Cohort::Train, *train), (Cohort::Internal, *internal), (Cohort::External1, *external), (Cohort::External2, *external)],
                ..Default::default()
            };
            let ds = synthetic_cohort(&spec);
            let out = &cli.out_dir;
            std::fs::create_dir_all(out).map_err(|e| Failure::runtime("io", format!("{}: {e}", out.display())))?;
            let (r, c) = (out.join("records.csv"), out.join("contours.jsonl"));
            std::fs::write(&r, records_to_csv(&ds.records)).map_err(|e| Failure::runtime("io", e))?;
            std::fs::write(&c, contours_to_jsonl(&ds.contours)).map_err(|e| Failure::runtime("io", e))?;
            let counts: Vec<Value> = spec.cohorts.iter().map(|(k, n)| json!([k.token(), n])).collect();
            Ok(json!({ "records": r, "contours": c, "cohorts": counts }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Value::Null) => ExitCode::SUCCESS,
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message, "details": f.details }));
            ExitCode::from(f.code)
        }
    }
}
