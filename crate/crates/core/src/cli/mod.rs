//! Command-line front end.
//!
//! ```text
//! cnnga run --config run.json [--seed N] [--workers N] [--evaluator surrogate|external]
//!           [--out-dir DIR] [--stop-after GEN] [--resume CHECKPOINT]
//! cnnga resume CHECKPOINT [--workers N] [--out-dir DIR]
//! cnnga decode GENOME [--input 32x32x3] [--classes 10]
//! cnnga echo-worker [--listen HOST:PORT]
//! ```
//!
//! A run writes `history.csv`, `timings.csv`, `best.genome`,
//! `best.arch.json`, `checkpoint.json` and the fitness cache into the output
//! directory. The checkpoint and cache are refreshed after every generation.
//! Failures print one JSON line on stderr, e.g.
//! `{"error":"config","field":"p_crossover","message":"..."}`.

mod config_file;

use std::fs;
use std::io::{self, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde_json::json;

pub use config_file::RunConfigFile;

use crate::arch::{count_parameters, decode, InputShape};
use crate::engine::{Checkpoint, Engine, FitnessCache};
use crate::error::{Error, Result};
use crate::evaluators::{worker, Evaluator, EvaluatorKind};
use crate::fsutil::write_atomic;
use crate::genome::Genome;

#[derive(Debug, Parser)]
#[command(name = "cnnga", version, about = "Evolve CNN architectures from skip and pooling layers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a search from a JSON config.
    Run(RunArgs),
    /// Continue a search from its checkpoint.
    Resume(ResumeArgs),
    /// Print the architecture and parameter count of a genome.
    Decode(DecodeArgs),
    /// Serve the line protocol with surrogate fitness (test double for a trainer).
    EchoWorker(EchoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvaluatorChoice {
    Surrogate,
    External,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides `rng_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `worker_count`.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides `evaluator.kind`.
    #[arg(long, value_enum)]
    pub evaluator: Option<EvaluatorChoice>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Stop (with a checkpoint) once this generation has been recorded.
    #[arg(long)]
    pub stop_after: Option<u64>,
    /// Resume from this checkpoint instead of starting fresh.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ResumeArgs {
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Defaults to the checkpoint's directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub stop_after: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    pub genome: String,
    /// HEIGHTxWIDTHxCHANNELS
    #[arg(long, default_value = "32x32x3", value_parser = parse_input_shape)]
    pub input: InputShape,
    #[arg(long, default_value_t = 10)]
    pub classes: u32,
}

#[derive(Debug, Clone, Args)]
pub struct EchoArgs {
    /// Listen on HOST:PORT instead of serving stdin/stdout.
    #[arg(long)]
    pub listen: Option<String>,
}

pub fn parse_input_shape(text: &str) -> std::result::Result<InputShape, String> {
    let dims: Vec<&str> = text.split('x').collect();
    let parsed: Option<Vec<u32>> = dims.iter().map(|d| d.trim().parse().ok().filter(|&v| v > 0)).collect();
    match parsed.as_deref() {
        Some([h, w, c]) => Ok(InputShape::new(*h, *w, *c)),
        _ => Err(format!("expected HEIGHTxWIDTHxCHANNELS with positive integers, got `{text}`")),
    }
}

/// Summary of a `run` or `resume` invocation.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub completed: bool,
    pub generations_recorded: usize,
    pub best: Option<(Genome, f64)>,
    pub message: String,
}

pub fn cmd_run(args: &RunArgs) -> Result<RunReport> {
    if let Some(checkpoint) = &args.resume {
        return cmd_resume(&ResumeArgs {
            checkpoint: checkpoint.clone(),
            workers: args.workers,
            out_dir: args.out_dir.clone(),
            stop_after: args.stop_after,
        });
    }
    let mut config = match &args.config {
        Some(path) => RunConfigFile::load(path)?,
        None => RunConfigFile::default(),
    };
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    if let Some(workers) = args.workers {
        config.worker_count = workers;
    }
    if let Some(choice) = args.evaluator {
        config.evaluator.kind = match choice {
            EvaluatorChoice::Surrogate => EvaluatorKind::Surrogate,
            EvaluatorChoice::External => EvaluatorKind::External,
        };
    }
    if let Some(dir) = &args.out_dir {
        config.out_dir = dir.clone();
        if config.cache_path.is_none() {
            config.cache_path = Some(dir.join("fitness.cache"));
        }
    }
    config.validate()?;

    let out_dir = config.out_dir.clone();
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let cache_path = config.cache_path();
    let cache = FitnessCache::load_or_empty(&cache_path)?;
    let evaluator = config.evaluator.build()?;
    let engine = Engine::new(config.evolution(), config.evaluation(), evaluator, cache)?
        .with_cache_path(cache_path)
        .with_evaluator_spec(config.evaluator.clone());
    drive(engine, &out_dir, args.stop_after)
}

pub fn cmd_resume(args: &ResumeArgs) -> Result<RunReport> {
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let out_dir = match &args.out_dir {
        Some(dir) => dir.clone(),
        None => args
            .checkpoint
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    if checkpoint.is_finished() {
        let message = format!(
            "run in {} already completed at generation {}; nothing to do",
            args.checkpoint.display(),
            checkpoint.generation
        );
        let best = checkpoint.population.best().and_then(|b| b.fitness().map(|f| (b.genome().clone(), f)));
        return Ok(RunReport {
            out_dir,
            completed: true,
            generations_recorded: checkpoint.history.len(),
            best,
            message,
        });
    }
    let spec = checkpoint.evaluator.clone().unwrap_or_default();
    let mut checkpoint = checkpoint;
    if let Some(workers) = args.workers {
        checkpoint.settings.worker_count = workers;
    }
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let engine = Engine::resume(checkpoint, spec.build()?)?.with_evaluator_spec(spec);
    drive(engine, &out_dir, args.stop_after)
}

fn drive<E: Evaluator>(mut engine: Engine<E>, out_dir: &Path, stop_after: Option<u64>) -> Result<RunReport> {
    let checkpoint_path = out_dir.join("checkpoint.json");
    loop {
        if let Some(limit) = stop_after {
            if engine.history().len() as u64 > limit {
                break;
            }
        }
        match engine.step() {
            Ok(true) => {
                engine.save(&checkpoint_path)?;
                write_history(&engine, out_dir)?;
            }
            Ok(false) => break,
            Err(e) => {
                warn!("aborting: {e}; writing checkpoint first");
                engine.save(&checkpoint_path)?;
                write_history(&engine, out_dir)?;
                return Err(e);
            }
        }
    }
    engine.save(&checkpoint_path)?;
    write_history(&engine, out_dir)?;
    let completed = engine.is_finished();
    let best = engine.best().and_then(|b| b.fitness().map(|f| (b.genome().clone(), f)));
    if let Some((genome, _)) = &best {
        write_best(genome, &engine, out_dir)?;
    }
    let message = match (&best, completed) {
        (Some((genome, fitness)), true) => format!("completed; best fitness {fitness} for {genome}"),
        (_, false) => format!(
            "stopped after generation {}; continue with `cnnga resume {}`",
            engine.generation(),
            checkpoint_path.display()
        ),
        (None, true) => "completed".to_string(),
    };
    info!("{message}");
    Ok(RunReport {
        out_dir: out_dir.to_path_buf(),
        completed,
        generations_recorded: engine.history().len(),
        best,
        message,
    })
}

fn write_history<E: Evaluator>(engine: &Engine<E>, out_dir: &Path) -> Result<()> {
    write_atomic(&out_dir.join("history.csv"), engine.history().to_csv().as_bytes())?;
    write_atomic(&out_dir.join("timings.csv"), engine.history().timings_csv().as_bytes())
}

fn write_best<E: Evaluator>(genome: &Genome, engine: &Engine<E>, out_dir: &Path) -> Result<()> {
    write_atomic(&out_dir.join("best.genome"), format!("{genome}\n").as_bytes())?;
    let settings = engine.settings();
    match decode(genome, settings.input_shape, settings.num_classes) {
        Ok(arch) => write_atomic(&out_dir.join("best.arch.json"), arch.to_json_pretty().as_bytes()),
        Err(e) => {
            warn!("best genome does not decode ({e}); best.arch.json not written");
            Ok(())
        }
    }
}

/// JSON document with the decoded architecture and its parameter count.
pub fn cmd_decode(args: &DecodeArgs) -> Result<String> {
    let genome: Genome = args.genome.parse()?;
    let arch = decode(&genome, args.input, args.classes)?;
    let doc = json!({
        "genome": genome.to_string(),
        "identifier": genome.identifier().to_string(),
        "parameters": count_parameters(&arch),
        "architecture": arch,
    });
    Ok(serde_json::to_string_pretty(&doc).expect("json"))
}

pub fn cmd_echo_worker(args: &EchoArgs) -> Result<()> {
    match &args.listen {
        Some(addr) => {
            let listener = TcpListener::bind(addr).map_err(|e| Error::io(format!("binding {addr}"), e))?;
            let local = listener.local_addr().map_err(|e| Error::io("reading local address", e))?;
            eprintln!("listening on {local}");
            worker::serve_tcp(listener).map_err(|e| Error::io("serving", e))
        }
        None => worker::serve_stdio().map(|_| ()).map_err(|e| Error::io("serving stdio", e)),
    }
}

/// One-line JSON description of an error, for stderr.
pub fn error_line(err: &Error) -> String {
    let mut doc = json!({ "error": err.kind(), "message": err.to_string() });
    match err {
        Error::Config { field, .. } => doc["field"] = json!(field),
        Error::Parse(crate::error::ParseError::BadToken { token, offset, .. }) => {
            doc["token"] = json!(token);
            doc["offset"] = json!(offset);
        }
        _ => {}
    }
    doc.to_string()
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Transport(_) => 3,
        Error::Config { .. } | Error::Parse(_) | Error::InvalidGenome(_) | Error::Malformed { .. } => 2,
        Error::CheckpointVersion { .. } => 4,
        _ => 1,
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let report = cmd_run(&args)?;
            println!("{}", report.message);
        }
        Command::Resume(args) => {
            let report = cmd_resume(&args)?;
            println!("{}", report.message);
        }
        Command::Decode(args) => {
            let doc = cmd_decode(&args)?;
            let mut out = io::stdout().lock();
            writeln!(out, "{doc}").map_err(|e| Error::io("writing output", e))?;
        }
        Command::EchoWorker(args) => cmd_echo_worker(&args)?,
    }
    Ok(())
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", error_line(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_shape_parsing() {
        assert_eq!(parse_input_shape("32x32x3"), Ok(InputShape::new(32, 32, 3)));
        assert!(parse_input_shape("32x32").is_err());
        assert!(parse_input_shape("0x32x3").is_err());
        assert!(parse_input_shape("axbxc").is_err());
    }

    #[test]
    fn decode_prints_parameter_count() {
        let out = cmd_decode(&DecodeArgs { genome: "S:64:128".into(), input: InputShape::square(32, 3), classes: 10 })
            .unwrap();
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["parameters"], 77_834);
        crate::arch::ArchitectureIR::from_json(&doc["architecture"].to_string()).unwrap();
    }

    #[test]
    fn decode_reports_pool_overflow() {
        let err =
            cmd_decode(&DecodeArgs { genome: ["P:max"; 6].join("-"), input: InputShape::square(32, 3), classes: 10 })
                .unwrap_err();
        assert_eq!(err.kind(), "validation");
    }

    #[test]
    fn error_line_is_single_line_json() {
        let err = Error::config("p_crossover", "must be in [0, 1], got 1.5");
        let line = error_line(&err);
        assert!(!line.contains('\n'));
        let doc: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(doc["field"], "p_crossover");
        let parse = Error::from("S:64:64-Q".parse::<Genome>().unwrap_err());
        let doc: serde_json::Value = serde_json::from_str(&error_line(&parse)).unwrap();
        assert_eq!(doc["offset"], 8);
        assert_eq!(doc["token"], "Q");
    }
}
