use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nightbench::bench::{cmd_degrade, cmd_eval, cmd_report, cmd_sweep, cmd_track};
use nightbench::dataset::PreprocessSpec;
use nightbench::lowlight::{parse_values, Config, SweepAxis, SweepSpec};
use nightbench::metrics::EvalConfig;
use nightbench::tracker::NccConfig;
use nightbench::{Error, Result};
use serde::Serialize;

/// Low-light tracking benchmark: synthesize dark corpora, track, evaluate, sweep.
#[derive(Parser)]
#[command(name = "nightbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Degrade a sequence directory with the low-light model.
    Degrade {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `key = value` file with alpha, beta, gamma, alpha_s, sigma, mu.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Track a sequence with the NCC baseline, initialized from the first ground-truth box.
    Track {
        #[arg(long)]
        seq: PathBuf,
        /// none | median:R | gaussian:S | gamma:G | external:CMD
        #[arg(long, default_value = "none", value_parser = parse_preprocess)]
        preprocess: PreprocessSpec,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a prediction file; the JSON report goes to stdout.
    Eval {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        d_px: f64,
        #[arg(long, default_value_t = 0.5)]
        d_norm: f64,
        /// Also write report.json and metrics.csv into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degrade, track and evaluate every value of one parameter axis.
    Sweep {
        #[arg(long, num_args = 1.., required = true)]
        seqs: Vec<PathBuf>,
        /// noise | gamma | saturation
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        /// Comma-separated values; defaults to the axis' reference grid.
        #[arg(long)]
        values: Option<String>,
        /// Fixed model parameters for the non-swept keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "none", value_parser = parse_preprocess)]
        preprocess: PreprocessSpec,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Collect sweep results into table and curve CSVs.
    Report {
        #[arg(long)]
        results: PathBuf,
    },
}

fn parse_preprocess(s: &str) -> std::result::Result<PreprocessSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_axis(s: &str) -> std::result::Result<SweepAxis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("summaries serialize"));
}

fn sweep_spec(axis: SweepAxis, values: Option<&str>, config: Option<&PathBuf>) -> Result<SweepSpec> {
    let mut cfg = match config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let values = match values {
        Some(raw) => parse_values(raw).map_err(|e| Error::Usage(e.to_string()))?,
        None => axis.reference_values(),
    };
    cfg.set("axis", axis.name());
    cfg.set("values", values.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    SweepSpec::from_config(&cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Degrade { input, out, config, seed } => print_json(&cmd_degrade(input, out, config, seed)?),
        Command::Track { seq, preprocess, out } => {
            print_json(&cmd_track(seq, &preprocess, out, NccConfig::default())?)
        }
        Command::Eval { seq, pred, d_px, d_norm, out } => {
            let cfg = EvalConfig { d_px, d_norm, ..Default::default() };
            let result = cmd_eval(seq, pred, &cfg)?;
            if let Some(dir) = out {
                result.write(dir)?;
            }
            println!("{}", result.report.to_json());
        }
        Command::Sweep { seqs, axis, values, config, preprocess, out, seed } => {
            let spec = sweep_spec(axis, values.as_deref(), config.as_ref())?;
            let result = cmd_sweep(&seqs, &spec, &preprocess, &out, seed)?;
            for v in &result.values {
                match (&v.report, &v.error) {
                    (Some(r), _) => println!("{}={}\tauc {:.2}\top50 {:.2}", result.axis, v.value, r.auc, r.op50),
                    (_, Some(e)) => eprintln!("{}={}\tfailed: {e}", result.axis, v.value),
                    _ => {}
                }
            }
            if !result.failed().is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Report { results } => {
            let files = cmd_report(results)?;
            println!("{}", files.table.display());
            for c in &files.curves {
                println!("{}", c.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
