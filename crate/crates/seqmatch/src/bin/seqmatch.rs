//! Batch CLI for the sequence-matching library.
//!
//! Exit codes: 0 success, 1 statistical-check failure, 2 config error,
//! 3 runtime truncation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seqmatch::config::ExperimentConfig;
use seqmatch::error::Error;
use seqmatch::exponents::ExponentKind;
use seqmatch::hypothesis::{
    count_all, count_hypotheses, enumerate_all, enumerate_matchings, ProblemDims,
};
use seqmatch::simulator::run_campaign;
use seqmatch::verify::{format_table, run_reference_checks};

#[derive(Parser)]
#[command(name = "seqmatch", version, about = "Sequential tests for statistical sequence matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the matching hypotheses for the given database sizes.
    Enumerate(EnumerateArgs),
    /// Evaluate theoretical exponents for a configured model.
    Exponent(ExponentArgs),
    /// Run a Monte Carlo campaign and write JSON/CSV reports.
    Simulate(SimulateArgs),
    /// Run the built-in reference-value checklist.
    #[command(name = "verify-paper")]
    VerifyPaper,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    m1: usize,
    #[arg(long)]
    m2: usize,
    /// Match count; omit to list every count.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct ExponentArgs {
    /// Experiment config naming the model.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated kinds: es, ef, er, f, g, g0, lambda, kappa,
    /// disjoint_extension_floor (long names accepted too).
    #[arg(long, value_delimiter = ',')]
    which: Vec<String>,
    /// Threshold for the er / f / g exponents.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the campaign parallelism (SEQMATCH_THREADS wins over both).
    #[arg(long)]
    parallelism: Option<usize>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Truncated { .. } => 3,
        Error::Config(_)
        | Error::InvalidDistribution(_)
        | Error::Model(_)
        | Error::TooManyHypotheses { .. }
        | Error::Domain(_)
        | Error::IndexOutOfRange(_)
        | Error::DimensionMismatch(_, _) => 2,
        Error::Io(_) => 2,
    }
}

fn cmd_enumerate(args: &EnumerateArgs) -> Result<(), Error> {
    let dims = ProblemDims::new(args.m1, args.m2)?;
    let listed: Vec<(usize, usize, seqmatch::MatchingSet)> = match args.k {
        Some(k) => {
            println!(
                "hypotheses for m1={}, m2={}, k={}: {}",
                args.m1,
                args.m2,
                k,
                count_hypotheses(&dims, k)?
            );
            enumerate_matchings(&dims, k)?
                .into_iter()
                .enumerate()
                .map(|(l, m)| (k, l, m))
                .collect()
        }
        None => {
            println!(
                "hypotheses for m1={}, m2={}, all k: {}",
                args.m1,
                args.m2,
                count_all(&dims)?
            );
            enumerate_all(&dims)?
        }
    };
    println!("{:>3} {:>4}  {:<24} {:<14} {:<14}", "k", "l", "pairs", "left set", "right set");
    for (k, l, m) in listed {
        let pairs: Vec<String> = m
            .pairs()
            .iter()
            .map(|&(i, j)| format!("({},{})", i + 1, j + 1))
            .collect();
        let left: Vec<String> = m.matched_left().iter().map(|i| (i + 1).to_string()).collect();
        let right: Vec<String> = m.matched_right().iter().map(|j| (j + 1).to_string()).collect();
        println!(
            "{:>3} {:>4}  {:<24} {:<14} {:<14}",
            k,
            l + 1,
            pairs.join(" "),
            format!("{{{}}}", left.join(",")),
            format!("{{{}}}", right.join(","))
        );
    }
    Ok(())
}

fn cmd_exponent(args: &ExponentArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::from_toml_str(&text)?;
    let model = cfg.build_model()?;
    if args.which.is_empty() {
        return Err(Error::Config("--which needs at least one exponent kind".into()));
    }
    let mut results = serde_json::Map::new();
    for name in &args.which {
        let kind = ExponentKind::parse(name)?;
        let value = seqmatch::exponents::evaluate(&model, kind, args.lambda)?;
        results.insert(name.clone(), value);
    }
    println!("{}", serde_json::to_string_pretty(&serde_json::Value::Object(results)).unwrap());
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::from_toml_str(&text)?;
    let model = cfg.build_model()?;
    let test = cfg.build_test()?;
    let mut opts = cfg.campaign_options();
    if let Some(p) = args.parallelism {
        opts.parallelism = p;
    }
    if let Ok(env_threads) = std::env::var("SEQMATCH_THREADS") {
        opts.parallelism = env_threads
            .parse()
            .map_err(|e| Error::Config(format!("SEQMATCH_THREADS: {e}")))?;
    }
    let report = run_campaign(&model, &test, &opts)?;

    // Write outputs, removing partial files on failure.
    let json = report.to_json();
    let csv = report.to_csv();
    let mut written: Vec<PathBuf> = Vec::new();
    let mut write_all = || -> Result<(), Error> {
        if let Some(path) = &cfg.output.json {
            std::fs::write(path, &json)?;
            written.push(path.clone());
        }
        if let Some(path) = &cfg.output.csv {
            std::fs::write(path, &csv)?;
            written.push(path.clone());
        }
        Ok(())
    };
    if let Err(e) = write_all() {
        for path in &written {
            let _ = std::fs::remove_file(path);
        }
        return Err(e);
    }

    println!("config {}  test {}  seed {}", report.config_hash, report.test, report.master_seed);
    println!(
        "{:>8} {:>10} {:>10} {:>12} {:>12} {:>10} {:>10}",
        "N", "mismatch", "f.reject", "f.alarm", "truncated", "mean_tau", "max_tau"
    );
    for row in &report.rows {
        println!(
            "{:>8} {:>10.5} {:>10.5} {:>12.5} {:>12.5} {:>10.2} {:>10}",
            row.horizon,
            row.rate_of(seqmatch::simulator::Outcome::Mismatch),
            row.rate_of(seqmatch::simulator::Outcome::FalseReject),
            row.rate_of(seqmatch::simulator::Outcome::FalseAlarm),
            row.rate_of(seqmatch::simulator::Outcome::Truncated),
            row.mean_tau,
            row.max_tau,
        );
    }
    if report.truncated_trials > 0 {
        eprintln!("warning: {} truncated trials", report.truncated_trials);
        return Err(Error::Truncated {
            steps: 0,
            n: 0,
        });
    }
    Ok(())
}

fn cmd_verify() -> Result<bool, Error> {
    let checks = run_reference_checks()?;
    print!("{}", format_table(&checks));
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!(
        "{} checks, {} failed",
        checks.len(),
        failed
    );
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Enumerate(args) => cmd_enumerate(args).map(|_| true),
        Command::Exponent(args) => cmd_exponent(args).map(|_| true),
        Command::Simulate(args) => cmd_simulate(args).map(|_| true),
        Command::VerifyPaper => cmd_verify(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
