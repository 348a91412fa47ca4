//! Pipeline driver: build a template pool, poison a corpus, verify the
//! result. Exit codes: 0 ok, 1 verification failure, 2 configuration or
//! I/O error, 3 injection regression (a unit had to be reverted).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use funpoison::corpus::{load_corpus, save_corpus};
use funpoison::inject::{poison_dataset, render_report, InjectionConfig, InjectionReport, Mode, UnitRecord};
use funpoison::safety::{filter_pool, Ruleset};
use funpoison::template::{build_pool, load_pool, save_pool};
use funpoison::toolchain::{self, ToolchainSpec};
use funpoison::verify::{render_verification, verify_corpus};

#[derive(Parser)]
#[command(name = "funpoison", version, about = "Functionality-preserving corpus poisoning for Java datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine, repair, and safety-filter a template pool from a corpus.
    BuildPool(BuildPoolArgs),
    /// Poison a corpus with templates from a pool.
    Inject(InjectArgs),
    /// Verify a poisoned corpus against its clean original.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Compiler backend: "auto", "embedded", or a path to javac.
    /// Falls back to the FUNPOISON_COMPILER environment variable, then
    /// to javac on PATH, then to the embedded front end.
    #[arg(long, default_value = "auto")]
    compiler: String,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Per-probe compile/run timeout in seconds.
    #[arg(long, default_value_t = 10)]
    timeout: u64,
}

#[derive(Args)]
struct BuildPoolArgs {
    /// Source corpus: a directory of .java files or a JSONL record file.
    #[arg(long)]
    corpus: PathBuf,
    /// Output pool file.
    #[arg(long)]
    out: PathBuf,
    /// Cap on pool size (uniform seeded subsample when exceeded).
    #[arg(long)]
    pool_cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct InjectArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Template pool built by build-pool.
    #[arg(long)]
    pool: PathBuf,
    /// Poisoning rate ρ in (0, 1].
    #[arg(long, default_value_t = 0.1)]
    rate: f64,
    /// Templates per poisoned unit (m).
    #[arg(long, default_value_t = 3)]
    templates_per_unit: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Injection mode: "funpoison" or "dead-branch".
    #[arg(long, default_value = "funpoison")]
    mode: String,
    /// Output corpus (same shape as the input).
    #[arg(long)]
    out: PathBuf,
    /// Sidecar report file (JSONL).
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Clean corpus.
    #[arg(long)]
    corpus: PathBuf,
    /// Poisoned corpus to check.
    #[arg(long)]
    poisoned: PathBuf,
    /// Injection report produced by inject.
    #[arg(long)]
    report: PathBuf,
    /// Optional path for the verification summary (also printed).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

/// Effective configuration echoed as the first record of every report.
#[derive(Serialize)]
struct ConfigRecord<'a> {
    record: &'static str,
    subcommand: &'a str,
    compiler: String,
    workers: usize,
    timeout_secs: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus: Option<&'a PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pool: Option<&'a PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    templates_per_unit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pool_cap: Option<usize>,
}

fn base_config<'a>(subcommand: &'a str, common: &CommonArgs, toolchain_id: String) -> ConfigRecord<'a> {
    ConfigRecord {
        record: "config",
        subcommand,
        compiler: toolchain_id,
        workers: common.workers,
        timeout_secs: common.timeout,
        corpus: None,
        pool: None,
        rate: None,
        templates_per_unit: None,
        seed: None,
        mode: None,
        pool_cap: None,
    }
}

fn setup(common: &CommonArgs) -> anyhow::Result<std::sync::Arc<dyn funpoison::toolchain::Toolchain>> {
    if common.workers > 0 {
        // Ignore the error when a pool already exists (tests, re-entry).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.workers)
            .build_global();
    }
    let spec = ToolchainSpec::parse(&common.compiler);
    let tc = toolchain::resolve(&spec, Duration::from_secs(common.timeout))?;
    Ok(tc)
}

fn cmd_build_pool(args: &BuildPoolArgs) -> anyhow::Result<ExitCode> {
    let tc = setup(&args.common)?;
    let corpus = load_corpus(&args.corpus)?;
    if corpus.is_empty() {
        bail!(funpoison::Error::Config(format!(
            "corpus at {} contains no units",
            args.corpus.display()
        )));
    }
    let (pool, stats) = build_pool(&corpus, args.pool_cap, args.seed, tc.as_ref())?;
    let (filtered, filter_stats) = filter_pool(&pool, &Ruleset::default());

    let mut config = base_config("build-pool", &args.common, tc.id());
    config.corpus = Some(&args.corpus);
    config.seed = Some(args.seed);
    config.pool_cap = args.pool_cap;
    println!("{}", serde_json::to_string(&config)?);
    println!(
        "candidates {} repaired {} deduplicated {} retained {}",
        stats.candidates, stats.repaired, stats.deduplicated, stats.retained
    );
    for (reason, n) in &stats.rejected {
        println!("rejected {reason} {n}");
    }
    println!(
        "filter accepted {} rejected {}",
        filter_stats.accepted, filter_stats.rejected
    );
    for (category, n) in &filter_stats.by_category {
        println!("filtered {category} {n}");
    }
    if filtered.templates.is_empty() {
        eprintln!("warning: no templates survived repair and filtering; pool is empty");
    }
    fs::write(&args.out, save_pool(&filtered)?)
        .with_context(|| format!("writing pool to {}", args.out.display()))?;
    println!("pool {} templates -> {}", filtered.templates.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_inject(args: &InjectArgs) -> anyhow::Result<ExitCode> {
    let tc = setup(&args.common)?;
    let mode = Mode::parse(&args.mode).ok_or_else(|| {
        funpoison::Error::Config(format!(
            "mode must be \"funpoison\" or \"dead-branch\", got {:?}",
            args.mode
        ))
    })?;
    let corpus = load_corpus(&args.corpus)?;
    let pool_text = fs::read_to_string(&args.pool)
        .with_context(|| format!("reading pool {}", args.pool.display()))?;
    let pool = load_pool(&pool_text)?;
    let config = InjectionConfig {
        rate: args.rate,
        templates_per_unit: args.templates_per_unit,
        seed: args.seed,
        mode,
    };
    config.validate()?;
    let (poisoned, report) = poison_dataset(&corpus, &pool, &config, tc.as_ref())?;
    save_corpus(&poisoned, &args.out)?;

    let mut echo = base_config("inject", &args.common, tc.id());
    echo.corpus = Some(&args.corpus);
    echo.pool = Some(&args.pool);
    echo.rate = Some(args.rate);
    echo.templates_per_unit = Some(args.templates_per_unit);
    echo.seed = Some(args.seed);
    echo.mode = Some(mode.as_str());
    let mut out = serde_json::to_string(&echo)?;
    out.push('\n');
    out.push_str(&render_report(&report)?);
    fs::write(&args.report, out)
        .with_context(|| format!("writing report to {}", args.report.display()))?;

    println!(
        "poisoned {}/{} units (effective rate {:.4}), {} skipped, {} reverted, {} templates dropped",
        report.injected_units,
        corpus.len(),
        report.effective_rate,
        report.skipped_units,
        report.reverted_units,
        report.dropped_templates
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.reverted_units > 0 {
        eprintln!("error: {} unit(s) reverted after a compile regression", report.reverted_units);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

/// Reassemble an InjectionReport from its JSONL sidecar form.
fn parse_report(text: &str) -> anyhow::Result<InjectionReport> {
    let mut per_unit: Vec<UnitRecord> = Vec::new();
    let mut summary: Option<serde_json::Value> = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(line)
            .with_context(|| format!("report line {}", i + 1))?;
        match v.get("record").and_then(|r| r.as_str()) {
            Some("unit") => per_unit.push(serde_json::from_value(v)?),
            Some("summary") => summary = Some(v),
            _ => {} // config echo and future record types
        }
    }
    let mut summary = summary.ok_or_else(|| {
        funpoison::Error::MalformedRecord {
            line: text.lines().count(),
            reason: "report has no summary record".to_string(),
        }
    })?;
    summary
        .as_object_mut()
        .expect("summary object")
        .insert("per_unit".into(), serde_json::to_value(&per_unit)?);
    Ok(serde_json::from_value(summary)?)
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<ExitCode> {
    let tc = setup(&args.common)?;
    let clean = load_corpus(&args.corpus)?;
    let poisoned = load_corpus(&args.poisoned)?;
    let report_text = fs::read_to_string(&args.report)
        .with_context(|| format!("reading report {}", args.report.display()))?;
    let report = parse_report(&report_text)?;
    let summary = verify_corpus(&clean, &poisoned, &report, tc.as_ref())?;

    let mut echo = base_config("verify", &args.common, tc.id());
    echo.corpus = Some(&args.corpus);
    let mut rendered = serde_json::to_string(&echo)?;
    rendered.push('\n');
    rendered.push_str(&render_verification(&summary)?);
    print!("{rendered}");
    if let Some(out) = &args.out {
        fs::write(out, &rendered).with_context(|| format!("writing summary to {}", out.display()))?;
    }
    if summary.healthy() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: verification failed");
        Ok(ExitCode::from(1))
    }
}

fn exit_code_for(err: &anyhow::Error) -> ExitCode {
    // Everything fatal is a configuration/environment problem; codes 1
    // and 3 are reserved for verification failures and regressions.
    let _ = err;
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::BuildPool(args) => cmd_build_pool(args),
        Command::Inject(args) => cmd_inject(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    }
}
