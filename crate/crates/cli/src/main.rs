//! `mginf` — classify and simulate infinite-server queues with heavy-tailed
//! service times.
//!
//! Subcommands:
//!
//! - `classify`: critical-state classification (symbolic by default, numeric
//!   partial-integral diagnostic with `--numeric`), JSON on stdout;
//! - `simulate`: one exact trajectory, CSV on disk;
//! - `occupancy`: replica farm with per-state occupation statistics against
//!   the quadrature theory values;
//! - `growth`: time spent below a fraction of the expected occupancy,
//!   against the integral bound.
//!
//! Every run writes a `manifest.json` with the fully resolved configuration;
//! re-running with the flags recorded there reproduces all outputs
//! byte-for-byte. Outputs contain no clocks and no environment-dependent
//! randomness.
//!
//! Exit codes: 0 verdict/success, 1 usage or I/O error, 2 scientifically
//! inconclusive result, 3 partial results (some replicas overflowed).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mginf_core::analysis::{run_experiment_with_tol, MonteCarloSummary};
use mginf_core::classifier::{
    classify_numeric, classify_symbolic, ClassificationResult, ClassifyError, CriticalState,
    NumericClassifyOptions, DEFAULT_NUMERIC_K_MAX,
};
use mginf_core::simulator::{growth_check, simulate, GrowthReport, QueueConfig};
use mginf_core::stats::mean_and_std_error;
use mginf_core::{LawError, ServiceLaw};

mod manifest;
use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "mginf",
    version,
    about = "Transience/recurrence classification and exact simulation of M/G/infinity queues",
    after_help = "Law specs: strange(b=2.5) | pareto(alpha=0.5,scale=1.0) | exp(mean=1.0) | det(value=1.0)\n\
                  Output directory resolution: --out flag, else $MGINF_OUT_DIR, else `.`"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Service law spec, e.g. "strange(b=2.5)"
    #[arg(long)]
    law: String,
    /// Poisson arrival rate
    #[arg(long)]
    lambda: f64,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Directory for output files
    #[arg(long, env = "MGINF_OUT_DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify every occupancy state as transient or recurrent
    Classify {
        #[command(flatten)]
        common: CommonArgs,
        /// Use the numeric partial-integral diagnostic instead of the
        /// symbolic rules
        #[arg(long)]
        numeric: bool,
        /// Largest state examined by the numeric diagnostic
        #[arg(long, default_value_t = DEFAULT_NUMERIC_K_MAX)]
        k_max: u32,
        /// Per-segment quadrature tolerance of the numeric diagnostic
        #[arg(long, default_value_t = 1e-9)]
        quad_rel_tol: f64,
        /// Integrand-evaluation budget per quadrature call
        #[arg(long, default_value_t = mginf_core::quadrature::DEFAULT_EVAL_BUDGET)]
        quad_budget: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate one trajectory; writes the path and its occupation times
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Simulated horizon
        #[arg(long)]
        horizon: f64,
        /// Seed of the deterministic generator
        #[arg(long)]
        seed: u64,
        /// Largest state tracked in the occupation record
        #[arg(long, default_value_t = 16)]
        k_max: u32,
        /// Cap on stored path events
        #[arg(long, default_value_t = mginf_core::simulator::DEFAULT_MAX_EVENTS)]
        max_events: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Replicated occupation-time statistics against quadrature theory
    Occupancy {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        horizon: f64,
        /// Base seed; replica i uses seed + i
        #[arg(long)]
        seed: u64,
        /// Number of independent replicas
        #[arg(long, default_value_t = 100)]
        replicas: u32,
        /// Largest tracked state (higher states pool into overflow)
        #[arg(long, default_value_t = 6)]
        k_max: u32,
        /// Quadrature tolerance for the theory column
        #[arg(long, default_value_t = 1e-8)]
        quad_rel_tol: f64,
        #[arg(long, default_value_t = mginf_core::simulator::DEFAULT_MAX_EVENTS)]
        max_events: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Measure time spent below q·λ·m(t) against the integral bound
    Growth {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        /// Fraction of the expected occupancy defining a violation
        #[arg(long)]
        q: f64,
        /// Left edge of the measured window (default: horizon / 10)
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long, default_value_t = 1)]
        replicas: u32,
        #[arg(long, default_value_t = mginf_core::simulator::DEFAULT_MAX_EVENTS)]
        max_events: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not usage errors
            if e.use_stderr() {
                let _ = e.print();
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = if err.downcast_ref::<LawError>().is_some() {
                1
            } else if matches!(
                err.downcast_ref::<ClassifyError>(),
                Some(ClassifyError::ProfileNotCertified(_) | ClassifyError::NoProfile(_))
            ) {
                2
            } else {
                1
            };
            ExitCode::from(code)
        }
    }
}

fn parse_law(spec: &str) -> Result<ServiceLaw> {
    ServiceLaw::parse(spec).map_err(anyhow::Error::new)
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Classify {
            common,
            numeric,
            k_max,
            quad_rel_tol,
            quad_budget,
            output,
        } => cmd_classify(common, numeric, k_max, quad_rel_tol, quad_budget, output),
        Command::Simulate {
            common,
            horizon,
            seed,
            k_max,
            max_events,
            output,
        } => cmd_simulate(common, horizon, seed, k_max, max_events, output),
        Command::Occupancy {
            common,
            horizon,
            seed,
            replicas,
            k_max,
            quad_rel_tol,
            max_events,
            output,
        } => cmd_occupancy(
            common,
            horizon,
            seed,
            replicas,
            k_max,
            quad_rel_tol,
            max_events,
            output,
        ),
        Command::Growth {
            common,
            horizon,
            seed,
            q,
            t_min,
            replicas,
            max_events,
            output,
        } => cmd_growth(common, horizon, seed, q, t_min, replicas, max_events, output),
    }
}

fn cmd_classify(
    common: CommonArgs,
    numeric: bool,
    k_max: u32,
    quad_rel_tol: f64,
    quad_budget: usize,
    output: OutputArgs,
) -> Result<ExitCode> {
    let law = parse_law(&common.law)?;
    let result: ClassificationResult = if numeric {
        let opts = NumericClassifyOptions {
            segment_rel_tol: quad_rel_tol,
            eval_budget: quad_budget,
            ..NumericClassifyOptions::default()
        };
        classify_numeric(&law, common.lambda, k_max, &opts)?
    } else {
        let profile = law
            .profile()
            .ok_or_else(|| ClassifyError::NoProfile(law.name().to_string()))?;
        classify_symbolic(profile, common.lambda)?
    };

    // the verdict document carries the law name next to the result fields
    let mut doc = serde_json::to_value(&result)?;
    doc.as_object_mut()
        .expect("classification serializes to an object")
        .insert("law".to_string(), serde_json::Value::String(law.name().to_string()));
    println!("{}", serde_json::to_string_pretty(&doc)?);

    let manifest = RunManifest::new("classify", law.name(), common.lambda)
        .numeric(numeric)
        .k_max(if numeric { Some(k_max) } else { None })
        .quad_rel_tol(if numeric { Some(quad_rel_tol) } else { None })
        .outputs(vec![]);
    write_output(&output.out, "manifest.json", &manifest.to_json()?)?;

    let inconclusive = matches!(result.k0, CriticalState::AtLeast(_));
    Ok(if inconclusive {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_simulate(
    common: CommonArgs,
    horizon: f64,
    seed: u64,
    k_max: u32,
    max_events: usize,
    output: OutputArgs,
) -> Result<ExitCode> {
    let law = parse_law(&common.law)?;
    let config = QueueConfig::new(common.lambda, law, horizon, seed)?.with_max_events(max_events);

    let manifest = RunManifest::new("simulate", config.law.name(), common.lambda)
        .horizon(horizon)
        .seed(seed)
        .k_max(Some(k_max))
        .max_events(max_events)
        .outputs(vec![
            "trajectory.csv".to_string(),
            "occupation.csv".to_string(),
        ]);

    match simulate(&config) {
        Ok(traj) => {
            write_output(&output.out, "trajectory.csv", &traj.to_csv())?;
            let occ = mginf_core::occupation(&traj, k_max);
            write_output(&output.out, "occupation.csv", &occ.to_csv())?;
            write_output(&output.out, "manifest.json", &manifest.to_json()?)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ mginf_core::SimError::EventCapExceeded { .. }) => {
            write_output(&output.out, "manifest.json", &manifest.to_json()?)?;
            eprintln!("partial results: {e}; no trajectory was written");
            Ok(ExitCode::from(3))
        }
        Err(e) => Err(e.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_occupancy(
    common: CommonArgs,
    horizon: f64,
    seed: u64,
    replicas: u32,
    k_max: u32,
    quad_rel_tol: f64,
    max_events: usize,
    output: OutputArgs,
) -> Result<ExitCode> {
    let law = parse_law(&common.law)?;
    let config = QueueConfig::new(common.lambda, law, horizon, seed)?.with_max_events(max_events);
    let summary: MonteCarloSummary =
        run_experiment_with_tol(&config, replicas, k_max, quad_rel_tol)?;

    write_output(&output.out, "occupancy.csv", &summary.to_table_csv())?;
    write_output(
        &output.out,
        "report.json",
        &serde_json::to_string_pretty(&summary)?,
    )?;
    let manifest = RunManifest::new("occupancy", config.law.name(), common.lambda)
        .horizon(horizon)
        .seed(seed)
        .replicas(replicas)
        .k_max(Some(k_max))
        .quad_rel_tol(Some(quad_rel_tol))
        .max_events(max_events)
        .outputs(vec!["occupancy.csv".to_string(), "report.json".to_string()]);
    write_output(&output.out, "manifest.json", &manifest.to_json()?)?;

    if summary.n_failed > 0 {
        eprintln!(
            "partial results: {} of {} replicas overflowed the event cap and were skipped",
            summary.n_failed, replicas
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_growth(
    common: CommonArgs,
    horizon: f64,
    seed: u64,
    q: f64,
    t_min: Option<f64>,
    replicas: u32,
    max_events: usize,
    output: OutputArgs,
) -> Result<ExitCode> {
    let law = parse_law(&common.law)?;
    let config = QueueConfig::new(common.lambda, law, horizon, seed)?.with_max_events(max_events);
    let t_min = t_min.unwrap_or(horizon / 10.0);

    let mut reports: Vec<GrowthReport> = Vec::new();
    let mut failed = 0u32;
    for i in 0..replicas.max(1) {
        let cfg = config.with_seed(seed.wrapping_add(i as u64));
        match simulate(&cfg) {
            Ok(traj) => reports.push(growth_check(&traj, &cfg, q, t_min)?),
            Err(mginf_core::SimError::EventCapExceeded { .. }) => failed += 1,
            Err(e) => return Err(e.into()),
        }
    }

    if reports.is_empty() {
        let manifest = RunManifest::new("growth", config.law.name(), common.lambda)
            .horizon(horizon)
            .seed(seed)
            .replicas(replicas)
            .q(q)
            .t_min(t_min)
            .max_events(max_events)
            .outputs(vec![]);
        write_output(&output.out, "manifest.json", &manifest.to_json()?)?;
        eprintln!("partial results: every replica overflowed the event cap; nothing to report");
        return Ok(ExitCode::from(3));
    }
    let growth_json = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])?
    } else {
        let measures: Vec<f64> = reports.iter().map(|r| r.h_q_measure).collect();
        let (mean, se) = mean_and_std_error(&measures);
        let max = measures.iter().cloned().fold(0.0f64, f64::max);
        let violated = reports
            .iter()
            .filter(|r| r.first_violation_after.is_some())
            .count();
        serde_json::to_string_pretty(&serde_json::json!({
            "q": q,
            "t_min": t_min,
            "n_replicas": reports.len(),
            "mean_h_q_measure": mean,
            "std_error_h_q_measure": se,
            "max_h_q_measure": max,
            "replicas_with_violation": violated,
            "bound_value": reports[0].bound_value,
        }))?
    };
    write_output(&output.out, "growth.json", &growth_json)?;

    let manifest = RunManifest::new("growth", config.law.name(), common.lambda)
        .horizon(horizon)
        .seed(seed)
        .replicas(replicas)
        .q(q)
        .t_min(t_min)
        .max_events(max_events)
        .outputs(vec!["growth.json".to_string()]);
    write_output(&output.out, "manifest.json", &manifest.to_json()?)?;

    if failed > 0 {
        eprintln!("partial results: {failed} of {replicas} replicas overflowed the event cap");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}
