//! Command-line driver.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::baselines::{natural_continuation, serial_pac, SerialTrace, StepControl};
use crate::engine::{run_continuation, EngineOptions, TerminationReason};
use crate::io::{read_initial_point, read_parameters, CurveWriter};
use crate::params::RunParams;
use crate::problem::{CurvePoint, Problem};
use crate::problems::ks::KS_AMPLITUDE;
use crate::problems::{circle_problem, KsConfig, KsProblem};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    Circle,
    Ks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Pampac,
    SerialPac,
    Natural,
}

impl Algorithm {
    fn label(self) -> &'static str {
        match self {
            Algorithm::Pampac => "pampac",
            Algorithm::SerialPac => "serial-pac",
            Algorithm::Natural => "natural",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pampac", version, about = "Parallel adaptive pseudo-arclength continuation")]
pub struct Args {
    /// Parameter file (`KEY value` lines)
    #[arg(long)]
    pub params: PathBuf,
    /// File holding the converged initial point
    #[arg(long)]
    pub initial: PathBuf,
    #[arg(long, value_enum, default_value = "circle")]
    pub problem: ProblemKind,
    /// Output directory for curve.txt and tree snapshots
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override WORKER_BUDGET
    #[arg(long)]
    pub budget: Option<usize>,
    /// Worker threads (defaults to the budget, capped by the core count)
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value = "pampac")]
    pub algo: Algorithm,
    /// Run PAMPAC and serial PAC and print a rounds/steps table
    #[arg(long)]
    pub bench: bool,
    /// Amplitude A of the KS sin term
    #[arg(long, default_value_t = KS_AMPLITUDE)]
    pub ks_amplitude: f64,
    /// Cap on synchronized rounds (or serial predictions)
    #[arg(long)]
    pub round_cap: Option<u64>,
}

/// Counters reported for one run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub algorithm: &'static str,
    pub termination: TerminationReason,
    pub points: usize,
    /// Synchronized rounds for PAMPAC; for the serial methods every corrector
    /// step is its own round.
    pub rounds: u64,
    pub corrector_steps: u64,
    pub failures: u64,
    pub wall_seconds: f64,
}

impl RunSummary {
    pub fn from_trace(algorithm: Algorithm, trace: &SerialTrace, wall: f64) -> Self {
        RunSummary {
            algorithm: algorithm.label(),
            termination: trace.termination_reason,
            points: trace.accepted_points.len(),
            rounds: trace.corrector_steps_total,
            corrector_steps: trace.corrector_steps_total,
            failures: trace.failed_predictors,
            wall_seconds: wall,
        }
    }
}

pub fn summary_table(rows: &[RunSummary]) -> String {
    let mut out = format!(
        "{:<12} {:<20} {:>7} {:>8} {:>16} {:>9} {:>10}\n",
        "algorithm", "termination", "points", "rounds", "corrector_steps", "failures", "wall_s"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<12} {:<20} {:>7} {:>8} {:>16} {:>9} {:>10.3}\n",
            r.algorithm,
            r.termination.as_str(),
            r.points,
            r.rounds,
            r.corrector_steps,
            r.failures,
            r.wall_seconds
        ));
    }
    out
}

/// Runs `algorithm`, streaming accepted points to `curve_path`.
pub fn run_algorithm<P: Problem + ?Sized>(
    problem: &P,
    params: &RunParams,
    initial: &[f64],
    algorithm: Algorithm,
    options: &EngineOptions,
    curve_path: Option<&Path>,
) -> Result<RunSummary> {
    let mut writer = curve_path.map(CurveWriter::create).transpose()?;
    let started = Instant::now();
    let mut dump = |points: &[CurvePoint]| -> Result<()> {
        if let Some(w) = writer.as_mut() {
            for p in points {
                w.write(p)?;
            }
        }
        Ok(())
    };
    let summary = match algorithm {
        Algorithm::Pampac => {
            let mut sink_writer = writer.take();
            let result = run_continuation(problem, params, initial, options, &mut |p| match sink_writer.as_mut() {
                Some(w) => w.write(p),
                None => Ok(()),
            })?;
            RunSummary {
                algorithm: algorithm.label(),
                termination: result.termination_reason,
                points: result.accepted_points.len(),
                rounds: result.rounds_executed,
                corrector_steps: result.corrector_steps_total,
                failures: result.nodes_failed,
                wall_seconds: started.elapsed().as_secs_f64(),
            }
        }
        Algorithm::SerialPac | Algorithm::Natural => {
            let trace = if algorithm == Algorithm::Natural {
                natural_continuation(problem, params, initial)?
            } else {
                let control = StepControl { max_predictions: options.round_cap, ..StepControl::default() };
                serial_pac(problem, params, initial, control)?
            };
            dump(&trace.accepted_points)?;
            RunSummary::from_trace(algorithm, &trace, started.elapsed().as_secs_f64())
        }
    };
    Ok(summary)
}

fn init_logging(verbose: u32) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stdout)
        .format_timestamp(None)
        .try_init();
}

fn execute(args: &Args) -> Result<TerminationReason> {
    let mut params = read_parameters(&args.params)?;
    if let Some(b) = args.budget {
        params.worker_budget = b;
        params.validate()?;
    }
    init_logging(params.verbose);
    let initial = read_initial_point(&args.initial, params.n_dim)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let options = EngineOptions {
        threads: args.threads,
        round_cap: args.round_cap.unwrap_or(crate::engine::DEFAULT_ROUND_CAP),
        dot_dir: Some(args.out.clone()),
    };

    let problem: Box<dyn Problem> = match args.problem {
        ProblemKind::Circle => Box::new(circle_problem()),
        ProblemKind::Ks => Box::new(KsProblem::new(KsConfig::from_point(args.ks_amplitude, &initial)?)?),
    };
    let curve = args.out.join("curve.txt");

    if args.bench {
        let pampac = run_algorithm(&*problem, &params, &initial, Algorithm::Pampac, &options, Some(&curve))?;
        let serial = run_algorithm(&*problem, &params, &initial, Algorithm::SerialPac, &options, None)?;
        print!("{}", summary_table(&[pampac.clone(), serial.clone()]));
        let verdict = if pampac.rounds <= serial.corrector_steps { "holds" } else { "does not hold" };
        println!(
            "rounds(pampac) = {} vs corrector steps(serial-pac) = {}: bound {verdict}",
            pampac.rounds, serial.corrector_steps
        );
        return Ok(pampac.termination);
    }

    let summary = run_algorithm(&*problem, &params, &initial, args.algo, &options, Some(&curve))?;
    print!("{}", summary_table(&[summary.clone()]));
    Ok(summary.termination)
}

/// Entry point: returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(TerminationReason::ReachedLambdaMax) => 0,
        Ok(reason) => {
            eprintln!("run ended with {}", reason.as_str());
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
