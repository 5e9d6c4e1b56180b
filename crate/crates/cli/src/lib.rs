//! Command-line front end for the `mpoq` simulator.
//!
//! `simulate` runs a builtin or a JSON circuit file and writes sampled
//! counts and exact probabilities as CSV or JSON, `bench` times builtins
//! over a range of sizes and `verify` runs the golden-value suite.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use mpoq::circuits::{extract_period, run_gate_sequence, PeriodEstimate, SequenceRun};
use mpoq::sampling::{measure, sample_rng, MeasurementPlan, SampleReport};
use mpoq::verify::{run_verify, Check, VerifyOptions};
use mpoq::Mps;

pub mod spec;

use spec::{parse_initial, parse_positions, parse_postselect, Builtin, CircuitSpec, Prepared};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    ZeroProbability(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 for invalid input, 3 for numerical failures, 4 for a
    /// zero-probability postselection, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::ZeroProbability(_) => 4,
            CliError::Io(_) | CliError::Failed(_) => 1,
        }
    }
}

impl From<mpoq::Error> for CliError {
    fn from(e: mpoq::Error) -> Self {
        match e {
            mpoq::Error::ZeroProbabilityPostselection(_) => CliError::ZeroProbability(e.to_string()),
            mpoq::Error::Serialization(_) => CliError::Io(e.to_string()),
            _ if e.is_numerical() => CliError::Numerical(e.to_string()),
            _ => CliError::Schema(e.to_string()),
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "mpoq", version, about = "Tensor-train quantum circuit simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a circuit and report measurement statistics.
    Simulate(SimulateArgs),
    /// Time builtins over a range of sizes.
    Bench(BenchArgs),
    /// Run the golden-value suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Circuit description file (JSON).
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub circuit: Option<PathBuf>,
    /// qfa, qfa-network:COUNT, simon, qft:N, inverse-qft:N or shor:A[:M].
    #[arg(long)]
    pub builtin: Option<String>,
    /// zeros, basis:0101, named:GHZ or hadamard:2,3.
    #[arg(long)]
    pub initial: Option<String>,
    /// Number of samples; 0 reports exact probabilities only.
    #[arg(long, default_value_t = 0)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Qubits to measure, e.g. 1,3,5.
    #[arg(long)]
    pub measure: Option<String>,
    /// Fixed outcomes, e.g. "2=0,4=1".
    #[arg(long)]
    pub postselect: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// qfa-network, qft or inverse-qft.
    #[arg(long)]
    pub builtin: String,
    /// Sizes, e.g. 8,16,32.
    #[arg(long)]
    pub sizes: String,
    #[arg(long, default_value_t = 100)]
    pub samples: u64,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated subset of shor, simon, qfa, qft.
    #[arg(long)]
    pub only: Option<String>,
    /// Also compare against the dense statevector oracle.
    #[arg(long, hide = true)]
    pub oracle: bool,
}

/// Runs a parsed command; the caller maps errors to exit codes.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Bench(args) => bench(&args),
        Command::Verify(args) => verify(&args),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(io_err),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io_err),
    }
}

#[derive(Serialize)]
struct ShorSummary {
    a: u64,
    m: u64,
    estimates: Vec<PeriodEstimate>,
}

/// Prepared circuit plus the finished run and report.
pub struct Simulation {
    pub prepared: Prepared,
    pub run: SequenceRun,
    pub report: SampleReport,
}

pub fn run_simulation(args: &SimulateArgs) -> Result<Simulation, CliError> {
    let initial = args.initial.as_deref().map(parse_initial).transpose()?;
    let prepared = match (&args.circuit, &args.builtin) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Prepared::from_spec(&CircuitSpec::from_json(&text)?, initial.as_ref())?
        }
        (None, Some(name)) => Prepared::from_builtin(&Builtin::parse(name)?, initial.as_ref())?,
        (None, None) => return Err(CliError::Schema("pass --circuit or --builtin".into())),
    };
    let n = prepared.sequence.n();
    let readout = match &args.measure {
        Some(text) => {
            let mut positions = parse_positions(text)?;
            positions.sort_unstable();
            positions
        }
        None => prepared.readout.clone(),
    };
    let mut plan = MeasurementPlan::new(n, &readout, args.samples, args.seed)?.with_readout(&readout)?;
    if let Some(text) = &args.postselect {
        plan = plan.with_postselect(&parse_postselect(text)?)?;
    }
    let run = run_gate_sequence(&prepared.sequence, &prepared.initial, &prepared.policy)?;
    let exact = readout.len() < usize::BITS as usize && (1usize << readout.len()) <= mpoq::dense_cap();
    let report = measure(&run.state, &plan, exact)?;
    Ok(Simulation { prepared, run, report })
}

fn shor_summary(sim: &Simulation) -> Result<Option<ShorSummary>, CliError> {
    // y is only defined for the reversed readout of the input register
    let Some(inst) = sim.prepared.shor.filter(|_| sim.report.readout == sim.prepared.readout) else {
        return Ok(None);
    };
    let mut ys: Vec<u64> = sim
        .report
        .probabilities
        .iter()
        .flat_map(|p| p.keys())
        .chain(sim.report.counts.keys())
        .map(|k| u64::from_str_radix(k, 2).map_err(|e| CliError::Numerical(e.to_string())))
        .collect::<Result<_, _>>()?;
    ys.sort_unstable();
    ys.dedup();
    let estimates = ys
        .into_iter()
        .map(|y| extract_period(y, inst.input_states(), inst.a, inst.m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(ShorSummary {
        a: inst.a,
        m: inst.m,
        estimates,
    }))
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let sim = run_simulation(args)?;
    let shor = shor_summary(&sim)?;
    let text = match args.format {
        Format::Csv => sim.report.to_csv()?,
        Format::Json => {
            let mut value = json!({
                "circuit": sim.prepared.label,
                "n": sim.prepared.sequence.n(),
                "rank_trajectory": sim.run.max_ranks(),
                "final_ranks": sim.run.state.ranks(),
                "report": sim.report,
            });
            if let Some(s) = &shor {
                value["shor"] = serde_json::to_value(s).map_err(|e| CliError::Io(e.to_string()))?;
            }
            serde_json::to_string_pretty(&value).map_err(|e| CliError::Io(e.to_string()))? + "\n"
        }
    };
    write_output(&args.out, &text)?;
    eprintln!(
        "{}: n={} groups={} max_rank={} samples={} seed={} elapsed={:.3}s",
        sim.prepared.label,
        sim.prepared.sequence.n(),
        sim.prepared.sequence.groups().len(),
        sim.run.state.max_rank(),
        sim.report.samples,
        sim.report.seed,
        start.elapsed().as_secs_f64()
    );
    if let Some(s) = shor {
        for e in s.estimates {
            let factors = e.factors.map_or("none".to_string(), |(p, q)| format!("({p}, {q})"));
            eprintln!("  y={} q={} a^q=1 mod M: {} factors: {factors}", e.y, e.q, e.verified);
        }
    }
    Ok(())
}

/// One benchmark row.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub builtin: String,
    pub size: usize,
    pub samples: u64,
    pub repeats: usize,
    pub mean_s: f64,
    pub std_s: f64,
    pub max_rank: usize,
    pub rank_trajectory: Vec<usize>,
}

pub fn bench_rows(args: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    let base = Builtin::parse(&format!("{}:1", args.builtin))?;
    let sizes = parse_positions(&args.sizes)?;
    if sizes.is_empty() || args.repeats == 0 {
        return Err(CliError::Schema("bench needs at least one size and one repeat".into()));
    }
    let mut rows = Vec::new();
    for size in sizes {
        let builtin = base.with_size(size)?;
        let mut times = Vec::with_capacity(args.repeats);
        let mut trajectory = Vec::new();
        for rep in 0..args.repeats {
            let start = Instant::now();
            let mut prepared = Prepared::from_builtin(&builtin, None)?;
            if matches!(builtin, Builtin::Qft(_) | Builtin::InverseQft(_)) {
                // random basis inputs, one per repeat
                let mut rng = sample_rng(args.seed, rep as u64);
                let bits: Vec<u8> = (0..size).map(|_| rng.random_range(0..2u8)).collect();
                prepared.initial = Mps::from_basis_state(&bits)?;
            }
            let run = run_gate_sequence(&prepared.sequence, &prepared.initial, &prepared.policy)?;
            if args.samples > 0 {
                let plan = MeasurementPlan::new(prepared.sequence.n(), &prepared.readout, args.samples, args.seed)?
                    .with_readout(&prepared.readout)?;
                mpoq::sampling::sample(&run.state, &plan)?;
            }
            times.push(start.elapsed().as_secs_f64());
            trajectory = run.max_ranks();
        }
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / times.len() as f64;
        rows.push(BenchRow {
            builtin: args.builtin.clone(),
            size,
            samples: args.samples,
            repeats: args.repeats,
            mean_s: mean,
            std_s: var.sqrt(),
            max_rank: trajectory.iter().copied().max().unwrap_or(1),
            rank_trajectory: trajectory,
        });
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("builtin,size,samples,repeats,mean_s,std_s,max_rank,rank_trajectory\n");
    for r in rows {
        let traj: Vec<String> = r.rank_trajectory.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{},{}\n",
            r.builtin,
            r.size,
            r.samples,
            r.repeats,
            r.mean_s,
            r.std_s,
            r.max_rank,
            traj.join(";")
        ));
    }
    out
}

fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let rows = bench_rows(args)?;
    write_output(&args.out, &bench_csv(&rows))
}

pub fn verify_options(args: &VerifyArgs) -> Result<VerifyOptions, CliError> {
    let mut options = VerifyOptions {
        oracle: args.oracle,
        ..Default::default()
    };
    if let Some(only) = &args.only {
        options.checks = only
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse::<Check>())
            .collect::<Result<_, _>>()?;
    }
    Ok(options)
}

fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let report = run_verify(&verify_options(args)?);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let mut out = String::new();
    for o in &report.outcomes {
        out.push_str(&format!(
            "{} {}: {}\n",
            if o.passed { "PASS" } else { "FAIL" },
            o.check,
            o.detail
        ));
    }
    write_output(&None, &out)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failed("verification failed".into()))
    }
}
