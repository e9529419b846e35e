//! Benchmark matrix driver behind the `idws-bench` binary.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use idws_core::{
    imbalance, median, Distribution, RunMetrics, SchedulerKind, WorkloadSpec, DEFAULT_WORK,
};

use crate::bench::{run_workload, BenchError, BenchOptions, BenchRun, Workload};
use crate::format::{write_csv, write_table, CellSummary, ReportRow};
use crate::registry::Registry;
use crate::team::{hardware_threads, pinning_supported, PinPolicy, Team};
use crate::transport::TransportMode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchedulerArg {
    Idws,
    Static,
    Static1,
    Dynamic,
    Guided,
    Randsteal,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    Regular,
    Random,
    DenseEnd,
    DenseBegin,
    Periodic,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransportArg {
    Async,
    Poll,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PinArg {
    None,
    Compact,
    Scatter,
}

#[derive(Parser, Debug)]
#[command(
    name = "idws-bench",
    about = "Compare parallel-for schedulers on synthetic workloads"
)]
struct Args {
    /// Schedulers to run (comma separated or repeated)
    #[arg(
        long = "scheduler",
        value_enum,
        value_delimiter = ',',
        default_value = "all"
    )]
    schedulers: Vec<SchedulerArg>,
    /// Workload distributions (comma separated or repeated)
    #[arg(
        long = "dist",
        value_enum,
        value_delimiter = ',',
        default_value = "all"
    )]
    dists: Vec<DistArg>,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Worker threads [default: hardware thread count]
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Chunk size for dynamic and the steal bound for randsteal
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    chunk: u64,
    #[arg(long = "guided-mult", default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    guided_mult: u64,
    /// Kernel work multiplier
    #[arg(long, default_value_t = DEFAULT_WORK as u64, value_parser = clap::value_parser!(u64).range(1..))]
    work: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    repeats: u64,
    #[arg(long, value_enum, default_value = "poll")]
    transport: TransportArg,
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
    /// Check exactly-once execution of every run
    #[arg(long)]
    verify: bool,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    pin: PinArg,
    /// Also write each distribution's state array to DIR/<dist>.states
    #[arg(long = "export-states", value_name = "DIR")]
    export_states: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Table,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliConfig {
    pub schedulers: Vec<SchedulerKind>,
    pub distributions: Vec<Distribution>,
    pub n: usize,
    pub threads: usize,
    pub chunk: usize,
    pub guided_multiplier: usize,
    pub work: usize,
    pub seed: u64,
    pub repeats: usize,
    pub transport: TransportMode,
    pub format: OutputFormat,
    pub verify: bool,
    pub output_path: Option<PathBuf>,
    pub pin: PinPolicy,
    pub export_states: Option<PathBuf>,
}

impl CliConfig {
    pub fn matrix_size(&self) -> usize {
        self.schedulers.len() * self.distributions.len()
    }

    pub fn team(&self) -> Team {
        Team::new(self.threads).with_pin(self.pin)
    }
}

fn dedup<T: PartialEq>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

fn to_usize(v: u64) -> usize {
    usize::try_from(v).unwrap_or(usize::MAX)
}

/// Parses `argv` (including the program name). Usage errors carry clap's
/// exit code 2.
pub fn parse_args<I, T>(argv: I) -> Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv)?;
    let chunk = to_usize(args.chunk);
    let guided_multiplier = to_usize(args.guided_mult);

    let schedulers = dedup(args.schedulers.iter().flat_map(|s| {
        let kinds: Vec<SchedulerKind> = match s {
            SchedulerArg::Idws => vec![SchedulerKind::Idws],
            SchedulerArg::Static => vec![SchedulerKind::Static],
            SchedulerArg::Static1 => vec![SchedulerKind::StaticChunk(1)],
            SchedulerArg::Dynamic => vec![SchedulerKind::Dynamic(chunk)],
            SchedulerArg::Guided => vec![SchedulerKind::Guided(guided_multiplier)],
            SchedulerArg::Randsteal => vec![SchedulerKind::RandomSteal(chunk)],
            SchedulerArg::All => SchedulerKind::all(chunk, guided_multiplier).to_vec(),
        };
        kinds
    }));
    let distributions = dedup(args.dists.iter().flat_map(|d| match d {
        DistArg::Regular => vec![Distribution::Regular],
        DistArg::Random => vec![Distribution::Random],
        DistArg::DenseEnd => vec![Distribution::DenseEnd],
        DistArg::DenseBegin => vec![Distribution::DenseBegin],
        DistArg::Periodic => vec![Distribution::Periodic],
        DistArg::All => Distribution::ALL.to_vec(),
    }));
    if schedulers.is_empty() || distributions.is_empty() {
        return Err(Args::command_error(
            "select at least one scheduler and one distribution",
        ));
    }

    Ok(CliConfig {
        schedulers,
        distributions,
        n: to_usize(args.n),
        threads: args.threads.map_or_else(hardware_threads, to_usize),
        chunk,
        guided_multiplier,
        work: to_usize(args.work),
        seed: args.seed,
        repeats: to_usize(args.repeats),
        transport: match args.transport {
            TransportArg::Async => TransportMode::AsyncInterrupt,
            TransportArg::Poll => TransportMode::BoundaryPolling,
        },
        format: match args.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Table => OutputFormat::Table,
        },
        verify: args.verify,
        output_path: args.out,
        pin: match args.pin {
            PinArg::None => PinPolicy::None,
            PinArg::Compact => PinPolicy::Compact,
            PinArg::Scatter => PinPolicy::Scatter,
        },
        export_states: args.export_states,
    })
}

impl Args {
    fn command_error(msg: &str) -> clap::Error {
        use clap::CommandFactory;
        Args::command().error(clap::error::ErrorKind::ValueValidation, msg)
    }
}

/// All repeats of one (scheduler, distribution) pair.
#[derive(Clone, Debug)]
pub struct Cell {
    pub scheduler: SchedulerKind,
    pub distribution: Distribution,
    pub runs: Vec<BenchRun>,
    /// Set when the cell could not run at all.
    pub error: Option<String>,
}

impl Cell {
    pub fn walls(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.metrics.wall_secs()).collect()
    }

    pub fn median_wall(&self) -> Option<f64> {
        median(&self.walls())
    }

    pub fn median_imbalance(&self) -> Option<f64> {
        let values: Vec<f64> = self
            .runs
            .iter()
            .filter_map(|r| imbalance(&r.metrics).ok())
            .collect();
        median(&values)
    }

    /// `None` when verification was off.
    pub fn verified(&self) -> Option<bool> {
        if self.error.is_some() {
            return Some(false);
        }
        let checked: Vec<bool> = self
            .runs
            .iter()
            .filter_map(|r| r.verification.as_ref().map(|v| v.ok()))
            .collect();
        (!checked.is_empty()).then(|| checked.iter().all(|&ok| ok))
    }

    pub fn failed(&self) -> bool {
        self.verified() == Some(false)
    }

    pub fn checksum(&self) -> u64 {
        self.runs.first().map_or(0, |r| r.metrics.checksum)
    }
}

#[derive(Clone, Debug)]
pub struct MatrixReport {
    pub config: CliConfig,
    pub cells: Vec<Cell>,
    pub transport_note: Option<String>,
}

impl MatrixReport {
    pub fn exit_status(&self) -> i32 {
        if self.cells.iter().any(Cell::failed) {
            EXIT_FAILURE
        } else {
            EXIT_OK
        }
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        let c = &self.config;
        self.cells
            .iter()
            .flat_map(|cell| {
                cell.runs
                    .iter()
                    .enumerate()
                    .map(move |(repeat, run)| ReportRow {
                        scheduler: cell.scheduler.label(),
                        distribution: cell.distribution.name().into(),
                        n: c.n,
                        threads: c.threads,
                        transport: c.transport.name().into(),
                        repeat,
                        wall_s: run.metrics.wall_secs(),
                        imbalance: imbalance(&run.metrics).unwrap_or(f64::NAN),
                        steal_attempts: run.metrics.steal_attempts,
                        steals_granted: run.metrics.steals_granted,
                        checksum: run.metrics.checksum,
                    })
            })
            .collect()
    }

    pub fn summaries(&self) -> Vec<CellSummary> {
        self.cells
            .iter()
            .map(|cell| {
                let stat = |f: fn(&RunMetrics) -> u64| {
                    let v: Vec<f64> = cell.runs.iter().map(|r| f(&r.metrics) as f64).collect();
                    median(&v).unwrap_or(f64::NAN)
                };
                CellSummary {
                    scheduler: cell.scheduler.label(),
                    distribution: cell.distribution.name().into(),
                    median_wall_s: cell.median_wall().unwrap_or(f64::NAN),
                    median_imbalance: cell.median_imbalance().unwrap_or(f64::NAN),
                    median_steal_attempts: stat(|m| m.steal_attempts),
                    median_steals_granted: stat(|m| m.steals_granted),
                    checksum: cell.checksum(),
                    verified: cell.verified(),
                }
            })
            .collect()
    }

    pub fn cell(&self, scheduler: SchedulerKind, distribution: Distribution) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.scheduler == scheduler && c.distribution == distribution)
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        match self.config.format {
            OutputFormat::Csv => write_csv(out, &self.rows()),
            OutputFormat::Table => {
                let c = &self.config;
                writeln!(
                    out,
                    "n={} threads={} transport={} work={} seed={} repeats={} pin={}{}",
                    c.n,
                    c.threads,
                    c.transport,
                    c.work,
                    c.seed,
                    c.repeats,
                    c.pin,
                    if c.pin != PinPolicy::None && !pinning_supported() {
                        " (unsupported here, ignored)"
                    } else {
                        ""
                    }
                )?;
                if let Some(note) = &self.transport_note {
                    writeln!(out, "{note}")?;
                }
                write_table(&mut out, &self.summaries())?;
                for cell in self.cells.iter().filter(|c| c.failed()) {
                    if let Some(err) = &cell.error {
                        writeln!(out, "{} {}: {err}", cell.scheduler, cell.distribution)?;
                    }
                    for (k, run) in cell.runs.iter().enumerate() {
                        if let Some(v) = run.verification.as_ref().filter(|v| !v.ok()) {
                            writeln!(
                                out,
                                "{} {} repeat {k}: {v}",
                                cell.scheduler, cell.distribution
                            )?;
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// Runs one cell; the matrix driver calls this for every pair.
pub trait CellRunner {
    fn run_cell(
        &self,
        kind: SchedulerKind,
        workload: &Workload,
        team: &Team,
        repeats: usize,
        opts: BenchOptions<'_>,
    ) -> Result<Vec<BenchRun>, BenchError>;
}

/// The real schedulers.
pub struct Schedulers;

impl CellRunner for Schedulers {
    fn run_cell(
        &self,
        kind: SchedulerKind,
        workload: &Workload,
        team: &Team,
        repeats: usize,
        opts: BenchOptions<'_>,
    ) -> Result<Vec<BenchRun>, BenchError> {
        run_workload(kind, workload, team, repeats, opts)
    }
}

pub fn run_matrix(config: &CliConfig) -> Result<MatrixReport, BenchError> {
    run_matrix_with(config, &Schedulers)
}

pub fn run_matrix_with<R: CellRunner>(
    config: &CliConfig,
    runner: &R,
) -> Result<MatrixReport, BenchError> {
    let needs_registry = config.schedulers.contains(&SchedulerKind::Idws);
    let mut transport_note = None;
    let registry = if needs_registry {
        match Registry::new(config.threads, config.transport) {
            Ok(r) => Some(r),
            Err(e) => {
                transport_note = Some(format!("idws registry unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };

    let team = config.team();
    let mut cells = Vec::with_capacity(config.matrix_size());
    for &distribution in &config.distributions {
        let spec = WorkloadSpec {
            distribution,
            n: config.n,
            seed: config.seed,
            work: config.work,
        };
        let workload = Workload::generate(spec)?;
        if let Some(dir) = &config.export_states {
            let path = dir.join(format!("{}.states", distribution.name()));
            workload.export(&path).map_err(|source| BenchError::Io {
                path: path.clone(),
                source,
            })?;
        }
        for &scheduler in &config.schedulers {
            let opts = BenchOptions {
                registry: registry.as_ref(),
                verify: config.verify,
                seed: config.seed,
            };
            let (runs, error) =
                match runner.run_cell(scheduler, &workload, &team, config.repeats, opts) {
                    Ok(runs) => (runs, None),
                    Err(e) => (Vec::new(), Some(e.to_string())),
                };
            cells.push(Cell {
                scheduler,
                distribution,
                runs,
                error,
            });
        }
    }
    if let Some(r) = &registry {
        let _ = r.finalize();
    }
    Ok(MatrixReport {
        config: config.clone(),
        cells,
        transport_note,
    })
}

/// Writes the report to the configured destination.
pub fn emit(report: &MatrixReport, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => report.write(BufWriter::new(File::create(p)?)),
        None => report.write(io::stdout().lock()),
    }
}

/// Full CLI flow; returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let report = match run_matrix(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("idws-bench: {e}");
            return EXIT_FAILURE;
        }
    };
    if let Err(e) = emit(&report, config.output_path.as_deref()) {
        eprintln!("idws-bench: cannot write report: {e}");
        return EXIT_FAILURE;
    }
    report.exit_status()
}
