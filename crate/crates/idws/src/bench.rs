//! Synthetic workload runs.

use std::io;
use std::path::Path;

use idws_core::{
    fixed_point, gen_states, kernel_cost_with, CoreError, ExactlyOnceBitmap, KernelMath,
    RunMetrics, SchedulerKind, StateArray, VerifyReport, WorkloadSpec,
};

use crate::format;
use crate::registry::Registry;
use crate::sched::{run_scheduler, DispatchError, SchedEnv};
use crate::team::Team;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error("repeats must be at least 1")]
    ZeroRepeats,
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Platform math routines, much faster than the portable ones for the large
/// arguments the kernel produces.
pub struct HostMath;

impl KernelMath for HostMath {
    #[inline]
    fn sin(x: f64) -> f64 {
        x.sin()
    }
    #[inline]
    fn cos(x: f64) -> f64 {
        x.cos()
    }
    #[inline]
    fn sinh(x: f64) -> f64 {
        x.sinh()
    }
}

/// A generated state array together with the spec it came from.
#[derive(Clone, Debug)]
pub struct Workload {
    spec: WorkloadSpec,
    states: StateArray,
}

impl Workload {
    pub fn generate(spec: WorkloadSpec) -> Result<Self, CoreError> {
        let states = gen_states(&spec)?;
        Ok(Self { spec, states })
    }

    pub fn spec(&self) -> &WorkloadSpec {
        &self.spec
    }

    pub fn states(&self) -> &StateArray {
        &self.states
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    /// Fixed-point kernel output for iteration `i`.
    #[inline]
    pub fn iteration(&self, i: usize) -> u64 {
        fixed_point(kernel_cost_with::<HostMath>(
            i,
            self.states.as_slice()[i],
            self.spec.work,
        ))
    }

    /// Checksum of a sequential pass, for comparison with parallel runs.
    pub fn serial_checksum(&self) -> u64 {
        (0..self.n()).fold(0u64, |acc, i| acc.wrapping_add(self.iteration(i)))
    }

    pub fn export(&self, path: &Path) -> io::Result<()> {
        format::write_states_file(path, &self.states)
    }
}

#[derive(Clone, Copy, Default)]
pub struct BenchOptions<'a> {
    pub registry: Option<&'a Registry>,
    /// Wrap the body with the exactly-once verifier.
    pub verify: bool,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct BenchRun {
    pub metrics: RunMetrics,
    pub verification: Option<VerifyReport>,
}

impl BenchRun {
    pub fn verified_ok(&self) -> bool {
        self.verification.as_ref().is_none_or(VerifyReport::ok)
    }
}

/// Generates the workload and runs `kind` over it `repeats` times.
pub fn run_benchmark(
    kind: SchedulerKind,
    spec: &WorkloadSpec,
    team: &Team,
    repeats: usize,
    opts: BenchOptions<'_>,
) -> Result<Vec<BenchRun>, BenchError> {
    let workload = Workload::generate(*spec)?;
    run_workload(kind, &workload, team, repeats, opts)
}

pub fn run_workload(
    kind: SchedulerKind,
    workload: &Workload,
    team: &Team,
    repeats: usize,
    opts: BenchOptions<'_>,
) -> Result<Vec<BenchRun>, BenchError> {
    if team.threads == 0 {
        return Err(CoreError::ZeroThreads.into());
    }
    if repeats == 0 {
        return Err(BenchError::ZeroRepeats);
    }
    if kind == SchedulerKind::Idws && opts.registry.is_none() {
        return Err(DispatchError::MissingRegistry.into());
    }
    let env = SchedEnv {
        registry: opts.registry,
        seed: opts.seed,
    };
    let n = workload.n();
    (0..repeats)
        .map(|_| {
            if opts.verify {
                let bitmap = ExactlyOnceBitmap::new(n);
                let metrics = run_scheduler(kind, team, n, env, &|i| {
                    bitmap.mark(i);
                    workload.iteration(i)
                })?;
                Ok(BenchRun {
                    metrics,
                    verification: Some(bitmap.report()),
                })
            } else {
                let metrics = run_scheduler(kind, team, n, env, &|i| workload.iteration(i))?;
                Ok(BenchRun {
                    metrics,
                    verification: None,
                })
            }
        })
        .collect()
}
