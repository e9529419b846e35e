//! Fixed-size worker teams.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use idws_core::{CoreError, IterationRange, RunMetrics};

use crate::error::SchedError;

/// Thread-to-core placement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PinPolicy {
    #[default]
    None,
    /// Thread `t` on cpu `t mod ncpu`.
    Compact,
    /// Threads spread at an even stride over the available cpus.
    Scatter,
}

impl PinPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            PinPolicy::None => "none",
            PinPolicy::Compact => "compact",
            PinPolicy::Scatter => "scatter",
        }
    }

    pub fn cpu_for(&self, tid: usize, threads: usize, cpus: usize) -> Option<usize> {
        let cpus = cpus.max(1);
        match self {
            PinPolicy::None => None,
            PinPolicy::Compact => Some(tid % cpus),
            PinPolicy::Scatter => {
                let stride = (cpus / threads.clamp(1, cpus)).max(1);
                Some((tid * stride + tid * stride / cpus) % cpus)
            }
        }
    }
}

impl fmt::Display for PinPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PinPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(PinPolicy::None),
            "compact" => Ok(PinPolicy::Compact),
            "scatter" => Ok(PinPolicy::Scatter),
            other => Err(format!("unknown pin policy `{other}`")),
        }
    }
}

/// Whether this platform honours pinning requests.
pub fn pinning_supported() -> bool {
    cfg!(target_os = "linux")
}

#[cfg(target_os = "linux")]
fn pin_current(cpu: usize) -> bool {
    // SAFETY: cpu_set_t is plain data; sched_setaffinity(0) targets the caller.
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(cpu, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0
    }
}

#[cfg(not(target_os = "linux"))]
fn pin_current(_cpu: usize) -> bool {
    false
}

pub fn hardware_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Team {
    pub threads: usize,
    pub pin: PinPolicy,
    /// Keep a per-thread log of every chunk executed.
    pub record_chunks: bool,
}

impl Team {
    pub fn new(threads: usize) -> Self {
        Self {
            threads,
            pin: PinPolicy::None,
            record_chunks: false,
        }
    }

    pub fn with_pin(mut self, pin: PinPolicy) -> Self {
        self.pin = pin;
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_chunks = true;
        self
    }

    /// Runs `worker` once on each of `threads` scoped threads and merges the
    /// per-thread statistics. A panicking worker raises the shared abort flag
    /// before the panic is reported as an error.
    pub fn run<W>(&self, worker: W) -> Result<RunMetrics, SchedError>
    where
        W: Fn(&WorkerCtx<'_>) -> Result<ThreadStats, SchedError> + Sync,
    {
        if self.threads == 0 {
            return Err(CoreError::ZeroThreads.into());
        }
        let abort = AtomicBool::new(false);
        let cpus = hardware_threads();
        let started = Instant::now();
        let results: Vec<Result<ThreadStats, SchedError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..self.threads)
                .map(|tid| {
                    let ctx = WorkerCtx {
                        tid,
                        threads: self.threads,
                        record_chunks: self.record_chunks,
                        abort: &abort,
                    };
                    let worker = &worker;
                    let pin = self.pin;
                    scope.spawn(move || {
                        if let Some(cpu) = pin.cpu_for(tid, ctx.threads, cpus) {
                            pin_current(cpu);
                        }
                        match catch_unwind(AssertUnwindSafe(|| worker(&ctx))) {
                            Ok(result) => {
                                if result.is_err() {
                                    ctx.abort.store(true, Ordering::Release);
                                }
                                result
                            }
                            Err(_) => {
                                ctx.abort.store(true, Ordering::Release);
                                Err(SchedError::BodyPanicked { tid })
                            }
                        }
                    })
                })
                .collect();
            handles
                .into_iter()
                .enumerate()
                .map(|(tid, h)| h.join().unwrap_or(Err(SchedError::BodyPanicked { tid })))
                .collect()
        });
        let wall_time = started.elapsed();

        let mut metrics = RunMetrics::with_threads(self.threads);
        metrics.wall_time = wall_time;
        if self.record_chunks {
            metrics.chunk_log = vec![Vec::new(); self.threads];
        }
        for (tid, result) in results.into_iter().enumerate() {
            let stats = result?;
            metrics.per_thread_busy[tid] = stats.busy;
            metrics.chunks_executed[tid] = stats.chunks;
            metrics.steal_attempts += stats.steal_attempts;
            metrics.steals_granted += stats.steals_granted;
            metrics.steals_refused += stats.steals_refused;
            metrics.checksum = metrics.checksum.wrapping_add(stats.checksum);
            if self.record_chunks {
                metrics.chunk_log[tid] = stats.log;
            }
        }
        Ok(metrics)
    }
}

/// What one worker thread knows about its team.
pub struct WorkerCtx<'a> {
    pub tid: usize,
    pub threads: usize,
    pub record_chunks: bool,
    abort: &'a AtomicBool,
}

impl WorkerCtx<'_> {
    pub fn aborted(&self) -> bool {
        self.abort.load(Ordering::Acquire)
    }

    pub fn raise_abort(&self) {
        self.abort.store(true, Ordering::Release);
    }
}

/// Per-thread counters merged into `RunMetrics` after the join.
#[derive(Clone, Debug, Default)]
pub struct ThreadStats {
    pub busy: Duration,
    pub chunks: u64,
    pub steal_attempts: u64,
    pub steals_granted: u64,
    pub steals_refused: u64,
    pub checksum: u64,
    pub log: Vec<IterationRange>,
}

impl ThreadStats {
    /// Runs `body` over `range`, folding its results into the checksum and
    /// charging the elapsed time to `busy`.
    #[inline]
    pub fn execute<F>(&mut self, range: IterationRange, record: bool, body: &F)
    where
        F: Fn(usize) -> u64 + Sync,
    {
        if range.is_empty() {
            return;
        }
        let t0 = Instant::now();
        let mut sum = self.checksum;
        for i in range.iter() {
            sum = sum.wrapping_add(body(i));
        }
        self.checksum = sum;
        self.busy += t0.elapsed();
        self.chunks += 1;
        if record {
            self.log.push(range);
        }
    }
}
