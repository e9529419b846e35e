use alloc::vec::Vec;
use core::time::Duration;

use crate::error::CoreError;
use crate::range::IterationRange;

/// Measurements from one execution of a parallel loop.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunMetrics {
    pub wall_time: Duration,
    /// Time each thread spent executing iterations.
    pub per_thread_busy: Vec<Duration>,
    pub steal_attempts: u64,
    pub steals_granted: u64,
    pub steals_refused: u64,
    pub chunks_executed: Vec<u64>,
    /// Wrapping sum of the values returned by the loop body.
    pub checksum: u64,
    /// Chunks in execution order per thread, filled only when chunk
    /// recording is switched on for the team.
    pub chunk_log: Vec<Vec<IterationRange>>,
}

impl RunMetrics {
    pub fn with_threads(p: usize) -> Self {
        Self {
            per_thread_busy: alloc::vec![Duration::ZERO; p],
            chunks_executed: alloc::vec![0; p],
            ..Self::default()
        }
    }

    pub fn wall_secs(&self) -> f64 {
        self.wall_time.as_secs_f64()
    }

    pub fn threads(&self) -> usize {
        self.per_thread_busy.len()
    }

    pub fn total_chunks(&self) -> u64 {
        self.chunks_executed.iter().sum()
    }
}

/// `max(busy) / mean(busy)`; 1.0 is a perfectly balanced run.
pub fn imbalance(metrics: &RunMetrics) -> Result<f64, CoreError> {
    let busy: Vec<f64> = metrics
        .per_thread_busy
        .iter()
        .map(Duration::as_secs_f64)
        .collect();
    imbalance_of(&busy)
}

pub fn imbalance_of(busy: &[f64]) -> Result<f64, CoreError> {
    if busy.is_empty() {
        return Err(CoreError::ZeroThreads);
    }
    let mean = busy.iter().sum::<f64>() / busy.len() as f64;
    if mean <= 0.0 {
        return Err(CoreError::NoBusyTime);
    }
    let max = busy.iter().copied().fold(f64::MIN, f64::max);
    Ok(max / mean)
}

/// Median of `values`, averaging the two middle elements for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}
