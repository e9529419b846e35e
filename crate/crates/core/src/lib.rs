#![no_std]

//! Pure scheduling logic for interrupt-driven work-sharing loops.
//!
//! Everything here is free of threads and IO: iteration ranges and static
//! partitioning, the donor-side split arithmetic, max-remaining victim
//! ranking, the guided chunk rule, the synthetic state-array workloads, run
//! metrics and the exactly-once verifier. The `idws` crate builds the
//! runtime, the baselines and the benchmark CLI on top of it.

extern crate alloc;

pub mod donation;
pub mod error;
pub mod guided;
pub mod kernel;
pub mod kind;
pub mod metrics;
pub mod range;
pub mod verify;
pub mod victim;
pub mod workload;

pub use crate::donation::{estimate_remaining, split_donation, Donation, DonationReply};
pub use crate::error::CoreError;
pub use crate::guided::{guided_grab_sizes, guided_next_chunk};
pub use crate::kernel::{
    fixed_point, kernel_cost, kernel_cost_with, KernelMath, PortableMath, DEFAULT_WORK,
};
pub use crate::kind::SchedulerKind;
pub use crate::metrics::{imbalance, median, RunMetrics};
pub use crate::range::{interleaved_owner, partition_static, static_range, IterationRange};
pub use crate::verify::{verify_exactly_once, ExactlyOnceBitmap, VerifyReport};
pub use crate::victim::{pick_random_victim, select_victim, Candidate};
pub use crate::workload::{gen_states, Distribution, StateArray, WorkloadSpec};
