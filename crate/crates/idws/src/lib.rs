//! Parallel-for runtime built around interrupt-driven work sharing, with
//! the classic loop schedulers alongside for comparison and a synthetic
//! benchmark harness.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod error;
pub mod format;
pub mod idws;
pub mod registry;
pub mod sched;
pub mod team;
pub mod transport;

pub use crate::error::SchedError;
pub use crate::idws::{donate, handle_share_request, idws_parallel_for};
pub use crate::registry::{
    registry_finalize, registry_init, Gate, Registry, SlotState, ThreadSlot,
};
pub use crate::team::{hardware_threads, PinPolicy, Team, ThreadStats, WorkerCtx};
pub use crate::transport::TransportMode;
pub use idws_core;
