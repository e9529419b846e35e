use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("invalid range: start {start} > end {end}")]
    InvalidRange { start: usize, end: usize },
    #[error("thread count must be at least 1")]
    ZeroThreads,
    #[error("chunk size must be at least 1")]
    ZeroChunk,
    #[error("iteration count must be at least 1")]
    EmptyWorkload,
    #[error("work multiplier must be at least 1")]
    ZeroWork,
    #[error("mean busy time is zero")]
    NoBusyTime,
    #[error("unknown scheduler `{0}`")]
    UnknownScheduler(alloc::string::String),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(alloc::string::String),
}
