use idws_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchedError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("interrupt transport setup failed: {0}")]
    Transport(String),
    #[error("an asynchronous-interrupt registry is already initialized in this process")]
    AlreadyInitialized,
    #[error("registry has been finalized")]
    Finalized,
    #[error("registry still has {0} thread(s) inside a loop")]
    LoopInFlight(usize),
    #[error("team has {team} threads but the registry has {registry}")]
    TeamMismatch { team: usize, registry: usize },
    #[error("thread id {tid} out of range for {threads} threads")]
    BadThreadId { tid: usize, threads: usize },
    #[error("iteration count {n} exceeds the scheduler's index capacity {max}")]
    IterationSpaceTooLarge { n: usize, max: usize },
    #[error("loop body panicked on thread {tid}")]
    BodyPanicked { tid: usize },
}
