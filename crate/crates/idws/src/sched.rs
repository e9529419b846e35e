//! One entry point for every scheduler.

use idws_core::{RunMetrics, SchedulerKind};

use crate::baselines;
use crate::error::SchedError;
use crate::idws::idws_parallel_for;
use crate::registry::Registry;
use crate::team::Team;

/// Everything a scheduler may need besides the loop itself.
#[derive(Clone, Copy, Default)]
pub struct SchedEnv<'a> {
    /// Required for `SchedulerKind::Idws`.
    pub registry: Option<&'a Registry>,
    /// Victim-choice seed for `SchedulerKind::RandomSteal`.
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum DispatchError {
    #[error("the idws scheduler needs an initialized registry")]
    MissingRegistry,
    #[error(transparent)]
    Sched(#[from] SchedError),
}

pub fn run_scheduler<F>(
    kind: SchedulerKind,
    team: &Team,
    n: usize,
    env: SchedEnv<'_>,
    body: &F,
) -> Result<RunMetrics, DispatchError>
where
    F: Fn(usize) -> u64 + Sync,
{
    kind.validate().map_err(SchedError::from)?;
    let metrics = match kind {
        SchedulerKind::Idws => {
            let registry = env.registry.ok_or(DispatchError::MissingRegistry)?;
            idws_parallel_for(registry, team, n, body)?
        }
        SchedulerKind::Static => baselines::static_for(team, n, body)?,
        SchedulerKind::StaticChunk(c) => baselines::static_chunked_for(team, n, c, body)?,
        SchedulerKind::Dynamic(c) => baselines::dynamic_for(team, n, c, body)?,
        SchedulerKind::Guided(m) => baselines::guided_for(team, n, m, body)?,
        SchedulerKind::RandomSteal(c) => baselines::random_steal_for(team, n, c, env.seed, body)?,
    };
    Ok(metrics)
}
