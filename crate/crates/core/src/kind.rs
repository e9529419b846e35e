use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;

use crate::error::CoreError;

/// Loop scheduling strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchedulerKind {
    Idws,
    Static,
    /// Round-robin interleaving of `chunk`-sized blocks.
    StaticChunk(usize),
    Dynamic(usize),
    /// Guided allocation; the field is the divisor multiplier.
    Guided(usize),
    RandomSteal(usize),
}

impl SchedulerKind {
    /// Parses a CLI scheduler name. `chunk` parameterises `dynamic` and
    /// `randsteal`; `guided_multiplier` parameterises `guided`.
    pub fn from_name(
        name: &str,
        chunk: usize,
        guided_multiplier: usize,
    ) -> Result<Self, CoreError> {
        let kind = match name {
            "idws" => SchedulerKind::Idws,
            "static" => SchedulerKind::Static,
            "static1" => SchedulerKind::StaticChunk(1),
            "dynamic" => SchedulerKind::Dynamic(chunk),
            "guided" => SchedulerKind::Guided(guided_multiplier),
            "randsteal" => SchedulerKind::RandomSteal(chunk),
            other => return Err(CoreError::UnknownScheduler(other.to_string())),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn all(chunk: usize, guided_multiplier: usize) -> [SchedulerKind; 6] {
        [
            SchedulerKind::Idws,
            SchedulerKind::Static,
            SchedulerKind::StaticChunk(1),
            SchedulerKind::Dynamic(chunk),
            SchedulerKind::Guided(guided_multiplier),
            SchedulerKind::RandomSteal(chunk),
        ]
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        match *self {
            SchedulerKind::StaticChunk(0)
            | SchedulerKind::Dynamic(0)
            | SchedulerKind::Guided(0)
            | SchedulerKind::RandomSteal(0) => Err(CoreError::ZeroChunk),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            SchedulerKind::Idws => "idws".into(),
            SchedulerKind::Static => "static".into(),
            SchedulerKind::StaticChunk(c) => format!("static{c}"),
            SchedulerKind::Dynamic(_) => "dynamic".into(),
            SchedulerKind::Guided(_) => "guided".into(),
            SchedulerKind::RandomSteal(_) => "randsteal".into(),
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
