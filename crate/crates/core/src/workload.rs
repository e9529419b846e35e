//! Synthetic state arrays.
//!
//! Random draws come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`, so a `(distribution, n, seed)` triple always
//! yields the same bytes.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::kernel::DEFAULT_WORK;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distribution {
    /// Every element is 2.
    Regular,
    /// Uniform over `{0,1,2,3}`.
    Random,
    /// First tenth uniform over `{0,1,2}`, middle empty, last tenth all 3.
    DenseEnd,
    /// Element-wise mirror of `DenseEnd`.
    DenseBegin,
    /// `i mod 4`.
    Periodic,
}

impl Distribution {
    pub const ALL: [Distribution; 5] = [
        Distribution::Regular,
        Distribution::Random,
        Distribution::DenseEnd,
        Distribution::DenseBegin,
        Distribution::Periodic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Regular => "regular",
            Distribution::Random => "random",
            Distribution::DenseEnd => "dense-end",
            Distribution::DenseBegin => "dense-begin",
            Distribution::Periodic => "periodic",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Distribution::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| CoreError::UnknownDistribution(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkloadSpec {
    pub distribution: Distribution,
    pub n: usize,
    pub seed: u64,
    pub work: usize,
}

impl WorkloadSpec {
    pub fn new(distribution: Distribution, n: usize, seed: u64) -> Self {
        Self {
            distribution,
            n,
            seed,
            work: DEFAULT_WORK,
        }
    }

    pub fn with_work(mut self, work: usize) -> Self {
        self.work = work;
        self
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.n == 0 {
            return Err(CoreError::EmptyWorkload);
        }
        if self.work == 0 {
            return Err(CoreError::ZeroWork);
        }
        Ok(())
    }
}

/// One state in `0..=3` per loop iteration.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StateArray(Vec<u8>);

impl StateArray {
    pub fn from_vec(states: Vec<u8>) -> Option<Self> {
        states.iter().all(|&s| s <= 3).then_some(StateArray(states))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }
}

pub fn gen_states(spec: &WorkloadSpec) -> Result<StateArray, CoreError> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let states = match spec.distribution {
        Distribution::Regular => alloc::vec![2; n],
        Distribution::Random => (0..n).map(|_| rng.gen_range(0..4u8)).collect(),
        Distribution::DenseEnd => dense_end(n, &mut rng),
        Distribution::DenseBegin => {
            let mut s = dense_end(n, &mut rng);
            s.reverse();
            s
        }
        Distribution::Periodic => (0..n).map(|i| (i % 4) as u8).collect(),
    };
    Ok(StateArray(states))
}

fn dense_end(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let tenth = n / 10;
    let mut states = alloc::vec![0u8; n];
    for s in &mut states[..tenth] {
        *s = rng.gen_range(0..3u8);
    }
    for s in &mut states[n - tenth..] {
        *s = 3;
    }
    states
}
