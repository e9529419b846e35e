use alloc::vec::Vec;
use core::fmt;

use crate::error::CoreError;

/// Half-open interval `[start, end)` of loop indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct IterationRange {
    pub start: usize,
    pub end: usize,
}

impl IterationRange {
    pub fn new(start: usize, end: usize) -> Result<Self, CoreError> {
        if start > end {
            return Err(CoreError::InvalidRange { start, end });
        }
        Ok(Self { start, end })
    }

    pub const fn empty_at(at: usize) -> Self {
        Self { start: at, end: at }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }

    pub fn iter(&self) -> core::ops::Range<usize> {
        self.start..self.end
    }
}

impl fmt::Debug for IterationRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

impl fmt::Display for IterationRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<core::ops::Range<usize>> for IterationRange {
    fn from(r: core::ops::Range<usize>) -> Self {
        debug_assert!(r.start <= r.end);
        Self {
            start: r.start,
            end: r.end,
        }
    }
}

/// The `tid`-th block of an equal split of `[0, n)` into `p` blocks. The first
/// `n % p` blocks carry one extra iteration.
pub fn static_range(n: usize, p: usize, tid: usize) -> IterationRange {
    debug_assert!(p >= 1 && tid < p);
    let base = n / p;
    let extra = n % p;
    let start = tid * base + tid.min(extra);
    let len = base + usize::from(tid < extra);
    IterationRange {
        start,
        end: start + len,
    }
}

pub fn partition_static(n: usize, p: usize) -> Result<Vec<IterationRange>, CoreError> {
    if p == 0 {
        return Err(CoreError::ZeroThreads);
    }
    Ok((0..p).map(|t| static_range(n, p, t)).collect())
}

/// Thread that owns index `i` under round-robin interleaving of `chunk`-sized blocks.
#[inline]
pub fn interleaved_owner(i: usize, chunk: usize, p: usize) -> usize {
    (i / chunk) % p
}
