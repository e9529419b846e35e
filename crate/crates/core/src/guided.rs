//! Guided self-scheduling with exponentially shrinking chunks.
//!
//! The chunk size is recomputed once per round of `p` grabs from the
//! iterations left at the start of the round, so four threads over 60
//! iterations take 8,8,8,8 then 4,4,4,4 then 2,2,2,2 then 1,1,1,1.

use alloc::vec::Vec;

/// Chunk size for a round that starts with `remaining` iterations left:
/// `max(1, ceil(remaining / (divisor_multiplier * p)))`.
#[inline]
pub fn guided_next_chunk(remaining: usize, p: usize, divisor_multiplier: usize) -> usize {
    let divisor = divisor_multiplier.max(1).saturating_mul(p.max(1));
    remaining.div_ceil(divisor).max(1)
}

/// Round structure of a guided loop over `[0, n)`.
///
/// Grabs only ever start at round boundaries plus multiples of the round's
/// chunk size, so the size of a grab is a pure function of the shared
/// counter value it is taken at. Any interleaving of threads therefore
/// produces the same sequence of grabs in counter order.
#[derive(Clone, Copy, Debug)]
pub struct GuidedCursor {
    n: usize,
    p: usize,
    divisor_multiplier: usize,
    round_start: usize,
    round_end: usize,
    chunk: usize,
}

impl GuidedCursor {
    pub fn new(n: usize, p: usize, divisor_multiplier: usize) -> Self {
        let p = p.max(1);
        let mut cursor = Self {
            n,
            p,
            divisor_multiplier,
            round_start: 0,
            round_end: 0,
            chunk: 0,
        };
        cursor.enter_round(0);
        cursor
    }

    fn enter_round(&mut self, start: usize) {
        self.round_start = start;
        self.chunk = guided_next_chunk(
            self.n.saturating_sub(start),
            self.p,
            self.divisor_multiplier,
        );
        self.round_end = start.saturating_add(self.chunk.saturating_mul(self.p));
    }

    /// Size of the grab that starts at `counter`. Counters must be presented
    /// in non-decreasing order to one cursor.
    pub fn chunk_at(&mut self, counter: usize) -> usize {
        debug_assert!(counter >= self.round_start);
        while counter >= self.round_end && self.round_end < self.n {
            self.enter_round(self.round_end);
        }
        self.chunk.min(self.n.saturating_sub(counter))
    }
}

/// Grab sizes in counter order for a loop of `n` iterations.
pub fn guided_grab_sizes(n: usize, p: usize, divisor_multiplier: usize) -> Vec<usize> {
    let mut cursor = GuidedCursor::new(n, p, divisor_multiplier);
    let mut sizes = Vec::new();
    let mut taken = 0;
    while taken < n {
        let size = cursor.chunk_at(taken);
        sizes.push(size);
        taken += size;
    }
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn first_grab() {
        assert_eq!(guided_next_chunk(60, 4, 2), 8);
        assert_eq!(guided_next_chunk(1, 4, 2), 1);
        assert_eq!(guided_next_chunk(1, 64, 7), 1);
    }

    #[test]
    fn four_thread_sequence() {
        assert_eq!(
            guided_grab_sizes(60, 4, 2),
            vec![8, 8, 8, 8, 4, 4, 4, 4, 2, 2, 2, 2, 1, 1, 1, 1]
        );
    }

    #[test]
    fn empty_loop_has_no_grabs() {
        assert!(guided_grab_sizes(0, 4, 2).is_empty());
    }

    #[test]
    fn last_grab_is_clipped() {
        let sizes = guided_grab_sizes(7, 1, 2);
        assert_eq!(sizes.iter().sum::<usize>(), 7);
        assert_eq!(sizes, vec![4, 2, 1]);
    }
}
