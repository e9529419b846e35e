//! Reference schedulers sharing the IDWS loop interface.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::time::Instant;

use idws_core::guided::GuidedCursor;
use idws_core::{pick_random_victim, static_range, CoreError, IterationRange, RunMetrics};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SchedError;
use crate::team::{Team, ThreadStats};

/// Thread `t` runs exactly its static block.
pub fn static_for<F>(team: &Team, n: usize, body: &F) -> Result<RunMetrics, SchedError>
where
    F: Fn(usize) -> u64 + Sync,
{
    team.run(|ctx| {
        let mut stats = ThreadStats::default();
        stats.execute(
            static_range(n, ctx.threads, ctx.tid),
            ctx.record_chunks,
            body,
        );
        Ok(stats)
    })
}

/// Thread `t` runs every block `b` of `chunk` iterations with `b mod p == t`.
pub fn static_chunked_for<F>(
    team: &Team,
    n: usize,
    chunk: usize,
    body: &F,
) -> Result<RunMetrics, SchedError>
where
    F: Fn(usize) -> u64 + Sync,
{
    if chunk == 0 {
        return Err(CoreError::ZeroChunk.into());
    }
    team.run(|ctx| {
        let mut stats = ThreadStats::default();
        let t0 = Instant::now();
        let stride = chunk * ctx.threads;
        let mut sum = 0u64;
        let mut block_start = ctx.tid * chunk;
        while block_start < n {
            let block = IterationRange {
                start: block_start,
                end: (block_start + chunk).min(n),
            };
            for i in block.iter() {
                sum = sum.wrapping_add(body(i));
            }
            stats.chunks += 1;
            if ctx.record_chunks {
                stats.log.push(block);
            }
            block_start = block_start.saturating_add(stride);
        }
        stats.checksum = sum;
        if stats.chunks > 0 {
            stats.busy = t0.elapsed();
        }
        Ok(stats)
    })
}

fn check_counter_headroom(n: usize, chunk: usize, threads: usize) -> Result<(), SchedError> {
    let overshoot = chunk.saturating_mul(threads);
    if n.checked_add(overshoot).is_none() {
        return Err(SchedError::IterationSpaceTooLarge {
            n,
            max: usize::MAX - overshoot,
        });
    }
    Ok(())
}

/// Single shared counter advanced by `chunk` with fetch-and-add.
pub fn dynamic_for<F>(
    team: &Team,
    n: usize,
    chunk: usize,
    body: &F,
) -> Result<RunMetrics, SchedError>
where
    F: Fn(usize) -> u64 + Sync,
{
    if chunk == 0 {
        return Err(CoreError::ZeroChunk.into());
    }
    check_counter_headroom(n, chunk, team.threads)?;
    let counter = AtomicUsize::new(0);
    team.run(|ctx| {
        let mut stats = ThreadStats::default();
        loop {
            let start = counter.fetch_add(chunk, Ordering::Relaxed);
            if start >= n {
                break;
            }
            let range = IterationRange {
                start,
                end: (start + chunk).min(n),
            };
            stats.execute(range, ctx.record_chunks, body);
        }
        Ok(stats)
    })
}

/// Shared counter whose grab size shrinks geometrically round by round.
pub fn guided_for<F>(
    team: &Team,
    n: usize,
    divisor_multiplier: usize,
    body: &F,
) -> Result<RunMetrics, SchedError>
where
    F: Fn(usize) -> u64 + Sync,
{
    if divisor_multiplier == 0 {
        return Err(CoreError::ZeroChunk.into());
    }
    let counter = AtomicUsize::new(0);
    team.run(|ctx| {
        let mut stats = ThreadStats::default();
        let mut cursor = GuidedCursor::new(n, ctx.threads, divisor_multiplier);
        let mut current = counter.load(Ordering::Relaxed);
        while current < n {
            let size = cursor.chunk_at(current);
            match counter.compare_exchange_weak(
                current,
                current + size,
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => {
                    stats.execute(
                        IterationRange {
                            start: current,
                            end: current + size,
                        },
                        ctx.record_chunks,
                        body,
                    );
                    current = counter.load(Ordering::Relaxed);
                }
                Err(seen) => current = seen,
            }
        }
        Ok(stats)
    })
}

/// Largest iteration count the packed `(start, end)` ranges can address.
pub const RANDOM_STEAL_MAX_N: usize = u32::MAX as usize;

#[inline]
fn pack(start: usize, end: usize) -> u64 {
    ((start as u64) << 32) | end as u64
}

#[inline]
fn unpack(v: u64) -> (usize, usize) {
    ((v >> 32) as usize, (v & 0xffff_ffff) as usize)
}

/// Classic range stealing: owners consume their range from the front, idle
/// threads pick victims uniformly at random and take up to `chunk`
/// iterations (at most half of what is left) off the back. Both ends live in
/// one atomic word updated by compare-and-swap.
pub fn random_steal_for<F>(
    team: &Team,
    n: usize,
    chunk: usize,
    seed: u64,
    body: &F,
) -> Result<RunMetrics, SchedError>
where
    F: Fn(usize) -> u64 + Sync,
{
    if chunk == 0 {
        return Err(CoreError::ZeroChunk.into());
    }
    if n > RANDOM_STEAL_MAX_N {
        return Err(SchedError::IterationSpaceTooLarge {
            n,
            max: RANDOM_STEAL_MAX_N,
        });
    }
    let p = team.threads;
    let ranges: Vec<AtomicU64> = (0..p)
        .map(|t| {
            let r = static_range(n, p, t);
            AtomicU64::new(pack(r.start, r.end))
        })
        .collect();
    let completed = AtomicUsize::new(0);

    team.run(|ctx| {
        let me = &ranges[ctx.tid];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ctx.tid as u64);
        let mut stats = ThreadStats::default();
        let mut sum = 0u64;
        loop {
            // own work, front to back
            let t0 = Instant::now();
            let mut first = None;
            let mut last = 0;
            let mut done = 0usize;
            loop {
                let v = me.load(Ordering::Acquire);
                let (start, end) = unpack(v);
                if start >= end {
                    break;
                }
                if me
                    .compare_exchange_weak(
                        v,
                        pack(start + 1, end),
                        Ordering::AcqRel,
                        Ordering::Relaxed,
                    )
                    .is_ok()
                {
                    first.get_or_insert(start);
                    last = start + 1;
                    done += 1;
                    sum = sum.wrapping_add(body(start));
                }
            }
            if done > 0 {
                stats.busy += t0.elapsed();
                stats.chunks += 1;
                if ctx.record_chunks {
                    stats.log.push(IterationRange {
                        start: first.unwrap_or(last),
                        end: last,
                    });
                }
                completed.fetch_add(done, Ordering::AcqRel);
            }

            // steal
            let mut misses = 0u32;
            let stolen = loop {
                if completed.load(Ordering::Acquire) >= n || ctx.aborted() {
                    break None;
                }
                let Some(victim) = pick_random_victim(&mut rng, ctx.tid, p) else {
                    break None;
                };
                stats.steal_attempts += 1;
                let target = &ranges[victim];
                let v = target.load(Ordering::Acquire);
                let (start, end) = unpack(v);
                let left = end.saturating_sub(start);
                if left >= 2 {
                    let take = chunk.min(left / 2);
                    if target
                        .compare_exchange(
                            v,
                            pack(start, end - take),
                            Ordering::AcqRel,
                            Ordering::Relaxed,
                        )
                        .is_ok()
                    {
                        stats.steals_granted += 1;
                        break Some((end - take, end));
                    }
                }
                stats.steals_refused += 1;
                misses += 1;
                if misses.is_multiple_of(16) {
                    std::thread::yield_now();
                } else {
                    std::hint::spin_loop();
                }
            };
            match stolen {
                // our own word is empty, so no thief will race this store
                Some((start, end)) => me.store(pack(start, end), Ordering::Release),
                None => break,
            }
        }
        stats.checksum = sum;
        Ok(stats)
    })
}
