//! Interrupt-driven work-sharing loop driver.
//!
//! Each thread starts on its static block and advertises how many iterations
//! of its current chunk it has completed. A thread that runs dry picks the
//! active same-context thread with the most advertised work left, takes that
//! thread's gate, and asks it to share. The victim answers on its own
//! control flow by handing over the back half of what it has left, minus a
//! one-iteration margin. Ranges are never touched atomically by anyone but
//! their owner.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{fence, Ordering};
use std::time::{Duration, Instant};

use idws_core::{
    select_victim, split_donation, static_range, Candidate, DonationReply, IterationRange,
    RunMetrics,
};

use crate::error::SchedError;
use crate::registry::{
    Registry, ThreadSlot, NOT_WAITING, REPLY_GRANTED, REPLY_PENDING, REPLY_REFUSED,
};
use crate::team::{Team, ThreadStats};
use crate::transport::TransportMode;

/// Smallest advertised remainder that can still yield a non-empty grant.
const MIN_DONATABLE: usize = 3;
const REPLY_POLL: Duration = Duration::from_millis(5);
const SPINS_BEFORE_YIELD: u32 = 64;

/// Splits the victim's range in favour of the thief, or refuses.
///
/// Must run on the victim's control flow. Refuses when the victim is no
/// longer executing iterations, when the two threads are in different loop
/// contexts, or when too little work is left.
pub fn donate(victim: &ThreadSlot, thief: &ThreadSlot) -> DonationReply {
    if !victim.active.load(Ordering::Relaxed) {
        return DonationReply::Refused;
    }
    if victim.context.load(Ordering::Relaxed) != thief.context.load(Ordering::Acquire) {
        return DonationReply::Refused;
    }
    let start = victim.start.load(Ordering::Relaxed);
    let end = victim.end.load(Ordering::Relaxed);
    let processed = victim.processed.load(Ordering::Relaxed);
    match split_donation(start, end, processed) {
        Some(d) => {
            thief.start.store(d.thief_range.start, Ordering::Relaxed);
            thief.end.store(d.thief_range.end, Ordering::Relaxed);
            victim.end.store(d.victim_end, Ordering::Release);
            DonationReply::Granted(d.thief_range)
        }
        None => DonationReply::Refused,
    }
}

fn reply_code(reply: &DonationReply) -> u8 {
    if reply.is_granted() {
        REPLY_GRANTED
    } else {
        REPLY_REFUSED
    }
}

/// Runs the donation for a pending request and wakes the waiting thief.
/// The rendezvous is notified exactly once per call.
pub fn handle_share_request(victim: &ThreadSlot, thief: &ThreadSlot) -> DonationReply {
    let reply = donate(victim, thief);
    {
        let _guard = victim.rendezvous.lock();
        victim.reply.store(reply_code(&reply), Ordering::Release);
    }
    victim.rendezvous.answered.notify_all();
    reply
}

impl Registry {
    fn requester_of(&self, tid: usize) -> Option<usize> {
        let thief = self.slots[tid].requester.load(Ordering::Acquire);
        (thief < self.slots.len() && thief != tid).then_some(thief)
    }

    /// Asynchronous handler body: lock-free, answers through the reply atomic.
    pub(crate) fn answer_request(&self, tid: usize) {
        let victim = &self.slots[tid];
        let reply = match self.requester_of(tid) {
            Some(thief) if !self.abort.load(Ordering::Relaxed) => {
                donate(victim, &self.slots[thief])
            }
            _ => DonationReply::Refused,
        };
        victim.reply.store(reply_code(&reply), Ordering::Release);
    }

    /// Boundary check for the polling transport.
    #[inline]
    fn service(&self, tid: usize) {
        if self.mode() == TransportMode::BoundaryPolling
            && self.slots[tid].pending.load(Ordering::Acquire)
        {
            self.service_slow(tid);
        }
    }

    #[cold]
    #[inline(never)]
    fn service_slow(&self, tid: usize) {
        let me = &self.slots[tid];
        if self.mode() == TransportMode::BoundaryPolling && me.pending.load(Ordering::Acquire) {
            me.pending.store(false, Ordering::Relaxed);
            match self.requester_of(tid) {
                Some(thief) if !self.abort.load(Ordering::Relaxed) => {
                    handle_share_request(me, &self.slots[thief]);
                }
                _ => {
                    {
                        let _guard = me.rendezvous.lock();
                        me.reply.store(REPLY_REFUSED, Ordering::Release);
                    }
                    me.rendezvous.answered.notify_all();
                }
            }
        }
    }

    /// Snapshot of every other thread's advertised state.
    pub fn candidates(&self, self_id: usize) -> Vec<Candidate> {
        self.slots
            .iter()
            .enumerate()
            .filter(|&(id, _)| id != self_id)
            .map(|(id, slot)| {
                let s = slot.state();
                Candidate {
                    id,
                    active: s.active,
                    context: s.context,
                    remaining: s.remaining(),
                }
            })
            .collect()
    }

    /// Chooses a victim for `self_id` and returns it with its gate held.
    /// Threads too close to the end of their chunk to donate are skipped.
    pub fn find_victim(&self, self_id: usize, ctx: u64) -> Option<usize> {
        match self.probe_victim(self_id, ctx) {
            Probe::Victim(v) => Some(v),
            Probe::GatesBusy | Probe::NoCandidates => None,
        }
    }

    fn probe_victim(&self, self_id: usize, ctx: u64) -> Probe {
        let mut snapshot = self.candidates(self_id);
        snapshot.retain(|c| c.remaining >= MIN_DONATABLE);
        let eligible = snapshot.iter().any(|c| c.active && c.context == ctx);
        match select_victim(&snapshot, self_id, ctx, |id| {
            self.slots[id].gate.try_acquire()
        }) {
            Some(v) => Probe::Victim(v),
            None if eligible => Probe::GatesBusy,
            None => Probe::NoCandidates,
        }
    }

    /// Sends a share request to `victim`, whose gate the caller holds, and
    /// waits for the answer. The gate is released before returning.
    pub fn request_share(&self, thief_id: usize, victim_id: usize) -> DonationReply {
        let me = &self.slots[thief_id];
        let victim = &self.slots[victim_id];
        let ctx = me.context.load(Ordering::Relaxed);
        if !victim.active.load(Ordering::Acquire) || victim.context.load(Ordering::Acquire) != ctx {
            victim.gate.release();
            return DonationReply::Refused;
        }
        victim.reply.store(REPLY_PENDING, Ordering::Relaxed);
        victim.requester.store(thief_id, Ordering::Release);

        let delivered = match self.mode() {
            TransportMode::BoundaryPolling => {
                victim.pending.store(true, Ordering::SeqCst);
                // a victim that is itself waiting for a reply sleeps on
                // someone else's rendezvous; wake it there
                let parked_on = victim.waiting_on.load(Ordering::SeqCst);
                if parked_on != NOT_WAITING {
                    let other = &self.slots[parked_on];
                    drop(other.rendezvous.lock());
                    other.rendezvous.answered.notify_all();
                }
                true
            }
            TransportMode::AsyncInterrupt => {
                fence(Ordering::SeqCst);
                deliver_signal(victim)
            }
        };
        if !delivered {
            victim.gate.release();
            return DonationReply::Refused;
        }

        match self.mode() {
            TransportMode::BoundaryPolling => self.wait_polling(thief_id, victim_id),
            TransportMode::AsyncInterrupt => wait_spinning(victim),
        }

        let reply = if victim.reply.load(Ordering::Acquire) == REPLY_GRANTED {
            DonationReply::Granted(IterationRange {
                start: me.start.load(Ordering::Relaxed),
                end: me.end.load(Ordering::Relaxed),
            })
        } else {
            DonationReply::Refused
        };
        victim.gate.release();
        reply
    }

    fn wait_polling(&self, thief_id: usize, victim_id: usize) {
        let me = &self.slots[thief_id];
        let victim = &self.slots[victim_id];
        me.waiting_on.store(victim_id, Ordering::SeqCst);
        loop {
            // Two thieves may each be waiting on the other; keep answering
            // our own requests (with a refusal) while we wait.
            self.service(thief_id);
            let guard = victim.rendezvous.lock();
            if victim.reply.load(Ordering::Acquire) != REPLY_PENDING {
                break;
            }
            if me.pending.load(Ordering::SeqCst) {
                continue;
            }
            let _ = victim
                .rendezvous
                .answered
                .wait_timeout(guard, REPLY_POLL)
                .unwrap_or_else(|e| e.into_inner());
        }
        me.waiting_on.store(NOT_WAITING, Ordering::SeqCst);
    }

    /// Executes the current chunk of `tid`, re-reading the end bound before
    /// every iteration. Returns the range actually executed.
    #[inline]
    fn run_chunk<F>(
        &self,
        tid: usize,
        stats: &mut ThreadStats,
        record: bool,
        body: &F,
    ) -> IterationRange
    where
        F: Fn(usize) -> u64 + Sync,
    {
        let me = &self.slots[tid];
        let polling = self.mode() == TransportMode::BoundaryPolling;
        let start = me.start.load(Ordering::Relaxed);
        let t0 = Instant::now();
        let mut sum = stats.checksum;
        let mut i = start;
        if polling {
            // only our own service call can move `end` in this mode
            let mut end = me.end.load(Ordering::Acquire);
            loop {
                me.processed.store(i - start, Ordering::Release);
                if me.pending.load(Ordering::Acquire) {
                    self.service_slow(tid);
                    end = me.end.load(Ordering::Acquire);
                }
                if i >= end {
                    break;
                }
                sum = sum.wrapping_add(body(i));
                i += 1;
            }
        } else {
            loop {
                me.processed.store(i - start, Ordering::Release);
                if i >= me.end.load(Ordering::Acquire) {
                    break;
                }
                sum = sum.wrapping_add(body(i));
                i += 1;
            }
        }
        stats.checksum = sum;
        let done = IterationRange { start, end: i };
        if !done.is_empty() {
            stats.busy += t0.elapsed();
            stats.chunks += 1;
            if record {
                stats.log.push(done);
            }
        }
        done
    }

    /// The loop as executed by thread `tid`. Every thread of the registry
    /// must call this with the same `n`; there is no barrier at the end.
    pub fn worker_loop<F>(
        &self,
        tid: usize,
        n: usize,
        body: &F,
        record: bool,
    ) -> Result<ThreadStats, SchedError>
    where
        F: Fn(usize) -> u64 + Sync,
    {
        self.check_live()?;
        let p = self.thread_count();
        if tid >= p {
            return Err(SchedError::BadThreadId { tid, threads: p });
        }
        self.in_flight.fetch_add(1, Ordering::AcqRel);
        let me = &self.slots[tid];
        self.bind_transport(tid);

        let ctx = me.context.load(Ordering::Relaxed);
        let block = static_range(n, p, tid);
        me.start.store(block.start, Ordering::Relaxed);
        me.end.store(block.end, Ordering::Relaxed);
        me.processed.store(0, Ordering::Relaxed);
        me.active.store(true, Ordering::Release);

        let mut stats = ThreadStats::default();
        let mut failure = None;
        'work: loop {
            let ran = catch_unwind(AssertUnwindSafe(|| {
                self.run_chunk(tid, &mut stats, record, body)
            }));
            me.active.store(false, Ordering::Release);
            if ran.is_err() {
                self.abort.store(true, Ordering::Release);
                failure = Some(SchedError::BodyPanicked { tid });
                break;
            }
            if p == 1 {
                break;
            }
            let mut retried = false;
            let mut busy_rounds = 0u32;
            loop {
                self.service(tid);
                if self.abort.load(Ordering::Acquire) {
                    break 'work;
                }
                stats.steal_attempts += 1;
                match self.probe_victim(tid, ctx) {
                    Probe::Victim(victim) => {
                        retried = false;
                        busy_rounds = 0;
                        match self.request_share(tid, victim) {
                            DonationReply::Granted(_) => {
                                stats.steals_granted += 1;
                                me.processed.store(0, Ordering::Relaxed);
                                me.active.store(true, Ordering::Release);
                                continue 'work;
                            }
                            DonationReply::Refused => stats.steals_refused += 1,
                        }
                    }
                    // another thief is mid-exchange with every worth-while victim
                    Probe::GatesBusy => {
                        retried = false;
                        gate_backoff(busy_rounds);
                        busy_rounds += 1;
                    }
                    Probe::NoCandidates if retried => break 'work,
                    Probe::NoCandidates => {
                        retried = true;
                        backoff();
                    }
                }
            }
        }

        self.leave(tid);
        self.in_flight.fetch_sub(1, Ordering::AcqRel);
        match failure {
            Some(err) => Err(err),
            None => Ok(stats),
        }
    }

    /// Exit protocol: wait until no thief holds our gate, then move to the
    /// next context so late requests are refused without being delivered.
    fn leave(&self, tid: usize) {
        let me = &self.slots[tid];
        let mut spins = 0u32;
        loop {
            self.service(tid);
            if me.gate.try_acquire() {
                break;
            }
            spins += 1;
            if spins.is_multiple_of(SPINS_BEFORE_YIELD) {
                std::thread::yield_now();
            } else {
                std::hint::spin_loop();
            }
        }
        me.active.store(false, Ordering::Release);
        me.context.fetch_add(1, Ordering::AcqRel);
        me.gate.release();
        self.unbind_transport();
    }

    #[cfg(unix)]
    fn bind_transport(&self, tid: usize) {
        if self.mode() == TransportMode::AsyncInterrupt {
            use crate::transport::signal;
            self.slots[tid]
                .endpoint
                .store(signal::current_thread(), Ordering::Release);
            signal::bind(self, tid);
        }
    }

    #[cfg(not(unix))]
    fn bind_transport(&self, _tid: usize) {}

    #[cfg(unix)]
    fn unbind_transport(&self) {
        if self.mode() == TransportMode::AsyncInterrupt {
            crate::transport::signal::unbind();
        }
    }

    #[cfg(not(unix))]
    fn unbind_transport(&self) {}

    /// Runs one loop over `[0, n)` on a team of exactly `thread_count()` threads.
    pub fn parallel_for<F>(&self, team: &Team, n: usize, body: &F) -> Result<RunMetrics, SchedError>
    where
        F: Fn(usize) -> u64 + Sync,
    {
        idws_parallel_for(self, team, n, body)
    }
}

pub fn idws_parallel_for<F>(
    registry: &Registry,
    team: &Team,
    n: usize,
    body: &F,
) -> Result<RunMetrics, SchedError>
where
    F: Fn(usize) -> u64 + Sync,
{
    registry.check_live()?;
    if team.threads != registry.thread_count() {
        return Err(SchedError::TeamMismatch {
            team: team.threads,
            registry: registry.thread_count(),
        });
    }
    let result = team.run(|ctx| registry.worker_loop(ctx.tid, n, body, ctx.record_chunks));
    registry.clear_abort();
    result
}

#[cfg(unix)]
fn deliver_signal(victim: &ThreadSlot) -> bool {
    crate::transport::signal::deliver(victim.endpoint.load(Ordering::Acquire))
}

#[cfg(not(unix))]
fn deliver_signal(_victim: &ThreadSlot) -> bool {
    false
}

fn wait_spinning(victim: &ThreadSlot) {
    let mut spins = 0u32;
    while victim.reply.load(Ordering::Acquire) == REPLY_PENDING {
        spins += 1;
        if spins.is_multiple_of(SPINS_BEFORE_YIELD) {
            std::thread::yield_now();
        } else {
            std::hint::spin_loop();
        }
    }
}

enum Probe {
    Victim(usize),
    GatesBusy,
    NoCandidates,
}

/// Yields a few times, then sleeps with a growing, capped delay.
fn gate_backoff(round: u32) {
    if round < 4 {
        std::thread::yield_now();
    } else {
        let micros = (10u64 << (round - 4).min(6)).min(500);
        std::thread::sleep(Duration::from_micros(micros));
    }
}

fn backoff() {
    for _ in 0..SPINS_BEFORE_YIELD {
        std::hint::spin_loop();
    }
    std::thread::yield_now();
}
