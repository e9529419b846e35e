//! Shared per-thread scheduling state.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicU8, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex, MutexGuard};

use idws_core::{estimate_remaining, IterationRange};

use crate::error::SchedError;
use crate::transport::TransportMode;

pub(crate) const REPLY_PENDING: u8 = 0;
pub(crate) const REPLY_GRANTED: u8 = 1;
pub(crate) const REPLY_REFUSED: u8 = 2;

/// Try-only lock admitting one thief per victim.
#[derive(Default)]
pub struct Gate(AtomicBool);

impl Gate {
    pub fn try_acquire(&self) -> bool {
        self.0
            .compare_exchange(false, true, Ordering::Acquire, Ordering::Relaxed)
            .is_ok()
    }

    pub fn release(&self) {
        self.0.store(false, Ordering::Release);
    }

    pub fn is_held(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}

#[derive(Default)]
pub(crate) struct Rendezvous {
    lock: Mutex<()>,
    pub(crate) answered: Condvar,
}

impl Rendezvous {
    pub(crate) fn lock(&self) -> MutexGuard<'_, ()> {
        self.lock.lock().unwrap_or_else(|e| e.into_inner())
    }
}

/// Plain copy of a slot's scheduling fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SlotState {
    pub range: IterationRange,
    pub processed: usize,
    pub context: u64,
    pub active: bool,
}

impl SlotState {
    pub fn remaining(&self) -> usize {
        estimate_remaining(self.range.start, self.range.end, self.processed)
    }
}

/// One thread's globally visible loop state.
///
/// `start` and `end` are written only on the owner's control flow, either by
/// the loop driver or by the donation handler running on the owner's behalf.
/// `processed` is single-writer and read racily by thieves.
#[repr(align(128))]
pub struct ThreadSlot {
    pub(crate) start: AtomicUsize,
    pub(crate) end: AtomicUsize,
    pub(crate) processed: AtomicUsize,
    pub(crate) context: AtomicU64,
    pub(crate) active: AtomicBool,
    pub(crate) requester: AtomicUsize,
    pub(crate) reply: AtomicU8,
    pub(crate) pending: AtomicBool,
    pub(crate) gate: Gate,
    pub(crate) rendezvous: Rendezvous,
    pub(crate) endpoint: AtomicUsize,
    /// Victim whose rendezvous the owner is parked on, or `NOT_WAITING`.
    pub(crate) waiting_on: AtomicUsize,
}

pub(crate) const NOT_WAITING: usize = usize::MAX;

impl Default for ThreadSlot {
    fn default() -> Self {
        Self {
            start: AtomicUsize::new(0),
            end: AtomicUsize::new(0),
            processed: AtomicUsize::new(0),
            context: AtomicU64::new(0),
            active: AtomicBool::new(false),
            requester: AtomicUsize::new(0),
            reply: AtomicU8::new(REPLY_PENDING),
            pending: AtomicBool::new(false),
            gate: Gate::default(),
            rendezvous: Rendezvous::default(),
            endpoint: AtomicUsize::new(0),
            waiting_on: AtomicUsize::new(NOT_WAITING),
        }
    }
}

impl ThreadSlot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> SlotState {
        SlotState {
            range: IterationRange {
                start: self.start.load(Ordering::Relaxed),
                end: self.end.load(Ordering::Acquire),
            },
            processed: self.processed.load(Ordering::Acquire),
            context: self.context.load(Ordering::Acquire),
            active: self.active.load(Ordering::Acquire),
        }
    }

    /// Overwrites the scheduling fields. Only meaningful while no loop is
    /// running on the slot.
    pub fn set_state(&self, state: SlotState) {
        self.start.store(state.range.start, Ordering::Relaxed);
        self.end.store(state.range.end, Ordering::Relaxed);
        self.processed.store(state.processed, Ordering::Relaxed);
        self.context.store(state.context, Ordering::Relaxed);
        self.active.store(state.active, Ordering::Release);
    }

    pub fn gate(&self) -> &Gate {
        &self.gate
    }
}

const LIVE: u8 = 0;
const FINALIZED: u8 = 1;

/// Fixed team of thread slots plus the interrupt transport binding.
pub struct Registry {
    pub(crate) slots: Box<[ThreadSlot]>,
    mode: TransportMode,
    lifecycle: AtomicU8,
    pub(crate) in_flight: AtomicUsize,
    pub(crate) abort: AtomicBool,
    #[cfg(unix)]
    signal: Mutex<Option<crate::transport::signal::SignalLease>>,
}

impl Registry {
    /// One idle slot per thread, all in context 0. The asynchronous transport
    /// installs a process-wide signal handler, so at most one such registry
    /// can be live at a time.
    pub fn new(thread_count: usize, mode: TransportMode) -> Result<Self, SchedError> {
        if thread_count == 0 {
            return Err(idws_core::CoreError::ZeroThreads.into());
        }
        #[cfg(unix)]
        let signal = match mode {
            TransportMode::AsyncInterrupt => {
                Some(crate::transport::signal::SignalLease::acquire()?)
            }
            TransportMode::BoundaryPolling => None,
        };
        #[cfg(not(unix))]
        if mode == TransportMode::AsyncInterrupt {
            return Err(SchedError::Transport(
                "asynchronous interrupts need a unix target".into(),
            ));
        }
        Ok(Self {
            slots: (0..thread_count).map(|_| ThreadSlot::new()).collect(),
            mode,
            lifecycle: AtomicU8::new(LIVE),
            in_flight: AtomicUsize::new(0),
            abort: AtomicBool::new(false),
            #[cfg(unix)]
            signal: Mutex::new(signal),
        })
    }

    pub fn thread_count(&self) -> usize {
        self.slots.len()
    }

    pub fn mode(&self) -> TransportMode {
        self.mode
    }

    pub fn slot(&self, tid: usize) -> &ThreadSlot {
        &self.slots[tid]
    }

    pub fn slots(&self) -> &[ThreadSlot] {
        &self.slots
    }

    pub fn is_finalized(&self) -> bool {
        self.lifecycle.load(Ordering::Acquire) == FINALIZED
    }

    /// Releases the transport and restores the previous signal disposition.
    pub fn finalize(&self) -> Result<(), SchedError> {
        let busy = self.in_flight.load(Ordering::Acquire);
        if busy > 0 {
            return Err(SchedError::LoopInFlight(busy));
        }
        if self
            .lifecycle
            .compare_exchange(LIVE, FINALIZED, Ordering::AcqRel, Ordering::Acquire)
            .is_err()
        {
            return Err(SchedError::Finalized);
        }
        #[cfg(unix)]
        drop(self.signal.lock().unwrap_or_else(|e| e.into_inner()).take());
        Ok(())
    }

    pub(crate) fn check_live(&self) -> Result<(), SchedError> {
        if self.is_finalized() {
            Err(SchedError::Finalized)
        } else {
            Ok(())
        }
    }

    /// Clears the abort flag left behind by a loop whose body panicked.
    pub fn clear_abort(&self) {
        self.abort.store(false, Ordering::Release);
    }
}

pub fn registry_init(thread_count: usize, mode: TransportMode) -> Result<Registry, SchedError> {
    Registry::new(thread_count, mode)
}

pub fn registry_finalize(registry: &Registry) -> Result<(), SchedError> {
    registry.finalize()
}
