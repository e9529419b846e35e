//! Delivery of share requests to a victim thread.
//!
//! `BoundaryPolling` raises a per-slot flag that the victim checks at every
//! iteration boundary. `AsyncInterrupt` sends `SIGUSR1` to the victim's
//! pthread; the handler runs the same donation code on the victim's stack
//! and answers through an atomic, because nothing that can block is allowed
//! inside a signal handler.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum TransportMode {
    #[default]
    BoundaryPolling,
    AsyncInterrupt,
}

impl TransportMode {
    pub fn name(&self) -> &'static str {
        match self {
            TransportMode::BoundaryPolling => "poll",
            TransportMode::AsyncInterrupt => "async",
        }
    }

    /// Whether this build can deliver the mode at all.
    pub fn supported(&self) -> bool {
        match self {
            TransportMode::BoundaryPolling => true,
            TransportMode::AsyncInterrupt => cfg!(unix),
        }
    }
}

impl fmt::Display for TransportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransportMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "poll" => Ok(TransportMode::BoundaryPolling),
            "async" => Ok(TransportMode::AsyncInterrupt),
            other => Err(format!(
                "unknown transport `{other}` (expected poll or async)"
            )),
        }
    }
}

/// Whether a registry currently owns the share-signal handler, and the raw
/// disposition installed for that signal.
#[cfg(unix)]
pub use signal::{
    current_handler as share_signal_disposition, handler_installed as share_handler_installed,
};

#[cfg(unix)]
pub(crate) mod signal {
    use std::cell::Cell;
    use std::ptr;
    use std::sync::atomic::{AtomicBool, Ordering};
    use std::sync::Mutex;

    use crate::error::SchedError;
    use crate::registry::Registry;

    pub(crate) const SHARE_SIGNAL: libc::c_int = libc::SIGUSR1;

    static INSTALLED: AtomicBool = AtomicBool::new(false);
    static PREVIOUS: Mutex<Option<libc::sigaction>> = Mutex::new(None);

    thread_local! {
        static CURRENT: Cell<(*const Registry, usize)> = const { Cell::new((ptr::null(), 0)) };
    }

    extern "C" fn on_share_signal(_sig: libc::c_int) {
        let (registry, tid) = CURRENT.with(Cell::get);
        if registry.is_null() {
            return;
        }
        // SAFETY: the pointer is published by `bind` for the duration of a
        // loop and the exit protocol guarantees no request is in flight
        // once it is cleared.
        let registry = unsafe { &*registry };
        registry.answer_request(tid);
    }

    /// Process-wide handler lease; restores the previous disposition on drop.
    pub(crate) struct SignalLease(());

    impl SignalLease {
        pub(crate) fn acquire() -> Result<Self, SchedError> {
            if INSTALLED.swap(true, Ordering::AcqRel) {
                return Err(SchedError::AlreadyInitialized);
            }
            // SAFETY: plain sigaction(2) with a zeroed struct and an
            // async-signal-safe handler.
            unsafe {
                let mut action: libc::sigaction = std::mem::zeroed();
                action.sa_sigaction =
                    on_share_signal as extern "C" fn(libc::c_int) as libc::sighandler_t;
                action.sa_flags = libc::SA_RESTART;
                libc::sigemptyset(&mut action.sa_mask);
                let mut old: libc::sigaction = std::mem::zeroed();
                if libc::sigaction(SHARE_SIGNAL, &action, &mut old) != 0 {
                    INSTALLED.store(false, Ordering::Release);
                    return Err(SchedError::Transport(
                        std::io::Error::last_os_error().to_string(),
                    ));
                }
                *PREVIOUS.lock().unwrap_or_else(|e| e.into_inner()) = Some(old);
            }
            Ok(SignalLease(()))
        }
    }

    impl Drop for SignalLease {
        fn drop(&mut self) {
            if let Some(old) = PREVIOUS.lock().unwrap_or_else(|e| e.into_inner()).take() {
                // SAFETY: reinstates the disposition saved in `acquire`.
                unsafe {
                    libc::sigaction(SHARE_SIGNAL, &old, ptr::null_mut());
                }
            }
            INSTALLED.store(false, Ordering::Release);
        }
    }

    pub(crate) fn bind(registry: &Registry, tid: usize) {
        CURRENT.with(|c| c.set((registry as *const Registry, tid)));
    }

    pub(crate) fn unbind() {
        CURRENT.with(|c| c.set((ptr::null(), 0)));
    }

    pub(crate) fn current_thread() -> usize {
        // SAFETY: pthread_self has no preconditions.
        unsafe { libc::pthread_self() as usize }
    }

    /// Returns false if the target thread could not be signalled.
    pub(crate) fn deliver(thread: usize) -> bool {
        if thread == 0 {
            return false;
        }
        // SAFETY: `thread` was recorded by the target itself with
        // `current_thread` and the target is still inside its loop.
        unsafe { libc::pthread_kill(thread as libc::pthread_t, SHARE_SIGNAL) == 0 }
    }

    pub fn handler_installed() -> bool {
        INSTALLED.load(Ordering::Acquire)
    }

    /// Disposition currently registered for the share signal.
    pub fn current_handler() -> libc::sighandler_t {
        // SAFETY: query-only sigaction(2).
        unsafe {
            let mut old: libc::sigaction = std::mem::zeroed();
            libc::sigaction(SHARE_SIGNAL, ptr::null(), &mut old);
            old.sa_sigaction
        }
    }
}
