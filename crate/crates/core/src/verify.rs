//! Exactly-once execution oracle.

use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicUsize, Ordering};

const DIAGNOSTIC_LIMIT: usize = 10;
const WORD: usize = usize::BITS as usize;

/// Concurrent one-bit-per-index record of executed iterations.
pub struct ExactlyOnceBitmap {
    n: usize,
    seen: Vec<AtomicUsize>,
    repeated: Vec<AtomicUsize>,
    out_of_range: AtomicUsize,
}

impl ExactlyOnceBitmap {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(WORD);
        Self {
            n,
            seen: (0..words).map(|_| AtomicUsize::new(0)).collect(),
            repeated: (0..words).map(|_| AtomicUsize::new(0)).collect(),
            out_of_range: AtomicUsize::new(0),
        }
    }

    /// Records index `i`; returns false if it had already been recorded.
    pub fn mark(&self, i: usize) -> bool {
        if i >= self.n {
            self.out_of_range.fetch_add(1, Ordering::Relaxed);
            return false;
        }
        let bit = 1usize << (i % WORD);
        let prev = self.seen[i / WORD].fetch_or(bit, Ordering::Relaxed);
        if prev & bit != 0 {
            self.repeated[i / WORD].fetch_or(bit, Ordering::Relaxed);
            return false;
        }
        true
    }

    pub fn report(&self) -> VerifyReport {
        let mut report = VerifyReport {
            n: self.n,
            out_of_range: self.out_of_range.load(Ordering::Relaxed),
            ..VerifyReport::default()
        };
        for i in 0..self.n {
            let bit = 1usize << (i % WORD);
            if self.seen[i / WORD].load(Ordering::Relaxed) & bit == 0 {
                report.missing_count += 1;
                if report.missing.len() < DIAGNOSTIC_LIMIT {
                    report.missing.push(i);
                }
            } else if self.repeated[i / WORD].load(Ordering::Relaxed) & bit != 0 {
                report.duplicate_count += 1;
                if report.duplicates.len() < DIAGNOSTIC_LIMIT {
                    report.duplicates.push(i);
                }
            }
        }
        report
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub n: usize,
    /// First missing indices, at most ten.
    pub missing: Vec<usize>,
    pub missing_count: usize,
    /// First indices executed more than once, at most ten.
    pub duplicates: Vec<usize>,
    pub duplicate_count: usize,
    pub out_of_range: usize,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.missing_count == 0 && self.duplicate_count == 0 && self.out_of_range == 0
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok: {} indices exactly once", self.n);
        }
        let mut sep = "";
        if !self.missing.is_empty() {
            f.write_str("missing: ")?;
            write_list(f, &self.missing, self.missing_count)?;
            sep = "; ";
        }
        if !self.duplicates.is_empty() {
            write!(f, "{sep}duplicate: ")?;
            write_list(f, &self.duplicates, self.duplicate_count)?;
            sep = "; ";
        }
        if self.out_of_range > 0 {
            write!(f, "{sep}out of range: {}", self.out_of_range)?;
        }
        Ok(())
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, shown: &[usize], total: usize) -> fmt::Result {
    for (k, i) in shown.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write!(f, "{i}")?;
    }
    if total > shown.len() {
        write!(f, " (+{} more)", total - shown.len())?;
    }
    Ok(())
}

/// Checks per-thread index logs against `[0, n)`.
pub fn verify_exactly_once<L: AsRef<[usize]>>(n: usize, logs: &[L]) -> VerifyReport {
    let bitmap = ExactlyOnceBitmap::new(n);
    for log in logs {
        for &i in log.as_ref() {
            bitmap.mark(i);
        }
    }
    bitmap.report()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn complete() {
        let r = verify_exactly_once(10, &[vec![0, 2, 4, 6, 8], vec![1, 3, 5, 7, 9]]);
        assert!(r.ok());
    }

    #[test]
    fn missing_index() {
        let log: Vec<usize> = (0..10).filter(|&i| i != 7).collect();
        let r = verify_exactly_once(10, &[log]);
        assert!(!r.ok());
        assert_eq!(r.to_string(), "missing: 7");
    }

    #[test]
    fn duplicate_index() {
        let mut log: Vec<usize> = (0..10).collect();
        log.push(3);
        let r = verify_exactly_once(10, &[log]);
        assert!(!r.ok());
        assert_eq!(r.to_string(), "duplicate: 3");
    }

    #[test]
    fn capped_diagnostics() {
        let r = verify_exactly_once::<Vec<usize>>(30, &[]);
        assert_eq!(r.missing.len(), 10);
        assert_eq!(r.missing_count, 30);
        assert!(r.to_string().ends_with("(+20 more)"));
    }

    #[test]
    fn out_of_range() {
        let r = verify_exactly_once(2, &[vec![0, 1, 2]]);
        assert!(!r.ok());
        assert_eq!(r.out_of_range, 1);
    }
}
