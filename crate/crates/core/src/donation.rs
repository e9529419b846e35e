//! Donor-side split arithmetic.
//!
//! The victim keeps a margin of one iteration beyond what its advertised
//! progress says, then gives away half of the rest from the back of its
//! range. Only the victim ever runs this, on its own control flow.

use crate::range::IterationRange;

/// Outcome of a share request as seen by the thief.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DonationReply {
    /// Non-empty suffix of the victim's range, now owned by the thief.
    Granted(IterationRange),
    Refused,
}

impl DonationReply {
    pub fn is_granted(&self) -> bool {
        matches!(self, DonationReply::Granted(_))
    }
}

/// A successful split: the victim shrinks to `victim_end`, the thief takes
/// `thief_range == [victim_end, old_end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Donation {
    pub victim_end: usize,
    pub thief_range: IterationRange,
}

/// Iterations a slot still has to run, `end - start - processed`, clamped at zero.
#[inline]
pub fn estimate_remaining(start: usize, end: usize, processed: usize) -> usize {
    end.saturating_sub(start).saturating_sub(processed)
}

/// Iterations withheld from the donatable remainder.
pub const SAFETY_MARGIN: usize = 1;

pub fn split_donation(start: usize, end: usize, processed: usize) -> Option<Donation> {
    let remaining = estimate_remaining(start, end, processed);
    let chunk = remaining.checked_sub(SAFETY_MARGIN)? / 2;
    if chunk == 0 {
        return None;
    }
    let victim_end = end - chunk;
    Some(Donation {
        victim_end,
        thief_range: IterationRange {
            start: victim_end,
            end,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remaining_formula() {
        assert_eq!(estimate_remaining(0, 100, 50), 50);
        assert_eq!(estimate_remaining(0, 100, 100), 0);
        assert_eq!(estimate_remaining(10, 10, 0), 0);
        // a stale processed larger than the range must not wrap
        assert_eq!(estimate_remaining(10, 12, 7), 0);
        assert_eq!(estimate_remaining(12, 10, 0), 0);
    }

    #[test]
    fn half_split_with_margin() {
        let d = split_donation(0, 100, 50).unwrap();
        assert_eq!(d.victim_end, 76);
        assert_eq!(
            d.thief_range,
            IterationRange {
                start: 76,
                end: 100
            }
        );
    }

    #[test]
    fn nothing_left() {
        assert_eq!(split_donation(0, 10, 10), None);
    }

    #[test]
    fn two_remaining_is_not_enough() {
        assert_eq!(split_donation(0, 10, 8), None);
        assert_eq!(split_donation(0, 10, 9), None);
        let d = split_donation(0, 10, 7).unwrap();
        assert_eq!(d.thief_range, IterationRange { start: 9, end: 10 });
    }
}
