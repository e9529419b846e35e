//! Victim choice for idle threads.

use alloc::vec::Vec;
use rand::Rng;

/// What a thief reads about one other thread before choosing a victim.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub id: usize,
    pub active: bool,
    pub context: u64,
    /// `estimate_remaining` of the thread's advertised state.
    pub remaining: usize,
}

/// Ranks active same-context threads other than `self_id` by remaining work,
/// largest first with ties going to the lowest id, and returns the first one
/// whose gate `try_gate` manages to take. At most one gate attempt is made
/// per candidate; the returned victim's gate is left held.
pub fn select_victim<G>(
    snapshot: &[Candidate],
    self_id: usize,
    ctx: u64,
    mut try_gate: G,
) -> Option<usize>
where
    G: FnMut(usize) -> bool,
{
    let mut ranked: Vec<&Candidate> = snapshot
        .iter()
        .filter(|c| c.id != self_id && c.active && c.context == ctx)
        .collect();
    ranked.sort_unstable_by(|a, b| b.remaining.cmp(&a.remaining).then(a.id.cmp(&b.id)));
    ranked.into_iter().map(|c| c.id).find(|&id| try_gate(id))
}

/// Uniform choice among the `p - 1` threads other than `self_id`.
pub fn pick_random_victim<R: Rng + ?Sized>(rng: &mut R, self_id: usize, p: usize) -> Option<usize> {
    if p < 2 {
        return None;
    }
    let pick = rng.gen_range(0..p - 1);
    Some(if pick >= self_id { pick + 1 } else { pick })
}
